//! Roots of the per-mode cubic `p_n(λ) = λ³ + a₂λ² + a₁λ + a₀`.
//!
//! Cardano's formulas (trigonometric form when `D < 0`) give the audit parts
//! `S`, `T`, `D` and seed values. The negative root is then polished by
//! Newton's method in double-double arithmetic and the remaining pair is read
//! off the deflated quadratic, which keeps the nearly coincident hyperbolic
//! pair accurate at large `|n|`.

use num_complex::Complex64;
use serde::Serialize;

use crate::dd::{self, Cdd, Dd};
use crate::error::{Error, Result};
use crate::params::{polynomial_coefficients, Coefficients, Params};

/// Relative separation below which two roots are treated as coincident.
pub const DEGENERACY_TOL: f64 = 1e-12;
/// Relative separation below which a root pair is reported as clustered.
pub const CLUSTER_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CardanoCase {
    /// `D < 0`: three real roots, trigonometric form.
    ThreeReal,
    /// `D ≥ 0`: one real root and a conjugate pair, real cube roots.
    OneReal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CardanoParts {
    pub s: Complex64,
    pub t: Complex64,
    pub disc: f64,
    pub case: CardanoCase,
}

#[derive(Debug, Clone, Serialize)]
pub struct CubicRoots {
    pub n: i64,
    pub lambda1: f64,
    pub lambda2: Complex64,
    pub lambda3: Complex64,
    /// The pair `λ₂, λ₃` is clustered (relative separation below [`CLUSTER_TOL`]).
    pub degenerate: bool,
    /// Smallest relative separation between two roots.
    pub separation: f64,
    pub cardano_parts: CardanoParts,
    #[serde(skip)]
    pub(crate) exact: [Cdd; 3],
}

impl CubicRoots {
    pub fn all(&self) -> [Complex64; 3] {
        [Complex64::new(self.lambda1, 0.0), self.lambda2, self.lambda3]
    }

    /// Roots in double-double precision, same order as [`CubicRoots::all`].
    pub fn exact(&self) -> [Cdd; 3] {
        self.exact
    }
}

/// Coefficients `(a₀, a₁, a₂)` evaluated in double-double arithmetic.
pub fn coefficients_dd(params: &Params, n: i64) -> [Dd; 3] {
    let one = dd::dd(1.0);
    let (b, c, d, w) = (dd::dd(params.b), dd::dd(params.c), dd::dd(params.d), dd::dd(params.omega));
    let alpha = one / (dd::dd(params.a) * c);
    let gamma = one / c;
    let n2 = dd::dd((n * n) as f64);
    let w2 = w * w;
    let k = alpha * b * d * w2;
    let ca_g = c * alpha + gamma;
    let a2 = (k - dd::dd(3.0)) * n2 - ca_g;
    let a1 = (dd::dd(3.0) - dd::dd(2.0) * k) * n2 * n2 + (dd::dd(2.0) * ca_g - alpha * w2 * (b + d)) * n2 + alpha;
    let a0 = n2
        * ((k - one) * n2 * n2 + (alpha * (d * w2 - c) + gamma * (b * c * alpha * w2 - one)) * n2 + alpha * (w2 - one));
    [a0, a1, a2]
}

/// Cardano's roots in double precision together with `S`, `T`, `D`.
pub fn cardano(k: &Coefficients) -> ([Complex64; 3], CardanoParts) {
    let shift = k.a2 / 3.0;
    if k.disc < 0.0 {
        let m = (-k.q).sqrt();
        let theta = (k.r / (m * m * m)).clamp(-1.0, 1.0).acos();
        let s = Complex64::from_polar(m, theta / 3.0);
        let roots = [0.0, 1.0, 2.0].map(|j| {
            let ang = (theta + 2.0 * std::f64::consts::PI * j) / 3.0;
            Complex64::new(2.0 * m * ang.cos() - shift, 0.0)
        });
        (roots, CardanoParts { s, t: s.conj(), disc: k.disc, case: CardanoCase::ThreeReal })
    } else {
        let sd = k.disc.sqrt();
        let s = (k.r + sd).cbrt();
        let t = (k.r - sd).cbrt();
        let re = -(s + t) / 2.0 - shift;
        let im = 3f64.sqrt() / 2.0 * (s - t);
        let roots = [Complex64::new(s + t - shift, 0.0), Complex64::new(re, im), Complex64::new(re, -im)];
        let parts = CardanoParts {
            s: Complex64::new(s, 0.0),
            t: Complex64::new(t, 0.0),
            disc: k.disc,
            case: CardanoCase::OneReal,
        };
        (roots, parts)
    }
}

fn rel_sep(x: Complex64, y: Complex64) -> f64 {
    (x - y).norm() / 1f64.max(x.norm()).max(y.norm())
}

/// Solve the cubic at wavenumber `n`.
///
/// For `n ≠ 0`, `λ₁` is the negative real root and `λ₂, λ₃` satisfy
/// `Im λ₂ ≥ 0` for a complex pair and `λ₂ ≤ λ₃` for a real pair. At `n = 0`
/// the roots are `0`, `γ`, `cα` in that order, matching the explicit
/// eigenvector families `v₃(0)`, `v₅(0)`.
pub fn solve_cubic(params: &Params, n: i64) -> Result<CubicRoots> {
    let k = polynomial_coefficients(params, n);
    let (seeds, cardano_parts) = cardano(&k);
    if n == 0 {
        let gamma = dd::dd(1.0) / dd::dd(params.c);
        let ca = dd::dd(1.0) / dd::dd(params.a);
        let exact = [dd::cdd_re(dd::dd(0.0)), dd::cdd_re(gamma), dd::cdd_re(ca)];
        let l2 = Complex64::new(dd::to_f64(gamma), 0.0);
        let l3 = Complex64::new(dd::to_f64(ca), 0.0);
        let separation = rel_sep(l2, l3).min(rel_sep(l2, 0.0.into())).min(rel_sep(l3, 0.0.into()));
        return Ok(CubicRoots {
            n,
            lambda1: 0.0,
            lambda2: l2,
            lambda3: l3,
            degenerate: separation < CLUSTER_TOL,
            separation,
            cardano_parts,
            exact,
        });
    }

    let [a0, a1, a2] = coefficients_dd(params, n);
    let seed = seeds.iter().filter(|z| z.im == 0.0).map(|z| z.re).fold(f64::INFINITY, f64::min);
    if !(seed < 0.0) {
        return Err(Error::Classification { n, condition: "no negative real root".into() });
    }
    let mut l1 = dd::dd(seed);
    for _ in 0..8 {
        let p = ((l1 + a2) * l1 + a1) * l1 + a0;
        let dp = (dd::dd(3.0) * l1 + dd::dd(2.0) * a2) * l1 + a1;
        let step = p / dp;
        l1 -= step;
        if dd::to_f64(step).abs() <= 1e-31 * dd::to_f64(l1).abs() {
            break;
        }
    }
    if !(dd::to_f64(l1) < 0.0) {
        return Err(Error::Classification { n, condition: "polished real root is not negative".into() });
    }

    // λ₂ + λ₃ = s, λ₂λ₃ = q.
    let s = -a2 - l1;
    let q = -a0 / l1;
    let disc = s * s - dd::dd(4.0) * q;
    let half = dd::dd(0.5);
    let zero = dd::dd(0.0);
    let (l2, l3) = if disc >= zero {
        let r = disc.sqrt();
        let (x, y) = if s >= zero {
            let big = (s + r) * half;
            (q / big, big)
        } else {
            let big = (s - r) * half;
            (big, q / big)
        };
        let (x, y) = if x <= y { (x, y) } else { (y, x) };
        (dd::cdd_re(x), dd::cdd_re(y))
    } else {
        let im = (-disc).sqrt() * half;
        (Cdd::new(s * half, im), Cdd::new(s * half, -im))
    };
    let exact = [dd::cdd_re(l1), l2, l3];
    let [r1, r2, r3] = exact.map(dd::to_c64);
    if !(r2.re > 0.0 && r3.re > 0.0) {
        return Err(Error::Classification {
            n,
            condition: format!("hyperbolic roots need positive real part, got {r2} and {r3}"),
        });
    }
    // Relative separation of the pair, taken in double-double so it stays
    // meaningful below double-precision resolution.
    let pair_sep = dd::to_f64(dd::abs(l2 - l3)) / 1f64.max(r2.norm()).max(r3.norm());
    let separation = pair_sep.min(rel_sep(r1, r2)).min(rel_sep(r1, r3));
    if separation < DEGENERACY_TOL {
        return Err(Error::Degenerate { n, separation });
    }
    Ok(CubicRoots {
        n,
        lambda1: r1.re,
        lambda2: r2,
        lambda3: r3,
        degenerate: separation < CLUSTER_TOL,
        separation,
        cardano_parts,
        exact,
    })
}

/// Lower bound `|a₀| / (1 + 2|a₀| + |a₁| + |a₂|)` on every root modulus.
pub fn cauchy_lower_bound(params: &Params, n: i64) -> f64 {
    let k = polynomial_coefficients(params, n);
    k.a0.abs() / (1.0 + 2.0 * k.a0.abs() + k.a1.abs() + k.a2.abs())
}
