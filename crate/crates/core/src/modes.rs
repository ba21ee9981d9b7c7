//! Per-wavenumber eigenstructure of the symbol `Â(n)`: eigenvalues `β_m(n)`,
//! right eigenvectors (columns of `V`), left eigenvectors (rows of `Z`), and
//! the spectral projectors built from them.
//!
//! The hyperbolic eigenvalues come in two pairs, `{β₃, β₅}` (unstable) and
//! `{β₄, β₆}` (stable), whose members approach each other at large `|n|`.
//! Individual rank-one projectors `v_m z_m` are then huge, but the pair
//! projectors are well conditioned. Everything is assembled in double-double
//! arithmetic and only pair quantities are rounded. For each pair `{a, b}`
//! the table also stores `N = (Â − β_a)P`, so any analytic function of the
//! symbol restricted to the pair is `f(β_a)P + f[β_a, β_b]N` with a divided
//! difference the caller evaluates stably.

use nalgebra::Matrix6;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::cubic::{cauchy_lower_bound, solve_cubic, CubicRoots};
use crate::dd::{self, Cdd, Mat6dd, Vec6dd};
use crate::error::{Error, Result};
use crate::params::Params;

pub type Mat6 = Matrix6<Complex64>;

/// Largest entry modulus.
pub fn max_abs(m: &Mat6) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeClass {
    Central,
    Unstable,
    Stable,
}

/// Mode index (0-based) to class: `m = 1, 2` central, `3, 5` unstable, `4, 6` stable.
pub const CLASSIFICATION: [ModeClass; 6] = [
    ModeClass::Central,
    ModeClass::Central,
    ModeClass::Unstable,
    ModeClass::Stable,
    ModeClass::Unstable,
    ModeClass::Stable,
];

#[derive(Debug, Clone)]
pub struct ModeData {
    pub n: i64,
    pub roots: CubicRoots,
    pub beta: [Complex64; 6],
    /// Columns are the right eigenvectors `v_m(n)`.
    pub v: Mat6,
    /// Rows are the left eigenvectors `z_m(n)`, normalized so `Z V = I`.
    pub z: Mat6,
    pub classification: [ModeClass; 6],
    /// `Θ_m(n)`, `Λ_m(n)` and `Q(β_m, n)`; zero at `n = 0`, where the explicit
    /// basis is used instead.
    pub theta: [Complex64; 6],
    pub lambda: [Complex64; 6],
    pub q: [Complex64; 6],
    pub p_center: Mat6,
    pub p_unstable: Mat6,
    pub p_stable: Mat6,
    /// `(Â − β₃)P_u`.
    pub n_unstable: Mat6,
    /// `(Â − β₄)P_s`.
    pub n_stable: Mat6,
    pub(crate) v_dd: [Vec6dd; 6],
    pub(crate) z_dd: [Vec6dd; 6],
    pub(crate) pc_dd: Mat6dd,
    pub(crate) pu_dd: Mat6dd,
    pub(crate) ps_dd: Mat6dd,
}

impl ModeData {
    /// Right eigenvector `v_m` (0-based `m`).
    pub fn v_col(&self, m: usize) -> [Complex64; 6] {
        std::array::from_fn(|i| self.v[(i, m)])
    }

    /// Left eigenvector `z_m` (0-based `m`).
    pub fn z_row(&self, m: usize) -> [Complex64; 6] {
        std::array::from_fn(|j| self.z[(m, j)])
    }

    /// Index map `π` with `conj(v_m(n)) = v_{π(m)}(−n)` and
    /// `conj(β_m(n)) = β_{π(m)}(−n)`.
    ///
    /// `β₁ = +i√(−λ₁)` at every `n`, so conjugation swaps the central pair;
    /// a complex hyperbolic pair is swapped as well.
    pub fn conj_permutation(&self) -> [usize; 6] {
        if self.n == 0 {
            return [0, 1, 2, 3, 4, 5];
        }
        if self.roots.lambda2.im != 0.0 {
            [1, 0, 4, 5, 2, 3]
        } else {
            [1, 0, 2, 3, 4, 5]
        }
    }
}

/// The symbol `Â(n)` of the first-order system `∂_y Û = Â(n)Û`.
pub fn symbol_matrix(params: &Params, n: i64) -> Mat6 {
    let Params { b, c, d, omega: w, alpha, gamma, .. } = *params;
    let i = Complex64::i();
    let nf = n as f64;
    let n2 = nf * nf;
    let k = alpha * b * d * w * w;
    let mut a = Mat6::zeros();
    a[(0, 1)] = i * nf;
    a[(1, 2)] = 1.0.into();
    a[(2, 3)] = 1.0.into();
    a[(3, 0)] = -i * nf * (alpha * d * w * w - gamma) - i * nf * n2 * (k - 1.0);
    a[(3, 2)] = (gamma - n2 * (k - 2.0)).into();
    a[(3, 4)] = -i * nf * w * (gamma - alpha * d);
    a[(4, 5)] = 1.0.into();
    a[(5, 0)] = (-(w * c * alpha) - n2 * b * w * c * alpha).into();
    a[(5, 2)] = i * nf * b * w * c * alpha;
    a[(5, 4)] = (c * alpha + n2).into();
    a
}

struct Scalars {
    b: Cdd,
    w: Cdd,
    alpha: Cdd,
    gamma: Cdd,
    ca: Cdd,
    kappa: Cdd,
    d: Cdd,
}

fn scalars(params: &Params) -> Scalars {
    let one = dd::dd(1.0);
    let (a, b, c, d, w) =
        (dd::dd(params.a), dd::dd(params.b), dd::dd(params.c), dd::dd(params.d), dd::dd(params.omega));
    let alpha = one / (a * c);
    let gamma = one / c;
    Scalars {
        b: dd::cdd_re(b),
        w: dd::cdd_re(w),
        alpha: dd::cdd_re(alpha),
        gamma: dd::cdd_re(gamma),
        ca: dd::cdd_re(c * alpha),
        kappa: dd::cdd_re(alpha * b * d * w * w),
        d: dd::cdd_re(d),
    }
}

fn eigvecs(s: &Scalars, n: i64, beta: Cdd, m: usize) -> Result<(Vec6dd, Vec6dd, [Cdd; 3])> {
    let nf = n as f64;
    let inn = dd::i_times(nf);
    let n2 = dd::cdd_re(dd::dd(nf * nf));
    let one = dd::cdd_re(dd::dd(1.0));
    let two = dd::cdd_re(dd::dd(2.0));
    let bb = beta * beta;
    let theta = bb - (s.ca + n2);
    let tf = dd::to_c64(theta).norm();
    if tf < 1e-12 * (1.0 + nf * nf) {
        return Err(Error::SingularScaling { n, m: m + 1, theta: tf });
    }
    let lam = s.w * s.ca * (s.b * bb - (s.b * n2 + one));
    let q = lam / theta;
    let v = [inn, beta, bb, bb * beta, inn * q, inn * beta * q];
    let z6 = -(inn * s.w * (s.gamma - s.alpha * s.d)) / theta;
    let z5 = beta * z6;
    let z2 = bb - (s.gamma - n2 * (s.kappa - two)) - z6 * (inn * s.b * s.w * s.ca);
    let z1 = beta * z2 / inn;
    let z = [z1, z2, beta, one, z5, z6];
    let scale = dd::dot(&z, &v);
    if dd::to_c64(scale).norm() == 0.0 {
        return Err(Error::SingularScaling { n, m: m + 1, theta: tf });
    }
    let z = z.map(|x| x / scale);
    Ok((v, z, [theta, lam, q]))
}

fn zero_mode(params: &Params) -> ([Cdd; 6], [Vec6dd; 6], [Vec6dd; 6]) {
    let z0 = dd::czero();
    let re = |x: f64| dd::cdd_re(dd::dd(x));
    let one = dd::dd(1.0);
    let c = dd::dd(params.c);
    let a = dd::dd(params.a);
    let sc = dd::cdd_re((one / c).sqrt());
    let sa = dd::cdd_re((one / a).sqrt());
    let ic = dd::cdd_re(one / c);
    let hc = dd::cdd_re(c / dd::dd(2.0));
    let hw = re(params.omega / 2.0);
    let hsa = dd::cdd_re(a.sqrt() / dd::dd(2.0));
    let half = re(0.5);
    let beta = [z0, z0, sc, -sc, sa, -sa];
    let v = [
        [re(1.0), z0, z0, z0, re(params.omega), z0],
        [z0, re(1.0), z0, z0, z0, z0],
        [z0, re(1.0), sc, ic, z0, z0],
        [z0, re(1.0), -sc, ic, z0, z0],
        [z0, z0, z0, z0, re(1.0), sa],
        [z0, z0, z0, z0, re(1.0), -sa],
    ];
    let z = [
        [re(1.0), z0, z0, z0, z0, z0],
        [z0, re(1.0), z0, -dd::cdd_re(c), z0, z0],
        [z0, z0, hc * sc, hc, z0, z0],
        [z0, z0, -hc * sc, hc, z0, z0],
        [-hw, z0, z0, z0, half, hsa],
        [-hw, z0, z0, z0, half, -hsa],
    ];
    (beta, v, z)
}

/// Eigenstructure at wavenumber `n`.
pub fn mode_data(params: &Params, n: i64) -> Result<ModeData> {
    let roots = solve_cubic(params, n)?;
    let s = scalars(params);
    let zc = Complex64::new(0.0, 0.0);
    let mut theta = [zc; 6];
    let mut lambda = [zc; 6];
    let mut q = [zc; 6];
    let (beta_dd, v_dd, z_dd) = if n == 0 {
        zero_mode(params)
    } else {
        let [l1, l2, l3] = roots.exact();
        let b1 = Cdd::new(dd::dd(0.0), (-l1.re).sqrt());
        let b3 = dd::csqrt(l2);
        let b5 = dd::csqrt(l3);
        let beta = [b1, -b1, b3, -b3, b5, -b5];
        let mut v = [[dd::czero(); 6]; 6];
        let mut z = [[dd::czero(); 6]; 6];
        for m in 0..6 {
            let (vm, zm, tlq) = eigvecs(&s, n, beta[m], m)?;
            v[m] = vm;
            z[m] = zm;
            theta[m] = dd::to_c64(tlq[0]);
            lambda[m] = dd::to_c64(tlq[1]);
            q[m] = dd::to_c64(tlq[2]);
        }
        (beta, v, z)
    };
    let rank1 = |m: usize| dd::outer(&v_dd[m], &z_dd[m]);
    let pc_dd = dd::mat_add(&rank1(0), &rank1(1));
    let pu_dd = dd::mat_add(&rank1(2), &rank1(4));
    let ps_dd = dd::mat_add(&rank1(3), &rank1(5));
    let nu_dd = dd::mat_scale(&rank1(4), beta_dd[4] - beta_dd[2]);
    let ns_dd = dd::mat_scale(&rank1(5), beta_dd[5] - beta_dd[3]);
    Ok(ModeData {
        n,
        roots,
        beta: beta_dd.map(dd::to_c64),
        v: Mat6::from_fn(|i, m| dd::to_c64(v_dd[m][i])),
        z: Mat6::from_fn(|m, j| dd::to_c64(z_dd[m][j])),
        classification: CLASSIFICATION,
        theta,
        lambda,
        q,
        p_center: dd::round_mat(&pc_dd),
        p_unstable: dd::round_mat(&pu_dd),
        p_stable: dd::round_mat(&ps_dd),
        n_unstable: dd::round_mat(&nu_dd),
        n_stable: dd::round_mat(&ns_dd),
        v_dd,
        z_dd,
        pc_dd,
        pu_dd,
        ps_dd,
    })
}

/// Mode data for every `n ∈ [−nmax, nmax]`, built once and shared read-only.
#[derive(Debug, Clone)]
pub struct ModeTable {
    pub params: Params,
    pub nmax: usize,
    modes: Vec<ModeData>,
}

impl ModeTable {
    pub fn new(params: &Params) -> Result<Self> {
        let nmax = params.nmax as i64;
        let modes = (-nmax..=nmax).into_par_iter().map(|n| mode_data(params, n)).collect::<Result<Vec<_>>>()?;
        Ok(Self { params: params.clone(), nmax: params.nmax, modes })
    }

    pub fn get(&self, n: i64) -> &ModeData {
        let idx = n + self.nmax as i64;
        assert!((0..self.modes.len() as i64).contains(&idx), "wavenumber {n} outside the table range ±{}", self.nmax);
        &self.modes[idx as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = &ModeData> {
        self.modes.iter()
    }

    /// `σ(n) = −λ₁(n)/n²`.
    pub fn sigma(&self, n: i64) -> Result<f64> {
        if n == 0 {
            return Err(Error::ZeroMode);
        }
        Ok(-self.get(n).roots.lambda1 / (n * n) as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapReport {
    /// `ε = min Re β_m(n)` over `1 ≤ |n| ≤ nmax`, `m ∈ {3, 5}`.
    pub epsilon: f64,
    /// Bound-derived floor `min_n cauchy(n)/√2`.
    pub floor: f64,
    /// Smallest `Re β` over the unstable modes at every `|n| ≤ nmax`,
    /// including the mean mode. This is the decay rate of the Green operator.
    pub epsilon_all: f64,
    pub argmin_n: i64,
    pub argmin_m: usize,
}

/// Spectral gap of the hyperbolic modes, cross-checked against the floor
/// implied by the Cauchy root bound.
pub fn spectral_gap(table: &ModeTable) -> Result<GapReport> {
    let mut best = (f64::INFINITY, 0i64, 0usize);
    let mut floor = f64::INFINITY;
    for n in 1..=table.nmax as i64 {
        let md = table.get(n);
        for m in [2usize, 4] {
            let re = md.beta[m].re;
            if re < best.0 {
                best = (re, n, m + 1);
            }
        }
        floor = floor.min(cauchy_lower_bound(&table.params, n) / 2f64.sqrt());
    }
    let (epsilon, argmin_n, argmin_m) = best;
    let md0 = table.get(0);
    let epsilon_all = epsilon.min(md0.beta[2].re).min(md0.beta[4].re);
    if !(epsilon > 0.0) {
        return Err(Error::Gap(format!("epsilon = {epsilon} at n={argmin_n}, m={argmin_m}")));
    }
    if epsilon < floor {
        return Err(Error::Gap(format!("epsilon = {epsilon} is below the Cauchy floor {floor}")));
    }
    Ok(GapReport { epsilon, floor, epsilon_all, argmin_n, argmin_m })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_mode_values() {
        let p = Params::reference(4).unwrap();
        let md = mode_data(&p, 0).unwrap();
        assert_eq!(md.beta[2].re, 1.0);
        assert!((md.beta[4].re - 0.5f64.sqrt()).abs() < 1e-16);
        assert!((md.v[(5, 4)].re - 0.5f64.sqrt()).abs() < 1e-16);
        let zv = md.z * md.v;
        assert!(max_abs(&(zv - Mat6::identity())) < 1e-15);
    }

    #[test]
    fn first_mode_beta() {
        let p = Params::reference(4).unwrap();
        let md = mode_data(&p, 1).unwrap();
        assert!((md.beta[0] - Complex64::new(0.0, 3.9154759474226502f64.sqrt())).norm() < 1e-14);
        assert_eq!(md.beta[1], -md.beta[0]);
    }
}
