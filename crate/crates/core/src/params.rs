//! Model parameters, derived constants, the per-mode cubic coefficients and
//! the regime checks every other module relies on.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Validated parameter set. Construct with [`derive_params`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub p: u32,
    pub omega: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub nmax: usize,
    pub omega0_sq: f64,
    pub omega1_sq: f64,
    pub omega2_sq: f64,
}

/// Parameter file layout. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub p: u32,
    pub omega: f64,
    pub nmax: usize,
}

impl ParamsFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Domain(format!("parameter file: {e}")))
    }

    pub fn derive(&self) -> Result<Params> {
        derive_params(self.a, self.b, self.c, self.d, self.p, self.omega, self.nmax)
    }
}

/// Coefficients of `p_n(λ) = λ³ + a₂λ² + a₁λ + a₀` and the Cardano
/// intermediates `Q`, `R` and the discriminant `D = Q³ + R²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub q: f64,
    pub r: f64,
    pub disc: f64,
}

impl Params {
    /// The reference parameter set `a=2, b=c=d=1, p=1, ω=3`.
    pub fn reference(nmax: usize) -> Result<Self> {
        derive_params(2.0, 1.0, 1.0, 1.0, 1, 3.0, nmax)
    }

    /// `αbdω²`, the combination that governs the large-n behaviour.
    pub fn kappa(&self) -> f64 {
        self.alpha * self.b * self.d * self.omega * self.omega
    }

    /// Conserved-energy regime `b = d`.
    pub fn has_energy(&self) -> bool {
        self.b == self.d
    }

    /// Stability regime `b = d` and `a > d`.
    pub fn stability_regime(&self) -> bool {
        self.has_energy() && self.a > self.d
    }

    /// Same physical parameters with a different truncation.
    pub fn with_nmax(&self, nmax: usize) -> Result<Self> {
        derive_params(self.a, self.b, self.c, self.d, self.p, self.omega, nmax)
    }
}

fn thresholds(a: f64, b: f64, c: f64, d: f64) -> (f64, f64, f64) {
    let w0 = 1f64.max(c / d).max(a * c / (b * d)).max(a / b);
    let w1 = 2.0 * (a + c) / (b * b * d * d);
    let w2 = 2.0 * (a + c) / (b + d);
    (w0, w1, w2)
}

/// Validate the inputs and derive `α = 1/(ac)`, `γ = 1/c` and the threshold
/// speeds, then check the sign conditions on every truncated mode.
pub fn derive_params(a: f64, b: f64, c: f64, d: f64, p: u32, omega: f64, nmax: usize) -> Result<Params> {
    for (name, v) in [("a", a), ("b", b), ("c", c), ("d", d)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Domain(format!("{name} must be positive and finite, got {v}")));
        }
    }
    if p == 0 {
        return Err(Error::Domain("p must be a positive integer".into()));
    }
    if !omega.is_finite() {
        return Err(Error::Domain(format!("omega must be finite, got {omega}")));
    }
    if nmax == 0 {
        return Err(Error::Domain("nmax must be at least 1".into()));
    }
    let (omega0_sq, omega1_sq, omega2_sq) = thresholds(a, b, c, d);
    let w2 = omega * omega;
    for (name, t) in [("omega_0^2", omega0_sq), ("omega_1^2", omega1_sq), ("omega_2^2", omega2_sq)] {
        if w2 < t {
            return Err(Error::Regime { n: None, condition: format!("omega^2 = {w2} < {name} = {t}") });
        }
    }
    let params =
        Params { a, b, c, d, p, omega, alpha: 1.0 / (a * c), gamma: 1.0 / c, nmax, omega0_sq, omega1_sq, omega2_sq };
    for n in 1..=nmax as i64 {
        let k = polynomial_coefficients(&params, n);
        if !(k.a0 > 0.0) {
            return Err(Error::Regime { n: Some(n), condition: format!("a0 = {} is not positive", k.a0) });
        }
        if !(k.a1 < 0.0) {
            return Err(Error::Regime { n: Some(n), condition: format!("a1 = {} is not negative", k.a1) });
        }
    }
    Ok(params)
}

/// Coefficients of the characteristic cubic at wavenumber `n`.
pub fn polynomial_coefficients(params: &Params, n: i64) -> Coefficients {
    let Params { b, c, d, omega, alpha, gamma, .. } = *params;
    let n2 = (n * n) as f64;
    let w2 = omega * omega;
    let k = alpha * b * d * w2;
    let a2 = (k - 3.0) * n2 - (c * alpha + gamma);
    let a1 = (3.0 - 2.0 * k) * n2 * n2 + (2.0 * (c * alpha + gamma) - alpha * w2 * (b + d)) * n2 + alpha;
    let a0 = n2
        * ((k - 1.0) * n2 * n2 + (alpha * (d * w2 - c) + gamma * (b * c * alpha * w2 - 1.0)) * n2 + alpha * (w2 - 1.0));
    let q = (3.0 * a1 - a2 * a2) / 9.0;
    let r = (9.0 * a1 * a2 - 27.0 * a0 - 2.0 * a2 * a2 * a2) / 54.0;
    Coefficients { a0, a1, a2, q, r, disc: q * q * q + r * r }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeRow {
    pub n: i64,
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub disc: f64,
    pub a0_positive: bool,
    pub a1_negative: bool,
    pub a1_plus_a2_negative: bool,
    pub disc_sign: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub omega0_sq: f64,
    pub omega1_sq: f64,
    pub omega2_sq: f64,
    pub rows: Vec<RegimeRow>,
    pub valid: bool,
    pub stability_regime: bool,
}

/// Per-mode coefficient table for `0 ≤ n ≤ nmax` with sign flags.
pub fn regime_report(params: &Params) -> RegimeReport {
    let rows: Vec<RegimeRow> = (0..=params.nmax as i64)
        .map(|n| {
            let k = polynomial_coefficients(params, n);
            RegimeRow {
                n,
                a0: k.a0,
                a1: k.a1,
                a2: k.a2,
                disc: k.disc,
                a0_positive: k.a0 > 0.0,
                a1_negative: k.a1 < 0.0,
                a1_plus_a2_negative: k.a1 + k.a2 < 0.0,
                disc_sign: if k.disc > 0.0 {
                    1
                } else if k.disc < 0.0 {
                    -1
                } else {
                    0
                },
            }
        })
        .collect();
    let valid = rows.iter().filter(|r| r.n >= 1).all(|r| r.a0_positive && r.a1_negative && r.a1_plus_a2_negative);
    RegimeReport {
        omega0_sq: params.omega0_sq,
        omega1_sq: params.omega1_sq,
        omega2_sq: params.omega2_sq,
        rows,
        valid,
        stability_regime: params.stability_regime(),
    }
}
