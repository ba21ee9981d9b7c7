//! The conserved energy `E = E₀ + E₁` (valid for `b = d`) and the
//! coercivity constants of its quadratic part on the center space.
//!
//! On a central mode `n ≠ 0` write `P = U#₁ + U#₂` and `M = U#₁ − U#₂`.
//! Then `Û(n) = (inP, βM, β²P, β³M, inQP, inβQM)` with `β = β₁(n)` and
//! `E₀(Û(n)e^{inx}) = Γ₁|P|² + Γ₂|M|²`, while the `H` weight of the same mode
//! is `h_P|P|² + h_M|M|²`. The coercivity constant is the worst ratio of the
//! two over all modes.

use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::{grid_size, PhysGrid};
use crate::error::{Error, Result};
use crate::modes::ModeTable;
use crate::params::Params;
use crate::specspace::{ModeCoords, SpectralState};

fn require_energy(params: &Params) -> Result<()> {
    if !params.has_energy() {
        return Err(Error::Regime {
            n: None,
            condition: format!("the energy needs b = d, got b = {} and d = {}", params.b, params.d),
        });
    }
    Ok(())
}

/// Quadratic energy contribution of the single index `n`.
fn e0_mode(params: &Params, n: i64, u: &[Complex64; 6]) -> f64 {
    let Params { a, c, d, omega: w, .. } = *params;
    let n2 = (n * n) as f64;
    let inn = Complex64::new(0.0, n as f64);
    -(1.0 + c * n2) * u[0].norm_sqr() + (1.0 + 2.0 * c * n2) * u[1].norm_sqr() + c * u[2].norm_sqr()
        - (1.0 + a * n2) * u[4].norm_sqr()
        + a * u[5].norm_sqr()
        + 2.0 * w * (1.0 + d * n2) * (u[0] * u[4].conj()).re
        - 2.0 * d * w * (inn * u[1] * u[5].conj()).re
        - 2.0 * c * (u[3] * u[1].conj()).re
}

/// `E₀(U)` by Parseval over all `n ∈ [−N, N]`.
pub fn energy_e0(state: &SpectralState, params: &Params) -> Result<f64> {
    require_energy(params)?;
    let c = state.coeffs();
    let mut s = e0_mode(params, 0, &c[0]);
    for (n, u) in c.iter().enumerate().skip(1) {
        let t = e0_mode(params, n as i64, u);
        s += t;
        s += t;
    }
    Ok(s)
}

/// `E₁(U) = (2/(p+1))·mean(u₅(p·u₂^{p+1} − u₁^{p+1}))` on an alias-free grid.
pub fn energy_e1(state: &SpectralState, params: &Params) -> Result<f64> {
    require_energy(params)?;
    let p = params.p;
    let m = grid_size(state.nmax(), p as usize + 1)?;
    let g = PhysGrid::from_state(state, m);
    let [u1, u2, _, _, u5, _] = &g.values;
    let e = p as i32 + 1;
    let sum: f64 = (0..m).map(|j| u5[j] * (p as f64 * u2[j].powi(e) - u1[j].powi(e))).sum();
    Ok(2.0 / (p + 1) as f64 * sum / m as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeCoercivity {
    pub n: i64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub l1: f64,
    pub l2: f64,
    /// `ϑ₀, ϑ₁, ϑ₂, ϑ₃`.
    pub theta: [f64; 4],
    /// `H` weights of `|P|²` and `|M|²`.
    pub h_p: f64,
    pub h_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyReport {
    pub e0: f64,
    pub e1: f64,
    pub e: f64,
    pub modes: Vec<ModeCoercivity>,
    pub m0: f64,
    pub has_energy: bool,
    pub stability_regime: bool,
}

/// Coefficients `ϑ₀..ϑ₃` of `L₁ + L₂ = cβ⁸ + ϑ₃β⁶ + ϑ₂β⁴ + ϑ₁β² + ϑ₀` (for `b = d`).
pub fn theta_coefficients(params: &Params, n: i64) -> [f64; 4] {
    let Params { c, d, omega: w, alpha, .. } = *params;
    let n2 = (n * n) as f64;
    let w2 = w * w;
    let ca = c * alpha;
    let t3 = -2.0 * c * (ca + n2);
    let t2 = c * (ca + n2).powi(2)
        + (c * (w2 * alpha * d * d - 1.0) * n2 + w2 * ca * d * (1.0 - ca * d) + (w2 * ca * d - 1.0)) * n2;
    let br =
        c * (w2 * alpha * d * d - 1.0) * n2 * n2 + ((w2 * ca * d - 1.0) + ca * (w2 * d - c)) * n2 + ca * (w2 - 1.0);
    let t1 = -2.0 * n2 * br;
    let t0 = br * (ca + n2) * n2;
    [t0, t1, t2, t3]
}

/// Per-mode coercivity data for `1 ≤ n ≤ nmax`.
pub fn mode_coercivity(table: &ModeTable, n: i64) -> ModeCoercivity {
    let params = &table.params;
    let Params { a, c, d, omega: w, .. } = *params;
    let md = table.get(n);
    let n2 = (n * n) as f64;
    let b2 = md.roots.lambda1;
    let babs2 = -b2;
    let q = md.q[0].re;
    let theta = md.theta[0].re;
    let lam = md.lambda[0].re;
    let gamma1 = -n2 - c * n2 * n2 + c * b2 * b2 - n2 * (1.0 + a * n2) * q * q + 2.0 * w * n2 * (1.0 + d * n2) * q;
    let gamma2 = babs2 * (1.0 + n2 * (2.0 * c + a * q * q - 2.0 * d * w * q) - 2.0 * c * b2);
    let l1 = (c * b2 * b2 - n2 * (1.0 + c * n2)) * theta * theta;
    let l2 = 2.0 * w * n2 * (1.0 + d * n2) * lam * theta - n2 * lam * lam * (1.0 + a * n2);
    let s = 1.0 + n2;
    ModeCoercivity {
        n,
        gamma1,
        gamma2,
        l1,
        l2,
        theta: theta_coefficients(params, n),
        h_p: s * n2 + b2 * b2 + s * n2 * q * q,
        h_m: s * babs2 + babs2.powi(3) / s + n2 * babs2 * q * q,
    }
}

/// `Γ₁, Γ₂` over `1 ≤ n ≤ nmax` and the constant `M₀`. Requires the
/// stability regime and fails if any `Γ` is not positive.
pub fn coercivity_gammas(table: &ModeTable) -> Result<(Vec<ModeCoercivity>, f64)> {
    let params = &table.params;
    require_energy(params)?;
    if !params.stability_regime() {
        return Err(Error::Regime {
            n: None,
            condition: format!("coercivity needs a > d, got a = {}, d = {}", params.a, params.d),
        });
    }
    let mut m0: f64 = 1.0;
    let mut modes = Vec::with_capacity(table.nmax);
    for n in 1..=table.nmax as i64 {
        let mc = mode_coercivity(table, n);
        for (name, g) in [("gamma1", mc.gamma1), ("gamma2", mc.gamma2)] {
            if !(g > 0.0) {
                return Err(Error::Coercivity(format!("{name} = {g} is not positive at n={n}")));
            }
        }
        m0 = m0.max(mc.gamma1 / mc.h_p).max(mc.h_p / mc.gamma1).max(mc.gamma2 / mc.h_m).max(mc.h_m / mc.gamma2);
        modes.push(mc);
    }
    Ok((modes, m0))
}

/// `E₀` of a center-space state through the `Γ` form. The mean mode
/// contributes `|U#₂(0)|²`, which assumes `Û₁(0) = 0`.
pub fn energy_e0_gamma_form(state: &SpectralState, table: &ModeTable, modes: &[ModeCoercivity]) -> f64 {
    let sharp = ModeCoords::to_sharp(state, table);
    let mut s = sharp.get(0)[1].norm_sqr();
    for n in 1..=state.nmax() {
        let u = sharp.get(n as i64);
        let mc = &modes[n - 1];
        let t = mc.gamma1 * (u[0] + u[1]).norm_sqr() + mc.gamma2 * (u[0] - u[1]).norm_sqr();
        s += t;
        s += t;
    }
    s
}

/// Full energy report for a state.
pub fn energy_e(state: &SpectralState, table: &ModeTable) -> Result<EnergyReport> {
    let params = &table.params;
    let e0 = energy_e0(state, params)?;
    let e1 = energy_e1(state, params)?;
    let (modes, m0) = coercivity_gammas(table)?;
    Ok(EnergyReport {
        e0,
        e1,
        e: e0 + e1,
        modes,
        m0,
        has_energy: params.has_energy(),
        stability_regime: params.stability_regime(),
    })
}

/// `E(U) = E₀(U) + E₁(U)`.
pub fn total_energy(state: &SpectralState, params: &Params) -> Result<f64> {
    Ok(energy_e0(state, params)? + energy_e1(state, params)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_mode_of_second_component() {
        let p = Params::reference(4).unwrap();
        let mut s = SpectralState::zeros(4);
        assert_eq!(total_energy(&s, &p).unwrap(), 0.0);
        let mut c = s.coeffs()[0];
        c[1] = Complex64::new(1.0, 0.0);
        s.set(0, c);
        assert_eq!(energy_e0(&s, &p).unwrap(), 1.0);
    }

    #[test]
    fn unequal_b_d_is_rejected() {
        let p = crate::params::derive_params(2.0, 1.0, 1.0, 2.0, 1, 3.0, 4).unwrap();
        assert!(matches!(energy_e0(&SpectralState::zeros(4), &p), Err(Error::Regime { .. })));
    }
}
