//! The nonlinearity `G(U)` evaluated pseudospectrally, the linear vector field
//! `Â(n)Û(n)`, and the center group `S₀(y)`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::modes::{symbol_matrix, ModeTable};
use crate::params::Params;
use crate::specspace::{norm_h, norm_x, project, random_state, ModeCoords, Projection, SpectralState, C6, ZERO6};

/// Largest physical grid the transforms will allocate.
pub const MAX_GRID: usize = 1 << 20;

/// Smallest size `≥ min` whose only prime factors are 2, 3 and 5.
fn smooth_size(min: usize) -> usize {
    let mut m = min.max(1);
    loop {
        let mut r = m;
        for f in [2, 3, 5] {
            while r.is_multiple_of(f) {
                r /= f;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

type Plans = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

thread_local! {
    static PLANS: RefCell<HashMap<usize, Plans>> = RefCell::new(HashMap::new());
}

fn plans(m: usize) -> Plans {
    PLANS.with(|p| {
        p.borrow_mut()
            .entry(m)
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                (planner.plan_fft_forward(m), planner.plan_fft_inverse(m))
            })
            .clone()
    })
}

/// Real fields sampled at `x_j = 2πj/m`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysGrid {
    pub m: usize,
    pub values: [Vec<f64>; 6],
}

/// Grid size on which the modes `|n| ≤ nmax` of a product of `degree`
/// band-limited factors are alias-free. The mean of a product of
/// `degree + 1` factors is then exact as well.
pub fn grid_size(nmax: usize, degree: usize) -> Result<usize> {
    let m = smooth_size((degree + 1) * nmax + 1);
    if m > MAX_GRID {
        return Err(Error::Truncation(format!("grid of {m} points exceeds the maximum {MAX_GRID}")));
    }
    Ok(m)
}

/// Values on the grid of one complex spectrum stored for `n ≥ 0`.
pub fn to_physical(coeffs: &[Complex64], m: usize) -> Vec<f64> {
    let nmax = coeffs.len() - 1;
    assert!(2 * nmax < m, "grid of {m} points cannot hold {nmax} modes");
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    buf[0] = Complex64::new(coeffs[0].re, 0.0);
    for n in 1..=nmax {
        buf[n] = coeffs[n];
        buf[m - n] = coeffs[n].conj();
    }
    plans(m).1.process(&mut buf);
    buf.into_iter().map(|z| z.re).collect()
}

/// Fourier coefficients `0..=nmax` of real grid values.
pub fn to_spectral(values: &[f64], nmax: usize) -> Vec<Complex64> {
    let m = values.len();
    let mut buf: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    plans(m).0.process(&mut buf);
    let inv = 1.0 / m as f64;
    let mut out: Vec<Complex64> = buf[..=nmax].iter().map(|z| z * inv).collect();
    out[0].im = 0.0;
    out
}

impl PhysGrid {
    pub fn from_state(state: &SpectralState, m: usize) -> Self {
        let values = std::array::from_fn(|k| {
            let c: Vec<Complex64> = state.coeffs().iter().map(|u| u[k]).collect();
            to_physical(&c, m)
        });
        Self { m, values }
    }

    pub fn to_state(&self, nmax: usize) -> SpectralState {
        let comps: [Vec<Complex64>; 6] = std::array::from_fn(|k| to_spectral(&self.values[k], nmax));
        let coeffs = (0..=nmax).map(|n| std::array::from_fn(|k| comps[k][n])).collect();
        SpectralState::from_coeffs(coeffs).expect("transform of real data")
    }
}

fn ipow(x: f64, p: u32) -> f64 {
    x.powi(p as i32)
}

/// `G(U)`: only components 4 and 6 are nonzero. Products are formed on a grid
/// large enough that the truncated result is exact.
pub fn nonlinearity_g(state: &SpectralState, params: &Params) -> Result<SpectralState> {
    let nmax = state.nmax();
    let p = params.p;
    let m = grid_size(nmax, p as usize + 1)?;
    let g = PhysGrid::from_state(state, m);
    let [u1, u2, u3, _, u5, u6] = &g.values;
    let q = 1.0 / (p + 1) as f64;
    let mut flux = vec![0.0; m];
    let mut local = vec![0.0; m];
    let mut g6 = vec![0.0; m];
    for j in 0..m {
        let s = ipow(u1[j], p + 1) + ipow(u2[j], p + 1);
        flux[j] = params.gamma * u5[j] * ipow(u1[j], p) + params.alpha * params.d * params.omega * q * s;
        local[j] = params.gamma * (u6[j] * ipow(u2[j], p) + p as f64 * u5[j] * ipow(u2[j], p - 1) * u3[j]);
        g6[j] = params.alpha * params.c * q * s;
    }
    let flux = to_spectral(&flux, nmax);
    let local = to_spectral(&local, nmax);
    let g6 = to_spectral(&g6, nmax);
    let mut out = SpectralState::zeros(nmax);
    for n in 0..=nmax {
        let mut v = ZERO6;
        v[3] = Complex64::new(0.0, n as f64) * flux[n] + local[n];
        v[5] = g6[n];
        out.set(n, v);
    }
    Ok(out)
}

/// `Â(n)Û(n)` for every mode.
pub fn linear_field(state: &SpectralState, params: &Params) -> SpectralState {
    state.map_modes(|n, c| {
        let a = symbol_matrix(params, n);
        std::array::from_fn(|i| (0..6).map(|j| a[(i, j)] * c[j]).sum())
    })
}

/// The full vector field `ÂU + G(U)`.
pub fn vector_field(state: &SpectralState, params: &Params) -> Result<SpectralState> {
    Ok(linear_field(state, params).add(&nonlinearity_g(state, params)?))
}

/// Relative size of the hyperbolic part above which a state is not central.
pub const CENTER_TOL: f64 = 1e-9;

/// Reject states with a hyperbolic part above [`CENTER_TOL`] of their norm.
pub fn check_center(xi: &SpectralState, table: &ModeTable) -> Result<()> {
    let total = norm_h(xi);
    let hyp = norm_h(&project(xi, table, Projection::Hyperbolic));
    if hyp > CENTER_TOL * total {
        return Err(Error::NotCenter { ratio: hyp / total });
    }
    Ok(())
}

/// `S₀(y)ξ`: the central coordinates at mode `n` rotate by `e^{β_m(n)y}`.
pub fn center_group_s0(xi: &SpectralState, y: f64, table: &ModeTable) -> Result<SpectralState> {
    check_center(xi, table)?;
    Ok(center_flow(xi, y, table))
}

/// [`center_group_s0`] without the input check.
pub(crate) fn center_flow(xi: &SpectralState, y: f64, table: &ModeTable) -> SpectralState {
    let mut sharp = ModeCoords::to_sharp(xi, table);
    for n in 0..=xi.nmax() {
        let beta = table.get(n as i64).beta;
        let c = sharp.get(n as i64);
        let mut out: C6 = ZERO6;
        for m in 0..2 {
            out[m] = c[m] * (beta[m] * y).exp();
        }
        sharp.set(n, out);
    }
    sharp.from_sharp(table)
}

/// Largest observed ratio `‖G(U+V) − G(U)‖_X / ((‖U‖_H^p + ‖V‖_H^p)‖V‖_H)`
/// over `pairs` random pairs scaled to `H` norms at most `amp`.
pub fn gain_constant<R: Rng>(params: &Params, nmax: usize, pairs: usize, amp: f64, rng: &mut R) -> Result<f64> {
    let p = params.p as i32;
    let mut k: f64 = 0.0;
    for _ in 0..pairs {
        let u = random_state(nmax, rng);
        let v = random_state(nmax, rng);
        let u = u.scale(amp * rng.random_range(0.0..1.0) / norm_h(&u));
        let v = v.scale(amp * rng.random_range(0.1..1.0) / norm_h(&v));
        let diff = nonlinearity_g(&u.add(&v), params)?.sub(&nonlinearity_g(&u, params)?);
        let (nu, nv) = (norm_h(&u), norm_h(&v));
        k = k.max(norm_x(&diff) / ((nu.powi(p) + nv.powi(p)) * nv));
    }
    Ok(k)
}
