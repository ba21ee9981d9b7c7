//! The Green operator `S(y)` of the hyperbolic part and the bounded solver
//! `K₁` of `U' = ÂU + g` on the hyperbolic subspace.
//!
//! Every function of the symbol is applied pairwise: on the unstable pair
//! `{β₃, β₅}` and the stable pair `{β₄, β₆}`,
//! `f(Â)P = f(β_a)P + f[β_a, β_b]N` with `N = (Â − β_a)P`. The divided
//! differences below are written so they stay accurate when the two
//! eigenvalues nearly coincide.

use std::sync::OnceLock;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::modes::{spectral_gap, symbol_matrix, Mat6, ModeData, ModeTable};
use crate::specspace::{norm_h, SpectralState, C6, ZERO6};

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `eᶻ − 1` without cancellation for small `|z|`.
pub fn cexpm1(z: Complex64) -> Complex64 {
    let (x, y) = (z.re, z.im);
    let s = (0.5 * y).sin();
    Complex64::new(x.exp_m1() * y.cos() - 2.0 * s * s, x.exp() * y.sin())
}

/// `φ₁(z) = (eᶻ − 1)/z`, with `φ₁(0) = 1`.
pub fn phi1(z: Complex64) -> Complex64 {
    if z.norm() < 1e-5 {
        c(1.0) + z * (c(0.5) + z / 6.0)
    } else {
        cexpm1(z) / z
    }
}

fn mat_vec(m: &Mat6, u: &C6) -> C6 {
    std::array::from_fn(|i| (0..6).map(|j| m[(i, j)] * u[j]).sum())
}

/// One hyperbolic pair of a mode: eigenvalues, projector and nilpotent part.
#[derive(Debug, Clone)]
pub struct Pair {
    pub a: Complex64,
    pub b: Complex64,
    pub p: Mat6,
    pub n: Mat6,
}

impl Pair {
    pub fn unstable(md: &ModeData) -> Self {
        Self { a: md.beta[2], b: md.beta[4], p: md.p_unstable, n: md.n_unstable }
    }

    pub fn stable(md: &ModeData) -> Self {
        Self { a: md.beta[3], b: md.beta[5], p: md.p_stable, n: md.n_stable }
    }

    /// The same pair for the symbol `−Â`.
    pub fn negated(&self) -> Self {
        Self { a: -self.a, b: -self.b, p: self.p, n: -self.n }
    }

    /// `f(Â)P` from `f(β_a)` and `f[β_a, β_b]`.
    pub fn matrix(&self, fa: Complex64, fab: Complex64) -> Mat6 {
        self.p * fa + self.n * fab
    }

    pub fn exp(&self, y: f64) -> Mat6 {
        let ea = (self.a * y).exp();
        self.matrix(ea, ea * y * phi1((self.b - self.a) * y))
    }

    /// `(μ − Â)⁻¹P`.
    pub fn resolvent(&self, mu: Complex64) -> Mat6 {
        self.matrix(c(1.0) / (mu - self.a), c(1.0) / ((mu - self.a) * (mu - self.b)))
    }

    /// `−Â⁻¹P`, the stationary response to a constant forcing.
    pub fn stationary(&self) -> Mat6 {
        self.matrix(-c(1.0) / self.a, c(1.0) / (self.a * self.b))
    }
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
fn gauss_legendre() -> &'static [(f64, f64)] {
    static NODES: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    NODES.get_or_init(|| {
        const K: usize = 12;
        let mut out = Vec::with_capacity(K);
        for i in 0..K {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (K as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=K {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = K as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            out.push((0.5 * (1.0 - x), 1.0 / ((1.0 - x * x) * dp * dp)));
        }
        out
    })
}

/// `h∫₀¹ w(s) f(Â h s) ds P` for `f = exp`, by composite Gauss–Legendre
/// quadrature of both the value and the divided difference.
fn weighted_exp_integral(pair: &Pair, h: f64, w: impl Fn(f64) -> f64) -> Mat6 {
    let span = (pair.a.norm().max(pair.b.norm()) * h).ceil().max(1.0) as usize;
    let (mut fa, mut fab) = (c(0.0), c(0.0));
    for k in 0..span {
        for &(x, wt) in gauss_legendre() {
            let s = (k as f64 + x) / span as f64;
            let t = h * s;
            let ea = (pair.a * t).exp();
            let weight = wt * w(s) / span as f64;
            fa += ea * weight;
            fab += ea * t * phi1((pair.b - pair.a) * t) * weight;
        }
    }
    pair.matrix(fa * h, fab * h)
}

/// Per-step propagator of `u' = Âu + g` on one pair with `g` linear over the
/// step: `u₊ = E u + W₀ g + W₁ g₊`.
#[derive(Debug, Clone)]
struct Stepper {
    e: Mat6,
    w0: Mat6,
    w1: Mat6,
}

impl Stepper {
    fn new(pair: &Pair, h: f64) -> Self {
        Self {
            e: pair.exp(h),
            w0: weighted_exp_integral(pair, h, |s| s),
            w1: weighted_exp_integral(pair, h, |s| 1.0 - s),
        }
    }

    fn step(&self, u: &C6, g: &C6, g_next: &C6) -> C6 {
        let (a, b, d) = (mat_vec(&self.e, u), mat_vec(&self.w0, g), mat_vec(&self.w1, g_next));
        std::array::from_fn(|i| a[i] + b[i] + d[i])
    }
}

/// `S(y)U`: `+e^{Ây}π_s U` for `y > 0`, `−e^{Ây}π_u U` for `y < 0`.
pub fn green_s(state: &SpectralState, y: f64, table: &ModeTable) -> Result<SpectralState> {
    if y == 0.0 {
        return Err(Error::ZeroY);
    }
    Ok(state.map_modes(|n, u| {
        let md = table.get(n);
        if y > 0.0 {
            mat_vec(&Pair::stable(md).exp(y), u)
        } else {
            mat_vec(&Pair::unstable(md).exp(y), u).map(|z| -z)
        }
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `y → 0⁺`, limit `π_s`.
    Right,
    /// `y → 0⁻`, limit `−π_u`.
    Left,
}

/// One-sided limit of `S(y)` at `y = 0`.
pub fn green_limit(state: &SpectralState, side: Side, table: &ModeTable) -> SpectralState {
    state.map_modes(|n, u| {
        let md = table.get(n);
        match side {
            Side::Right => mat_vec(&md.p_stable, u),
            Side::Left => mat_vec(&md.p_unstable, u).map(|z| -z),
        }
    })
}

/// Uniform grid on `[−ymax, ymax]` with weight exponent `ϱ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YGrid {
    pub ymax: f64,
    pub h: f64,
    pub rho: f64,
    pub nodes: Vec<f64>,
}

impl YGrid {
    /// The step is adjusted down so `2·ymax` is a whole number of steps.
    pub fn new(ymax: f64, h: f64, rho: f64) -> Result<Self> {
        if !(ymax > 0.0 && h > 0.0 && rho >= 0.0) {
            return Err(Error::Domain(format!("invalid y-grid: ymax={ymax}, h={h}, rho={rho}")));
        }
        let steps = (2.0 * ymax / h).ceil() as usize;
        let h = 2.0 * ymax / steps as f64;
        let nodes = (0..=steps).map(|j| -ymax + j as f64 * h).collect();
        Ok(Self { ymax, h, rho, nodes })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Index of the node closest to `y`.
    pub fn index_of(&self, y: f64) -> usize {
        (((y + self.ymax) / self.h).round().max(0.0) as usize).min(self.len() - 1)
    }

    pub fn weight(&self, y: f64) -> f64 {
        (-self.rho * y.abs()).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct K1Config {
    /// Largest admissible tail bound `e^{−(ε−ϱ)·ymax}`.
    pub tail_tol: f64,
    /// Largest admissible relative residual of the discrete equation.
    pub residual_tol: f64,
}

impl Default for K1Config {
    fn default() -> Self {
        Self { tail_tol: 1e-8, residual_tol: 1e-4 }
    }
}

#[derive(Debug, Clone)]
pub struct K1Solution {
    pub u: Vec<SpectralState>,
    /// `e^{−(ε−ϱ)·ymax}` with `ε` the decay rate over all modes.
    pub tail_bound: f64,
    /// Half-width of the window around `y = 0` on which the truncated tails
    /// are below the configured tolerance.
    pub core_radius: f64,
    /// Weighted sup of `‖U' − ÂU − g‖_H` over interior nodes, relative to the
    /// weighted sup of `‖g‖_H`; `U'` by fourth-order central differences.
    pub residual: f64,
}

/// Relative size of the center part above which forcing is rejected.
pub const HYPERBOLIC_TOL: f64 = 1e-9;

fn center_ratio(g: &SpectralState, table: &ModeTable) -> f64 {
    let center = g.map_modes(|n, u| mat_vec(&table.get(n).p_center, u));
    norm_h(&center) / norm_h(g).max(f64::MIN_POSITIVE)
}

/// Bounded solution of `U' = ÂU + g` on the hyperbolic subspace: stable
/// coordinates integrate forward from `−ymax`, unstable ones backward from
/// `ymax`. Outside the window `g` is continued by its boundary value, whose
/// stationary response starts each sweep. Within a step `g` is linear and
/// the exponential is integrated exactly.
pub fn hyperbolic_solve_k1(
    g: impl Fn(usize, f64) -> SpectralState,
    table: &ModeTable,
    grid: &YGrid,
    cfg: &K1Config,
) -> Result<K1Solution> {
    let eps = spectral_gap(table)?.epsilon_all;
    if grid.rho >= eps {
        return Err(Error::Domain(format!("weight exponent {} must be below the gap {eps}", grid.rho)));
    }
    let tail_bound = (-(eps - grid.rho) * grid.ymax).exp();
    if tail_bound > cfg.tail_tol {
        return Err(Error::Window { tail: tail_bound, tol: cfg.tail_tol });
    }
    let core_radius = grid.ymax - cfg.tail_tol.recip().ln() / (eps - grid.rho);

    let len = grid.len();
    let gs: Vec<SpectralState> = (0..len).map(|j| g(j, grid.nodes[j])).collect();
    for (j, gj) in gs.iter().enumerate() {
        let ratio = center_ratio(gj, table);
        if ratio > HYPERBOLIC_TOL {
            return Err(Error::NotHyperbolic { y: grid.nodes[j], ratio });
        }
    }
    let nmax = gs[0].nmax();
    let mut out: Vec<Vec<C6>> = vec![vec![ZERO6; nmax + 1]; len];
    let h = grid.h;
    for n in 0..=nmax {
        let md = table.get(n as i64);
        let stable = Pair::stable(md);
        let fwd = Stepper::new(&stable, h);
        let mut u = mat_vec(&stable.stationary(), &gs[0].coeffs()[n]);
        out[0][n] = u;
        for j in 0..len - 1 {
            u = fwd.step(&u, &gs[j].coeffs()[n], &gs[j + 1].coeffs()[n]);
            out[j + 1][n] = u;
        }
        let unstable = Pair::unstable(md);
        let bwd = Stepper::new(&unstable.negated(), h);
        let mut u = mat_vec(&unstable.stationary(), &gs[len - 1].coeffs()[n]);
        add_into(&mut out[len - 1][n], &u);
        for j in (0..len - 1).rev() {
            let back = bwd.step(&u, &gs[j + 1].coeffs()[n], &gs[j].coeffs()[n]);
            let free = mat_vec(&bwd.e, &u);
            u = std::array::from_fn(|i| free[i] - (back[i] - free[i]));
            add_into(&mut out[j][n], &u);
        }
    }
    let u: Vec<SpectralState> =
        out.into_iter().map(|c| SpectralState::from_coeffs(c).expect("finite trajectory")).collect();
    let residual = discrete_residual(&u, &gs, table, grid);
    if residual > cfg.residual_tol {
        return Err(Error::Residual { value: residual, tol: cfg.residual_tol });
    }
    Ok(K1Solution { u, tail_bound, core_radius, residual })
}

fn add_into(acc: &mut C6, u: &C6) {
    for (a, b) in acc.iter_mut().zip(u) {
        *a += b;
    }
}

fn discrete_residual(u: &[SpectralState], g: &[SpectralState], table: &ModeTable, grid: &YGrid) -> f64 {
    let h = grid.h;
    let mut worst: f64 = 0.0;
    let mut gmax: f64 = 0.0;
    for (j, gj) in g.iter().enumerate() {
        gmax = gmax.max(grid.weight(grid.nodes[j]) * norm_h(gj));
    }
    for j in 2..u.len().saturating_sub(2) {
        let d = u[j - 2]
            .scale(1.0 / 12.0)
            .axpy(-8.0 / 12.0, &u[j - 1])
            .axpy(8.0 / 12.0, &u[j + 1])
            .axpy(-1.0 / 12.0, &u[j + 2])
            .scale(1.0 / h);
        let rhs = u[j].map_modes(|n, c| {
            let a = symbol_matrix(&table.params, n);
            std::array::from_fn(|i| (0..6).map(|k| a[(i, k)] * c[k]).sum())
        });
        let r = d.sub(&rhs).sub(&g[j]);
        worst = worst.max(grid.weight(grid.nodes[j]) * norm_h(&r));
    }
    worst / gmax.max(f64::MIN_POSITIVE)
}

/// Sup of `e^{−ϱ|y|}‖U(y)‖` over the grid.
pub fn weighted_sup(u: &[SpectralState], grid: &YGrid, norm: impl Fn(&SpectralState) -> f64) -> f64 {
    u.iter().zip(&grid.nodes).map(|(s, &y)| grid.weight(y) * norm(s)).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Params;

    #[test]
    fn phi1_is_continuous() {
        for z in [Complex64::new(1e-6, 2e-6), Complex64::new(-3e-5, 1e-5), Complex64::new(0.3, -0.4)] {
            let direct = ((z).exp() - 1.0) / z;
            assert!((phi1(z) - direct).norm() < 1e-9 * direct.norm(), "{z}");
        }
        assert_eq!(phi1(Complex64::new(0.0, 0.0)), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let s: f64 = gauss_legendre().iter().map(|&(x, w)| w * x.powi(7)).sum();
        assert!((s - 1.0 / 8.0).abs() < 1e-15);
        let one: f64 = gauss_legendre().iter().map(|&(_, w)| w).sum();
        assert!((one - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exp_matches_sharp_coordinates() {
        let p = Params::reference(8).unwrap();
        let t = ModeTable::new(&p).unwrap();
        let md = t.get(5);
        let y = 0.37;
        let direct = md.v_col(3).map(|x| x * (md.beta[3] * y).exp());
        let got = mat_vec(&Pair::stable(md).exp(y), &md.v_col(3));
        for k in 0..6 {
            assert!((got[k] - direct[k]).norm() < 1e-10 * (1.0 + direct[k].norm()));
        }
    }

    #[test]
    fn zero_y_is_rejected() {
        let p = Params::reference(2).unwrap();
        let t = ModeTable::new(&p).unwrap();
        assert_eq!(green_s(&SpectralState::zeros(2), 0.0, &t).unwrap_err(), Error::ZeroY);
    }
}
