//! The center-manifold map `φ_δ`, the restriction `R = (u₁, u₂)` and its
//! inverse on the center space, the reduced nonlocal wave equation for the
//! bottom velocity and its `y` integrator.
//!
//! `φ_δ(ξ) = φᴷ(χ(‖ξ‖_H/δ)ξ)` where `φᴷ` is the `K`-level series of
//! [`crate::series`] and `χ` a `C²` bump equal to 1 on `[0, 1/2]` and 0 on
//! `[1, ∞)`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{center_flow, linear_field, nonlinearity_g, vector_field};
use crate::energy::{coercivity_gammas, energy_e0, energy_e1};
use crate::error::{Error, Result};
use crate::hypgreen::{hyperbolic_solve_k1, K1Config, YGrid};
use crate::modes::{spectral_gap, ModeTable};
use crate::series::{Scheme, Series};
use crate::specspace::{norm_h, project, ModeCoords, Projection, SpectralState, ZERO6};

fn cz() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn inn(n: i64) -> Complex64 {
    Complex64::new(0.0, n as f64)
}

/// The pair `(ŵ₁(n), ŵ₂(n))` for `0 ≤ n ≤ nmax`; negative wavenumbers are
/// the conjugates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BottomVelocity {
    nmax: usize,
    coeffs: Vec<[Complex64; 2]>,
}

impl BottomVelocity {
    pub fn zeros(nmax: usize) -> Self {
        Self { nmax, coeffs: vec![[cz(); 2]; nmax + 1] }
    }

    pub fn from_coeffs(coeffs: Vec<[Complex64; 2]>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidState("bottom velocity needs at least the mean mode".into()));
        }
        if coeffs.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite bottom velocity".into()));
        }
        let mut w = Self { nmax: coeffs.len() - 1, coeffs };
        w.coeffs[0] = w.coeffs[0].map(|z| Complex64::new(z.re, 0.0));
        Ok(w)
    }

    pub fn nmax(&self) -> usize {
        self.nmax
    }

    pub fn coeffs(&self) -> &[[Complex64; 2]] {
        &self.coeffs
    }

    pub fn get(&self, n: i64) -> [Complex64; 2] {
        let c = self.coeffs[n.unsigned_abs() as usize];
        if n < 0 {
            c.map(|z| z.conj())
        } else {
            c
        }
    }

    pub fn set(&mut self, n: usize, mut v: [Complex64; 2]) {
        if n == 0 {
            v = v.map(|z| Complex64::new(z.re, 0.0));
        }
        self.coeffs[n] = v;
    }

    /// `‖w‖² = Σ_n (1+n²)(|ŵ₁|² + |ŵ₂|²)`.
    pub fn norm(&self) -> f64 {
        let sq = |n: usize| (1.0 + (n * n) as f64) * (self.coeffs[n][0].norm_sqr() + self.coeffs[n][1].norm_sqr());
        let mut s = sq(0);
        for n in 1..=self.nmax {
            let t = sq(n);
            s += t;
            s += t;
        }
        s.sqrt()
    }

    fn zip(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert_eq!(self.nmax, other.nmax, "bottom velocities of different truncation");
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| [f(a[0], b[0]), f(a[1], b[1])]).collect();
        Self { nmax: self.nmax, coeffs }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { nmax: self.nmax, coeffs: self.coeffs.iter().map(|c| c.map(|z| z * s)).collect() }
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        self.zip(other, |a, b| a + b * s)
    }

    /// `amp·(cos x, sin 2x)/‖(cos x, sin 2x)‖`.
    pub fn profile(nmax: usize, amp: f64) -> Result<Self> {
        if nmax < 2 {
            return Err(Error::Domain(format!("the initial profile needs nmax >= 2, got {nmax}")));
        }
        let mut w = Self::zeros(nmax);
        w.coeffs[1][0] = Complex64::new(0.5, 0.0);
        w.coeffs[2][1] = Complex64::new(0.0, -0.5);
        let norm = w.norm();
        Ok(w.scale(amp / norm))
    }

    /// Random data with `ŵ₁(0) = 0` and per-mode weight decaying like `(1+n²)⁻¹`.
    pub fn random<R: Rng>(nmax: usize, rng: &mut R) -> Self {
        let mut w = Self::zeros(nmax);
        for n in 0..=nmax {
            let s = 1.0 / (1.0 + (n * n) as f64);
            let mut draw = || {
                let im = if n == 0 { 0.0 } else { rng.random_range(-1.0..1.0) };
                Complex64::new(rng.random_range(-1.0..1.0), im) * s
            };
            let v = [draw(), draw()];
            w.set(n, v);
        }
        w.coeffs[0][0] = cz();
        w
    }
}

/// `R U = (Û₁, Û₂)`.
pub fn restrict_r12(state: &SpectralState) -> BottomVelocity {
    BottomVelocity { nmax: state.nmax(), coeffs: state.coeffs().iter().map(|c| [c[0], c[1]]).collect() }
}

/// Sharp coordinates of `R⁻¹w`.
pub fn prolong_sharp(w: &BottomVelocity, table: &ModeTable) -> Result<ModeCoords> {
    let w10 = w.coeffs[0][0].norm();
    if w10 != 0.0 {
        return Err(Error::MeanValue(w10));
    }
    let mut sharp = ModeCoords::zeros(w.nmax);
    let mut c0 = ZERO6;
    c0[1] = w.coeffs[0][1];
    sharp.set(0, c0);
    for n in 1..=w.nmax {
        let b = table.get(n as i64).beta[0];
        let i_n = inn(n as i64);
        let [w1, w2] = w.coeffs[n];
        let scale = Complex64::new(1.0, 0.0) / (2.0 * i_n * b);
        let mut c = ZERO6;
        c[0] = (b * w1 + i_n * w2) * scale;
        c[1] = (b * w1 - i_n * w2) * scale;
        sharp.set(n, c);
    }
    Ok(sharp)
}

/// `R⁻¹w`, the center-space state whose first two components are `w`.
pub fn prolong_r12inv(w: &BottomVelocity, table: &ModeTable) -> Result<SpectralState> {
    Ok(prolong_sharp(w, table)?.from_sharp(table))
}

/// `σ(n) = −λ₁(n)/n²`.
pub fn wave_symbol_sigma(table: &ModeTable, n: i64) -> Result<f64> {
    table.sigma(n)
}

/// Operator norm of `R⁻¹` from the weighted bottom-velocity norm to `H`.
pub fn r12inv_bound(table: &ModeTable, nmax: usize) -> f64 {
    let mut worst: f64 = 1.0;
    for n in 1..=nmax as i64 {
        let md = table.get(n);
        let b = md.beta[0];
        let i_n = inn(n);
        let scale = Complex64::new(1.0, 0.0) / (2.0 * i_n * b);
        let m = [[b * scale, i_n * scale], [b * scale, -i_n * scale]];
        let w = crate::specspace::weight(n);
        let s = 1.0 / (1.0 + (n * n) as f64).sqrt();
        // Columns of B = diag(w)·[v₁ v₂]·M / √(1+n²).
        let col = |j: usize| -> [Complex64; 6] {
            std::array::from_fn(|k| w[k] * s * (md.v[(k, 0)] * m[0][j] + md.v[(k, 1)] * m[1][j]))
        };
        let (c0, c1) = (col(0), col(1));
        let a: f64 = c0.iter().map(|z| z.norm_sqr()).sum();
        let d: f64 = c1.iter().map(|z| z.norm_sqr()).sum();
        let off: Complex64 = c0.iter().zip(&c1).map(|(x, y)| x.conj() * y).sum();
        let tr = a + d;
        let det = a * d - off.norm_sqr();
        let lmax = 0.5 * (tr + (tr * tr - 4.0 * det).max(0.0).sqrt());
        worst = worst.max(lmax.sqrt());
    }
    worst
}

/// `C²` bump: 1 on `[0, 1/2]`, 0 on `[1, ∞)`.
pub fn cutoff(r: f64) -> f64 {
    if r <= 0.5 {
        1.0
    } else if r >= 1.0 {
        0.0
    } else {
        let t = 2.0 * r - 1.0;
        1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LPConfig {
    /// Cutoff radius in `H`.
    pub delta: f64,
    /// Number of Picard levels.
    pub k: usize,
    /// Window half-width and step of the quadrature path.
    pub ymax: f64,
    pub h: f64,
    pub tail_tol: f64,
    /// Absolute residual target of the initial-data fixed point.
    pub fp_tol: f64,
    pub fp_max_iter: usize,
    pub scheme: Scheme,
    /// Random pairs used to measure `L(δ')`.
    pub lipschitz_samples: usize,
    pub seed: u64,
}

impl Default for LPConfig {
    fn default() -> Self {
        Self {
            delta: 0.5,
            k: 2,
            ymax: 40.0,
            h: 0.01,
            tail_tol: 1e-8,
            fp_tol: 1e-13,
            fp_max_iter: 100,
            scheme: Scheme::Full,
            lipschitz_samples: 32,
            seed: 0,
        }
    }
}

impl LPConfig {
    pub fn validate(&self, table: &ModeTable) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::Domain(format!("delta must be positive, got {}", self.delta)));
        }
        if !(self.h > 0.0 && self.fp_tol > 0.0 && self.fp_max_iter > 0) {
            return Err(Error::Domain("step, fixed-point tolerance and budget must be positive".into()));
        }
        let eps = spectral_gap(table)?.epsilon_all;
        let tail = (-eps * self.ymax).exp();
        if !(tail < self.tail_tol) {
            return Err(Error::Window { tail, tol: self.tail_tol });
        }
        Ok(())
    }
}

/// Output of [`lp_manifold_phi`].
#[derive(Debug, Clone)]
pub struct PhiResult {
    pub phi: SpectralState,
    /// `‖φᵏ(ξ) − φᵏ⁻¹(ξ)‖_H` for `k = 1..=K`.
    pub increments: Vec<f64>,
    /// Largest ratio of successive increments, when `K ≥ 2`.
    pub contraction: Option<f64>,
}

fn support(xi: &SpectralState) -> Vec<i64> {
    xi.coeffs().iter().enumerate().filter(|(_, c)| c.iter().any(|z| z.norm() > 0.0)).map(|(n, _)| n as i64).collect()
}

/// Wavenumbers reachable by sums of the support within the truncation: the
/// multiples of the gcd of the support.
fn lattice(nmax: usize, support: &[i64]) -> Vec<i64> {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    let g = support.iter().fold(0, |g, &n| gcd(g, n));
    if g == 0 {
        return vec![0];
    }
    (0..=nmax as i64).filter(|n| n % g == 0).collect()
}

fn increments(series: &Series, x: &[Complex64]) -> (Vec<f64>, Option<f64>) {
    let mut prev = series.eval_level(0, x);
    let mut inc = Vec::new();
    for k in 1..=series.levels() {
        let cur = series.eval_level(k, x);
        inc.push(norm_h(&cur.sub(&prev)));
        prev = cur;
    }
    let contraction = inc.windows(2).filter(|w| w[0] > 0.0).map(|w| w[1] / w[0]).reduce(f64::max);
    (inc, contraction)
}

/// `φ_δ(ξ)` by `K` Picard levels. The series is built only over the
/// wavenumbers the support of `ξ` can reach.
pub fn lp_manifold_phi(xi: &SpectralState, table: &ModeTable, cfg: &LPConfig) -> Result<PhiResult> {
    cfg.validate(table)?;
    crate::dynamics::check_center(xi, table)?;
    let nmax = xi.nmax();
    let norm = norm_h(xi);
    if norm >= cfg.delta {
        return Err(Error::Domain(format!("|xi|_H = {norm:.3e} is not below delta = {}", cfg.delta)));
    }
    if norm == 0.0 || cfg.k == 0 {
        return Ok(PhiResult { phi: SpectralState::zeros(nmax), increments: vec![0.0; cfg.k], contraction: None });
    }
    let waves = lattice(nmax, &support(xi));
    let series = Series::build(table, nmax, cfg.k, cfg.scheme, Some(&waves))?;
    let scaled = xi.scale(cutoff(norm / cfg.delta));
    let x = series.atoms().values(&ModeCoords::to_sharp(&scaled, table));
    let (increments, contraction) = increments(&series, &x);
    if let Some(r) = contraction {
        if r >= 1.0 {
            return Err(Error::Contraction(format!("increment ratio {r:.3e} at |xi|_H = {norm:.3e}")));
        }
    }
    Ok(PhiResult { phi: series.eval(&x), increments, contraction })
}

/// The last Picard level evaluated by quadrature: `K₁[π₁G(u₀ + φᴷ⁻¹(u₀))](0)`
/// with `u₀(τ) = S₀(τ)ξ` and the inner level from the frozen series.
pub fn lp_phi_quadrature(xi: &SpectralState, table: &ModeTable, cfg: &LPConfig) -> Result<SpectralState> {
    cfg.validate(table)?;
    crate::dynamics::check_center(xi, table)?;
    let nmax = xi.nmax();
    if cfg.k == 0 {
        return Ok(SpectralState::zeros(nmax));
    }
    let scaled = xi.scale(cutoff(norm_h(xi) / cfg.delta));
    let waves = lattice(nmax, &support(xi));
    let inner = Series::build(table, nmax, cfg.k - 1, Scheme::Frozen, Some(&waves))?;
    let grid = YGrid::new(cfg.ymax, cfg.h, 0.0)?;
    let forcing = |_: usize, y: f64| {
        let u0 = center_flow(&scaled, y, table);
        let x = inner.atoms().values(&ModeCoords::to_sharp(&u0, table));
        let u = u0.add(&inner.eval(&x));
        let g = nonlinearity_g(&u, &table.params).expect("grid fits the truncation");
        project(&g, table, Projection::Hyperbolic)
    };
    let k1 = K1Config { tail_tol: cfg.tail_tol, residual_tol: f64::INFINITY };
    let sol = hyperbolic_solve_k1(forcing, table, &grid, &k1)?;
    Ok(sol.u[grid.index_of(0.0)].clone())
}

/// Thresholds of the initial-data problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub delta: f64,
    /// Bound of `R⁻¹`.
    pub c_r: f64,
    /// `δ' = δ/(2C_R)`.
    pub delta_prime: f64,
    /// Measured Lipschitz constant of `ζ ↦ Rφ(R⁻¹ζ)` on the `δ'` ball.
    pub lipschitz: f64,
    /// `δ₃ = δ'(1 − L(δ'))`.
    pub delta3: f64,
}

/// Result of the initial-data fixed point.
#[derive(Debug, Clone)]
pub struct XiSolution {
    pub xi: SpectralState,
    pub phi: SpectralState,
    pub zeta: BottomVelocity,
    pub iterations: usize,
    pub residual: f64,
    /// Largest ratio of successive step norms.
    pub contraction: Option<f64>,
}

/// The manifold map with its series built once over all wavenumbers.
#[derive(Debug, Clone)]
pub struct Manifold<'a> {
    pub table: &'a ModeTable,
    pub cfg: LPConfig,
    series: Series,
    pub thresholds: Thresholds,
    /// `C₂ = M₀` from coercivity, when the energy exists.
    pub c2: Option<f64>,
}

impl<'a> Manifold<'a> {
    pub fn new(table: &'a ModeTable, cfg: &LPConfig) -> Result<Self> {
        cfg.validate(table)?;
        let nmax = table.nmax;
        let series = Series::build(table, nmax, cfg.k, cfg.scheme, None)?;
        let c_r = r12inv_bound(table, nmax);
        let delta_prime = cfg.delta / (2.0 * c_r);
        let mut m = Self {
            table,
            cfg: *cfg,
            series,
            thresholds: Thresholds { delta: cfg.delta, c_r, delta_prime, lipschitz: 0.0, delta3: delta_prime },
            c2: None,
        };
        let l = m.measure_lipschitz()?;
        m.thresholds.lipschitz = l;
        m.thresholds.delta3 = delta_prime * (1.0 - l);
        if l >= 1.0 {
            return Err(Error::FixedPoint(format!("measured L(delta') = {l:.3e} is not below 1")));
        }
        let p = &table.params;
        if p.has_energy() && p.stability_regime() {
            m.c2 = Some(coercivity_gammas(table)?.1);
        }
        Ok(m)
    }

    pub fn series(&self) -> &Series {
        &self.series
    }

    fn phi_of_sharp(&self, sharp: &ModeCoords) -> (SpectralState, SpectralState) {
        let xi = sharp.from_sharp(self.table);
        let chi = cutoff(norm_h(&xi) / self.cfg.delta);
        let x: Vec<Complex64> = self.series.atoms().values(sharp).into_iter().map(|z| z * chi).collect();
        let phi = self.series.eval(&x);
        (xi, phi)
    }

    /// `φ_δ(ξ)` for a center-space state.
    pub fn phi(&self, xi: &SpectralState) -> SpectralState {
        self.phi_of_sharp(&ModeCoords::to_sharp(xi, self.table)).1
    }

    /// `ζ ↦ Rφ(R⁻¹ζ)`.
    fn lift(&self, zeta: &BottomVelocity) -> Result<(SpectralState, SpectralState, BottomVelocity)> {
        let (xi, phi) = self.phi_of_sharp(&prolong_sharp(zeta, self.table)?);
        let r = restrict_r12(&phi);
        Ok((xi, phi, r))
    }

    fn measure_lipschitz(&self) -> Result<f64> {
        if self.cfg.k == 0 {
            return Ok(0.0);
        }
        let nmax = self.table.nmax;
        let radius = self.thresholds.delta_prime;
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        let mut l: f64 = 0.0;
        for i in 0..self.cfg.lipschitz_samples {
            let a = BottomVelocity::random(nmax, &mut rng);
            let a = a.scale(radius * rng.random_range(0.5..1.0) / a.norm());
            let d = BottomVelocity::random(nmax, &mut rng);
            // Alternate far pairs with nearby ones that probe the derivative.
            let spread = if i % 2 == 0 { 1e-3 } else { 0.5 };
            let mut b = a.add(&d.scale(spread * radius / d.norm()));
            if b.norm() >= radius {
                b = b.scale(0.999 * radius / b.norm());
            }
            let (_, _, ra) = self.lift(&a)?;
            let (_, _, rb) = self.lift(&b)?;
            l = l.max(ra.sub(&rb).norm() / a.sub(&b).norm());
        }
        Ok(l)
    }

    /// Solve `ζ = w − Rφ(R⁻¹ζ)` and return `ξ = R⁻¹ζ`.
    pub fn solve_initdata_xi(&self, w: &BottomVelocity, guess: Option<&BottomVelocity>) -> Result<XiSolution> {
        let wn = w.norm();
        if wn >= self.thresholds.delta3 {
            return Err(Error::FixedPoint(format!(
                "|w| = {wn:.3e} is not below delta3 = {:.3e}",
                self.thresholds.delta3
            )));
        }
        let mut zeta = guess.cloned().unwrap_or_else(|| w.clone());
        let mut last_step: Option<f64> = None;
        let mut contraction: Option<f64> = None;
        for it in 1..=self.cfg.fp_max_iter {
            let (xi, phi, r) = self.lift(&zeta)?;
            let next = w.sub(&r);
            let step = next.sub(&zeta).norm();
            if let Some(prev) = last_step {
                if prev > 0.0 {
                    let ratio = step / prev;
                    contraction = Some(contraction.map_or(ratio, |c: f64| c.max(ratio)));
                    if ratio >= 1.0 && step > self.cfg.fp_tol {
                        return Err(Error::FixedPoint(format!("step ratio {ratio:.3e} at iteration {it}")));
                    }
                }
            }
            if step < self.cfg.fp_tol {
                return Ok(XiSolution { xi, phi, zeta, iterations: it, residual: step, contraction });
            }
            last_step = Some(step);
            zeta = next;
        }
        Err(Error::FixedPoint(format!("no convergence in {} iterations", self.cfg.fp_max_iter)))
    }

    /// `d/dy (w₁, w₂)` together with the fixed-point solution at `w`.
    fn rhs_with(&self, w: &BottomVelocity, guess: Option<&BottomVelocity>) -> Result<(BottomVelocity, XiSolution)> {
        let sol = self.solve_initdata_xi(w, guess)?;
        let mut out = BottomVelocity::zeros(w.nmax);
        let phi = sol.phi.coeffs();
        out.set(0, [cz(), phi[0][2]]);
        for n in 1..=w.nmax {
            let s = self.table.sigma(n as i64)?;
            let i_n = inn(n as i64);
            let [w1, w2] = w.coeffs[n];
            let g = phi[n][2] - s * i_n * phi[n][0];
            out.set(n, [i_n * w2, s * i_n * w1 + g]);
        }
        Ok((out, sol))
    }

    /// `(in·ŵ₂, σ·in·ŵ₁ + ĝ)` mode by mode.
    pub fn reduced_rhs(&self, w: &BottomVelocity) -> Result<BottomVelocity> {
        Ok(self.rhs_with(w, None)?.0)
    }

    /// `g(w)`, the nonlinear part of the reduced equation.
    pub fn reduced_g(&self, w: &BottomVelocity) -> Result<BottomVelocity> {
        let (rhs, _) = self.rhs_with(w, None)?;
        let mut lin = BottomVelocity::zeros(w.nmax);
        for n in 1..=w.nmax {
            let s = self.table.sigma(n as i64)?;
            let i_n = inn(n as i64);
            lin.set(n, [i_n * w.coeffs[n][1], s * i_n * w.coeffs[n][0]]);
        }
        Ok(rhs.sub(&lin))
    }

    /// `Dφ(ξ)[A₀ξ + π₀G] − A₁φ − π₁G` at `U = ξ + φ(ξ)`, for the series
    /// without cutoff.
    pub fn invariance_defect(&self, xi: &SpectralState) -> Result<SpectralState> {
        let sharp = ModeCoords::to_sharp(xi, self.table);
        let x = self.series.atoms().values(&sharp);
        let phi = self.series.eval(&x);
        let u = xi.add(&phi);
        let g = nonlinearity_g(&u, &self.table.params)?;
        let g0 = project(&g, self.table, Projection::Center);
        let g1 = g.sub(&g0);
        let eta = linear_field(xi, &self.table.params).add(&g0);
        let dx = self.series.atoms().values(&ModeCoords::to_sharp(&eta, self.table));
        let dphi = self.series.directional(&x, &dx);
        Ok(dphi.sub(&linear_field(&phi, &self.table.params)).sub(&g1))
    }
}

/// One stored point of a trajectory.
#[derive(Debug, Clone)]
pub struct Sample {
    pub y: f64,
    pub w: BottomVelocity,
    pub xi: SpectralState,
    pub u: SpectralState,
    pub e0: Option<f64>,
    pub e1: Option<f64>,
}

impl Sample {
    pub fn energy(&self) -> Option<f64> {
        Some(self.e0? + self.e1?)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryMeta {
    pub method: &'static str,
    pub step: f64,
    pub steps: usize,
    pub k: usize,
    pub scheme: Scheme,
    /// `max |E(y) − E(0)| / |E(0)|`, when the energy exists.
    pub drift: Option<f64>,
    pub stability_bound: Option<f64>,
    pub max_norm: f64,
    pub max_fp_iterations: usize,
    pub max_fp_contraction: Option<f64>,
    pub max_fp_residual: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    /// CSV rows `y, |ŵ₁(n)|, |ŵ₂(n)| for each n ≥ 0, E0, E1, E`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let nmax = self.samples.first().map_or(0, |s| s.w.nmax);
        let mut header = vec!["y".to_string()];
        for n in 0..=nmax {
            header.push(format!("w1_abs_{n}"));
            header.push(format!("w2_abs_{n}"));
        }
        header.extend(["e0", "e1", "e"].map(String::from));
        out.write_record(&header)?;
        let opt = |x: Option<f64>| x.map_or(String::new(), |v| format!("{v:e}"));
        for s in &self.samples {
            let mut row = vec![format!("{:e}", s.y)];
            for c in s.w.coeffs() {
                row.push(format!("{:e}", c[0].norm()));
                row.push(format!("{:e}", c[1].norm()));
            }
            row.extend([opt(s.e0), opt(s.e1), opt(s.energy())]);
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Integrate the reduced equation with classical RK4 at a fixed step.
pub fn evolve_y(w0: &BottomVelocity, y0: f64, y1: f64, dt: f64, manifold: &Manifold) -> Result<Trajectory> {
    if !(dt > 0.0 && y1 > y0 && dt.is_finite() && y1.is_finite() && y0.is_finite()) {
        return Err(Error::Domain(format!("need dt > 0 and y1 > y0, got dt={dt}, y0={y0}, y1={y1}")));
    }
    if w0.nmax != manifold.table.nmax {
        return Err(Error::Domain(format!(
            "initial data truncation {} differs from the mode table {}",
            w0.nmax, manifold.table.nmax
        )));
    }
    let steps = ((y1 - y0) / dt - 1e-9).ceil().max(1.0) as usize;
    let h = (y1 - y0) / steps as f64;
    let params = &manifold.table.params;
    let energy = params.has_energy();
    let mut fp_iter = 0usize;
    let mut fp_contraction: Option<f64> = None;
    let mut fp_residual: f64 = 0.0;
    let mut note = |s: &XiSolution| {
        fp_iter = fp_iter.max(s.iterations);
        if let Some(c) = s.contraction {
            fp_contraction = Some(fp_contraction.map_or(c, |m: f64| m.max(c)));
        }
        fp_residual = fp_residual.max(s.residual);
    };

    let mut w = w0.clone();
    let (mut k1, sol) = manifold.rhs_with(&w, None)?;
    note(&sol);
    let mut guess = sol.zeta.clone();
    let xi0 = norm_h(&sol.xi);
    let bound = manifold.c2.map(|c| 2.0 * c * xi0);
    let mut samples = Vec::with_capacity(steps + 1);
    let mut max_norm: f64 = 0.0;
    let mut record = |y: f64, w: &BottomVelocity, sol: &XiSolution| -> Result<()> {
        let u = sol.xi.add(&sol.phi);
        let norm = norm_h(&u);
        max_norm = max_norm.max(norm);
        if let Some(b) = bound {
            if norm > b {
                return Err(Error::Stability { y, norm, bound: b });
            }
        }
        let (e0, e1) = if energy { (Some(energy_e0(&u, params)?), Some(energy_e1(&u, params)?)) } else { (None, None) };
        samples.push(Sample { y, w: w.clone(), xi: sol.xi.clone(), u, e0, e1 });
        Ok(())
    };
    record(y0, &w, &sol)?;
    for j in 0..steps {
        let (k2, s2) = manifold.rhs_with(&w.axpy(0.5 * h, &k1), Some(&guess))?;
        note(&s2);
        let (k3, s3) = manifold.rhs_with(&w.axpy(0.5 * h, &k2), Some(&s2.zeta))?;
        note(&s3);
        let (k4, s4) = manifold.rhs_with(&w.axpy(h, &k3), Some(&s3.zeta))?;
        note(&s4);
        let incr = k1.add(&k2.scale(2.0)).add(&k3.scale(2.0)).add(&k4);
        w = w.axpy(h / 6.0, &incr);
        let (next, sol) = manifold.rhs_with(&w, Some(&s4.zeta))?;
        note(&sol);
        let y = if j + 1 == steps { y1 } else { y0 + (j + 1) as f64 * h };
        record(y, &w, &sol)?;
        guess = sol.zeta.clone();
        k1 = next;
    }
    let drift = if energy {
        let e_init = samples[0].energy().expect("energy recorded");
        let worst = samples.iter().map(|s| (s.energy().unwrap() - e_init).abs()).fold(0.0, f64::max);
        Some(worst / e_init.abs().max(f64::MIN_POSITIVE))
    } else {
        None
    };
    let meta = TrajectoryMeta {
        method: "rk4",
        step: h,
        steps,
        k: manifold.cfg.k,
        scheme: manifold.cfg.scheme,
        drift,
        stability_bound: bound,
        max_norm,
        max_fp_iterations: fp_iter,
        max_fp_contraction: fp_contraction,
        max_fp_residual: fp_residual,
    };
    Ok(Trajectory { samples, meta })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualReport {
    /// `max_j ‖(U_{j+1} − U_{j−1})/(2Δy) − (ÂU_j + G(U_j))‖_H`.
    pub residual: f64,
    /// Central-difference error estimate `max ‖Δ³U‖/(6Δy)`.
    pub difference_error: f64,
    /// `max_j ‖d(ξ_j)‖_H` of the invariance defect.
    pub defect: f64,
    /// `difference_error + (1 + C_R)·defect`.
    pub budget: f64,
}

/// Residual of the reconstructed `U(y)` in the full first-order system.
pub fn reconstruction_residual(traj: &Trajectory, manifold: &Manifold) -> Result<ResidualReport> {
    let s = &traj.samples;
    if s.len() < 4 {
        return Err(Error::Domain("the residual needs at least four samples".into()));
    }
    let h = traj.meta.step;
    let params = &manifold.table.params;
    let mut residual: f64 = 0.0;
    for j in 1..s.len() - 1 {
        let d = s[j + 1].u.sub(&s[j - 1].u).scale(0.5 / h);
        residual = residual.max(norm_h(&d.sub(&vector_field(&s[j].u, params)?)));
    }
    let mut difference_error: f64 = 0.0;
    for j in 1..s.len() - 2 {
        let d3 = s[j + 2].u.sub(&s[j + 1].u.scale(3.0)).add(&s[j].u.scale(3.0)).sub(&s[j - 1].u);
        difference_error = difference_error.max(norm_h(&d3) / (6.0 * h));
    }
    let mut defect: f64 = 0.0;
    for sample in s {
        defect = defect.max(norm_h(&manifold.invariance_defect(&sample.xi)?));
    }
    let budget = difference_error + (1.0 + manifold.thresholds.c_r) * defect;
    Ok(ResidualReport { residual, difference_error, defect, budget })
}
