//! Truncated Fourier states, their norms, biorthogonal coordinates and the
//! spectral projections.
//!
//! States store `n ≥ 0` only; `Û(−n) = conj(Û(n))` is implied, so every state
//! is the transform of real fields. Sums over all `n ∈ [−N, N]` run in the
//! fixed order `0, −1, 1, −2, 2, …`.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dd::{self, Vec6dd};
use crate::error::{Error, Result};
use crate::modes::ModeTable;

pub type C6 = [Complex64; 6];

pub const ZERO6: C6 = [Complex64 { re: 0.0, im: 0.0 }; 6];

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    nmax: usize,
    coeffs: Vec<C6>,
}

impl SpectralState {
    pub fn zeros(nmax: usize) -> Self {
        Self { nmax, coeffs: vec![ZERO6; nmax + 1] }
    }

    /// Build from coefficients for `n = 0..=nmax`. The `n = 0` entry must be real.
    pub fn from_coeffs(coeffs: Vec<C6>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidState("no coefficients".into()));
        }
        let s = Self { nmax: coeffs.len() - 1, coeffs };
        s.validate()?;
        Ok(s)
    }

    pub fn nmax(&self) -> usize {
        self.nmax
    }

    /// Coefficients for `n = 0..=nmax`.
    pub fn coeffs(&self) -> &[C6] {
        &self.coeffs
    }

    /// `Û(n)` for any `|n| ≤ nmax`.
    pub fn get(&self, n: i64) -> C6 {
        let c = self.coeffs[n.unsigned_abs() as usize];
        if n < 0 {
            c.map(|z| z.conj())
        } else {
            c
        }
    }

    /// Set `Û(n)` for `n ≥ 0`; at `n = 0` the imaginary parts are dropped.
    pub fn set(&mut self, n: usize, v: C6) {
        self.coeffs[n] = if n == 0 { v.map(|z| Complex64::new(z.re, 0.0)) } else { v };
    }

    pub fn component(&self, n: i64, k: usize) -> Complex64 {
        self.get(n)[k]
    }

    /// Reality of the mean mode (the only constraint storage does not
    /// enforce by itself).
    pub fn validate(&self) -> Result<()> {
        if self.coeffs[0].iter().any(|z| z.im != 0.0) {
            return Err(Error::InvalidState("the n=0 coefficients must be real".into()));
        }
        if self.coeffs.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite coefficient".into()));
        }
        Ok(())
    }

    /// `Û₁(0) = 0` (the first field is a derivative).
    pub fn has_zero_mean(&self) -> bool {
        self.coeffs[0][0] == Complex64::new(0.0, 0.0)
    }

    pub fn map_modes(&self, mut f: impl FnMut(i64, &C6) -> C6) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| {
                let v = f(n as i64, c);
                if n == 0 {
                    v.map(|z| Complex64::new(z.re, 0.0))
                } else {
                    v
                }
            })
            .collect();
        Self { nmax: self.nmax, coeffs }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nmax, other.nmax, "truncation mismatch");
        self.map_modes(|n, c| std::array::from_fn(|k| c[k] + other.coeffs[n as usize][k]))
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.nmax, other.nmax, "truncation mismatch");
        self.map_modes(|n, c| std::array::from_fn(|k| c[k] - other.coeffs[n as usize][k]))
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map_modes(|_, c| c.map(|z| z * s))
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        assert_eq!(self.nmax, other.nmax, "truncation mismatch");
        self.map_modes(|n, c| std::array::from_fn(|k| c[k] + other.coeffs[n as usize][k] * s))
    }

    /// Truncate or zero-pad to a new `nmax`.
    pub fn resized(&self, nmax: usize) -> Self {
        let mut out = Self::zeros(nmax);
        for n in 0..=nmax.min(self.nmax) {
            out.coeffs[n] = self.coeffs[n];
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> StateJson {
        StateJson {
            nmax: self.nmax,
            coeffs: self.coeffs.iter().enumerate().map(|(n, c)| (n as i64, c.map(|z| [z.re, z.im]))).collect(),
        }
    }

    pub fn from_json(j: &StateJson) -> Result<Self> {
        let mut s = Self::zeros(j.nmax);
        for (n, c) in &j.coeffs {
            if *n < 0 || *n as usize > j.nmax {
                return Err(Error::InvalidState(format!("wavenumber {n} outside 0..={}", j.nmax)));
            }
            s.coeffs[*n as usize] = c.map(|[re, im]| Complex64::new(re, im));
        }
        s.validate()?;
        Ok(s)
    }

    /// Per-mode magnitudes `n, |Û₁(n)|, …, |Û₆(n)|` as CSV.
    pub fn write_magnitudes_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["n", "abs_u1", "abs_u2", "abs_u3", "abs_u4", "abs_u5", "abs_u6"])?;
        for (n, c) in self.coeffs.iter().enumerate() {
            let mut rec = vec![n.to_string()];
            rec.extend(c.iter().map(|z| z.norm().to_string()));
            wr.write_record(rec)?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// JSON layout: `{"nmax": N, "coeffs": [[n, [[re, im] × 6]], …]}` for `n ≥ 0`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct StateJson {
    pub nmax: usize,
    pub coeffs: Vec<(i64, [[f64; 2]; 6])>,
}

/// Diagonal of `Ŝ(n)`.
pub fn weight(n: i64) -> [f64; 6] {
    let s = (1.0 + (n * n) as f64).sqrt();
    [s, s, 1.0, 1.0 / s, s, 1.0]
}

/// Add `f(n)` for every `n ∈ [−N, N]` in the canonical order, using
/// `f(−n) = f(n)` for quantities that are even in `n`.
fn even_sum(nmax: usize, f: impl Fn(usize) -> f64) -> f64 {
    let mut s = f(0);
    for n in 1..=nmax {
        let t = f(n);
        s += t;
        s += t;
    }
    s
}

fn weighted_sq(n: usize, c: &C6) -> f64 {
    let w = weight(n as i64);
    (0..6).map(|k| (w[k] * c[k].norm()).powi(2)).sum()
}

pub fn norm_h(state: &SpectralState) -> f64 {
    even_sum(state.nmax, |n| weighted_sq(n, &state.coeffs[n])).sqrt()
}

pub fn norm_x(state: &SpectralState) -> f64 {
    even_sum(state.nmax, |n| (1.0 + (n * n) as f64) * weighted_sq(n, &state.coeffs[n])).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Norms {
    pub h: f64,
    pub x: f64,
    pub h_sharp: f64,
    pub x_sharp: f64,
}

/// `H`, `X` and the two sharp-coordinate norms.
pub fn norms(state: &SpectralState, table: &ModeTable) -> Norms {
    let sharp = ModeCoords::to_sharp(state, table);
    let sq = |n: usize| sharp.get(n as i64).iter().map(|z| z.norm_sqr()).sum::<f64>();
    let w = |n: usize| 1.0 + (n * n) as f64;
    Norms {
        h: norm_h(state),
        x: norm_x(state),
        h_sharp: even_sum(state.nmax, |n| w(n).powi(2) * sq(n)).sqrt(),
        x_sharp: even_sum(state.nmax, |n| w(n).powi(3) * sq(n)).sqrt(),
    }
}

/// Biorthogonal coordinates `U#(n) = Z(n)Û(n)` for `n ≥ 0`, kept in
/// double-double so the round trip through the ill-conditioned `V(n)` is exact
/// to working precision. For `n < 0`, `U#(−n)` is `conj(U#(n))` with the mode
/// indices permuted by [`crate::modes::ModeData::conj_permutation`].
#[derive(Debug, Clone)]
pub struct ModeCoords {
    nmax: usize,
    coeffs: Vec<Vec6dd>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    ToSharp,
    FromSharp,
}

fn check_range(nmax: usize, table: &ModeTable) {
    assert!(nmax <= table.nmax, "state truncation {nmax} exceeds mode table range {}", table.nmax);
}

impl ModeCoords {
    pub fn zeros(nmax: usize) -> Self {
        Self { nmax, coeffs: vec![[dd::czero(); 6]; nmax + 1] }
    }

    pub fn nmax(&self) -> usize {
        self.nmax
    }

    /// `U#(n)` rounded to double precision, `0 ≤ n ≤ nmax`.
    pub fn get(&self, n: i64) -> C6 {
        self.coeffs[n as usize].map(dd::to_c64)
    }

    pub fn set(&mut self, n: usize, v: C6) {
        self.coeffs[n] = v.map(dd::cdd);
    }

    pub fn to_sharp(state: &SpectralState, table: &ModeTable) -> Self {
        check_range(state.nmax, table);
        let coeffs = (0..=state.nmax)
            .map(|n| {
                let md = table.get(n as i64);
                let u = state.coeffs[n].map(dd::cdd);
                std::array::from_fn(|m| dd::dot(&md.z_dd[m], &u))
            })
            .collect();
        Self { nmax: state.nmax, coeffs }
    }

    pub fn from_sharp(&self, table: &ModeTable) -> SpectralState {
        check_range(self.nmax, table);
        let mut out = SpectralState::zeros(self.nmax);
        for n in 0..=self.nmax {
            let md = table.get(n as i64);
            let mut acc = [dd::czero(); 6];
            for m in 0..6 {
                for (i, a) in acc.iter_mut().enumerate() {
                    *a += md.v_dd[m][i] * self.coeffs[n][m];
                }
            }
            out.set(n, acc.map(dd::to_c64));
        }
        out
    }
}

/// Either direction of the biorthogonal change of coordinates.
pub enum Transformed {
    Sharp(ModeCoords),
    State(SpectralState),
}

pub fn mode_transform(input: Transformed, table: &ModeTable, direction: Direction) -> Result<Transformed> {
    match (input, direction) {
        (Transformed::State(s), Direction::ToSharp) => Ok(Transformed::Sharp(ModeCoords::to_sharp(&s, table))),
        (Transformed::Sharp(c), Direction::FromSharp) => Ok(Transformed::State(c.from_sharp(table))),
        _ => Err(Error::InvalidState("input does not match the transform direction".into())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Projection {
    Center,
    Hyperbolic,
    Unstable,
    Stable,
}

/// Spectral projection, evaluated mode by mode with the double-double
/// projectors. The hyperbolic part is `Û − π₀Û`, so `π₀ + π₁ = I` holds to
/// rounding.
pub fn project(state: &SpectralState, table: &ModeTable, which: Projection) -> SpectralState {
    check_range(state.nmax, table);
    state.map_modes(|n, c| {
        let md = table.get(n);
        let u = c.map(dd::cdd);
        let out = match which {
            Projection::Center => dd::mat_vec(&md.pc_dd, &u),
            Projection::Unstable => dd::mat_vec(&md.pu_dd, &u),
            Projection::Stable => dd::mat_vec(&md.ps_dd, &u),
            Projection::Hyperbolic => {
                let pc = dd::mat_vec(&md.pc_dd, &u);
                std::array::from_fn(|k| u[k] - pc[k])
            }
        };
        out.map(dd::to_c64)
    })
}

/// Random state with per-mode `H` contribution decaying like `(1+n²)^(−1)`.
pub fn random_state<R: Rng>(nmax: usize, rng: &mut R) -> SpectralState {
    let mut s = SpectralState::zeros(nmax);
    for n in 0..=nmax {
        let w = weight(n as i64);
        let decay = 1.0 / (1.0 + (n * n) as f64).sqrt();
        let v: C6 = std::array::from_fn(|k| {
            let re = rng.random_range(-1.0..1.0);
            let im = if n == 0 { 0.0 } else { rng.random_range(-1.0..1.0) };
            Complex64::new(re, im) * (decay / w[k])
        });
        s.set(n, v);
    }
    let mut c0 = s.coeffs[0];
    c0[0] = Complex64::new(0.0, 0.0);
    s.set(0, c0);
    s
}

/// Random center-space state with `Û₁(0) = 0`, drawn in the sharp coordinates
/// `U#₁, U#₂` with weights that make the per-mode `H` contribution decay like
/// `(1+n²)^(−1)`.
pub fn random_center_state<R: Rng>(nmax: usize, table: &ModeTable, rng: &mut R) -> SpectralState {
    let mut s = SpectralState::zeros(nmax);
    for n in 0..=nmax {
        let md = table.get(n as i64);
        let mut u = ZERO6;
        for m in 0..2 {
            if n == 0 && m == 0 {
                continue;
            }
            let re = rng.random_range(-1.0..1.0);
            let im = if n == 0 { 0.0 } else { rng.random_range(-1.0..1.0) };
            let col = md.v_col(m);
            let scale = weighted_sq(n, &col).sqrt() * (1.0 + (n * n) as f64).sqrt();
            let x = Complex64::new(re, im) / scale;
            for k in 0..6 {
                u[k] += col[k] * x;
            }
        }
        s.set(n, u);
    }
    s
}
