//! Truncated power series of the center-manifold map in the central mode
//! coordinates.
//!
//! A central state is `ξ = Σ x_a v_a e^{i n_a x}` over atoms `a = (n, m)`
//! with `|n| ≤ N` and `m ∈ {1, 2}`. Under the linear center flow every atom
//! rotates as `e^{β_a y}`, so a monomial `x^M` rotates as `e^{μ_M y}` with
//! `μ_M = Σ β_a` and lives at wavenumber `n_M = Σ n_a`. For such a forcing
//! the bounded hyperbolic response is `(μ_M − Â(n_M))⁻¹π₁`, which turns each
//! Lyapunov–Perron level into an exact coefficient recursion.
//!
//! Level `k` keeps degrees up to `p·k + 1`. The [`Scheme::Full`] recursion
//! also subtracts the drift `Dφ·π₀G` of the center coordinates, so it
//! reproduces the Taylor coefficients of the invariant manifold.
//! [`Scheme::Frozen`] drops that term and evaluates the integral along the
//! linear flow only.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypgreen::Pair;
use crate::modes::ModeTable;
use crate::params::Params;
use crate::specspace::{ModeCoords, SpectralState, C6, ZERO6};

/// Sorted atom ids, one per 10-bit slot, stored as `id + 1`.
pub type Key = u128;

const SLOT_BITS: u32 = 10;
const SLOT_MASK: u128 = (1 << SLOT_BITS) - 1;
/// Highest polynomial degree a key can hold.
pub const MAX_DEGREE: usize = 12;
/// Largest truncation the atom ids fit into.
pub const MAX_NMAX: usize = 255;
/// Cap on the number of monomials of one level.
pub const MAX_TERMS: usize = 4_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Invariance equation including the center drift.
    #[default]
    Full,
    /// Integral along the linear center flow only.
    Frozen,
}

struct KeyIter(u128);

impl Iterator for KeyIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        let s = (self.0 & SLOT_MASK) as usize;
        if s == 0 {
            return None;
        }
        self.0 >>= SLOT_BITS;
        Some(s - 1)
    }
}

fn ids(k: Key) -> KeyIter {
    KeyIter(k)
}

fn single(id: usize) -> Key {
    id as u128 + 1
}

fn key_mul(a: Key, b: Key) -> Key {
    let mut ia = ids(a).peekable();
    let mut ib = ids(b).peekable();
    let mut out = 0u128;
    let mut shift = 0;
    loop {
        let next = match (ia.peek(), ib.peek()) {
            (Some(&x), Some(&y)) => {
                if x <= y {
                    ia.next()
                } else {
                    ib.next()
                }
            }
            (Some(_), None) => ia.next(),
            (None, Some(_)) => ib.next(),
            (None, None) => break,
        };
        out |= (next.unwrap() as u128 + 1) << shift;
        shift += SLOT_BITS;
    }
    out
}

/// `x^M / x_a` for an atom `a` occurring in `M`.
fn key_remove(k: Key, id: usize) -> Key {
    let mut out = 0u128;
    let mut shift = 0;
    let mut removed = false;
    for i in ids(k) {
        if i == id && !removed {
            removed = true;
            continue;
        }
        out |= (i as u128 + 1) << shift;
        shift += SLOT_BITS;
    }
    out
}

fn degree(k: Key) -> usize {
    ids(k).count()
}

/// Atom bookkeeping: per-id wavenumber, eigenvalue and eigenvectors.
#[derive(Debug, Clone)]
pub struct Atoms {
    nmax: usize,
    active: Vec<bool>,
    beta: Vec<Complex64>,
    v: Vec<C6>,
    z: Vec<C6>,
}

impl Atoms {
    /// Atoms at the given wavenumbers (both signs are added).
    fn new(table: &ModeTable, nmax: usize, wavenumbers: &[i64]) -> Self {
        let count = 2 * (2 * nmax + 1);
        let mut active = vec![false; count];
        let mut beta = vec![Complex64::new(0.0, 0.0); count];
        let mut v = vec![ZERO6; count];
        let mut z = vec![ZERO6; count];
        for &w in wavenumbers {
            for n in [w, -w] {
                let md = table.get(n);
                for m in 0..2 {
                    let id = Self::id_in(nmax, n, m);
                    active[id] = true;
                    beta[id] = md.beta[m];
                    v[id] = md.v_col(m);
                    z[id] = md.z_row(m);
                }
            }
        }
        Self { nmax, active, beta, v, z }
    }

    fn id_in(nmax: usize, n: i64, m: usize) -> usize {
        2 * (n + nmax as i64) as usize + m
    }

    pub fn id(&self, n: i64, m: usize) -> usize {
        Self::id_in(self.nmax, n, m)
    }

    pub fn n_of(&self, id: usize) -> i64 {
        (id / 2) as i64 - self.nmax as i64
    }

    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    fn wavenumber(&self, k: Key) -> i64 {
        ids(k).map(|i| self.n_of(i)).sum()
    }

    fn mu(&self, k: Key) -> Complex64 {
        ids(k).map(|i| self.beta[i]).sum()
    }

    /// Atom values of a central state given by its sharp coordinates, using
    /// `x_{−n,1} = conj(x_{n,2})` and `x_{−n,2} = conj(x_{n,1})`.
    pub fn values(&self, sharp: &ModeCoords) -> Vec<Complex64> {
        let mut x = vec![Complex64::new(0.0, 0.0); self.len()];
        let top = self.nmax.min(sharp.nmax());
        for n in 0..=top as i64 {
            let c = sharp.get(n);
            for m in 0..2 {
                let id = self.id(n, m);
                if self.active[id] {
                    x[id] = c[m];
                }
                if n > 0 {
                    let mirror = self.id(-n, 1 - m);
                    if self.active[mirror] {
                        x[mirror] = c[m].conj();
                    }
                }
            }
        }
        x
    }
}

/// Scalar polynomial grouped by degree.
#[derive(Debug, Clone)]
struct SPoly {
    terms: Vec<BTreeMap<Key, Complex64>>,
}

impl SPoly {
    fn zero(dmax: usize) -> Self {
        Self { terms: vec![BTreeMap::new(); dmax + 1] }
    }

    fn one(dmax: usize) -> Self {
        let mut p = Self::zero(dmax);
        p.terms[0].insert(0, Complex64::new(1.0, 0.0));
        p
    }

    fn add_term(&mut self, k: Key, c: Complex64) {
        *self.terms[degree(k)].entry(k).or_default() += c;
    }

    fn add_scaled(&mut self, other: &SPoly, s: Complex64) {
        for (d, t) in other.terms.iter().enumerate() {
            for (&k, &c) in t {
                *self.terms[d].entry(k).or_default() += s * c;
            }
        }
    }

    /// Product truncated to degree `dmax` and `|n_M| ≤ N`.
    fn mul(&self, other: &SPoly, atoms: &Atoms, dmax: usize) -> SPoly {
        let nmax = atoms.nmax as i64;
        let mut out = SPoly::zero(dmax);
        let flat: Vec<Vec<(Key, i64, Complex64)>> = other
            .terms
            .iter()
            .map(|t| {
                let mut v: Vec<_> = t.iter().map(|(&k, &c)| (k, atoms.wavenumber(k), c)).collect();
                v.sort_by_key(|e| e.1);
                v
            })
            .collect();
        for (da, ta) in self.terms.iter().enumerate() {
            for (db, tb) in flat.iter().enumerate() {
                if da + db > dmax || tb.is_empty() {
                    continue;
                }
                let bucket = &mut out.terms[da + db];
                for (&ka, &ca) in ta {
                    let na = atoms.wavenumber(ka);
                    let lo = tb.partition_point(|e| e.1 < -nmax - na);
                    for &(kb, nb, cb) in &tb[lo..] {
                        if na + nb > nmax {
                            break;
                        }
                        *bucket.entry(key_mul(ka, kb)).or_default() += ca * cb;
                    }
                }
            }
        }
        out
    }

    fn pow(&self, k: u32, atoms: &Atoms, dmax: usize) -> SPoly {
        let mut out = SPoly::one(dmax);
        for _ in 0..k {
            out = out.mul(self, atoms, dmax);
        }
        out
    }

    /// `∂ₓ`: multiply each monomial by `i n_M`.
    fn dx(&self, atoms: &Atoms) -> SPoly {
        let mut out = self.clone();
        for t in &mut out.terms {
            for (k, c) in t.iter_mut() {
                *c *= Complex64::new(0.0, atoms.wavenumber(*k) as f64);
            }
        }
        out
    }
}

/// Vector polynomial grouped by degree.
type VPoly = Vec<BTreeMap<Key, C6>>;

fn term_count(p: &VPoly) -> usize {
    p.iter().map(|t| t.len()).sum()
}

/// Components 4 and 6 of `G(U)` for polynomial fields `U`.
fn g_series(u: &[SPoly; 6], params: &Params, atoms: &Atoms, dmax: usize) -> (SPoly, SPoly) {
    let p = params.p;
    let q = 1.0 / (p + 1) as f64;
    let [u1, u2, u3, _, u5, u6] = u;
    let u1p = u1.pow(p, atoms, dmax);
    let u2pm1 = u2.pow(p - 1, atoms, dmax);
    let u2p = u2pm1.mul(u2, atoms, dmax);
    let mut s = u1p.mul(u1, atoms, dmax);
    s.add_scaled(&u2p.mul(u2, atoms, dmax), Complex64::new(1.0, 0.0));
    let mut flux = u5.mul(&u1p, atoms, dmax);
    flux.terms.iter_mut().flat_map(|t| t.values_mut()).for_each(|c| *c *= params.gamma);
    flux.add_scaled(&s, Complex64::new(params.alpha * params.d * params.omega * q, 0.0));
    let mut g4 = flux.dx(atoms);
    g4.add_scaled(&u6.mul(&u2p, atoms, dmax), Complex64::new(params.gamma, 0.0));
    g4.add_scaled(&u5.mul(&u2pm1, atoms, dmax).mul(u3, atoms, dmax), Complex64::new(params.gamma * p as f64, 0.0));
    let mut g6 = SPoly::zero(dmax);
    g6.add_scaled(&s, Complex64::new(params.alpha * params.c * q, 0.0));
    (g4, g6)
}

/// Fields `ξ + φ` as six scalar polynomials.
fn fields(atoms: &Atoms, phi: &VPoly, dmax: usize) -> [SPoly; 6] {
    std::array::from_fn(|j| {
        let mut f = SPoly::zero(dmax);
        for (id, &on) in atoms.active.iter().enumerate() {
            if on && atoms.v[id][j] != Complex64::new(0.0, 0.0) {
                f.add_term(single(id), atoms.v[id][j]);
            }
        }
        for t in phi {
            for (&k, c) in t {
                if degree(k) <= dmax && c[j] != Complex64::new(0.0, 0.0) {
                    f.add_term(k, c[j]);
                }
            }
        }
        f
    })
}

fn mat_vec(m: &crate::modes::Mat6, u: &C6) -> C6 {
    std::array::from_fn(|i| (0..6).map(|j| m[(i, j)] * u[j]).sum())
}

/// One level of the manifold map.
#[derive(Debug, Clone)]
struct Level {
    dmax: usize,
    terms: VPoly,
    /// Terms with `n_M ≥ 0` grouped by `n_M`, for evaluation.
    by_n: Vec<Vec<Flat>>,
}

#[derive(Debug, Clone)]
struct Flat {
    ids: [u16; MAX_DEGREE],
    deg: usize,
    c: C6,
}

impl Level {
    fn new(atoms: &Atoms, dmax: usize, terms: VPoly) -> Self {
        let mut by_n = vec![Vec::new(); atoms.nmax + 1];
        for t in &terms {
            for (&key, &c) in t {
                let n = atoms.wavenumber(key);
                if n < 0 {
                    continue;
                }
                let mut f = Flat { ids: [0; MAX_DEGREE], deg: 0, c };
                for i in ids(key) {
                    f.ids[f.deg] = i as u16;
                    f.deg += 1;
                }
                by_n[n as usize].push(f);
            }
        }
        Self { dmax, terms, by_n }
    }

    fn eval(&self, term: impl Fn(&Flat) -> Complex64 + Sync) -> Vec<C6> {
        self.by_n
            .par_iter()
            .map(|fs| {
                let mut acc = ZERO6;
                for f in fs {
                    let m = term(f);
                    for (o, ci) in acc.iter_mut().zip(&f.c) {
                        *o += m * ci;
                    }
                }
                acc
            })
            .collect()
    }
}

/// The truncated Lyapunov–Perron series `φ¹, …, φᴷ`.
#[derive(Debug, Clone)]
pub struct Series {
    atoms: Atoms,
    scheme: Scheme,
    levels: Vec<Level>,
}

impl Series {
    /// Build `K` levels over the atoms at `wavenumbers` (all `|n| ≤ nmax`
    /// when `None`).
    pub fn build(
        table: &ModeTable,
        nmax: usize,
        k: usize,
        scheme: Scheme,
        wavenumbers: Option<&[i64]>,
    ) -> Result<Self> {
        if nmax > table.nmax || nmax > MAX_NMAX {
            return Err(Error::Truncation(format!(
                "series truncation {nmax} exceeds the mode table ({}) or the key range ({MAX_NMAX})",
                table.nmax
            )));
        }
        let params = &table.params;
        let top = params.p as usize * k + 1;
        if k > 0 && top > MAX_DEGREE {
            return Err(Error::Truncation(format!("{k} levels need degree {top} above {MAX_DEGREE}")));
        }
        let all: Vec<i64> = (0..=nmax as i64).collect();
        let atoms = Atoms::new(table, nmax, wavenumbers.unwrap_or(&all));
        let pairs: Vec<(Pair, Pair)> = (-(nmax as i64)..=nmax as i64)
            .map(|n| {
                let md = table.get(n);
                (Pair::unstable(md), Pair::stable(md))
            })
            .collect();
        let mut levels: Vec<Level> = Vec::with_capacity(k);
        for level in 1..=k {
            let dmax = params.p as usize * level + 1;
            let empty = VPoly::new();
            let prev = levels.last().map_or(&empty, |l| &l.terms);
            let u = fields(&atoms, prev, dmax);
            let (g4, g6) = g_series(&u, params, &atoms, dmax);
            let mut rhs: VPoly = vec![BTreeMap::new(); dmax + 1];
            for (d, (t4, t6)) in g4.terms.iter().zip(&g6.terms).enumerate() {
                for (&key, &c) in t4 {
                    rhs[d].entry(key).or_insert(ZERO6)[3] += c;
                }
                for (&key, &c) in t6 {
                    rhs[d].entry(key).or_insert(ZERO6)[5] += c;
                }
            }
            if scheme == Scheme::Full && !prev.is_empty() {
                let drift = center_drift(&atoms, prev, &rhs, dmax);
                for (d, t) in drift.iter().enumerate() {
                    for (&key, c) in t {
                        let e = rhs[d].entry(key).or_insert(ZERO6);
                        for i in 0..6 {
                            e[i] -= c[i];
                        }
                    }
                }
            }
            let mut terms: VPoly = vec![BTreeMap::new(); dmax + 1];
            for (d, t) in rhs.iter().enumerate() {
                for (&key, f) in t {
                    let n = atoms.wavenumber(key);
                    let mu = atoms.mu(key);
                    let (pu, ps) = &pairs[(n + nmax as i64) as usize];
                    let a = mat_vec(&pu.resolvent(mu), f);
                    let b = mat_vec(&ps.resolvent(mu), f);
                    terms[d].insert(key, std::array::from_fn(|i| a[i] + b[i]));
                }
            }
            if term_count(&terms) > MAX_TERMS {
                return Err(Error::Truncation(format!("level {level} has more than {MAX_TERMS} monomials")));
            }
            levels.push(Level::new(&atoms, dmax, terms));
        }
        Ok(Self { atoms, scheme, levels })
    }

    pub fn atoms(&self) -> &Atoms {
        &self.atoms
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn levels(&self) -> usize {
        self.levels.len()
    }

    pub fn nmax(&self) -> usize {
        self.atoms.nmax
    }

    /// Number of monomials per level.
    pub fn term_counts(&self) -> Vec<usize> {
        self.levels.iter().map(|l| term_count(&l.terms)).collect()
    }

    /// Highest degree kept at each level.
    pub fn degrees(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.dmax).collect()
    }

    /// `φᵏ` at the atom values `x` (`k = 0` gives zero).
    pub fn eval_level(&self, k: usize, x: &[Complex64]) -> SpectralState {
        if k == 0 {
            return SpectralState::zeros(self.atoms.nmax);
        }
        let out = self.levels[k - 1].eval(|f| f.ids[..f.deg].iter().map(|&i| x[i as usize]).product());
        to_state(out)
    }

    /// `φᴷ(x)`.
    pub fn eval(&self, x: &[Complex64]) -> SpectralState {
        self.eval_level(self.levels.len(), x)
    }

    /// `Dφᴷ(x)[dx]`.
    pub fn directional(&self, x: &[Complex64], dx: &[Complex64]) -> SpectralState {
        let Some(level) = self.levels.last() else {
            return SpectralState::zeros(self.atoms.nmax);
        };
        let out = level.eval(|f| {
            let a = &f.ids[..f.deg];
            let mut d = Complex64::new(0.0, 0.0);
            for j in 0..a.len() {
                let rest: Complex64 =
                    a.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, &b)| x[b as usize]).product();
                d += rest * dx[a[j] as usize];
            }
            d
        });
        to_state(out)
    }
}

/// The mean mode of a real state is real; rounding residue is dropped.
fn to_state(coeffs: Vec<C6>) -> SpectralState {
    let mut s = SpectralState::zeros(coeffs.len() - 1);
    for (n, c) in coeffs.into_iter().enumerate() {
        s.set(n, c);
    }
    s
}

/// `Dφ·F` with `F_a = z_a·G` collected over monomials at wavenumber `n_a`.
fn center_drift(atoms: &Atoms, phi: &VPoly, g: &VPoly, dmax: usize) -> VPoly {
    let mut f: Vec<Vec<(Key, usize, Complex64)>> = vec![Vec::new(); atoms.len()];
    for (d, t) in g.iter().enumerate() {
        for (&key, gv) in t {
            let n = atoms.wavenumber(key);
            for m in 0..2 {
                let a = atoms.id(n, m);
                if !atoms.active[a] {
                    continue;
                }
                let c: Complex64 = atoms.z[a].iter().zip(gv).map(|(z, g)| z * g).sum();
                f[a].push((key, d, c));
            }
        }
    }
    let mut out: VPoly = vec![BTreeMap::new(); dmax + 1];
    for (dl, t) in phi.iter().enumerate() {
        for (&key, c) in t {
            let mut prev = usize::MAX;
            for a in ids(key) {
                if a == prev {
                    continue;
                }
                prev = a;
                let mult = ids(key).filter(|&i| i == a).count() as f64;
                let rest = key_remove(key, a);
                for &(km, dm, fc) in &f[a] {
                    let d = dl - 1 + dm;
                    if d > dmax {
                        continue;
                    }
                    let s = fc * mult;
                    let e = out[d].entry(key_mul(rest, km)).or_insert(ZERO6);
                    for i in 0..6 {
                        e[i] += s * c[i];
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_merge_sorted() {
        let a = key_mul(single(3), single(1));
        assert_eq!(ids(a).collect::<Vec<_>>(), vec![1, 3]);
        let b = key_mul(a, key_mul(single(2), single(3)));
        assert_eq!(ids(b).collect::<Vec<_>>(), vec![1, 2, 3, 3]);
        assert_eq!(degree(b), 4);
        assert_eq!(ids(key_remove(b, 3)).collect::<Vec<_>>(), vec![1, 2, 3]);
        assert_eq!(key_mul(0, a), a);
    }
}
