//! Double-double real and complex scalars.
//!
//! The two hyperbolic roots of the cubic approach each other like `O(n⁻²)`
//! relative to their size, so the eigenbasis of the symbol is increasingly
//! ill-conditioned. Roots, eigenvectors and projectors are therefore built in
//! double-double arithmetic and rounded only once products are well scaled.
//!
//! Algorithms follow Joldes, Muller and Popescu, "Tight and rigorous error
//! bounds for basic building blocks of double-word arithmetic" (2017), with
//! the error-free product taken from `f64::mul_add`.

use std::cmp::Ordering;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;

/// Unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    Dd { hi: s, lo: (a - (s - bb)) + (b - bb) }
}

#[inline]
fn fast_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

#[inline]
fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    Dd { hi: p, lo: a.mul_add(b, -p) }
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    #[inline]
    pub fn hi(self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn lo(self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn abs(self) -> Dd {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    #[inline]
    fn mul_f64(self, b: f64) -> Dd {
        let c = two_prod(self.hi, b);
        fast_two_sum(c.hi, self.lo.mul_add(b, c.lo))
    }

    pub fn sqrt(self) -> Dd {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 { Dd::ZERO } else { Dd { hi: f64::NAN, lo: f64::NAN } };
        }
        let q = self.hi.sqrt();
        let r = self - two_prod(q, q);
        fast_two_sum(q, r.hi / (2.0 * q))
    }
}

impl From<f64> for Dd {
    #[inline]
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            o => o,
        }
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, y: Dd) -> Dd {
        let s = two_sum(self.hi, y.hi);
        let t = two_sum(self.lo, y.lo);
        let v = fast_two_sum(s.hi, s.lo + t.hi);
        fast_two_sum(v.hi, t.lo + v.lo)
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, y: Dd) -> Dd {
        self + (-y)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, y: Dd) -> Dd {
        let c = two_prod(self.hi, y.hi);
        let t = self.hi.mul_add(y.lo, self.lo * y.lo);
        let cl = self.lo.mul_add(y.hi, t);
        fast_two_sum(c.hi, c.lo + cl)
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, y: Dd) -> Dd {
        let q1 = self.hi / y.hi;
        let r = self - y.mul_f64(q1);
        let q2 = r.hi / y.hi;
        let r = r - y.mul_f64(q2);
        let q3 = r.hi / y.hi;
        fast_two_sum(q1, q2) + Dd::from(q3)
    }
}

impl AddAssign for Dd {
    #[inline]
    fn add_assign(&mut self, y: Dd) {
        *self = *self + y;
    }
}

impl SubAssign for Dd {
    #[inline]
    fn sub_assign(&mut self, y: Dd) {
        *self = *self - y;
    }
}

impl MulAssign for Dd {
    #[inline]
    fn mul_assign(&mut self, y: Dd) {
        *self = *self * y;
    }
}

/// Complex double-double.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Cdd {
    pub re: Dd,
    pub im: Dd,
}

impl Cdd {
    #[inline]
    pub fn new(re: Dd, im: Dd) -> Self {
        Cdd { re, im }
    }

    #[inline]
    pub fn conj(self) -> Cdd {
        Cdd { re: self.re, im: -self.im }
    }

    #[inline]
    pub fn norm_sqr(self) -> Dd {
        self.re * self.re + self.im * self.im
    }

    #[inline]
    pub fn scale(self, s: Dd) -> Cdd {
        Cdd { re: self.re * s, im: self.im * s }
    }
}

impl Neg for Cdd {
    type Output = Cdd;
    #[inline]
    fn neg(self) -> Cdd {
        Cdd { re: -self.re, im: -self.im }
    }
}

impl Add for Cdd {
    type Output = Cdd;
    #[inline]
    fn add(self, y: Cdd) -> Cdd {
        Cdd { re: self.re + y.re, im: self.im + y.im }
    }
}

impl Sub for Cdd {
    type Output = Cdd;
    #[inline]
    fn sub(self, y: Cdd) -> Cdd {
        Cdd { re: self.re - y.re, im: self.im - y.im }
    }
}

impl Mul for Cdd {
    type Output = Cdd;
    #[inline]
    fn mul(self, y: Cdd) -> Cdd {
        Cdd { re: self.re * y.re - self.im * y.im, im: self.re * y.im + self.im * y.re }
    }
}

impl Div for Cdd {
    type Output = Cdd;
    fn div(self, y: Cdd) -> Cdd {
        let den = y.norm_sqr();
        let num = self * y.conj();
        Cdd { re: num.re / den, im: num.im / den }
    }
}

impl AddAssign for Cdd {
    #[inline]
    fn add_assign(&mut self, y: Cdd) {
        *self = *self + y;
    }
}

impl SubAssign for Cdd {
    #[inline]
    fn sub_assign(&mut self, y: Cdd) {
        *self = *self - y;
    }
}

impl MulAssign for Cdd {
    #[inline]
    fn mul_assign(&mut self, y: Cdd) {
        *self = *self * y;
    }
}

pub type Vec6dd = [Cdd; 6];
pub type Mat6dd = [[Cdd; 6]; 6];

#[inline]
pub fn dd(x: f64) -> Dd {
    Dd::from(x)
}

#[inline]
pub fn cdd(z: Complex64) -> Cdd {
    Cdd::new(dd(z.re), dd(z.im))
}

#[inline]
pub fn cdd_re(x: Dd) -> Cdd {
    Cdd::new(x, Dd::ZERO)
}

#[inline]
pub fn to_f64(x: Dd) -> f64 {
    x.to_f64()
}

#[inline]
pub fn to_c64(z: Cdd) -> Complex64 {
    Complex64::new(z.re.to_f64(), z.im.to_f64())
}

#[inline]
pub fn czero() -> Cdd {
    Cdd::default()
}

/// `i·n` as a complex double-double.
#[inline]
pub fn i_times(n: f64) -> Cdd {
    Cdd::new(Dd::ZERO, dd(n))
}

pub fn abs(z: Cdd) -> Dd {
    z.norm_sqr().sqrt()
}

/// Principal square root (`Re ≥ 0`, and `Im ≥ 0` on the negative real axis).
pub fn csqrt(z: Cdd) -> Cdd {
    let zero = Dd::ZERO;
    if z.im == zero {
        return if z.re >= zero { Cdd::new(z.re.sqrt(), zero) } else { Cdd::new(zero, (-z.re).sqrt()) };
    }
    let two = dd(2.0);
    let t = ((abs(z) + z.re.abs()) / two).sqrt();
    if z.re >= zero {
        Cdd::new(t, z.im / (two * t))
    } else {
        let im = if z.im >= zero { t } else { -t };
        Cdd::new(z.im.abs() / (two * t), im)
    }
}

pub fn dot(a: &Vec6dd, b: &Vec6dd) -> Cdd {
    let mut s = czero();
    for k in 0..6 {
        s += a[k] * b[k];
    }
    s
}

pub fn outer(col: &Vec6dd, row: &Vec6dd) -> Mat6dd {
    let mut m = [[czero(); 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            m[i][j] = col[i] * row[j];
        }
    }
    m
}

pub fn mat_add(a: &Mat6dd, b: &Mat6dd) -> Mat6dd {
    let mut m = *a;
    for i in 0..6 {
        for j in 0..6 {
            m[i][j] += b[i][j];
        }
    }
    m
}

pub fn mat_scale(a: &Mat6dd, s: Cdd) -> Mat6dd {
    let mut m = *a;
    for row in m.iter_mut() {
        for x in row.iter_mut() {
            *x *= s;
        }
    }
    m
}

pub fn mat_vec(a: &Mat6dd, v: &Vec6dd) -> Vec6dd {
    let mut out = [czero(); 6];
    for i in 0..6 {
        out[i] = dot(&a[i], v);
    }
    out
}

pub fn mat_vec_f64(a: &Mat6dd, v: &[Complex64; 6]) -> Vec6dd {
    mat_vec(a, &v.map(cdd))
}

pub fn round_mat(a: &Mat6dd) -> nalgebra::Matrix6<Complex64> {
    nalgebra::Matrix6::from_fn(|i, j| to_c64(a[i][j]))
}
