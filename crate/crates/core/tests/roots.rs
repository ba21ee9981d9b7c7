use bouss_core::cubic::{cauchy_lower_bound, solve_cubic};
use bouss_core::params::{polynomial_coefficients, Params};
use nalgebra::Matrix3;
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Signed, Zero};

fn rat(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap()
}

fn int(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// Exact coefficients of `det(λI − C)` for the companion matrix of the P0
/// cubic, built from `a = 2, b = c = d = 1, ω = 3` in rational arithmetic.
fn exact_companion(n: i64) -> [BigRational; 3] {
    let (b, c, d) = (int(1), int(1), int(1));
    let w2 = int(9);
    let alpha = BigRational::new(BigInt::from(1), BigInt::from(2));
    let gamma = int(1);
    let n2 = int(n * n);
    let k = &alpha * &b * &d * &w2;
    let cag = &c * &alpha + &gamma;
    let a2 = (&k - int(3)) * &n2 - &cag;
    let a1 = (int(3) - int(2) * &k) * &n2 * &n2 + (int(2) * &cag - &alpha * &w2 * (&b + &d)) * &n2 + &alpha;
    let a0 = &n2
        * ((&k - int(1)) * &n2 * &n2
            + (&alpha * (&d * &w2 - &c) + &gamma * (&b * &c * &alpha * &w2 - int(1))) * &n2
            + &alpha * (&w2 - int(1)));
    [a0, a1, a2]
}

fn eval(k: &[BigRational; 3], x: &BigRational) -> BigRational {
    ((x + &k[2]) * x + &k[1]) * x + &k[0]
}

/// Refine a sign-changing bracket until its width is below `width`.
fn bisect(k: &[BigRational; 3], mut lo: BigRational, mut hi: BigRational, width: &BigRational) -> BigRational {
    let slo = eval(k, &lo).signum();
    while (&hi - &lo) > *width {
        let mid = (&lo + &hi) / int(2);
        let s = eval(k, &mid).signum();
        if s.is_zero() {
            return mid;
        }
        if s == slo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / int(2)
}

fn to_f64(x: &BigRational) -> f64 {
    let scale = BigInt::from(1u64 << 52);
    let q = (x * BigRational::from_integer(scale.clone())).round().to_integer();
    q.to_string().parse::<f64>().unwrap() / scale.to_string().parse::<f64>().unwrap()
}

#[test]
fn roots_match_exact_oracle_up_to_256() {
    let p = Params::reference(256).unwrap();
    for n in 1..=256i64 {
        let r = solve_cubic(&p, n).unwrap();
        assert!(r.lambda1 < 0.0, "n={n}");
        assert!(polynomial_coefficients(&p, n).a0 > 0.0, "n={n}");
        assert_eq!(r.lambda2.im, 0.0);
        let mut s = [r.lambda1, r.lambda2.re, r.lambda3.re];
        s.sort_by(f64::total_cmp);
        let k = exact_companion(n);
        let scale = s[2].abs();
        let pad = rat(1e-12 * scale);
        let cuts = [rat(s[0]) - &pad, rat((s[0] + s[1]) / 2.0), rat((s[1] + s[2]) / 2.0), rat(s[2]) + &pad];
        let signs: Vec<BigRational> = cuts.iter().map(|x| eval(&k, x).signum()).collect();
        assert!(signs[0].is_negative(), "n={n}");
        for j in 0..3 {
            assert_eq!(signs[j + 1], -signs[j].clone(), "n={n}: no isolated root in bracket {j}");
        }
        let width = rat(1e-14 * scale);
        for j in 0..3 {
            let root = to_f64(&bisect(&k, cuts[j].clone(), cuts[j + 1].clone(), &width));
            let rel = (root - s[j]).abs() / root.abs();
            assert!(rel < 1e-10, "n={n} root {j}: {} vs oracle {root}, rel {rel:e}", s[j]);
        }
    }
}

#[test]
fn companion_eigenvalues_agree_coarsely() {
    let p = Params::reference(256).unwrap();
    for n in [1i64, 2, 5, 17, 64, 256] {
        let k = polynomial_coefficients(&p, n);
        let c = Matrix3::new(0.0, 0.0, -k.a0, 1.0, 0.0, -k.a1, 0.0, 1.0, -k.a2);
        let mut eig: Vec<f64> = c.complex_eigenvalues().iter().map(|z| z.re).collect();
        eig.sort_by(f64::total_cmp);
        let r = solve_cubic(&p, n).unwrap();
        let mut s = [r.lambda1, r.lambda2.re, r.lambda3.re];
        s.sort_by(f64::total_cmp);
        for j in 0..3 {
            assert!((eig[j] - s[j]).abs() < 1e-6 * s[2].abs(), "n={n}");
        }
    }
}

#[test]
fn first_root_pinned() {
    let r = solve_cubic(&Params::reference(4).unwrap(), 1).unwrap();
    assert!((r.lambda1 + 3.9155).abs() < 1e-3);
}

#[test]
fn cauchy_bound_holds_up_to_256() {
    let p = Params::reference(256).unwrap();
    for n in 1..=256i64 {
        let bound = cauchy_lower_bound(&p, n);
        for z in solve_cubic(&p, n).unwrap().all() {
            assert!(z.norm() >= bound, "n={n}: |λ| = {} below {bound}", z.norm());
        }
    }
}

#[test]
fn negative_wavenumbers_mirror() {
    let p = Params::reference(8).unwrap();
    for n in 1..=8 {
        let a = solve_cubic(&p, n).unwrap();
        let b = solve_cubic(&p, -n).unwrap();
        assert_eq!(a.all(), b.all());
    }
}
