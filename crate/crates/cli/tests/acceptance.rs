//! Acceptance suite on the reference parameters `a = 2, b = c = d = 1,
//! p = 1, ω = 3`. Runs every criterion, prints one line each and exits
//! nonzero if any fails.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use bouss_core::cubic::{cauchy_lower_bound, solve_cubic};
use bouss_core::dynamics::{gain_constant, linear_field};
use bouss_core::energy::{coercivity_gammas, energy_e0, energy_e1, mode_coercivity, theta_coefficients};
use bouss_core::hypgreen::{green_s, hyperbolic_solve_k1, K1Config, YGrid};
use bouss_core::manifold::{
    evolve_y, lp_manifold_phi, reconstruction_residual, restrict_r12, BottomVelocity, LPConfig, Manifold,
    ResidualReport, Trajectory,
};
use bouss_core::modes::{max_abs, spectral_gap, symbol_matrix, Mat6, ModeClass, ModeTable};
use bouss_core::params::{derive_params, polynomial_coefficients, Params};
use bouss_core::specspace::{
    norm_h, project, random_center_state, random_state, ModeCoords, Projection, SpectralState, ZERO6,
};
use bouss_core::Error;
use nalgebra::Vector6;
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Signed, Zero};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion<'a> = (u32, &'static str, Box<dyn Fn() -> Outcome + 'a>);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn p0(nmax: usize) -> Params {
    Params::reference(nmax).unwrap()
}

fn table(nmax: usize) -> ModeTable {
    ModeTable::new(&p0(nmax)).unwrap()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn slope(a: (f64, f64), b: (f64, f64)) -> f64 {
    (b.1 / a.1).ln() / (b.0 / a.0).ln()
}

fn criterion_1() -> Outcome {
    let p = derive_params(2.0, 1.0, 1.0, 1.0, 1, 3.0, 64).map_err(|e| e.to_string())?;
    ensure!(
        (p.omega0_sq, p.omega1_sq, p.omega2_sq) == (2.0, 6.0, 3.0),
        "thresholds {} {} {}",
        p.omega0_sq,
        p.omega1_sq,
        p.omega2_sq
    );
    let bad = derive_params(2.0, 1.0, 1.0, 1.0, 1, 2.0, 64);
    ensure!(matches!(bad, Err(Error::Regime { .. })), "omega = 2 gave {bad:?}");
    Ok("omega0^2 = 2, omega1^2 = 6, omega2^2 = 3; omega = 2 rejected".into())
}

fn int(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

fn rat(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap()
}

/// `det(λI − C)` of the companion matrix in exact rational arithmetic.
fn exact_cubic(n: i64) -> [BigRational; 3] {
    let (w2, alpha, gamma, c) = (int(9), BigRational::new(BigInt::from(1), BigInt::from(2)), int(1), int(1));
    let (b, d) = (int(1), int(1));
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

fn criterion_2() -> Outcome {
    let p = p0(256);
    let mut worst: f64 = 0.0;
    for n in 1..=256i64 {
        let r = solve_cubic(&p, n).map_err(|e| e.to_string())?;
        ensure!(r.lambda1 < 0.0, "lambda1({n}) = {}", r.lambda1);
        ensure!(polynomial_coefficients(&p, n).a0 > 0.0, "a0({n}) not positive");
        let mut s = [r.lambda1, r.lambda2.re, r.lambda3.re];
        ensure!(r.lambda2.im == 0.0 && r.lambda3.im == 0.0, "complex roots at n={n}");
        s.sort_by(f64::total_cmp);
        let k = exact_cubic(n);
        let scale = s[2].abs();
        let pad = rat(1e-12 * scale);
        let cuts = [rat(s[0]) - &pad, rat((s[0] + s[1]) / 2.0), rat((s[1] + s[2]) / 2.0), rat(s[2]) + &pad];
        let signs: Vec<BigRational> = cuts.iter().map(|x| eval(&k, x).signum()).collect();
        ensure!(signs[0].is_negative(), "n={n}: no sign change below the smallest root");
        let width = rat(1e-14 * scale);
        for j in 0..3 {
            ensure!(signs[j + 1] == -signs[j].clone(), "n={n}: bracket {j} isolates no root");
            let root = to_f64(&bisect(&k, cuts[j].clone(), cuts[j + 1].clone(), &width));
            worst = worst.max((root - s[j]).abs() / root.abs());
        }
    }
    ensure!(worst < 1e-10, "max relative root error {worst:e}");
    let l1 = solve_cubic(&p, 1).unwrap().lambda1;
    ensure!((l1 + 3.9155).abs() < 1e-3, "lambda1(1) = {l1}");
    Ok(format!("max relative error {worst:.2e} against exact roots, lambda1(1) = {l1:.6}"))
}

fn criterion_3() -> Outcome {
    let p = p0(256);
    let mut margin = f64::INFINITY;
    for n in 1..=256i64 {
        let b = cauchy_lower_bound(&p, n);
        for z in solve_cubic(&p, n).unwrap().all() {
            margin = margin.min(z.norm() / b);
        }
    }
    ensure!(margin >= 1.0, "smallest |root|/bound = {margin}");
    Ok(format!("smallest |root|/bound = {margin:.4}"))
}

fn criterion_4() -> Outcome {
    let t = table(64);
    let (mut zv, mut zav): (f64, f64) = (0.0, 0.0);
    for n in -64..=64i64 {
        let md = t.get(n);
        zv = zv.max(max_abs(&(md.z * md.v - Mat6::identity())));
        let a = symbol_matrix(&t.params, n);
        let d = Mat6::from_diagonal(&Vector6::from_iterator(md.beta));
        let scale = md.beta.iter().map(|b| b.norm()).fold(1.0, f64::max);
        zav = zav.max(max_abs(&(md.z * a * md.v - d)) / scale);
    }
    ensure!(zv < 1e-9, "|ZV - I| = {zv:e}");
    ensure!(zav < 1e-8, "scaled |ZAV - B| = {zav:e}");
    Ok(format!("|ZV - I| = {zv:.2e}, scaled |ZAV - B| = {zav:.2e}"))
}

fn criterion_5() -> Outcome {
    let t = table(64);
    let gap = spectral_gap(&t).map_err(|e| e.to_string())?;
    ensure!(gap.epsilon > 0.0, "epsilon = {}", gap.epsilon);
    for md in t.iter() {
        for (m, class) in md.classification.iter().enumerate() {
            let re = md.beta[m].re;
            let ok = match class {
                ModeClass::Central => re.abs() < 1e-12,
                ModeClass::Unstable => re >= gap.epsilon_all,
                ModeClass::Stable => -re >= gap.epsilon_all,
            };
            ensure!(ok, "n={} m={}: Re beta = {re} for {class:?}", md.n, m + 1);
        }
    }
    let wide = table(256);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for n in 32..=256i64 {
        for b in wide.get(n).beta {
            let r = b.norm() / n as f64;
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    ensure!(lo >= 0.5 && hi <= 2.5, "|beta|/n spans [{lo}, {hi}], outside [0.5, 2.5]");
    Ok(format!("epsilon = {:.6}, |beta|/n in [{lo:.4}, {hi:.4}] for 32 <= n <= 256", gap.epsilon))
}

fn criterion_6() -> Outcome {
    let t = table(256);
    let s1 = t.sigma(1).unwrap();
    let s256 = t.sigma(256).unwrap();
    ensure!((s1 - 3.9155).abs() < 1e-3, "sigma(1) = {s1}");
    ensure!((s256 - 3.5).abs() < 1e-2, "sigma(256) = {s256}");
    Ok(format!("sigma(1) = {s1:.6}, sigma(256) = {s256:.6}"))
}

/// Per-mode projector rebuilt in f64 from the eigenvectors, as an
/// independent path to the double-double projectors.
fn center_projector(md: &bouss_core::modes::ModeData) -> Mat6 {
    let mut p = Mat6::zeros();
    for m in 0..2 {
        let v = md.v_col(m);
        let z = md.z_row(m);
        for i in 0..6 {
            for j in 0..6 {
                p[(i, j)] += v[i] * z[j];
            }
        }
    }
    p
}

fn criterion_7() -> Outcome {
    let t = table(64);
    let pc: Vec<Mat6> = (0..=64).map(|n| center_projector(t.get(n))).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let u = random_state(64, &mut rng);
        let nu = norm_h(&u);
        let c0 = project(&u, &t, Projection::Center);
        let c1 = project(&u, &t, Projection::Hyperbolic);
        c0.validate().map_err(|e| e.to_string())?;
        c1.validate().map_err(|e| e.to_string())?;
        ensure!(c0.has_zero_mean() == u.has_zero_mean(), "mean condition changed");
        let idem0 = norm_h(&project(&c0, &t, Projection::Center).sub(&c0));
        let idem1 = norm_h(&project(&c1, &t, Projection::Hyperbolic).sub(&c1));
        let cross = norm_h(&project(&c0, &t, Projection::Hyperbolic));
        let part = norm_h(&c0.add(&c1).sub(&u));
        let oracle = u.map_modes(|n, v| {
            let p = &pc[n as usize];
            std::array::from_fn(|i| (0..6).map(|j| p[(i, j)] * v[j]).sum())
        });
        let indep = norm_h(&oracle.sub(&c0));
        let au = linear_field(&u, &t.params);
        let commute = norm_h(&project(&au, &t, Projection::Center).sub(&linear_field(&c0, &t.params))) / norm_h(&au);
        worst = worst.max((idem0.max(idem1).max(cross).max(part).max(indep)) / nu).max(commute);
    }
    ensure!(worst < 1e-10, "worst relative defect {worst:e}");
    Ok(format!("worst relative defect {worst:.2e} over 1000 states"))
}

fn single_mode(nmax: usize, n: usize, v: [Complex64; 6]) -> SpectralState {
    let mut s = SpectralState::zeros(nmax);
    s.set(n, v);
    s
}

fn criterion_8() -> Outcome {
    let t = table(16);
    let eps = spectral_gap(&t).unwrap().epsilon_all;

    let md = t.get(1);
    let v = single_mode(16, 1, md.v_col(3));
    let shape = v.scale(1.0 / norm_h(&v)).coeffs()[1];
    let beta = md.beta[3];
    let exact = |y: f64| single_mode(16, 1, shape.map(|z| z * Complex64::new(0.0, y).exp()));
    let forcing = |_: usize, y: f64| {
        single_mode(16, 1, shape.map(|z| z * (Complex64::i() - beta) * Complex64::new(0.0, y).exp()))
    };
    let grid = YGrid::new(20.0 / eps, 1e-3, 0.0).unwrap();
    let sol = hyperbolic_solve_k1(forcing, &t, &grid, &K1Config::default()).map_err(|e| e.to_string())?;
    let mut err: f64 = 0.0;
    for (j, &y) in grid.nodes.iter().enumerate() {
        if y.abs() <= sol.core_radius {
            err = err.max(grid.weight(y) * norm_h(&sol.u[j].sub(&exact(y))));
        }
    }
    ensure!(err < 1e-6, "manufactured error {err:e}");

    let t32 = table(32);
    let eps32 = spectral_gap(&t32).unwrap().epsilon_all;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut fit: f64 = 0.0;
    let samples: Vec<SpectralState> =
        (0..10).map(|_| project(&random_state(32, &mut rng), &t32, Projection::Hyperbolic)).collect();
    let ratio = |u: &SpectralState, y: f64| norm_h(&green_s(u, y, &t32).unwrap()) / norm_h(u) * (eps32 * y.abs()).exp();
    for u in &samples {
        for y in [-1.0, -0.5, -0.1, 0.1, 0.5, 1.0] {
            fit = fit.max(ratio(u, y));
        }
    }
    for u in &samples {
        for j in 1..=40 {
            let y = 0.5 * j as f64;
            ensure!(
                ratio(u, y) <= fit * (1.0 + 1e-9) && ratio(u, -y) <= fit * (1.0 + 1e-9),
                "decay bound broken at y = ±{y}"
            );
        }
    }

    let t8 = table(8);
    let eps8 = spectral_gap(&t8).unwrap().epsilon_all;
    let md = t8.get(2);
    let g0 = c(0.7, -0.2);
    let g = single_mode(8, 2, md.v_col(3).map(|z| z * g0));
    let grid = YGrid::new(30.0 / eps8, 0.05, 0.0).unwrap();
    let sol = hyperbolic_solve_k1(|_, _| g.clone(), &t8, &grid, &K1Config::default()).map_err(|e| e.to_string())?;
    let expect = -g0 / md.beta[3];
    let mut stat: f64 = 0.0;
    for u in &sol.u {
        let sharp = ModeCoords::to_sharp(u, &t8).get(2);
        stat = stat.max((sharp[3] - expect).norm() / expect.norm());
    }
    ensure!(stat < 1e-12, "stationary identity off by {stat:e}");
    Ok(format!("manufactured error {err:.2e}, decay constant C = {fit:.4}, stationary error {stat:.1e}"))
}

fn criterion_9() -> Outcome {
    let t = table(64);
    let (_, m0) = coercivity_gammas(&t).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..1000 {
        let u = random_center_state(64, &t, &mut rng);
        ensure!(u.coeffs()[0][0].norm() == 0.0, "mean of the first component is not zero");
        let e = energy_e0(&u, &t.params).unwrap();
        let h2 = norm_h(&u).powi(2);
        ensure!(h2 / m0 <= e * (1.0 + 1e-12) && e <= m0 * h2 * (1.0 + 1e-12), "E0 = {e}, |U|^2 = {h2}, M0 = {m0}");
    }

    let wide = table(256);
    for n in 1..=256i64 {
        let mc = mode_coercivity(&wide, n);
        ensure!(mc.gamma1 > 0.0 && mc.gamma2 > 0.0, "n={n}: gammas {} {}", mc.gamma1, mc.gamma2);
        let b2 = wide.get(n).roots.lambda1;
        let [t0, t1, t2, t3] = theta_coefficients(&wide.params, n);
        let octic = (((wide.params.c * b2 + t3) * b2 + t2) * b2 + t1) * b2 + t0;
        ensure!(octic >= 0.0 && mc.l1 + mc.l2 >= 0.0, "n={n}: L1 + L2 = {}, octic {octic}", mc.l1 + mc.l2);
    }

    let p = t.params.p as i32;
    let mut cmax: f64 = 0.0;
    let mut slopes = Vec::new();
    for _ in 0..20 {
        let u = random_center_state(64, &t, &mut rng);
        let u = u.scale(1.0 / norm_h(&u));
        let pts: Vec<(f64, f64)> =
            [1e-3, 1e-1].iter().map(|&s| (s, energy_e1(&u.scale(s), &t.params).unwrap().abs())).collect();
        slopes.push(slope(pts[0], pts[1]));
        for &(s, e1) in &pts {
            cmax = cmax.max(e1 / s.powi(p + 2));
        }
    }
    let (lo, hi) = slopes.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &s| (a.min(s), b.max(s)));
    ensure!(lo >= (p + 2) as f64 - 0.1 && hi <= (p + 2) as f64 + 0.1, "E1 slopes in [{lo}, {hi}]");
    Ok(format!("M0 = {m0:.4}; gammas, L1 + L2 positive up to 256; E1 slope {lo:.3}..{hi:.3}, C = {cmax:.3e}"))
}

fn criterion_10() -> Outcome {
    let mut ks = Vec::new();
    for nmax in [16, 32, 64] {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        ks.push(gain_constant(&p0(nmax), nmax, 500, 0.1, &mut rng).map_err(|e| e.to_string())?);
    }
    let lo = ks.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ks.iter().cloned().fold(0.0, f64::max);
    ensure!(hi.is_finite() && lo > 0.0, "constants {ks:?}");
    ensure!(hi / lo < 2.0, "constants vary by {:.3}: {ks:?}", hi / lo);
    Ok(format!("K = {:.4} / {:.4} / {:.4} at nmax 16 / 32 / 64", ks[0], ks[1], ks[2]))
}

fn criterion_11() -> Outcome {
    let t = table(64);
    let cfg = LPConfig::default();
    let zero = lp_manifold_phi(&SpectralState::zeros(64), &t, &cfg).map_err(|e| e.to_string())?;
    ensure!(zero.phi == SpectralState::zeros(64), "phi(0) is not zero");
    let mut sharp = ModeCoords::zeros(64);
    let mut v = ZERO6;
    v[0] = c(1.0, 0.0);
    v[1] = c(0.5, -0.25);
    sharp.set(4, v);
    let dir = sharp.from_sharp(&t);
    let dir = dir.scale(1.0 / norm_h(&dir));
    let amps = [1e-3, 1e-2, 1e-1];
    let mut pts = Vec::new();
    for &s in &amps {
        let xi = dir.scale(s);
        let r = lp_manifold_phi(&xi, &t, &cfg).map_err(|e| e.to_string())?;
        pts.push(((norm_h(&xi)).ln(), norm_h(&r.phi).ln()));
    }
    // Least-squares slope in log-log coordinates.
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let fit = sxy / sxx;
    let target = t.params.p as f64 + 0.9;
    ensure!(fit >= target, "slope {fit} below {target}");
    Ok(format!("phi(0) = 0; log-log slope {fit:.4}"))
}

fn criterion_12() -> Outcome {
    let t = table(16);
    let m = Manifold::new(&t, &LPConfig::default()).map_err(|e| e.to_string())?;
    let th = m.thresholds;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let w = BottomVelocity::random(16, &mut rng);
    let w = w.scale(0.2 * th.delta3 / w.norm());
    let sol = m.solve_initdata_xi(&w, None).map_err(|e| e.to_string())?;
    let res = w.sub(&restrict_r12(&sol.xi.add(&m.phi(&sol.xi)))).norm();
    let contraction = sol.contraction.unwrap_or(0.0);
    ensure!(res < 1e-8, "residual {res:e}");
    ensure!(contraction < 0.5 && th.lipschitz < 0.5, "contraction {contraction}, L = {}", th.lipschitz);
    let big = w.scale(1.01 * th.delta3 / w.norm());
    ensure!(matches!(m.solve_initdata_xi(&big, None), Err(Error::FixedPoint(_))), "no error above delta3");
    Ok(format!(
        "residual {res:.2e}, contraction {contraction:.2e}, L(delta') = {:.3e}, delta3 = {:.4}",
        th.lipschitz, th.delta3
    ))
}

/// The nonlinear run shared by criteria 13 and 14.
fn nonlinear_run(k: usize, dt: f64) -> Result<(Trajectory, ResidualReport), String> {
    let t = table(16);
    let m = Manifold::new(&t, &LPConfig { k, ..LPConfig::default() }).map_err(|e| e.to_string())?;
    let w0 = BottomVelocity::profile(16, 1e-2).map_err(|e| e.to_string())?;
    let tr = evolve_y(&w0, 0.0, 1.0, dt, &m).map_err(|e| e.to_string())?;
    let res = reconstruction_residual(&tr, &m).map_err(|e| e.to_string())?;
    Ok((tr, res))
}

fn criterion_13(base: &Result<(Trajectory, ResidualReport), String>) -> Outcome {
    let t = table(16);
    let m = Manifold::new(&t, &LPConfig { k: 0, ..LPConfig::default() }).map_err(|e| e.to_string())?;
    let mut w = BottomVelocity::zeros(16);
    w.set(3, [c(1e-3, 0.0), c(0.0, 5e-4)]);
    let period = 2.0 * std::f64::consts::PI / t.get(3).beta[0].norm();
    let tr = evolve_y(&w, 0.0, period, period / 1000.0, &m).map_err(|e| e.to_string())?;
    let lin = tr.samples.last().unwrap().w.sub(&w).norm() / w.norm();
    ensure!(lin < 1e-6, "linear period error {lin:e}");

    let (tr, _) = base.as_ref()?;
    let drift = tr.meta.drift.ok_or("no energy recorded")?;
    ensure!(drift < 1e-5, "energy drift {drift:e}");
    let bound = tr.meta.stability_bound.ok_or("no stability bound")?;
    ensure!(tr.meta.max_norm <= bound, "max |U| {} above {bound}", tr.meta.max_norm);
    Ok(format!("linear period error {lin:.2e}; drift {drift:.2e}, max |U| {:.3e} <= {bound:.3e}", tr.meta.max_norm))
}

fn criterion_14(base: &Result<(Trajectory, ResidualReport), String>) -> Outcome {
    let (_, r) = base.as_ref()?;
    ensure!(r.residual <= r.budget, "residual {:e} above budget {:e}", r.residual, r.budget);
    let (_, half) = nonlinear_run(2, 5e-4)?;
    ensure!(half.residual <= half.budget, "dt/2: residual {:e} above budget {:e}", half.residual, half.budget);
    ensure!(half.residual < r.residual, "halving dt: {:e} -> {:e}", r.residual, half.residual);
    let (_, k1) = nonlinear_run(1, 1e-3)?;
    ensure!(k1.residual <= k1.budget, "K=1: residual {:e} above budget {:e}", k1.residual, k1.budget);
    ensure!(r.residual < k1.residual, "K 1 -> 2: {:e} -> {:e}", k1.residual, r.residual);
    Ok(format!(
        "residual {:.3e} <= budget {:.3e}; dt/2 gives {:.3e}; K=1 gives {:.3e}",
        r.residual, r.budget, half.residual, k1.residual
    ))
}

fn criterion_15() -> Outcome {
    let dirs: Vec<tempfile::TempDir> = (0..2).map(|_| tempfile::tempdir().unwrap()).collect();
    let children: Vec<_> = dirs
        .iter()
        .map(|d| {
            Command::new(env!("CARGO_BIN_EXE_bouss"))
                .args(["verify", "--seed", "0", "--out"])
                .arg(d.path())
                .spawn()
                .map_err(|e| e.to_string())
        })
        .collect::<Result<_, _>>()?;
    for mut ch in children {
        let status = ch.wait().map_err(|e| e.to_string())?;
        ensure!(status.success(), "verify exited with {status}");
    }
    let a = std::fs::read(dirs[0].path().join("verify.json")).map_err(|e| e.to_string())?;
    let b = std::fs::read(dirs[1].path().join("verify.json")).map_err(|e| e.to_string())?;
    ensure!(a == b, "reports differ");
    Ok(format!("two reports of {} bytes are identical", a.len()))
}

fn main() {
    let base = nonlinear_run(2, 1e-3);
    let criteria: Vec<Criterion> = vec![
        (1, "regime gate", Box::new(criterion_1)),
        (2, "root correctness", Box::new(criterion_2)),
        (3, "Cauchy bound", Box::new(criterion_3)),
        (4, "eigenstructure", Box::new(criterion_4)),
        (5, "spectral gap", Box::new(criterion_5)),
        (6, "symbol asymptote", Box::new(criterion_6)),
        (7, "projections", Box::new(criterion_7)),
        (8, "Green operator and K1", Box::new(criterion_8)),
        (9, "energy", Box::new(criterion_9)),
        (10, "gain of regularity", Box::new(criterion_10)),
        (11, "manifold tangency", Box::new(criterion_11)),
        (12, "initial-data fixed point", Box::new(criterion_12)),
        (13, "reduced dynamics", Box::new(|| criterion_13(&base))),
        (14, "reconstruction residual", Box::new(|| criterion_14(&base))),
        (15, "determinism", Box::new(criterion_15)),
    ];
    let mut failed = 0;
    for (id, name, f) in &criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {id:>2} {tag} {name}: {detail} [{secs:.1}s]");
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
