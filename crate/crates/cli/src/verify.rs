//! The `verify` suite: invariant checks on one parameter set, each drawing
//! from its own stream of a generator seeded by `--seed`.

use bouss_core::cubic::{cauchy_lower_bound, solve_cubic};
use bouss_core::dynamics::gain_constant;
use bouss_core::energy::{coercivity_gammas, energy_e0, mode_coercivity};
use bouss_core::hypgreen::{green_s, hyperbolic_solve_k1, K1Config, YGrid};
use bouss_core::manifold::{
    evolve_y, lp_manifold_phi, reconstruction_residual, restrict_r12, BottomVelocity, LPConfig, Manifold,
};
use bouss_core::modes::{max_abs, spectral_gap, symbol_matrix, Mat6, ModeClass, ModeTable};
use bouss_core::params::{polynomial_coefficients, regime_report, Params};
use bouss_core::specspace::{
    norm_h, project, random_center_state, random_state, ModeCoords, Projection, SpectralState, ZERO6,
};
use bouss_core::Result;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::{load_params, out_path, write_json, CliError, CliResult, CommonArgs, DEFAULT_NMAX, EVOLVE_NMAX};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    pub value: Option<f64>,
    pub tolerance: Option<f64>,
    pub detail: String,
}

/// Measured constants gathered while the checks run.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Constants {
    pub epsilon: Option<f64>,
    pub epsilon_all: Option<f64>,
    pub m0: Option<f64>,
    pub gain_c: Option<f64>,
    pub green_c: Option<f64>,
    pub c_r: Option<f64>,
    pub delta_prime: Option<f64>,
    pub lipschitz: Option<f64>,
    pub delta3: Option<f64>,
    pub tangency_slope: Option<f64>,
    pub drift: Option<f64>,
    pub residual: Option<f64>,
    pub residual_budget: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub params: Params,
    pub manifold_nmax: usize,
    pub passed: bool,
    pub constants: Constants,
    pub checks: Vec<Check>,
}

struct Outcome {
    ok: bool,
    value: Option<f64>,
    tol: Option<f64>,
    detail: String,
}

fn outcome(ok: bool, value: f64, tol: f64, detail: impl Into<String>) -> Result<Option<Outcome>> {
    let tol = tol.is_finite().then_some(tol);
    Ok(Some(Outcome { ok, value: Some(value), tol, detail: detail.into() }))
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

struct Suite {
    checks: Vec<Check>,
}

impl Suite {
    /// `Ok(None)` marks a check that does not apply to these parameters.
    fn run(&mut self, name: &'static str, f: impl FnOnce() -> Result<Option<Outcome>>) {
        let check = match f() {
            Ok(Some(o)) => Check {
                name,
                status: if o.ok { Status::Pass } else { Status::Fail },
                value: o.value,
                tolerance: o.tol,
                detail: o.detail,
            },
            Ok(None) => {
                Check { name, status: Status::Skip, value: None, tolerance: None, detail: "not applicable".into() }
            }
            Err(e) => Check { name, status: Status::Fail, value: None, tolerance: None, detail: e.to_string() },
        };
        self.checks.push(check);
    }
}

fn slope(a: (f64, f64), b: (f64, f64)) -> f64 {
    (b.1 / a.1).ln() / (b.0 / a.0).ln()
}

/// Run every check. Construction of the mode table is the only failure that
/// aborts the suite; anything later is recorded as a failed check.
pub fn run_verify(params: &Params, seed: u64) -> Result<VerifyReport> {
    let nmax = params.nmax;
    let table = ModeTable::new(params)?;
    let mnmax = nmax.min(EVOLVE_NMAX);
    let mtable = ModeTable::new(&params.with_nmax(mnmax)?)?;
    let mut k = Constants::default();
    let mut s = Suite { checks: Vec::new() };

    s.run("regime", || {
        let r = regime_report(params);
        Ok(Some(Outcome { ok: r.valid, value: None, tol: None, detail: format!("{} modes checked", r.rows.len()) }))
    });

    s.run("roots", || {
        let mut worst: f64 = 0.0;
        let mut signs = true;
        for n in 1..=nmax as i64 {
            let r = solve_cubic(params, n)?;
            let c = polynomial_coefficients(params, n);
            signs &= r.lambda1 < 0.0 && c.a0 > 0.0;
            for z in r.all() {
                let val = ((z + c.a2) * z + c.a1) * z + c.a0;
                let m = z.norm();
                let scale = m.powi(3) + c.a2.abs() * m * m + c.a1.abs() * m + c.a0.abs();
                worst = worst.max(val.norm() / scale);
            }
        }
        outcome(signs && worst < 1e-12, worst, 1e-12, "relative backward residual of the cubic at each root")
    });

    s.run("cauchy_bound", || {
        let mut margin = f64::INFINITY;
        for n in 1..=nmax as i64 {
            let b = cauchy_lower_bound(params, n);
            for z in solve_cubic(params, n)?.all() {
                margin = margin.min(z.norm() / b);
            }
        }
        outcome(margin >= 1.0, margin, 1.0, "smallest ratio of root magnitude to the lower bound")
    });

    s.run("eigenstructure", || {
        let (mut zv, mut zav): (f64, f64) = (0.0, 0.0);
        for md in table.iter() {
            zv = zv.max(max_abs(&(md.z * md.v - Mat6::identity())));
            let a = symbol_matrix(params, md.n);
            let diag = Mat6::from_fn(|i, j| if i == j { md.beta[i] } else { Complex64::new(0.0, 0.0) });
            let scale = md.beta.iter().map(|b| b.norm()).fold(1.0, f64::max);
            zav = zav.max(max_abs(&(md.z * a * md.v - diag)) / scale);
        }
        outcome(
            zv < 1e-9 && zav < 1e-8,
            zv.max(zav),
            1e-8,
            format!("max |ZV - I| = {zv:.3e}, scaled |ZAV - B| = {zav:.3e}"),
        )
    });

    s.run("spectral_gap", || {
        let gap = spectral_gap(&table)?;
        k.epsilon = Some(gap.epsilon);
        k.epsilon_all = Some(gap.epsilon_all);
        let mut ok = true;
        for md in table.iter() {
            for (m, class) in md.classification.iter().enumerate() {
                let re = md.beta[m].re;
                ok &= match class {
                    ModeClass::Central => re.abs() < 1e-12,
                    ModeClass::Unstable => re >= gap.epsilon_all,
                    ModeClass::Stable => -re >= gap.epsilon_all,
                };
            }
        }
        outcome(
            ok && gap.epsilon > 0.0,
            gap.epsilon,
            0.0,
            format!("attained at n={}, m={}", gap.argmin_n, gap.argmin_m),
        )
    });

    s.run("projections", || {
        let mut r = rng(seed, 1);
        let mut worst: f64 = 0.0;
        for _ in 0..200 {
            let u = random_state(nmax, &mut r);
            let nu = norm_h(&u);
            let c = project(&u, &table, Projection::Center);
            let h = project(&u, &table, Projection::Hyperbolic);
            let cc = project(&c, &table, Projection::Center);
            let su = project(&u, &table, Projection::Unstable).add(&project(&u, &table, Projection::Stable));
            c.validate()?;
            h.validate()?;
            worst =
                worst.max(norm_h(&cc.sub(&c)) / nu).max(norm_h(&c.add(&h).sub(&u)) / nu).max(norm_h(&su.sub(&h)) / nu);
        }
        outcome(worst < 1e-10, worst, 1e-10, "idempotence and partition of identity on 200 random states")
    });

    s.run("green_decay", || {
        let gn = nmax.min(32);
        let gt = ModeTable::new(&params.with_nmax(gn)?)?;
        let eps = spectral_gap(&gt)?.epsilon_all;
        let mut r = rng(seed, 2);
        let mut fit: f64 = 0.0;
        let mut ok = true;
        for _ in 0..10 {
            let u = project(&random_state(gn, &mut r), &gt, Projection::Hyperbolic);
            let nu = norm_h(&u);
            let ratio = |y: f64| -> Result<f64> { Ok(norm_h(&green_s(&u, y, &gt)?) / nu * (eps * y.abs()).exp()) };
            let mut c: f64 = 0.0;
            for y in [-1.0, -0.5, -0.1, 0.1, 0.5, 1.0] {
                c = c.max(ratio(y)?);
            }
            for j in 1..=40 {
                let y = 0.5 * j as f64;
                ok &= ratio(y)? <= c * (1.0 + 1e-9) && ratio(-y)? <= c * (1.0 + 1e-9);
            }
            fit = fit.max(c);
        }
        k.green_c = Some(fit);
        outcome(ok, fit, f64::INFINITY, "one constant C bounds |S(y)U| e^(eps|y|) on |y| <= 20")
    });

    s.run("k1_manufactured", || {
        let eps = spectral_gap(&mtable)?.epsilon_all;
        let md = mtable.get(1);
        let mut v = SpectralState::zeros(mnmax);
        v.set(1, md.v_col(3));
        let v = v.scale(1.0 / norm_h(&v));
        let shape = v.coeffs()[1];
        let beta = md.beta[3];
        let single = |c: [Complex64; 6]| {
            let mut s = SpectralState::zeros(mnmax);
            s.set(1, c);
            s
        };
        let exact = |y: f64| single(shape.map(|z| z * Complex64::new(0.0, y).exp()));
        let forcing =
            |_: usize, y: f64| single(shape.map(|z| z * (Complex64::i() - beta) * Complex64::new(0.0, y).exp()));
        let grid = YGrid::new(20.0 / eps, 1e-3, 0.0)?;
        let sol = hyperbolic_solve_k1(forcing, &mtable, &grid, &K1Config::default())?;
        let mut err: f64 = 0.0;
        for (j, &y) in grid.nodes.iter().enumerate() {
            if y.abs() <= sol.core_radius {
                err = err.max(norm_h(&sol.u[j].sub(&exact(y))));
            }
        }
        outcome(err < 1e-6, err, 1e-6, format!("sup error on |y| <= {:.3}", sol.core_radius))
    });

    s.run("energy_coercivity", || {
        if !(params.has_energy() && params.stability_regime()) {
            return Ok(None);
        }
        let (_, m0) = coercivity_gammas(&table)?;
        k.m0 = Some(m0);
        let mut ok = (1..=nmax as i64).all(|n| {
            let mc = mode_coercivity(&table, n);
            mc.l1 + mc.l2 >= 0.0
        });
        let mut r = rng(seed, 3);
        for _ in 0..200 {
            let u = random_center_state(nmax, &table, &mut r);
            let e = energy_e0(&u, params)?;
            let h2 = norm_h(&u).powi(2);
            ok &= h2 / m0 <= e * (1.0 + 1e-12) && e <= m0 * h2 * (1.0 + 1e-12);
        }
        outcome(ok, m0, f64::INFINITY, "two-sided bound on 200 center states; L1 + L2 >= 0 on every mode")
    });

    s.run("gain_constant", || {
        let c = gain_constant(params, nmax.min(32), 100, 0.1, &mut rng(seed, 4))?;
        k.gain_c = Some(c);
        outcome(c.is_finite(), c, f64::INFINITY, "largest observed ratio over 100 pairs")
    });

    s.run("tangency", || {
        let cfg = LPConfig { seed, ..LPConfig::default() };
        let mut sharp = ModeCoords::zeros(mnmax);
        let mut v = ZERO6;
        v[0] = Complex64::new(1.0, 0.0);
        v[1] = Complex64::new(0.5, -0.25);
        sharp.set(mnmax.min(4), v);
        let dir = sharp.from_sharp(&mtable);
        let dir = dir.scale(1.0 / norm_h(&dir));
        let mut pts = Vec::new();
        for a in [1e-3, 1e-1] {
            let r = lp_manifold_phi(&dir.scale(a), &mtable, &cfg)?;
            pts.push((a, norm_h(&r.phi)));
        }
        let sl = slope(pts[0], pts[1]);
        k.tangency_slope = Some(sl);
        let tol = params.p as f64 + 0.9;
        outcome(sl >= tol, sl, tol, "log-log slope of |phi(xi)| over amplitudes 1e-3..1e-1")
    });

    let manifold = Manifold::new(&mtable, &LPConfig { seed, ..LPConfig::default() });
    if let Ok(m) = &manifold {
        k.c_r = Some(m.thresholds.c_r);
        k.delta_prime = Some(m.thresholds.delta_prime);
        k.lipschitz = Some(m.thresholds.lipschitz);
        k.delta3 = Some(m.thresholds.delta3);
    }

    s.run("fixed_point", || {
        let m = manifold.as_ref().map_err(Clone::clone)?;
        let th = m.thresholds;
        let w = BottomVelocity::random(mnmax, &mut rng(seed, 5));
        let w = w.scale(0.2 * th.delta3 / w.norm());
        let sol = m.solve_initdata_xi(&w, None)?;
        let res = w.sub(&restrict_r12(&sol.xi.add(&m.phi(&sol.xi)))).norm();
        let contraction = sol.contraction.unwrap_or(0.0);
        let ok = th.lipschitz < 0.5 && contraction < 0.5 && res < 1e-8;
        outcome(ok, res, 1e-8, format!("L(delta') = {:.3e}, contraction {contraction:.3e}", th.lipschitz))
    });

    s.run("linear_period", || {
        if mnmax < 3 {
            return Ok(None);
        }
        let m = Manifold::new(&mtable, &LPConfig { k: 0, seed, ..LPConfig::default() })?;
        let mut w = BottomVelocity::zeros(mnmax);
        w.set(3, [Complex64::new(1e-3, 0.0), Complex64::new(0.0, 5e-4)]);
        let period = 2.0 * std::f64::consts::PI / mtable.get(3).beta[0].norm();
        let tr = evolve_y(&w, 0.0, period, period / 1000.0, &m)?;
        let err = tr.samples.last().expect("samples").w.sub(&w).norm() / w.norm();
        outcome(err < 1e-6, err, 1e-6, "single mode n=3 after one period, nonlinearity off")
    });

    let run = manifold.as_ref().map_err(Clone::clone).and_then(|m| {
        let w0 = BottomVelocity::profile(mnmax, 1e-2)?;
        let tr = evolve_y(&w0, 0.0, 1.0, 1e-3, m)?;
        let res = reconstruction_residual(&tr, m)?;
        Ok((tr, res))
    });

    s.run("energy_drift", || {
        let (tr, _) = run.as_ref().map_err(Clone::clone)?;
        k.drift = tr.meta.drift;
        let bound_ok = tr.meta.stability_bound.is_none_or(|b| tr.meta.max_norm <= b);
        match tr.meta.drift {
            Some(d) => outcome(d < 1e-5 && bound_ok, d, 1e-5, format!("max |U|_H = {:.3e}", tr.meta.max_norm)),
            None => Ok(None),
        }
    });

    s.run("reconstruction_residual", || {
        let (_, res) = run.as_ref().map_err(Clone::clone)?;
        k.residual = Some(res.residual);
        k.residual_budget = Some(res.budget);
        outcome(res.residual <= res.budget, res.residual, res.budget, "discrete dU/dy - (AU + G(U)) against the budget")
    });

    let passed = s.checks.iter().all(|c| c.status != Status::Fail);
    Ok(VerifyReport { seed, params: params.clone(), manifold_nmax: mnmax, passed, constants: k, checks: s.checks })
}

pub fn verify_command(args: &CommonArgs) -> CliResult<()> {
    let params = load_params(args.params.as_deref(), args.nmax, DEFAULT_NMAX)?;
    let report = run_verify(&params, args.seed)?;
    write_json(&out_path(&args.out, "verify.json")?, &report)?;
    if report.passed {
        Ok(())
    } else {
        let failed = report.checks.iter().filter(|c| c.status == Status::Fail).map(|c| c.name.to_string()).collect();
        Err(CliError::ChecksFailed(failed))
    }
}
