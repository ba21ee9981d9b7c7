use std::fs::File;
use std::io::BufWriter;

use bouss_core::manifold::{
    evolve_y, reconstruction_residual, BottomVelocity, LPConfig, Manifold, ResidualReport, Thresholds, TrajectoryMeta,
};
use bouss_core::modes::{spectral_gap, ModeTable};
use bouss_core::params::{regime_report, Params, RegimeReport};
use bouss_core::specspace::StateJson;
use serde::Serialize;

use crate::output::{write_energy_csv, write_regime_csv, write_spectrum_csv, write_symbol_csv};
use crate::{
    load_params, out_path, write_json, CliError, CliResult, CommonArgs, EvolveArgs, DEFAULT_NMAX, EVOLVE_NMAX,
};

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    seed: u64,
    params: &'a Params,
    report: T,
}

fn create(path: &std::path::Path) -> CliResult<BufWriter<File>> {
    let f = File::create(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    Ok(BufWriter::new(f))
}

pub fn regime(args: &CommonArgs) -> CliResult<()> {
    let params = load_params(args.params.as_deref(), args.nmax, DEFAULT_NMAX)?;
    let report: RegimeReport = regime_report(&params);
    write_json(&out_path(&args.out, "regime.json")?, &Envelope { seed: args.seed, params: &params, report: &report })?;
    write_regime_csv(&report, create(&out_path(&args.out, "regime.csv")?)?)
}

pub fn spectrum(args: &CommonArgs) -> CliResult<()> {
    let params = load_params(args.params.as_deref(), args.nmax, DEFAULT_NMAX)?;
    let table = ModeTable::new(&params)?;
    let gap = spectral_gap(&table)?;
    write_spectrum_csv(&table, gap.epsilon, create(&out_path(&args.out, "spectrum.csv")?)?)
}

pub fn symbol(args: &CommonArgs) -> CliResult<()> {
    let params = load_params(args.params.as_deref(), args.nmax, DEFAULT_NMAX)?;
    let table = ModeTable::new(&params)?;
    write_symbol_csv(&table, create(&out_path(&args.out, "symbol.csv")?)?)
}

#[derive(Serialize)]
struct Dump {
    y: f64,
    w: BottomVelocity,
    state: StateJson,
}

#[derive(Serialize)]
struct EvolveReport<'a> {
    seed: u64,
    params: &'a Params,
    amp: f64,
    config: LPConfig,
    thresholds: Thresholds,
    meta: &'a TrajectoryMeta,
    residual: Option<ResidualReport>,
    dumps: Vec<Dump>,
}

/// Writes `trajectory.csv`, `trajectory.json` and, when the energy exists,
/// `energy.csv`.
pub fn evolve(args: &EvolveArgs) -> CliResult<()> {
    let c = &args.common;
    let params = load_params(c.params.as_deref(), Some(c.nmax.unwrap_or(EVOLVE_NMAX)), EVOLVE_NMAX)?;
    let table = ModeTable::new(&params)?;
    let cfg = LPConfig { delta: args.delta, k: args.lp_iters, seed: c.seed, ..LPConfig::default() };
    let manifold = Manifold::new(&table, &cfg)?;
    let w0 = BottomVelocity::profile(params.nmax, args.amp)?;
    let wanted: Vec<f64> = if args.dump_y.is_empty() { vec![args.y0, args.y1] } else { args.dump_y.clone() };
    for &y in &wanted {
        if !(y >= args.y0 && y <= args.y1) {
            return Err(CliError::Usage(format!("dump point y={y} lies outside [{}, {}]", args.y0, args.y1)));
        }
    }
    let traj = evolve_y(&w0, args.y0, args.y1, args.dt, &manifold)?;
    let residual = if traj.samples.len() >= 4 { Some(reconstruction_residual(&traj, &manifold)?) } else { None };
    let dumps = wanted
        .iter()
        .map(|&y| {
            let s = traj
                .samples
                .iter()
                .min_by(|a, b| (a.y - y).abs().total_cmp(&(b.y - y).abs()))
                .expect("trajectory has samples");
            Dump { y: s.y, w: s.w.clone(), state: s.u.to_json() }
        })
        .collect();
    traj.write_csv(create(&out_path(&c.out, "trajectory.csv")?)?)?;
    if params.has_energy() {
        write_energy_csv(&traj, create(&out_path(&c.out, "energy.csv")?)?)?;
    }
    let report = EvolveReport {
        seed: c.seed,
        params: &params,
        amp: args.amp,
        config: cfg,
        thresholds: manifold.thresholds,
        meta: &traj.meta,
        residual,
        dumps,
    };
    write_json(&out_path(&c.out, "trajectory.json")?, &report)
}
