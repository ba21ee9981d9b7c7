//! The `bouss` command line: argument parsing, the five subcommands and the
//! mapping from failures to exit codes.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use bouss_core::params::{Params, ParamsFile};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

mod commands;
pub mod output;
pub mod verify;

pub use commands::{evolve, regime, spectrum, symbol};

/// Exit status for success.
pub const EXIT_OK: i32 = 0;
/// Bad arguments, missing files, unwritable outputs.
pub const EXIT_USAGE: i32 = 1;
/// Parameters outside the domain or the admissible regime.
pub const EXIT_VALIDATION: i32 = 2;
/// A numerical contract failed downstream of validation.
pub const EXIT_NUMERICAL: i32 = 3;

/// Reference truncation when neither the flag nor a parameter file sets one.
pub const DEFAULT_NMAX: usize = 64;
/// Truncation used by `evolve` and the manifold checks unless `--nmax` is given.
pub const EVOLVE_NMAX: usize = 16;

#[derive(Debug, Parser)]
#[command(name = "bouss", version, about = "Spatial dynamics of periodic Boussinesq travelling waves")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Regime thresholds and the per-mode sign table (JSON and CSV).
    Regime(CommonArgs),
    /// Roots, eigenvalues, classification and gap per wavenumber (CSV).
    Spectrum(CommonArgs),
    /// The zero-order symbol of the reduced wave equation (CSV).
    Symbol(CommonArgs),
    /// Integrate the reduced equation and reconstruct the full state.
    Evolve(EvolveArgs),
    /// Run the invariant suite and write a pass/fail report.
    Verify(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Parameter file (JSON). Defaults to the reference set.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Truncation; overrides the parameter file.
    #[arg(long)]
    pub nmax: Option<usize>,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Seed for randomized checks.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value_t = 0.0)]
    pub y0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub y1: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Amplitude of the initial bottom-velocity profile.
    #[arg(long, default_value_t = 1e-2)]
    pub amp: f64,
    /// Picard levels of the manifold map.
    #[arg(long = "lp-iters", default_value_t = 2)]
    pub lp_iters: usize,
    /// Cutoff radius of the manifold map.
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    /// y values at which full states are dumped (comma separated).
    #[arg(long = "dump-y", value_delimiter = ',')]
    pub dump_y: Vec<f64>,
}

/// Failure of a command, before it is mapped to an exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(bouss_core::Error),
    /// The verify suite ran but at least one check failed.
    ChecksFailed(Vec<String>),
}

impl From<bouss_core::Error> for CliError {
    fn from(e: bouss_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(bouss_core::Error::Io(_)) => EXIT_USAGE,
            CliError::Core(e) if e.is_validation() => EXIT_VALIDATION,
            CliError::Core(_) | CliError::ChecksFailed(_) => EXIT_NUMERICAL,
        }
    }

    /// Machine-readable payload written to stderr.
    pub fn payload(&self) -> ErrorPayload {
        match self {
            CliError::Usage(m) => ErrorPayload { error: "UsageError", module: "cli", n: None, condition: m.clone() },
            CliError::Core(e) => {
                ErrorPayload { error: e.kind(), module: e.module(), n: e.wavenumber(), condition: e.to_string() }
            }
            CliError::ChecksFailed(names) => ErrorPayload {
                error: "VerifyFailed",
                module: "cli",
                n: None,
                condition: format!("failed checks: {}", names.join(", ")),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorPayload {
    pub error: &'static str,
    pub module: &'static str,
    pub n: Option<i64>,
    pub condition: String,
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Parse, configure the thread pool, dispatch, and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Err(e) = configure_threads() {
        return report_error(&e);
    }
    match dispatch(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => report_error(&e),
    }
}

fn report_error(e: &CliError) -> i32 {
    let payload = serde_json::to_string(&e.payload()).unwrap_or_else(|_| "{}".into());
    eprintln!("{payload}");
    e.exit_code()
}

/// Honour `BOUSS_THREADS` by sizing the global rayon pool.
fn configure_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("BOUSS_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("BOUSS_THREADS must be a positive integer, got {v:?}")))?;
    if n == 0 {
        return Err(CliError::Usage("BOUSS_THREADS must be at least 1".into()));
    }
    // A pool that already exists (repeated calls in one process) is kept.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn dispatch(cmd: &Command) -> CliResult<()> {
    match cmd {
        Command::Regime(a) => regime(a),
        Command::Spectrum(a) => spectrum(a),
        Command::Symbol(a) => symbol(a),
        Command::Evolve(a) => evolve(a),
        Command::Verify(a) => verify::verify_command(a),
    }
}

/// Load and validate the parameter set, applying `nmax` on top of the file.
pub fn load_params(path: Option<&Path>, nmax: Option<usize>, fallback_nmax: usize) -> CliResult<Params> {
    let file = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
            ParamsFile::from_json(&text)?
        }
        None => ParamsFile { a: 2.0, b: 1.0, c: 1.0, d: 1.0, p: 1, omega: 3.0, nmax: fallback_nmax },
    };
    let nmax = nmax.unwrap_or(file.nmax);
    Ok(ParamsFile { nmax, ..file }.derive()?)
}

/// Create the output directory and return the path of `name` inside it.
pub(crate) fn out_path(dir: &Path, name: &str) -> CliResult<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| CliError::Usage(format!("{}: {e}", dir.display())))?;
    Ok(dir.join(name))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}
