//! Error type shared by every module.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors carry the failing module, the wavenumber when one applies, and the
/// violated condition.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("params: {0}")]
    Domain(String),
    #[error("params: regime violated{}: {condition}", at(*n))]
    Regime { n: Option<i64>, condition: String },
    #[error("cubicroots: degenerate roots at n={n} (relative separation {separation:.3e})")]
    Degenerate { n: i64, separation: f64 },
    #[error("cubicroots: classification failed at n={n}: {condition}")]
    Classification { n: i64, condition: String },
    #[error("modes: eigenvector scaling breaks down at n={n}, m={m} (|theta|={theta:.3e})")]
    SingularScaling { n: i64, m: usize, theta: f64 },
    #[error("modes: spectral gap violated: {0}")]
    Gap(String),
    #[error("specspace: invalid state: {0}")]
    InvalidState(String),
    #[error("dynamics: {0}")]
    Truncation(String),
    #[error("dynamics: input is not a center-space state (hyperbolic part {ratio:.3e} of norm)")]
    NotCenter { ratio: f64 },
    #[error("hypgreen: S(y) is discontinuous at y=0; use the one-sided limit")]
    ZeroY,
    #[error("hypgreen: window too short: tail bound {tail:.3e} exceeds {tol:.3e}")]
    Window { tail: f64, tol: f64 },
    #[error("hypgreen: forcing has center part {ratio:.3e} of norm at y={y}")]
    NotHyperbolic { y: f64, ratio: f64 },
    #[error("hypgreen: discrete residual {value:.3e} exceeds {tol:.3e}")]
    Residual { value: f64, tol: f64 },
    #[error("energy: {0}")]
    Coercivity(String),
    #[error("manifold: bottom velocity has nonzero mean of w1 ({0:.3e})")]
    MeanValue(f64),
    #[error("manifold: the wave symbol is undefined at n=0")]
    ZeroMode,
    #[error("manifold: Lyapunov-Perron iteration does not contract: {0}")]
    Contraction(String),
    #[error("manifold: initial-data fixed point failed: {0}")]
    FixedPoint(String),
    #[error("manifold: stability bound exceeded at y={y}: {norm:.3e} > {bound:.3e}")]
    Stability { y: f64, norm: f64, bound: f64 },
    #[error("io: {0}")]
    Io(String),
}

fn at(n: Option<i64>) -> String {
    match n {
        Some(n) => format!(" at n={n}"),
        None => String::new(),
    }
}

impl Error {
    /// Validation failures (bad parameters, regime) as opposed to numerical
    /// contract failures detected downstream.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::Regime { .. })
    }

    /// Stable name of the error kind, used in machine-readable payloads.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "DomainError",
            Error::Regime { .. } => "RegimeError",
            Error::Degenerate { .. } => "DegenerateError",
            Error::Classification { .. } => "ClassificationError",
            Error::SingularScaling { .. } => "SingularScalingError",
            Error::Gap(_) => "GapError",
            Error::InvalidState(_) => "InvalidStateError",
            Error::Truncation(_) => "TruncationError",
            Error::NotCenter { .. } => "NotCenterError",
            Error::ZeroY => "ZeroYError",
            Error::Window { .. } => "WindowError",
            Error::NotHyperbolic { .. } => "NotHyperbolicError",
            Error::Residual { .. } => "ResidualError",
            Error::Coercivity(_) => "CoercivityError",
            Error::MeanValue(_) => "MeanValueError",
            Error::ZeroMode => "ZeroModeError",
            Error::Contraction(_) => "ContractionError",
            Error::FixedPoint(_) => "FixedPointError",
            Error::Stability { .. } => "StabilityError",
            Error::Io(_) => "IoError",
        }
    }

    /// Module that raised the error.
    pub fn module(&self) -> &'static str {
        match self {
            Error::Domain(_) | Error::Regime { .. } => "params",
            Error::Degenerate { .. } | Error::Classification { .. } => "cubicroots",
            Error::SingularScaling { .. } | Error::Gap(_) => "modes",
            Error::InvalidState(_) => "specspace",
            Error::Truncation(_) | Error::NotCenter { .. } => "dynamics",
            Error::ZeroY | Error::Window { .. } | Error::NotHyperbolic { .. } | Error::Residual { .. } => "hypgreen",
            Error::Coercivity(_) => "energy",
            Error::MeanValue(_)
            | Error::ZeroMode
            | Error::Contraction(_)
            | Error::FixedPoint(_)
            | Error::Stability { .. } => "manifold",
            Error::Io(_) => "io",
        }
    }

    /// Wavenumber at which the failure was detected, when there is one.
    pub fn wavenumber(&self) -> Option<i64> {
        match self {
            Error::Regime { n, .. } => *n,
            Error::Degenerate { n, .. } | Error::Classification { n, .. } | Error::SingularScaling { n, .. } => {
                Some(*n)
            }
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
