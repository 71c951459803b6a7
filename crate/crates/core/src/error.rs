use thiserror::Error;

use crate::kernels::KernelError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Kernel(#[from] KernelError),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("degenerate geometry: constant {0} is not finite")]
    DegenerateGeometry(String),

    #[error("horizon exceeded at t = {t:e}: {what}")]
    HorizonExceeded { t: f64, what: String },

    #[error("{stage} iteration did not converge in {iterations} steps (last increment {last:e}); try a smaller sigma or relaxation")]
    NoConvergence {
        stage: &'static str,
        iterations: usize,
        last: f64,
        ratios: Vec<f64>,
    },

    #[error("point y = {y} lies outside [{lo}, {hi}] at t = {t:e}")]
    OutOfDomain { y: f64, lo: f64, hi: f64, t: f64 },

    #[error("inversion denominator {value:e} is not positive at t = {t:e}")]
    InversionSingularity { t: f64, value: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("finite-difference solver blew up at t = {t:e}: {reason}")]
    BlowUp { t: f64, reason: String },

    #[error("configuration error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Config { line: Option<usize>, message: String },

    #[error("unknown configuration keys: {}", .0.join(", "))]
    UnknownKeys(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
