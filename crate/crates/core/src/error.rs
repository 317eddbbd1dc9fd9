use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// Inversion at or above threshold; every below-threshold integral diverges.
    #[error("inversion N = {inversion} is not below threshold N_th = {threshold}")]
    AboveThreshold { inversion: f64, threshold: f64 },

    #[error("quadrature did not converge after {subdivisions} subdivisions (estimate {value}, error {error})")]
    NonConvergence {
        subdivisions: usize,
        value: f64,
        error: f64,
    },

    #[error("spectral densities are sampled on different grids")]
    GridMismatch,

    #[error("spectrum does not decay at the grid edge (edge/peak = {ratio:.3e})")]
    TailTruncation { ratio: f64 },

    #[error("time step too large: gamma_P * dt = {product} exceeds {limit}")]
    StepTooLarge { product: f64, limit: f64 },

    #[error("need at least {required} records, got {got}")]
    TooFewRecords { required: usize, got: usize },

    #[error("invalid sweep specification: {0}")]
    InvalidSpec(String),

    #[error("io: {0}")]
    Io(String),

    #[error("parse: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
