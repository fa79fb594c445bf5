use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid signal: {0}")]
    InvalidSignal(String),

    #[error("signal window [{start:.6e}, {end:.6e}) s lies outside the {duration:.6e} s observation")]
    WindowOutsideGrid { start: f64, end: f64, duration: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("SNR undefined: signal has no nonzero sample")]
    ZeroSignal,

    #[error("invalid receiver configuration: {0}")]
    InvalidConfig(String),

    #[error("NUFFT tolerance {0:e} cannot be reached with a double-precision Gaussian kernel")]
    UnreachableTolerance(f64),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("dense sensing model capped at N = {cap}, got N = {n}; use the fast pipeline for this size")]
    DenseCapExceeded { n: usize, cap: usize },

    #[error("pulse-train autocorrelation is identically zero")]
    ZeroPulseAutocorr,

    #[error("invalid policy: {0}")]
    InvalidPolicy(String),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("scene parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
