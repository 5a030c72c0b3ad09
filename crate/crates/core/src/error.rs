use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("transform is not symplectic (residual {0:.3e})")]
    NotSymplectic(f64),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("mode index {index} out of range for {n_modes} modes")]
    ModeIndex { index: usize, n_modes: usize },

    #[error("duplicate mode index {0}")]
    DuplicateMode(usize),

    #[error("invalid gain {0}: amplifier gain must be >= 1")]
    InvalidGain(f64),

    #[error("invalid cloner shape {n} -> {m}: need 1 <= N <= M")]
    InvalidShape { n: usize, m: usize },

    #[error("invalid noise variance {0}: must be > 0")]
    InvalidNoise(f64),

    #[error("invalid variance {0}: must be > 0")]
    InvalidVariance(f64),

    #[error("protocol requires squeezing (v < 1/2), got v = {0}")]
    NoSqueezing(f64),

    #[error("grid too small: boundary mass {boundary_mass:.3e} exceeds {limit:.1e}")]
    GridTooSmall { boundary_mass: f64, limit: f64 },

    #[error("invalid grid parameters: {0}")]
    InvalidGrid(String),

    #[error("too few samples: need at least {needed}, got {found}")]
    TooFewSamples { needed: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
