use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    /// A disentangling coefficient grew past the blow-up threshold.
    #[error("disentangling singularity: |coefficient| exceeded {threshold:e} at t = {t}")]
    Blowup { t: f64, threshold: f64 },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    Tolerance { t: f64, h: f64 },

    #[error("exponent overflow while assembling channel: {0}")]
    Overflow(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix is not an X-state: {0}")]
    Shape(String),

    #[error("negative diagonal element rho[{index}][{index}] = {value:e}")]
    NegativeDiagonal { index: usize, value: f64 },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("grid error: {0}")]
    Grid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
