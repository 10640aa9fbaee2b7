use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A model parameter violates its domain.
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    /// The recovery SDE has no proper stationary Beta law (σ_R = 0 or κ_R = 0).
    #[error("degenerate recovery: {0}")]
    DegenerateRecovery(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// The RBF collocation matrix of a stencil is numerically singular.
    #[error(
        "shape parameter too small: collocation condition number {condition:.3e} exceeds \
         {threshold:.1e} (increase epsilon*h)"
    )]
    ShapeParameter { condition: f64, threshold: f64 },

    #[error("invalid stencil: {0}")]
    InvalidStencil(String),

    /// Explicit time stepping produced non-finite values.
    #[error("time march became unstable at step {step} of {steps} (dt = {dt})")]
    Stability { step: usize, steps: usize, dt: f64 },

    #[error("invalid time grid: {0}")]
    InvalidTimeGrid(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    /// Premium leg annuity is not positive, so no par spread exists.
    #[error("degenerate annuity: premium leg value {0} is not positive")]
    DegenerateAnnuity(f64),

    #[error("correlation factorization failed: {0}")]
    Factorization(String),

    #[error("invalid Monte Carlo configuration: {0}")]
    InvalidMcConfig(String),

    #[error("configuration error: {0}")]
    Config(String),

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
