use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{what}: argument {value} is outside the domain")]
    Domain { what: &'static str, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid too coarse: node spacing {spacing:.4} exceeds {limit}")]
    Resolution { spacing: f64, limit: f64 },

    #[error("kernel calibration failed: ratio dispersion B/A = {dispersion:.3e}")]
    CalibrationFailure { dispersion: f64 },

    #[error("bad data: {0}")]
    Data(String),

    #[error("profile changes sign at r = {radius:.4}; eigenvalue {lambda} is too large")]
    EigenvalueTooLarge { lambda: f64, radius: f64 },

    #[error("not a super-solution: residual {residual:.3e} at r = {radius:.4} (tolerance {tol:.3e})")]
    NotSupersolution { radius: f64, residual: f64, tol: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("integral diverges: {0}")]
    Divergence(String),

    #[error("positivity violated at t = {time:.6}: min value {value:.3e}")]
    PositivityViolation { time: f64, value: f64 },

    #[error("exhaustion monotonicity violated between levels {level} and {next}: excess {excess:.3e}")]
    Monotonicity { level: usize, next: usize, excess: f64 },

    #[error("quadrature audit failed: {0}")]
    Quadrature(String),

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
