use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("quadrature did not converge on [{a}, {b}]: achieved error {achieved:e}")]
    QuadratureFailure { a: f64, b: f64, achieved: f64 },
    #[error("step size collapsed at r = {r}")]
    StepCollapse { r: f64 },
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
