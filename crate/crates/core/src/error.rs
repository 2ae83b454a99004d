use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("validation error: {0}")]
    Validation(String),

    /// The master-equation integrator lost trace or Hermiticity.
    #[error("integration diverged: {0}; try more steps per segment")]
    IntegrationDiverged(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
