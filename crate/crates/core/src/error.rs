use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("pole of {func} at {at}")]
    Pole { func: &'static str, at: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("root finding failed: {0}")]
    Roots(String),

    #[error("exceptional angle: integer {m} coincides with a kernel zero (|sigma - m| = {gap:.3e})")]
    ExceptionalAngle { m: i64, gap: f64 },

    #[error("truncation too small: delta^Re(s_N) = {bound:.3e} exceeds {tol:.1e}")]
    Truncation { bound: f64, tol: f64 },

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("no second eigen-solution for alpha = {alpha} (requires alpha above the threshold)")]
    NoSecondRoot { alpha: f64 },

    #[error("{side} factor requested outside its half-plane at {at}")]
    WrongHalfPlane { side: &'static str, at: String },

    #[error("cache i/o: {0}")]
    Cache(String),
}

impl Error {
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Invalid(_) | Error::NoSecondRoot { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
