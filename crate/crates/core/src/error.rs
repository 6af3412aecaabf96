use thiserror::Error;

/// Errors raised by the pricing engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Invalid configuration: dimensions, grids, parameter ranges.
    #[error("configuration error: {0}")]
    Config(String),

    /// An argument lies outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical procedure failed to converge or a consistency check failed.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// The result is not representable; the message names the scaled alternative.
    #[error("range error: {0}")]
    Range(String),

    /// An integrand produced a non-finite value.
    #[error("integrand returned {value} at point {index}")]
    Evaluation { index: usize, value: f64 },

    /// The operation needs a component that was not supplied.
    #[error("unsupported operation: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("probability {p} outside (0, 1)")))
    }
}
