use thiserror::Error;

/// Errors raised by geometry, quadrature and inequality evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("sphere dimension must be at least {min}, got {got}")]
    Dimension { got: usize, min: usize },

    #[error("angle theta_{index} = {value} is outside its coordinate range")]
    AngleOutOfRange { index: usize, value: f64 },

    #[error("coordinate singularity: scale factor h_{index} = {value:e} at {point:?}")]
    Degenerate {
        index: usize,
        value: f64,
        point: Vec<f64>,
    },

    #[error("radial distance {0} is not in the open interval (0, pi)")]
    RadialDomain(f64),

    #[error("non-finite integrand value at {0}")]
    NonFinite(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
