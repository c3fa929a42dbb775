use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("energy level {n} is not available for this model")]
    MissingLevel { n: i64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid factorization energies: {0}")]
    InvalidSusyConfig(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature kind {kind} {reason}")]
    KindMismatch { kind: &'static str, reason: &'static str },

    #[error("series not converged after {n_cap} terms (tail estimate {tail:e})")]
    TruncationFailure { n_cap: usize, tail: f64 },

    #[error("negative radicand {value:e} in uncertainty product")]
    NegativeRadicand { value: f64 },

    #[error("matrix dimension {dim} too small (need at least {required})")]
    DimensionTooSmall { dim: usize, required: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid reaches x = {x} inside the guard band {guard} of a potential pole")]
    PoleProximity { x: f64, guard: f64 },

    #[error("seed solution vanishes near x = {locations:?}")]
    ZeroCrossing { locations: Vec<f64> },

    #[error("vanishing denominator in beta recursion near x = {locations:?}")]
    SingularDenominator { locations: Vec<f64> },

    #[error("Wronskian vanishes near x = {locations:?}")]
    SingularWronskian { locations: Vec<f64> },
}

impl Error {
    /// True for failures caused by the inputs rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::MissingLevel { .. }
                | Error::InvalidModel(_)
                | Error::InvalidSusyConfig(_)
                | Error::InvalidParameter(_)
                | Error::KindMismatch { .. }
                | Error::DimensionTooSmall { .. }
                | Error::InvalidGrid(_)
                | Error::PoleProximity { .. }
        )
    }
}
