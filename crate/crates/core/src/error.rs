use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates its invariant.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },

    /// An argument is outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("state space of {states} states exceeds the cap of {cap}")]
    Capacity { states: u128, cap: usize },

    /// The chain has states that cannot reach (or be reached from) state 0.
    #[error("generator is not irreducible: {unreached} of {dim} states not strongly connected to (0,0)")]
    Reducible { unreached: usize, dim: usize },

    #[error("singular system after normalization (pivot ratio {pivot_ratio:.3e} at column {column})")]
    Singular { column: usize, pivot_ratio: f64 },

    #[error("stationary vector has entry {value:.3e} at index {index} below the clamp threshold")]
    Negative { index: usize, value: f64 },

    #[error("residual {residual:.3e} exceeds tolerance {tolerance:.1e}")]
    Residual { residual: f64, tolerance: f64 },

    #[error("non-finite value in stationary vector")]
    NonFinite,

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerical pipeline (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Reducible { .. }
                | Error::Singular { .. }
                | Error::Negative { .. }
                | Error::Residual { .. }
                | Error::NonFinite
        )
    }
}
