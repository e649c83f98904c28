//! Error type shared by all modules.

/// Errors produced by validation, numerical routines and searches.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("density matrix trace is {trace}, expected 1")]
    TraceNotOne { trace: f64 },

    #[error("state vector norm is {norm}, expected 1")]
    StateNotNormalized { norm: f64 },

    #[error("state vector is numerically zero and cannot be normalized")]
    DegenerateState,

    #[error("eigensolver failed to converge")]
    SolverFailure,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension {dim} outside the supported range 1..=256")]
    DimensionOutOfRange { dim: usize },

    #[error("transmissivity/efficiency {eta} outside [0, 1]")]
    EtaOutOfRange { eta: f64 },

    #[error("event {index} has probability at or below the floor; the state assigns zero probability to an observed event")]
    ZeroProbability { index: usize },

    #[error("exponentiation overflow: argument {argument} too large")]
    Overflow { argument: f64 },

    #[error("fixed-point update is degenerate: normalization trace below the floor")]
    DegenerateUpdate,

    #[error("gradient operator has non-positive top eigenvalue; fixed-point update is degenerate")]
    NonPositiveUpdate,

    #[error("negative argument {value} where a nonnegative value is required")]
    NegativeArgument { value: f64 },

    #[error("probability {p} outside the open interval (0, 1)")]
    ProbabilityOutOfRange { p: f64 },

    #[error("no multiplier below magnitude {limit:e} reaches the interval threshold; the observable may be uninformative for this dataset")]
    BracketFailure { limit: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// Machine-readable code, stable across releases.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotHermitian { .. } => "not_hermitian",
            Error::NotPositive { .. } => "not_positive",
            Error::TraceNotOne { .. } => "trace_not_one",
            Error::StateNotNormalized { .. } => "state_not_normalized",
            Error::DegenerateState => "degenerate_state",
            Error::SolverFailure => "solver_failure",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::DimensionOutOfRange { .. } => "dimension_out_of_range",
            Error::EtaOutOfRange { .. } => "eta_out_of_range",
            Error::ZeroProbability { .. } => "zero_probability",
            Error::Overflow { .. } => "overflow",
            Error::DegenerateUpdate => "degenerate_update",
            Error::NonPositiveUpdate => "non_positive_update",
            Error::NegativeArgument { .. } => "negative_argument",
            Error::ProbabilityOutOfRange { .. } => "probability_out_of_range",
            Error::BracketFailure { .. } => "bracket_failure",
            Error::InvalidParameter(_) => "invalid_parameter",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
