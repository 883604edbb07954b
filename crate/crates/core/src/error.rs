use thiserror::Error;

/// Errors raised by the core simulation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("sector mismatch: {0}")]
    SectorMismatch(String),

    #[error("no multiplet l={l} with m={m} for N={n_sites} (degeneracy index {index})")]
    NoSuchMultiplet {
        n_sites: usize,
        l: usize,
        m: usize,
        index: usize,
    },

    #[error("per-site cutoff {cutoff} would clip a state with {excitations} excitations")]
    TruncationOverflow { cutoff: usize, excitations: usize },

    #[error("unsupported combination: {0}")]
    UnsupportedCombination(String),

    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("integrator step size underflow at t={t}")]
    StepSizeFailure { t: f64 },

    #[error("propagation tolerance exceeded: norm drift {drift:e} at step {step}")]
    PropagationTolerance { drift: f64, step: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
