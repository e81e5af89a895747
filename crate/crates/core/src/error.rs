use thiserror::Error;

/// Errors raised anywhere in the simulation stack.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max |M - M^dagger| = {asymmetry:.3e} (allowed {allowed:.3e})")]
    NotHermitian { asymmetry: f64, allowed: f64 },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("eigen solver failed to converge for eigenvalue {index} after {iterations} iterations")]
    NoConvergence { index: usize, iterations: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("truncation guard tripped: {0}")]
    Truncation(String),

    #[error("closed-form evolution requires zero detuning (got {0})")]
    NonZeroDetuning(f64),

    #[error("the n = 0 sector has no dressed doublet")]
    NoDoublet,

    #[error("invalid branch label ({0}, {1}); qubit levels are 0, 1, 2")]
    InvalidBranch(usize, usize),

    #[error("operator is not a projector: {0}")]
    NotProjector(String),

    #[error("{which} has eigenvalue {min:.3e} below the positivity floor; increase the truncation")]
    NotPositive { which: &'static str, min: f64 },

    #[error("conditional state undefined: Tr(T rho_F) = {0:.3e}")]
    UndefinedConditional(f64),

    #[error("pulse phase {0} is a multiple of 2pi: neighbouring oscillator phases coincide")]
    DegeneratePulse(f64),

    #[error("invalid pulse schedule: {0}")]
    InvalidSchedule(String),
}

pub type Result<T> = std::result::Result<T, Error>;
