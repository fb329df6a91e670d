use alloc::string::String;

/// Errors produced by the simulation and learning routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid qubit count {n} (allowed 1..={max})")]
    InvalidSize { n: usize, max: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("qubit index {index} out of range for {n} qubits")]
    QubitOutOfRange { index: usize, n: usize },

    #[error("gate is not unitary (residual {residual:e})")]
    NotUnitary { residual: f64 },

    #[error("operator is not hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("expectation value has imaginary residue {residue:e}")]
    NotReal { residue: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("channel is not trace preserving (residual {residual:e})")]
    NotTracePreserving { residual: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("state vector is not normalized (norm² = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error("input {value} outside the unit interval")]
    InputOutOfRange { value: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("non-finite value at step {step}")]
    NonFiniteAt { step: usize },

    #[error("washout {washout} leaves no rows out of {len}")]
    WashoutTooLarge { washout: usize, len: usize },

    #[error("series is constant; cannot normalize")]
    ConstantSeries,

    #[error("target has zero variance")]
    ZeroVariance,

    #[error("delay history too short: need {needed} samples, got {got}")]
    InsufficientHistory { needed: usize, got: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
