use thiserror::Error;

/// Errors raised by state construction, classification and the distillation planner.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("invalid partition mask {mask:#b} for {n_qubits} qubits")]
    InvalidPartition { n_qubits: usize, mask: u64 },

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { n_qubits: usize, index: usize },

    #[error("not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("ket is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("measurement outcome has probability {0:e}, below the degeneracy floor")]
    DegenerateOutcome(f64),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("GHZ index {index} out of range for {n_qubits} qubits")]
    GhzIndexOutOfRange { n_qubits: usize, index: usize },

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("operation requires {expected} qubits, got {actual}")]
    WrongQubitCount { expected: usize, actual: usize },

    #[error("construction not applicable: coefficient {index} is negative ({value:e})")]
    NegativeCoefficient { index: usize, value: f64 },

    #[error("malformed ensemble: {0}")]
    MalformedEnsemble(String),

    #[error("dense oracle limited to {max} copies, got {requested}")]
    OracleCapExceeded { max: usize, requested: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
