use thiserror::Error;

use crate::protocol::BellOutcome;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while building states, running the
/// protocol, or evaluating a measure.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("amplitudes do not sum to zero: |sum c_k| = {residual:.3e}")]
    ZeroSumViolation { residual: f64 },

    #[error("amplitudes are not normalized: sum |c_k|^2 = {norm_sqr} (off by {residual:.3e})")]
    NormalizationViolation { norm_sqr: f64, residual: f64 },

    #[error("amplitude c_{index} vanishes: |c_{index}| = {modulus:.3e}")]
    ZeroAmplitude { index: usize, modulus: f64 },

    #[error("need at least {required} amplitudes, got {found}")]
    TooFewAmplitudes { required: usize, found: usize },

    #[error("non-finite amplitude at index {index}")]
    NonFinite { index: usize },

    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("qubit {qubit} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },

    #[error("set of qubits to keep is empty")]
    EmptyKeepSet,

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("matrix has trace {trace}, expected 1")]
    BadTrace { trace: f64 },

    #[error("matrix has negative eigenvalue {eigenvalue:.3e}")]
    NotPositive { eigenvalue: f64 },

    #[error("state is not normalized (squared norm {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error("measurement outcome has probability {probability:.3e}")]
    ImpossibleOutcome { probability: f64 },

    #[error("Bell outcome {outcome} has probability {probability:.3e}")]
    DegenerateBranch { outcome: BellOutcome, probability: f64 },

    #[error("operation needs {expected} parties, got {found}")]
    WrongPartyCount { expected: &'static str, found: usize },

    #[error("normalization closed form is non-positive ({value:.3e})")]
    NonPositiveNorm { value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed input: {0}")]
    Parse(String),
}
