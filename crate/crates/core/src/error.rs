use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian: max |H - H^dagger| = {max_asymmetry:e}")]
    NotHermitian { max_asymmetry: f64 },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("operator is not positive semidefinite: eigenvalue {eigenvalue:e}")]
    NotPsd { eigenvalue: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("subsystem label `{0}` appears more than once")]
    DuplicateLabel(String),

    #[error("invalid register: {0}")]
    InvalidRegister(String),

    #[error("trace is {trace}, expected 1")]
    NotNormalized { trace: f64 },

    #[error("Choi operator is not trace preserving: max |Tr_out(J) - c I| = {deviation:e}")]
    NotTracePreserving { deviation: f64 },

    #[error("outcome {outcome} out of range for subsystem of dimension {dim}")]
    OutcomeOutOfRange { outcome: usize, dim: usize },

    #[error("mixing parameter {0} is outside [0, 1]")]
    ParameterOutOfRange(f64),

    #[error("expected a state on {expected} subsystems, found {found}")]
    WrongLabelCount { expected: usize, found: usize },

    #[error("marginal does not match the target: max deviation {deviation:e}")]
    MarginalMismatch { deviation: f64 },

    #[error("malformed conic problem: {0}")]
    MalformedProblem(String),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("state file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
