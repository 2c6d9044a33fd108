use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("matrix is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("matrix is not a valid density operator: {0}")]
    InvalidDensity(String),

    #[error("subsystem {index} out of range for {count} subsystems")]
    SubsystemOutOfRange { index: usize, count: usize },

    #[error("duplicate subsystem index {0}")]
    DuplicateSubsystem(usize),

    #[error("dense representation needs {qubits} qubits but the limit is {limit}")]
    DenseLimit { qubits: usize, limit: usize },

    #[error("eigenvalue {0:.3e} is below the clipping tolerance")]
    NegativeEigenvalue(f64),

    #[error("invalid probability vector: {0}")]
    InvalidProbabilities(String),

    #[error("branch pair ({0}, {0}) is not a distinct pair")]
    SameBranch(usize),

    #[error("branch index {index} out of range for {count} branches")]
    BranchOutOfRange { index: usize, count: usize },

    #[error("no classical information to be redundant (H_S = {0:.3e} bits)")]
    NoClassicalInformation(f64),

    #[error("fragment of {size} qubits exceeds the outcome enumeration limit of {limit}")]
    OutcomeLimit { size: usize, limit: usize },

    #[error("not equiprobable; finegrain first")]
    NotEquiprobable,

    #[error("environment cannot be fine-grained: {0}")]
    NotFineGrainable(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

impl Error {
    /// Errors raised by numerical or size guards rather than by malformed input.
    pub fn is_guard(&self) -> bool {
        matches!(
            self,
            Error::DenseLimit { .. }
                | Error::OutcomeLimit { .. }
                | Error::NegativeEigenvalue(_)
                | Error::NoClassicalInformation(_)
        )
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
