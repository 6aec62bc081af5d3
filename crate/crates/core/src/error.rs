use thiserror::Error;

/// Errors raised by the workbench.
///
/// Precondition and promise failures are distinguished from internal
/// invariant violations so that front ends can map them to different exit
/// codes.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("range too small")]
    RangeTooSmall,
    #[error("r does not divide n")]
    RDoesNotDivideN,
    #[error("n must be even")]
    OddDomain,
    #[error("foreign value {0}")]
    ForeignValue(u32),
    #[error("empty profile")]
    EmptyProfile,
    #[error("threshold undefined (requires n > r)")]
    ThresholdUndefined,
    #[error("invalid support point {0}")]
    InvalidSupportPoint(u64),
    #[error("negative threshold")]
    NegativeThreshold,
    #[error("epsilon out of Chernoff window")]
    EpsilonOutOfWindow,
    #[error("vacuous relation")]
    VacuousRelation,
    #[error("disconnected input")]
    DisconnectedInput,
    #[error("half-integral case unsupported (r must be even)")]
    HalfIntegral,
    #[error("degenerate relation (X=Y)")]
    DegenerateRelation,
    #[error("enumeration guard exceeded")]
    EnumerationGuard,
    #[error("sample exceeds domain")]
    SampleExceedsDomain,
    #[error("not a set-equality solver")]
    NotASolver,
    #[error("empty grid")]
    EmptyGrid,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// An internal consistency check failed. This indicates a bug rather
    /// than bad input.
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn is_invariant_violation(&self) -> bool {
        matches!(self, Error::Invariant(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
