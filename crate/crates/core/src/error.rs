use thiserror::Error;

/// Failures while ingesting or preprocessing curves.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurveError {
    #[error("malformed curve input: {0}")]
    MalformedInput(String),
    #[error("parameter values must be strictly increasing (row {row})")]
    DuplicateParameter { row: usize },
    #[error("curve has zero length")]
    ZeroLengthCurve,
    #[error("curves have different dimensions ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("both curves are open and one-dimensional; no common partition is needed")]
    NoCommonPartitionNeeded,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SrvfError {
    #[error("shape function is not periodic")]
    NotPeriodic,
    #[error("shape function partition is not uniform")]
    NonUniformPartition,
    #[error("shift offset {offset} out of range for {samples} circular samples")]
    ShiftOutOfRange { offset: usize, samples: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DpError {
    #[error("grid point set must contain both corner points")]
    EmptyGrid,
    #[error("pointer chain does not lead back to the origin")]
    BrokenPointerChain,
    #[error("at least three samples per curve are required (got {0} and {1})")]
    TooFewSamples(usize, usize),
    #[error("invalid DP configuration: layrs and lstrp must be positive")]
    InvalidConfig,
    #[error("invalid diffeomorphism: {0}")]
    InvalidDiffeomorphism(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RotationError {
    #[error("shape functions are sampled on different partitions")]
    PartitionMismatch,
    #[error("point lists have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("weights must be positive")]
    NonPositiveWeights,
    #[error("cross matrix has non-finite entries")]
    NonFinite,
    #[error("singular value decomposition did not converge")]
    SvdFailure,
    #[error("itop ({itop}) exceeds the number of admissible shifts ({available})")]
    ItopTooLarge { itop: usize, available: usize },
    #[error(transparent)]
    Srvf(#[from] SrvfError),
}

/// Top-level error for the registration pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("curve: {0}")]
    Curve(#[from] CurveError),
    #[error("srvf: {0}")]
    Srvf(#[from] SrvfError),
    #[error("dynamic programming: {0}")]
    Dp(#[from] DpError),
    #[error("rotation: {0}")]
    Rotation(#[from] RotationError),
    #[error("procedure requires d = 1 and two open curves")]
    WrongCase,
    #[error("FFT rotation search requires both curves to be closed")]
    NotClosed,
    #[error("invalid pipeline configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// True for failures caused by the inputs rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Curve(_)
                | Error::WrongCase
                | Error::NotClosed
                | Error::InvalidConfig(_)
                | Error::Dp(DpError::InvalidConfig)
                | Error::Dp(DpError::TooFewSamples(..))
                | Error::Rotation(RotationError::ItopTooLarge { .. })
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
