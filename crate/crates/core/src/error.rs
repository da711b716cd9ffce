use thiserror::Error;

/// Errors produced by the library.
///
/// Variant names are part of the CLI's machine-readable error record, so
/// renaming one is a breaking change.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is singular (determinant 0)")]
    SingularMatrix,
    #[error("root refinement did not converge: {0}")]
    NonConvergence(String),
    #[error("eigenvalue order has length {got}, expected {expected}")]
    OrderMismatch { expected: usize, got: usize },
    #[error("increment support lies in a proper A-invariant subspace (rank {rank} < {k})")]
    InvariantSubspace { rank: usize, k: usize },
    #[error("state space of {states} states exceeds the cap of {cap}")]
    StateSpaceTooLarge { states: u128, cap: usize },
    #[error("gcd(det A, p) = {gcd} for p = {p}")]
    ModulusNotCoprime { p: u64, gcd: u64 },
    #[error("frequency must be nonzero")]
    ZeroFrequency,
    #[error("certificate factor at j = {j} is nonpositive ({value})")]
    FactorNonpositive { j: usize, value: f64 },
    #[error("no power l <= {l_max} of tA has a fixed vector")]
    NoTorsion { l_max: u32 },
    #[error("gamma = {gamma} is not below p^2 = {p_sq}")]
    GammaTooLarge { gamma: f64, p_sq: f64 },
    #[error("value {value} outside the open range (0, {p})")]
    OutOfRange { value: i64, p: u64 },
    #[error("need at least {needed} data points, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("invalid increment distribution: {0}")]
    InvalidDistribution(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
}

impl Error {
    /// Stable short name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::SingularMatrix => "SingularMatrix",
            Error::NonConvergence(_) => "NonConvergence",
            Error::OrderMismatch { .. } => "OrderMismatch",
            Error::InvariantSubspace { .. } => "InvariantSubspace",
            Error::StateSpaceTooLarge { .. } => "StateSpaceTooLarge",
            Error::ModulusNotCoprime { .. } => "ModulusNotCoprime",
            Error::ZeroFrequency => "ZeroFrequency",
            Error::FactorNonpositive { .. } => "FactorNonpositive",
            Error::NoTorsion { .. } => "NoTorsion",
            Error::GammaTooLarge { .. } => "GammaTooLarge",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::InsufficientData { .. } => "InsufficientData",
            Error::InvalidDistribution(_) => "InvalidDistribution",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::ConfigInvalid(_) => "ConfigInvalid",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
