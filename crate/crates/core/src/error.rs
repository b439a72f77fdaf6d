use num_bigint::BigInt;
use thiserror::Error;

/// Errors raised by the core library.
///
/// Variants split into two families: malformed input (`is_schema`) and
/// mathematical precondition failures on well-formed input.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("genus {0} is below 2")]
    GenusTooSmall(usize),
    #[error("curve is not stable (vertex {0})")]
    NotStable(String),
    #[error("edge {0} has non-positive length")]
    NonPositiveLength(String),
    #[error("negative weight on vertex {0}")]
    NegativeWeight(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix does not satisfy (delta - I)^2 = 0")]
    NotUnipotent,
    #[error("matrix is not symplectic")]
    NotSymplectic,
    #[error("sublattice is not saturated")]
    NotSaturated,
    #[error("polarization is singular (genus {genus}, cycle rank {rank}); use the membership test")]
    SingularPolarization { genus: usize, rank: usize },
    #[error("restricted form is not unimodular (Gram determinant {0})")]
    NotUnimodular(BigInt),
    #[error("twist classes are not pairwise orthogonal")]
    NonIsotropic,
    #[error("basis mismatch: {0}")]
    BasisMismatch(String),
    #[error("invalid spanning tree: {0}")]
    InvalidTree(String),
    #[error("wedge degree {k} out of range for rank {n}")]
    WedgeDegree { k: usize, n: usize },
    #[error("filtration level {q} invalid for degree {k}")]
    FiltrationLevel { q: usize, k: usize },
    #[error("sublattice is not contained in the ambient lattice")]
    NotContained,
    #[error("unknown builtin: {0}")]
    UnknownBuiltin(String),
    #[error("matrix is not unimodular")]
    NotInvertible,
    #[error("filtration violated: {0}")]
    FiltrationViolation(String),
    #[error("{0}")]
    Precondition(String),
}

impl Error {
    /// True for malformed input (including inputs that break the curve's own
    /// invariants), false for mathematical precondition failures.
    pub fn is_schema(&self) -> bool {
        matches!(
            self,
            Error::Schema(_)
                | Error::UnknownBuiltin(_)
                | Error::Disconnected
                | Error::NonPositiveLength(_)
                | Error::NegativeWeight(_)
                | Error::InvalidTree(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
