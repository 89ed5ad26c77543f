use thiserror::Error;

use crate::lattice::LatticePoint;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Why a generator set fails to define a standard semigroup.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NotStandardReason {
    DifferencesDoNotGenerate,
    NotPointed,
    NotFullDimensional,
}

impl std::fmt::Display for NotStandardReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NotStandardReason::DifferencesDoNotGenerate => {
                write!(f, "differences of the generators do not generate Z^d")
            }
            NotStandardReason::NotPointed => write!(f, "the cone is not pointed"),
            NotStandardReason::NotFullDimensional => write!(f, "the cone is not full-dimensional"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unsupported dimension {found} (supported range 1..={max})")]
    UnsupportedDimension { found: usize, max: usize },
    #[error("empty generator list")]
    EmptyGenerators,
    #[error("invalid weight vector: {0}")]
    InvalidWeights(String),
    #[error("the cone is not pointed")]
    NotPointed,
    #[error("halfspace is not truncating for this cone")]
    NotTruncating,
    #[error("not a standard semigroup: {0}")]
    NotStandard(NotStandardReason),
    #[error("{0} is not an element of the semigroup")]
    NotInSemigroup(LatticePoint),
    #[error("ideal is not m-primary: {0}")]
    NotMPrimary(String),
    #[error("{q} is not a power of p = {p}")]
    NotPowerOfP { q: u64, p: u32 },
    #[error("{0} requires a regular ring (S = N^d)")]
    RequiresRegular(&'static str),
    #[error("coordinates exceed the machine range of the enumeration kernels")]
    Overflow,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("p-family axiom fails at e = {e}: {witness} is not in the next level")]
    AxiomViolation { e: u32, witness: LatticePoint },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
