use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("group degree {n} out of range 1..={max}")]
    DegreeOutOfRange { n: usize, max: usize },

    #[error("unsupported group degree {0} (only S_3 and S_4 are tabulated)")]
    UnsupportedDegree(usize),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("local dimension must be at least 1")]
    ZeroDimension,

    #[error("Gram matrix is singular: multiplicity of irrep {irrep} vanishes at d = {d}")]
    SingularGram { irrep: &'static str, d: u64 },

    #[error("minimal-polynomial inverse of S_4 needs d >= 4, got d = {0}")]
    MinpolyUndefined(u64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("dimension {dim} exceeds the dense-oracle cap {cap} (set EQUILIB_MAX_DIM to raise it)")]
    DimensionTooLarge { dim: usize, cap: usize },

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
