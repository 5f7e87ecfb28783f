use crate::tensor::FactorLabel;

/// Errors shared by every module in this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("duplicate factor label {0:?}")]
    DuplicateFactor(FactorLabel),
    #[error("factor label {0:?} not present in this object")]
    MissingFactor(FactorLabel),
    #[error("factor sets are not compatible: {0}")]
    FactorMismatch(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("parameter `{name}` = {value} (want {expected})")]
    OutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("state vector norm deviates from 1 by {0:.3e}")]
    NotNormalized(f64),
    #[error("matrix deviates from Hermitian by {0:.3e}")]
    NotHermitian(f64),
    #[error("trace deviates from 1 by {0:.3e}")]
    TraceNotOne(f64),
    #[error("matrix has eigenvalue {0:.3e} below the positivity floor")]
    NotPositive(f64),
    #[error("state is not Bell-diagonal (off-diagonal magnitude {0:.3e})")]
    NotBellDiagonal(f64),
    #[error("degenerate texture: {0}")]
    DegenerateTexture(&'static str),
    #[error("eigensolver failed to converge: {0}")]
    NoConvergence(String),
    #[error("linear system is singular or ill-posed: {0}")]
    Singular(String),
    #[error("{0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
