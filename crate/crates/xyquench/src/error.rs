use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("argument out of supported range: {0}")]
    OutOfRange(String),
    #[error("degenerate momentum k = {k}: the gap closes and the Bogoliubov angle is undefined")]
    DegenerateMomentum { k: f64 },
    #[error("light-cone cutoff too small: tail weight {tail:e} beyond |x| = {x_max}")]
    CutoffTooSmall { x_max: i64, tail: f64 },
    #[error("quadrature would need {panels} panels, above the cap of {cap}")]
    QuadratureFailure { panels: usize, cap: usize },
    #[error("matrix dimension {0} is odd")]
    OddDimension(usize),
    #[error("matrix is not skew-symmetric (deviation {0:e})")]
    NotSkew(f64),
    #[error("site {0} lies outside the contraction window")]
    WindowUnderflow(i64),
    #[error("invalid radicand {0:e}")]
    InvalidRadicand(f64),
    #[error("nonphysical density matrix: eigenvalue {0:e}")]
    Nonphysical(f64),
    #[error("ring of {0} sites exceeds the oracle limit")]
    SizeExceeded(usize),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
