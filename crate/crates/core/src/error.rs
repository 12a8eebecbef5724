use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("invalid section: {0}")]
    InvalidSection(String),
    #[error("action of the normal bundle is not trivial: {point}·{arrow} != {point}")]
    NonTrivialAction { point: String, arrow: String },
    #[error("invalid action: {0}")]
    InvalidAction(String),
    #[error("fiber over {unit} is not abelian: {left}·{right} != {right}·{left}")]
    NonAbelian { unit: String, left: String, right: String },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("elements belong to different algebras ({0} vs {1})")]
    AlgebraMismatch(String, String),
    #[error("missing input: {0}")]
    MissingInput(String),
    #[error("invalid parameters: {0}")]
    Parameters(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("algebra dimension {dim} exceeds the cap {cap}")]
    TooLarge { dim: usize, cap: usize },
    #[error("internal error: {0}")]
    Internal(String),
    #[error("groupoid axioms violated: {0}")]
    Axioms(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
