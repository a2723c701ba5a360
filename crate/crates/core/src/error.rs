use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },

    #[error("unknown relation symbol `{0}`")]
    UnknownRelation(String),

    #[error("unknown sort `{0}`")]
    UnknownSort(String),

    #[error("arity mismatch for `{relation}`: expected {expected}, got {got}")]
    ArityMismatch {
        relation: String,
        expected: usize,
        got: usize,
    },

    #[error("sort mismatch: {0}")]
    SortMismatch(String),

    #[error("invalid signature: {0}")]
    InvalidSignature(String),

    #[error("invalid structure: {0}")]
    InvalidStructure(String),

    #[error("variable `{0}` is not assigned")]
    UnassignedVariable(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("rewrite pattern does not match at path {path:?}: {msg}")]
    PatternMismatch { path: Vec<usize>, msg: String },

    #[error("no subformula at path {0:?}")]
    BadPath(Vec<usize>),

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    #[error("empty universe for sort `{0}`")]
    EmptyUniverse(String),

    #[error("symbol collision: {0}")]
    SymbolCollision(String),

    #[error("measure bound violated: {0}")]
    MeasureBound(String),

    #[error("no existential {k}-clique in the sentence")]
    NoCliqueWitness { k: usize },

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Json(#[from] serde_json::Error),
}
