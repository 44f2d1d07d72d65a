use thiserror::Error;

/// Errors produced anywhere in the core crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside its admissible range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The selected model or formulation does not fit the operator or space.
    #[error("model mismatch: {0}")]
    ModelMismatch(String),

    /// Explicit fine-scale data does not cover every interior facet.
    #[error("explicit model data missing for interior facet {0}")]
    MissingFacetData(usize),

    /// LU factorization met a pivot that is zero to working precision.
    #[error("matrix is singular to working precision at pivot row {row}")]
    Singular { row: usize },

    /// Expression text could not be parsed.
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    /// Expression refers to a name that is neither a variable, constant nor function.
    #[error("unknown identifier '{name}' at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    /// Expression evaluation left the domain of a function.
    #[error("evaluation error: {0}")]
    Evaluation(String),

    /// Writing artifacts failed.
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn mismatch(msg: impl Into<String>) -> Error {
    Error::ModelMismatch(msg.into())
}
