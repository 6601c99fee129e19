use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An exponent component or the total degree does not fit its bit field.
    #[error("exponent overflow: {field} exceeds {limit}")]
    ExponentOverflow { field: String, limit: u64 },

    #[error("invalid exponent layout: {0}")]
    InvalidLayout(String),

    #[error("invalid variable table: {0}")]
    InvalidVars(String),

    #[error("operands live in different polynomial spaces: {0}")]
    SpaceMismatch(String),

    #[error("expected {expected} exponents, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown variable `{name}` at offset {pos}")]
    UnknownVariable { name: String, pos: usize },

    #[error("invalid coefficient literal `{0}`")]
    InvalidCoefficient(String),

    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },

    #[error("cannot draw {requested} distinct exponents from a space of {available}")]
    Infeasible { requested: usize, available: u128 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn is_overflow(&self) -> bool {
        matches!(self, Error::ExponentOverflow { .. })
    }
}
