use thiserror::Error;

/// Broad failure classes; the CLI maps each class to its own exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Parse,
    Domain,
    Numeric,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("undeclared identifier `{name}` at offset {offset}")]
    Undeclared { name: String, offset: usize },

    #[error("function `{name}` expects {expected} argument(s), got {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },

    #[error("invalid declaration: {0}")]
    Declaration(String),

    #[error("problem file: {0}")]
    Problem(String),

    #[error("zero denominator")]
    ZeroDenominator,

    #[error("jet order overflow: {0}")]
    OrderOverflow(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("singular matrix (determinant {det})")]
    Singular { det: String },

    #[error("incompatible twist: {0}")]
    IncompatibleTwist(String),

    #[error("not a symmetry: residual {residual}")]
    NotASymmetry { residual: String },

    #[error("degenerate Lagrangian: mass-matrix determinant {det}")]
    DegenerateLagrangian { det: String },

    #[error("{0}")]
    Domain(String),

    #[error("missing numeric implementation for `{0}`")]
    MissingImplementation(String),

    #[error("non-finite state at step {index}")]
    NonFinite { index: usize },

    #[error("singular denominator ({value:e}) at step {index}")]
    NumericSingularity { index: usize, value: f64 },

    #[error("usage: {0}")]
    Usage(String),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            Syntax { .. } | Undeclared { .. } | Arity { .. } | Declaration(_) | Problem(_) => {
                ErrorClass::Parse
            }
            MissingImplementation(_) | NonFinite { .. } | NumericSingularity { .. } => {
                ErrorClass::Numeric
            }
            Usage(_) => ErrorClass::Usage,
            _ => ErrorClass::Domain,
        }
    }

    /// Short stable identifier used in machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        use Error::*;
        match self {
            Syntax { .. } => "syntax",
            Undeclared { .. } => "undeclared",
            Arity { .. } => "arity",
            Declaration(_) => "declaration",
            Problem(_) => "problem",
            ZeroDenominator => "zero-denominator",
            OrderOverflow(_) => "order-overflow",
            Dimension(_) => "dimension",
            Singular { .. } => "singular",
            IncompatibleTwist(_) => "incompatible-twist",
            NotASymmetry { .. } => "not-a-symmetry",
            DegenerateLagrangian { .. } => "degenerate-lagrangian",
            Domain(_) => "domain",
            MissingImplementation(_) => "missing-implementation",
            NonFinite { .. } => "non-finite",
            NumericSingularity { .. } => "numeric-singularity",
            Usage(_) => "usage",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
