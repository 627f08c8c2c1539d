//! Error types for every layer of the knowledge base.

use crate::term::Sym;

/// Where in the source text something went wrong.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl std::fmt::Display for Pos {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Errors raised while reading program text.
#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("{pos}: syntax error: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("{pos}: arity error: {msg}")]
    Arity { pos: Pos, msg: String },
    #[error("{pos}: sort error: {msg}")]
    Sort { pos: Pos, msg: String },
}

impl ParseError {
    pub fn pos(&self) -> Pos {
        match self {
            ParseError::Syntax { pos, .. }
            | ParseError::Arity { pos, .. }
            | ParseError::Sort { pos, .. } => *pos,
        }
    }
}

/// Errors raised while building or normalizing terminology.
#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum TermError {
    #[error("unknown name `{0}`")]
    UnknownName(Sym),
    #[error("`{0}` is already defined")]
    DuplicateDefinition(Sym),
    #[error("definition of `{0}` refers to itself")]
    CyclicDefinition(Sym),
    #[error("sort error: {0}")]
    Sort(String),
}

/// Errors raised by the plausible rule engine.
#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum EngineError {
    #[error("rule `{0}` would create a cycle among monotonic rules")]
    CyclicMonotonicRules(Sym),
    #[error("rule `{rule}` interlocks {size} defaults in one cyclic component (bound {bound})")]
    SccTooLarge { rule: Sym, size: usize, bound: usize },
    #[error("rule `{rule}` uses `{var}` in its conclusion but never binds it")]
    UnboundVariable { rule: Sym, var: Sym },
    #[error("rule `{0}` is already defined")]
    DuplicateRule(Sym),
    #[error("threshold {0} is outside (0, 1]")]
    InvalidThreshold(f64),
    #[error("malformed certainty: {0}")]
    MalformedCertainty(String),
}

/// Errors raised by the assertion analyzer and query processor.
#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum SessionError {
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(Sym),
    #[error("sort error: {0}")]
    Sort(String),
    #[error("variables are not allowed in `{0}`")]
    VariableNotAllowed(String),
    #[error("certainty revision did not settle after {0} rounds")]
    DivergenceGuard(usize),
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Any error the library can produce, for callers that do not care which layer failed.
#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Session(#[from] SessionError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
