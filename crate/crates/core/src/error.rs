use thiserror::Error;

/// Errors raised anywhere in the arithmetic, the expression frontend and the oracle.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("interval endpoint overflowed in {op}")]
    Overflow { op: &'static str },

    #[error("interval [{lo}, {hi}] contains zero")]
    ZeroInDomain { lo: f64, hi: f64 },

    #[error("{op}: argument outside its domain ({detail})")]
    DomainViolation { op: &'static str, detail: String },

    #[error("{op}: remainder bound is unbounded ({detail})")]
    RemainderUnbounded { op: &'static str, detail: String },

    #[error("{what} index {index} out of range (limit {limit})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },

    #[error("point coordinate {value} lies outside axis {axis} of the domain")]
    OutOfDomain { axis: usize, value: f64 },

    #[error("models are defined over different domains")]
    DomainMismatch,

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown identifier `{name}` at byte {pos}")]
    UnknownIdentifier { name: String, pos: usize },

    #[error("variable x{index} exceeds declared arity {arity}")]
    Arity { index: usize, arity: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("budget exceeded: {needed} points requested, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("soundness violation: {0}")]
    SoundnessViolation(String),

    #[error("at expression node {node}: {source}")]
    AtNode { node: usize, source: Box<Error> },
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::DomainViolation {
            op,
            detail: detail.into(),
        }
    }

    /// Strips any `AtNode` wrapping.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtNode { source, .. } => source.root(),
            e => e,
        }
    }

    /// True for the domain-type failures (`DomainViolation`, `ZeroInDomain`,
    /// `RemainderUnbounded`), looking through node wrappers.
    pub fn is_domain_error(&self) -> bool {
        matches!(
            self.root(),
            Error::DomainViolation { .. }
                | Error::ZeroInDomain { .. }
                | Error::RemainderUnbounded { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
