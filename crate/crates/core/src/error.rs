use thiserror::Error;

use crate::limits::PreperiodicWitness;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedEnd,
    NonIntegerLiteral,
    UnknownVariable(char),
    EmptyTerm,
    ExponentTooLarge,
}

/// A polynomial text error; `position` is a byte offset into the input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at position {position}: {kind}")]
pub struct ParseError {
    pub position: usize,
    pub kind: ParseErrorKind,
}

impl std::fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character '{c}'"),
            ParseErrorKind::UnexpectedEnd => write!(f, "unexpected end of input"),
            ParseErrorKind::NonIntegerLiteral => write!(f, "coefficients must be integers"),
            ParseErrorKind::UnknownVariable(c) => {
                write!(f, "unknown variable '{c}' (only 'x' is allowed)")
            }
            ParseErrorKind::EmptyTerm => write!(f, "empty term"),
            ParseErrorKind::ExponentTooLarge => write!(f, "exponent too large"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("modulus must be positive")]
    ZeroModulus,

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("{what} {value} exceeds the ceiling {ceiling}")]
    AboveCeiling {
        what: &'static str,
        value: String,
        ceiling: String,
    },

    #[error("orbit budget exceeded: needs more than {budget} steps (modulus {modulus})")]
    BudgetExceeded { modulus: String, budget: u64 },

    #[error("literal iteration budget exceeded: {required} iterations requested, budget {budget}")]
    LiteralBudgetExceeded { required: String, budget: u64 },

    #[error("not tower-stable: the reduction mod {prime} is a cyclic permutation of length {prime}")]
    Unstable { prime: u64 },

    #[error("start point is preperiodic (tail {}, cycle {}); the tower is bounded", .0.tail, .0.cycle)]
    Preperiodic(Box<PreperiodicWitness>),

    #[error("the orbit of {0} does not tend to +infinity, so the tower is undefined")]
    NotDivergent(i64),

    #[error("could not decide whether the orbit is preperiodic within {steps} steps")]
    Inconclusive { steps: u64 },

    #[error("a negative value {0} appeared where an iteration count is required")]
    NegativeIterationCount(String),

    #[error("expected a polynomial of degree at most 1, got degree {0}")]
    NotLinear(usize),

    #[error("period multiple {multiple} is not divisible by the cycle length {cycle}")]
    PeriodMismatch { multiple: String, cycle: u64 },

    #[error("recursion depth {0} exceeded")]
    DepthExceeded(usize),

    #[error("arithmetic overflow: {0}")]
    Overflow(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
