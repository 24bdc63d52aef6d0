//! Crate-wide error type.

use std::fmt;

/// Errors produced by instance construction, solvers, the reduction and file IO.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Vector length does not match the instance dimension.
    DimensionMismatch { expected: usize, found: usize },
    /// An assignment component is not a member of the level set.
    NotInS { index: usize, value: i64 },
    /// A component of a claimed two-value vector is outside `{s1, s2}`.
    NotBinary { index: usize, value: i64 },
    /// Level set construction failed (too small, unordered or duplicated values).
    InvalidLevelSet(String),
    /// A precondition on operation arguments does not hold.
    InvalidArgument(String),
    /// Exact integer arithmetic left the representable range.
    Overflow(&'static str),
    /// Exhaustive search was refused because the search space exceeds the budget.
    BudgetExceeded {
        required: u128,
        max_evaluations: u64,
    },
    /// Linear system is numerically singular (ridge = 0 with rank-deficient data).
    SingularSystem,
    /// Instance file could not be parsed; `line` is 1-based.
    Parse { line: usize, message: String },
    /// An internal invariant that the construction is supposed to guarantee failed.
    /// Seeing this means a soundness bug, not bad input.
    Soundness(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::NotInS { index, value } => {
                write!(
                    f,
                    "component {index} has value {value} outside the level set"
                )
            }
            Error::NotBinary { index, value } => {
                write!(f, "component {index} has value {value} outside {{s1, s2}}")
            }
            Error::InvalidLevelSet(msg) => write!(f, "invalid level set: {msg}"),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::Overflow(what) => write!(f, "integer overflow in {what}"),
            Error::BudgetExceeded {
                required,
                max_evaluations,
            } => write!(
                f,
                "search space of {required} points exceeds evaluation budget {max_evaluations}"
            ),
            Error::SingularSystem => write!(f, "normal equations are numerically singular"),
            Error::Parse { line, message } => write!(f, "parse error at line {line}: {message}"),
            Error::Soundness(msg) => write!(f, "soundness violation: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl Error {
    /// Process exit code for this error class: 1 invalid input, 2 budget, 3 soundness.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::BudgetExceeded { .. } => 2,
            Error::Soundness(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
