use std::fmt;

use thiserror::Error;

/// A single invariant violation found while validating an instance.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Matrix entry outside `[0, 1]` (1-based coordinates).
    MatrixEntry { row: usize, col: usize, value: f64 },
    /// Right-hand side entry outside `[0, 1]` (1-based).
    RhsEntry { row: usize, value: f64 },
    /// Non-finite objective coefficient (1-based).
    Cost { col: usize, value: f64 },
    /// Ragged or mismatched dimensions.
    Dimension { field: &'static str, expected: usize, found: usize },
    /// Empty matrix or empty vector.
    Empty { field: &'static str },
    /// Lambda not a finite positive number.
    Lambda { value: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MatrixEntry { row, col, value } => {
                write!(f, "A[{row},{col}] = {value} is outside [0,1]")
            }
            Violation::RhsEntry { row, value } => write!(f, "b[{row}] = {value} is outside [0,1]"),
            Violation::Cost { col, value } => write!(f, "c[{col}] = {value} is not finite"),
            Violation::Dimension { field, expected, found } => {
                write!(f, "{field}: expected length {expected}, found {found}")
            }
            Violation::Empty { field } => write!(f, "{field} must not be empty"),
            Violation::Lambda { value } => write!(f, "lambda = {value} must be finite and > 0"),
        }
    }
}

#[derive(Debug, Error)]
pub enum FreError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid instance: {}", join(.0))]
    Validation(Vec<Violation>),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("invalid assignment: {0}")]
    Assignment(String),

    #[error("search space of {size} candidates exceeds the cap of {cap}")]
    CapExceeded { size: String, cap: u64 },

    #[error("instance is infeasible")]
    Infeasible,

    #[error("theory violation: {0}")]
    TheoryViolation(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

pub type Result<T, E = FreError> = std::result::Result<T, E>;
