//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid composition: {0}")]
    InvalidComposition(String),

    #[error("arity mismatch: {0}")]
    ArityMismatch(String),

    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("cells are not composable: {0}")]
    NonComposable(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("resource budget exceeded: {0}")]
    Budget(String),

    #[error("fuel exhausted after {steps} rewriting steps; nontermination suspected")]
    FuelExhausted { steps: u64 },

    #[error("termination certificate refuted: {witness}")]
    CertificateRefuted { witness: String },
}

pub type Result<T> = std::result::Result<T, Error>;
