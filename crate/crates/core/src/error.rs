//! Error types for model construction and the solvers.

use alloc::string::String;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    BadPartition(String),
    NonpositiveHorizon(f64),
    DimensionMismatch(String),
    Structural(String),
    UnknownReference(String),
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::BadPartition(msg) => write!(f, "bad time partition: {msg}"),
            ModelError::NonpositiveHorizon(t) => write!(f, "nonpositive horizon {t}"),
            ModelError::DimensionMismatch(msg) => write!(f, "dimension mismatch: {msg}"),
            ModelError::Structural(msg) => write!(f, "structural error: {msg}"),
            ModelError::UnknownReference(msg) => write!(f, "unknown reference: {msg}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MatrixGameError {
    Empty,
    NonFiniteEntry { row: usize, col: usize },
    DimensionMismatch(String),
}

impl fmt::Display for MatrixGameError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixGameError::Empty => write!(f, "empty payoff matrix"),
            MatrixGameError::NonFiniteEntry { row, col } => {
                write!(f, "non-finite payoff entry at ({row},{col})")
            }
            MatrixGameError::DimensionMismatch(msg) => write!(f, "dimension mismatch: {msg}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveError {
    Matrix(MatrixGameError),
    TimeOutOfRange { t: f64, horizon: f64 },
    GridMismatch(String),
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::Matrix(e) => write!(f, "stage game: {e}"),
            SolveError::TimeOutOfRange { t, horizon } => {
                write!(f, "time {t} outside [0, {horizon}]")
            }
            SolveError::GridMismatch(msg) => write!(f, "grid mismatch: {msg}"),
        }
    }
}

impl From<MatrixGameError> for SolveError {
    fn from(e: MatrixGameError) -> Self {
        SolveError::Matrix(e)
    }
}

impl core::error::Error for ModelError {}
impl core::error::Error for MatrixGameError {}
impl core::error::Error for SolveError {}
