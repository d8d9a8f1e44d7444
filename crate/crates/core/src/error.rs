//! Error types shared across the engine.

use thiserror::Error;

/// Errors raised by model construction, validation plumbing and I/O.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("model error: {0}")]
    Model(String),
}

/// Errors raised by series arithmetic.
#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("shape error: series mismatch ({0})")]
    Shape(String),
}

/// Errors raised by DGLA / Hodge / solver operations.
#[derive(Debug, Error)]
pub enum OpError {
    #[error("degree overflow: {0}")]
    DegreeOverflow(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("band overflow at order {order}")]
    BandOverflow { order: usize },
    #[error("not a first-order deformation: {0}")]
    NotClosed(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("{0}")]
    Model(String),
}

impl From<ModelError> for OpError {
    fn from(e: ModelError) -> Self {
        OpError::Model(e.to_string())
    }
}
