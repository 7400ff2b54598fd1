use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A point, stencil node or parameter left its admissible region.
    #[error("domain error: {0}")]
    Domain(String),
    /// A user-supplied metric is not symmetric positive definite.
    #[error("model error: {0}")]
    Model(String),
    /// A weight function evaluated to a non-positive value.
    #[error("invalid weight: {0}")]
    WeightValidity(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
