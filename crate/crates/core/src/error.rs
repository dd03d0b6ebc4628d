use thiserror::Error;

use crate::table_model::ValidationReport;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TableError {
    #[error("unknown header label {label:?} at level {level}")]
    UnknownLabel { label: String, level: usize },
    #[error("invalid table: {0}")]
    Invalid(ValidationReport),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IngestError {
    #[error("malformed merge: {0}")]
    MalformedMerge(String),
    #[error("non-rectangular hierarchy: {0}")]
    NonRectangularHierarchy(String),
    #[error("table body is empty")]
    EmptyBody,
    #[error("schema violation at {path}: {message}")]
    SchemaViolation { path: String, message: String },
    #[error(transparent)]
    Table(#[from] TableError),
}

impl IngestError {
    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self::SchemaViolation { path: path.into(), message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BlockError {
    #[error("block {0} has no present cells")]
    EmptyBlock(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LayoutError {
    #[error("unknown block {0}")]
    UnknownBlock(String),
    #[error("fact {fact_id} is not available in block {block_id}")]
    UnknownFact { block_id: String, fact_id: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExploreError {
    #[error("page ({r},{c}) is not at the current zoom level {s_depth}")]
    DepthMismatch { r: usize, c: usize, s_depth: usize },
    #[error("no page for depth combination ({0},{1})")]
    UnknownCombo(usize, usize),
    #[error(transparent)]
    Layout(#[from] LayoutError),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(String),
}
