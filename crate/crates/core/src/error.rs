use thiserror::Error;

use crate::needs::NeedId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NeedError {
    #[error("unknown need `{0}`")]
    UnknownNeed(String),
    #[error("{son} cannot be a son of {parent}: sons must sit exactly one level below")]
    BadEdge { parent: NeedId, son: NeedId },
    #[error("view radius must be positive and finite, got {0}")]
    BadRadius(f64),
    #[error("distance must be nonnegative and finite, got {0}")]
    BadDistance(f64),
    #[error("{need}: expected alpha < 0, beta < 0, gamma > 0, got ({alpha}, {beta}, {gamma})")]
    BadSigns { need: NeedId, alpha: f64, beta: f64, gamma: f64 },
    #[error("delta must be nonnegative")]
    NegativeDelta,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StmError {
    #[error("short-term memory is asleep")]
    Asleep,
    #[error("the ontology slot cannot be admitted")]
    Ontology,
    #[error("method `{method}` targets `{target}`, which is not in short-term memory")]
    MissingTarget { method: String, target: String },
    #[error("rejected: intensity {0} does not exceed the weakest resident")]
    Rejected(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KbError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: second rule for `{need}`")]
    DuplicateRule { line: usize, need: String },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinkError {
    #[error("leaf {leaf} out of range for {leaves} leaves")]
    LeafOutOfRange { leaf: usize, leaves: usize },
    #[error("chunk weight must be finite")]
    NonFiniteWeight,
}

/// Scenario loading and validation failures. Always names the key involved.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("missing: {0}")]
    Missing(String),
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: `{key}`: {message}")]
    Invalid { line: usize, key: String, message: String },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("`{key}`: {message}")]
    Semantic { key: String, message: String },
}

#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error("empty parameter range for {0}")]
    EmptyRange(&'static str),
    #[error("budget must be positive")]
    ZeroBudget,
    #[error("parameter bounds must keep alpha and beta negative, gamma positive and delta nonnegative")]
    SignBounds,
    #[error(transparent)]
    Config(#[from] ConfigError),
}
