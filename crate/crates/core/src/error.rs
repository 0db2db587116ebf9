use thiserror::Error;

pub type Result<T> = std::result::Result<T, HdxError>;

#[derive(Debug, Error)]
pub enum HdxError {
    #[error("level {level} out of range for a {dim}-dimensional complex")]
    LevelOutOfRange { level: usize, dim: usize },

    #[error("face {face} not found at level {level}")]
    FaceNotFound { face: String, level: usize },

    #[error("vertex list {0} is not a set (repeated vertex)")]
    RepeatedVertex(String),

    #[error("functions belong to different complexes")]
    ComplexMismatch,

    #[error("function level mismatch: expected {expected}, got {got}")]
    LevelMismatch { expected: usize, got: usize },

    #[error("complex construction: {0}")]
    BadComplex(String),

    #[error("top-face weight must be positive and finite, got {0}")]
    BadWeight(f64),

    #[error("complex would exceed the face cap: {count} > {cap}")]
    TooManyFaces { count: usize, cap: usize },

    #[error("walk rejected: {0}")]
    InvalidWalk(String),

    #[error("swap walk has rows with no disjoint target; offending faces: {0}")]
    NoDisjointTarget(String),

    #[error("decomposition system numerically singular (condition estimate {condition:.3e})")]
    SingularSystem { condition: f64 },

    #[error("function is not exactly {{0,1}}-valued")]
    NotBoolean,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("infeasible configuration: {0}")]
    Infeasible(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
