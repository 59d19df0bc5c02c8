use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid size: {0}")]
    InvalidSize(String),
    #[error("invalid density: edge probability {0} is outside (0, 1]")]
    InvalidDensity(f64),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("enumeration too large: {count} triples exceeds the work budget of {budget}")]
    EnumerationTooLarge { count: u128, budget: u128 },
    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),
    #[error("symbolic computation too large: {0}")]
    SymbolicTooLarge(String),
    #[error("invalid family: {0}")]
    InvalidFamily(String),
    #[error("invalid range: {0}")]
    InvalidRange(String),
    #[error("invalid lambda {0}: must lie in (0, 1)")]
    InvalidLambda(f64),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
