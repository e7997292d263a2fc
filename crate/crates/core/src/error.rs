use thiserror::Error;

use crate::expr::ParseError;
use crate::indices::Indices;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("expression `{context}`: {source}")]
    Parse {
        context: String,
        #[source]
        source: ParseError,
    },
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("point has no y component")]
    MissingY,
    #[error("complementarity violated at index {index}: x and y both nonzero")]
    NotComplementary { index: usize },
    #[error("cardinality {count} exceeds bound {alpha}")]
    Cardinality { count: usize, alpha: usize },
    #[error("point is infeasible: {0}")]
    InfeasiblePoint(String),
    #[error("index set {given} is outside the admissible range [{min}, {max}]")]
    IndexRange {
        given: Indices,
        min: Indices,
        max: Indices,
    },
    #[error("enumeration cap exceeded: {what} = {size} > {cap}")]
    CapExceeded {
        what: &'static str,
        size: usize,
        cap: usize,
    },
    #[error("out of certified range: {0}")]
    NonlinearConstraint(String),
    #[error("linear program: {0}")]
    Lp(#[from] crate::lp::LpError),
    #[error("internal consistency failure: {0}")]
    Internal(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
