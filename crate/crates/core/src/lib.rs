//! Analysis and global solution of mathematical programs with cardinality constraints.

pub mod cones;
pub mod corpus;
pub mod error;
pub mod expr;
pub mod files;
pub mod indices;
pub mod linalg;
pub mod lp;
pub mod model;
pub mod solver;
pub mod stationarity;
pub mod tol;

pub use error::{Error, Result};
pub use expr::{parse_expr, Expr};
pub use indices::Indices;
pub use model::{IndexSets, PairPoint, Problem, ReformulatedProblem};
pub use tol::Tolerances;
