//! Instances, patterns, assignments and their text formats.

mod format;
mod graph;
mod instance;
mod pattern;

use thiserror::Error;

pub use format::{
    parse_instance, parse_pattern, serialize_instance, serialize_pattern, ParseError,
    ParseErrorKind,
};
pub use graph::ConstraintGraph;
pub use instance::{Assignment, Instance, Relation};
pub use pattern::{Pattern, PatternVar, PointRef, Sign};

/// Domain values are plain integers; a point is identified by `(Var, Value)`.
pub type Value = i64;
/// Variables are 0-based indices.
pub type Var = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown variable {0}")]
    UnknownVariable(Var),
    #[error("self-loop constraint on variable {0}")]
    SelfLoop(Var),
    #[error("value {value} not in domain of variable {var}")]
    ValueNotInDomain { var: Var, value: Value },
    #[error("assignment does not bind variable {0}")]
    PartialAssignment(Var),
    #[error("duplicate variable {0}")]
    DuplicateVariable(String),
    #[error("duplicate point {0}")]
    DuplicatePoint(String),
    #[error("unknown point {0}")]
    UnknownPoint(String),
    #[error("edge within one variable: {0} {1}")]
    EdgeWithinVariable(String, String),
    #[error("conflicting signs on edge {0} {1}")]
    ConflictingEdge(String, String),
}
