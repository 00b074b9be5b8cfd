//! Singleton arc consistency as a decision procedure for binary CSP classes
//! defined by forbidden patterns.

pub mod model;
pub mod catalog;
pub mod matching;
pub mod propagate;
pub mod transform;
pub mod instances;
pub mod solve;
pub mod verify;
