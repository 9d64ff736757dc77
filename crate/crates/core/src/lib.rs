//! Projection-free convex optimization with computable primal-dual gap certificates.
//!
//! Frank-Wolfe (vanilla, heavy-ball, composite, optimistic) and gradient descent with
//! primal-dual step sizes, plus the trace and experiment harness used to benchmark them.

pub mod algorithms;
pub mod error;
pub mod gaps;
pub mod harness;
pub mod linalg;
pub mod model;
pub mod online;
pub mod oracles;
pub mod steps;
pub mod trace;

pub use error::{Error, Result};
