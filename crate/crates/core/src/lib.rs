//! Stability verification for discrete-time linear complementarity systems.
//!
//! The crate decides whether a common (state-only) or extended (state and
//! multiplier) quadratic Lyapunov function exists by an exact cutting-plane
//! method whose separation step minimizes quadratic forms over the nonconvex
//! graph cone of the complementarity problem.

pub mod cpa;
pub mod error;
pub mod lcp;
pub mod lyapunov;
pub mod numkit;
pub mod system;

pub use error::{Error, Result};
