//! Brute-force reference computations used as test oracles.
//!
//! Everything here works on plain nested vectors and shares no code with the
//! library under test.

pub mod cone;
pub mod dense;
pub mod lcp;
pub mod qp;

pub use dense::Mat;
