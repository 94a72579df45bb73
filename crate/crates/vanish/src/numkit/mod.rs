//! Scalar and truncated-series arithmetic: the evaluation engine everything
//! else compiles down to.

pub mod jet;
pub mod rat;
pub mod real;

pub use jet::Jet;
pub use real::{Prec, Real};
