//! Executable constructions of smooth, nowhere-analytic functions with
//! prescribed zero sets.
//!
//! Given a finite description of a closed set `Z`, this crate builds
//! infinitely differentiable functions that vanish exactly on `Z` (entire,
//! smooth, nowhere-analytic, or Pringsheim-singular variants, whenever `Z`
//! admits them), free algebras of such functions over exponential
//! generators, and diagnostics that make the finitely checkable parts
//! observable: exact zeros, boundary flatness, dual-path derivative
//! agreement, exponent-vector expansions, and Taylor-radius traces.
//!
//! Everything numeric runs on arbitrary-precision floats with certified
//! truncation bounds; everything structural (zero sets, polynomial
//! expansions, derivative recurrences) runs on exact integers and rationals.

pub mod algebra;
pub mod analysis;
pub mod bumps;
pub mod constructions;
pub mod error;
pub mod numkit;
pub mod zeroset;

pub use error::{Error, Result};
pub use numkit::{Jet, Prec, Real};
