//! Discrete p-energies on graph approximations of the planar Sierpinski
//! carpet: graph builders, constrained p-energy minimisation, conductance
//! scaling, Poincaré constants and finite-level energy measures.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod carpet;
pub mod energy;
pub mod error;
pub mod graphs;
pub mod measures;
pub mod poincare;
pub mod scaling;
pub mod solver;

pub use error::{CarpetError, Result};

/// Crate version, recorded in run provenance.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
