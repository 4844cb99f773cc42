//! Curvature algebra in dimension four.
//!
//! Decides whether an algebraic curvature tensor is Osserman or conformally
//! Osserman, splits its Weyl part into self-dual and anti-self-dual blocks,
//! and recovers a quaternionic representation `W = Σ λᵢ R_{Φᵢ}` for half-flat
//! Weyl tensors. The [`metriclab`] module evaluates curvature of concrete
//! metrics by finite differences and runs the same classification pointwise.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod curvature;
pub mod duality;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod lintensor;
pub mod metriclab;
pub mod osserman;
pub mod quaternion;
pub mod verify;

pub use error::{Error, Result};
