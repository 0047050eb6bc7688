//! Distributed optimisation over weight-balanced digraphs with heavy-ball
//! momentum, gradient tracking and nonlinear (quantised or saturated)
//! links.
//!
//! The crate is organised bottom-up:
//!
//! - [`graph`]: networks, Laplacians and switching schedules
//! - [`spectrum`]: eigenvalues, admissible step-size bounds and
//!   linearised stability
//! - [`nonlinearity`]: sector-bounded link maps
//! - [`objectives`]: local cost families and datasets
//! - [`dynamics`]: the continuous-time flow and its Euler discretisation
//! - [`harness`]: configuration, sweeps, data loaders and bench recipes

// Index loops mirror the dense linear algebra they implement, and negated
// comparisons are how parameter checks reject NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod graph;
pub mod harness;
pub mod nonlinearity;
pub mod objectives;
pub mod spectrum;
