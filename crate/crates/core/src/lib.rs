//! Boundary control synthesis for `y_t = y_xx + f(x, y, y_x)` on `[-1, 1]`.
//!
//! The pipeline turns the Taylor data of an initial and a target state into
//! time traces at `x = 0`, blends them with a flat cutoff, marches sideways in
//! `x` with power series and finally checks the controls with a forward solver.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod borel;
pub mod cauchyx;
pub mod error;
pub mod gevreybounds;
pub mod heatsim;
pub mod jetmap;
pub mod pipeline;
pub mod registry;
pub mod scalar;
pub mod seriescore;

pub use error::{Error, Result};
pub use scalar::Scalar;
