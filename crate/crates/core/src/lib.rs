//! Elastic shape distance between curves in R^d.
//!
//! Curves are compared through their square-root velocity functions (SRVFs),
//! minimizing the L2 distance over rotations, reparametrizations and, for
//! closed curves, the starting point.

// `!(x > 0.0)` style checks deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod curve;
pub mod dp;
pub mod error;
pub mod fft_rotation;
pub mod pipeline;
pub mod rotation;
pub mod samples;
pub mod spline;
pub mod srvf;

pub use error::{Error, Result};
