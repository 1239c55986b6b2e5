//! Numerical Finsler geometry in local coordinates.

// `!(a > b)` is used on purpose so that NaN fails checks.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod expr;
pub mod harness;
pub mod jets;
pub mod classify;
pub mod conformal;
pub mod connection;
pub mod curvature;
pub mod metric;
pub mod report;
pub mod tensor;

pub use error::{FinslerError, Result};
