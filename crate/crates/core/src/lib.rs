//! Isogeometric mortar discretization of the biharmonic equation on
//! multipatch spline domains.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]
// index loops mirror the tensor notation; `!(a > b)` deliberately rejects NaN
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod assembly;
pub mod bspline;
pub mod builtin;
pub mod error;
pub mod geometry;
pub mod infsup;
pub mod linalg;
pub mod pipeline;
pub mod quadrature;
pub mod solve;
pub mod spaces;
pub mod topology;

pub use error::{Error, ErrorKind, Result};
