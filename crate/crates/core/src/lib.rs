//! Construction, simulation and verification of integrable magnetic geodesic
//! flows on two-dimensional surfaces.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod hodograph;
pub mod integrals;
pub mod legendre;
pub mod scalar;
pub mod special;

pub use error::{Error, Result};
