//! Relative accuracy of Lagrange Pk finite elements.
//!
//! The crate covers the canonical Pk basis on an n-simplex and its pointwise
//! and semi-norm bounds ([`pk_basis`], [`simplex_quadrature`]), the
//! interpolation error constants and critical mesh sizes
//! ([`accuracy_constants`]), and the probability laws comparing a Pk and a
//! Pm element at a fixed mesh size ([`probability_laws`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod accuracy_constants;
pub mod error;
pub mod pk_basis;
pub mod probability_laws;
pub mod simplex_quadrature;
pub mod table;

pub use error::{Error, Result};
