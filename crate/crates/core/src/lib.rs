#![no_std]
//! Numerical laboratory for planar capacitors.
//!
//! Solves harmonic and p-harmonic Dirichlet problems on doubly and triply
//! connected grid domains, computes the differential of the resulting
//! (complex) potentials, locates rank-zero and rank-one critical points and
//! traces the level-set graphs ("dendrites") through them.
//!
//! The crate is `no_std` and needs only `alloc`; floating point functions go
//! through `libm`. File formats, the scenario runner and the CLI live in the
//! companion `caplab` crate.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod analytic;
mod cg;
mod error;
pub mod field;
pub mod fixtures;
pub mod geometry;
pub mod laplace;
pub mod levelset;
pub mod plaplace;

pub use num_complex::Complex64 as C64;

pub use crate::error::{Error, Result};
pub use crate::field::{ComplexField, ScalarField};
pub use crate::geometry::{
    BoundaryData, BoundaryMap, CapacitorSpec, Curve, GridSpec, Mask, NodeKind, Point,
};
pub use crate::laplace::SolveReport;
