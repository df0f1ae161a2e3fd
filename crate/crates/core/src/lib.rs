//! Bound states of the Dirichlet Laplacian in broken (V-shaped) planar waveguides.
//!
//! The crate discretizes the guide with high-order Lagrange elements, computes the
//! eigenvalues below the essential spectrum `[1, inf)` by inverted subspace iteration,
//! and cross-checks them against small-angle Airy asymptotics, a Born-Oppenheimer
//! reduction, explicit counting bounds and the exponential decay in the straight arms.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod asymptotics;
pub mod bounds;
pub mod cli;
pub mod config;
pub mod decay;
pub mod drivers;
pub mod eigensolve;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod output;

pub use error::{Error, Result};
