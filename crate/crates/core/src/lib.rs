//! Simulation and exact numerical verification for the two-dimensional
//! layered Kac-Ising model: Kac interactions inside each horizontal layer,
//! a weak nearest-neighbour coupling `ε = γ^A` between layers.
//!
//! The crate is organised by capability:
//!
//! - [`model`]: lattice, kernel, Hamiltonian, single-site conditionals
//! - [`meanfield`]: `m = tanh(βm)`
//! - [`mc`]: heat-bath dynamics with an incremental field cache
//! - [`coarse`]: block magnetizations, η/θ/Θ, contours and stripes
//! - [`oracle`]: exact enumeration on micro volumes and instance checks
//! - [`functional`]: the discretized free-energy functional and its minimizer
//! - [`bounds`]: closed-form Peierls inequalities and `γ₀` search
//! - [`experiments`]: replica scenarios built on the above
//! - [`io`]: run configuration, manifests, spin snapshots
//!
//! Runnable walkthroughs live in `examples/`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod coarse;
pub mod commands;
pub mod error;
pub mod experiments;
pub mod functional;
pub mod io;
pub mod mc;
pub mod meanfield;
pub mod model;
pub mod numerics;
pub mod oracle;

pub use error::{Error, Result};
