//! Run configuration, manifests, spin snapshots and tabular outputs.

mod config;
mod manifest;
mod spins;
mod tables;

pub use config::*;
pub use manifest::*;
pub use spins::*;
pub use tables::*;
