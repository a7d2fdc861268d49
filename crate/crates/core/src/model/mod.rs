//! Lattice geometry, Kac kernel, Hamiltonian and single-site conditionals.

mod energy;
mod kernel;
mod lattice;
mod params;

pub use energy::{
    conditional_gibbs, hamiltonian, hamiltonian_with_epsilon, local_field, total_field,
    vertical_neighbours,
};
pub use kernel::{CosineProfile, KacKernel, KacProfile};
pub use lattice::{check_block_width, HorizontalBc, Lattice, SpinConfig, VerticalBc};
pub use params::{ModelParams, RawParams, Scales};
