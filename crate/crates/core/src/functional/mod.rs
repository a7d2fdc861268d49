//! Discretized free-energy functional on the `γ^{-1/2}` grid.

mod checks;
mod entropy;
mod minimize;
mod problem;

pub use checks::*;
pub use entropy::{entropy_i, fbeta, fbeta_derivative};
pub use minimize::*;
pub use problem::*;
