//! Exact enumeration on micro volumes and instance checks built on it.

mod block;
mod constraint;
mod fixtures;
mod interpolation;
mod lattice_z;
mod conditional_law;
mod mc_check;
mod micro;

pub use block::{
    check_deviation_bound, check_fkg_sandwich, check_holley, holley_margins, BlockFamily, BlockInstance,
    DeviationReport, DeviationRow, EventFamily, FkgReport, HolleyReport,
};
pub use constraint::{ConstraintSpec, Predicate};
pub use fixtures::{
    block_family, lattice_fixtures, conditional_law_template, toy_contour, LatticeFixture, ToyContour, DEVIATION_B_GRID,
};
pub use interpolation::{check_interpolation, stripe_fixtures, InterpolationReport, StripeConstraint, StripeInstance};
pub use lattice_z::{
    contour_weight, enumerate_with, enumerate_z, transfer_matrix_log_z, ContourWeight, LatticeSystem, ZResult,
};
pub use conditional_law::{
    check_conditional_law, conditional_instance, run_conditional_law, satisfying_sums, splitting_sums, ConditionalInstance,
    ConditionalVerdict,
};
pub use micro::{spins_from_bits, Enumeration, MicroSystem, MAX_FREE_SPINS};
pub use mc_check::{mc_marginals, MarginalReport, MarginalRow};
