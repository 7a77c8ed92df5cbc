//! Exact dependence-coefficient computation for finite partitions and
//! finite blocks of the constructed process, plus the per-level and
//! aggregate bound chain.

pub mod partition;
pub mod profile;
pub mod window;

pub use partition::{
    atom_beta_bound, partition_coefficients, self_beta_product, ternary_site_law, CoordinateLaw,
    FinitePartition, JointLaw, MixingTriple, SUBSET_GUARD,
};
pub use profile::{
    aggregate_bound, beta_bound_profile, BoundRow, BudgetRow, MixingBoundProfile, RateCheck,
};
pub use window::{finite_window_beta_exact, WindowBetaResult};
