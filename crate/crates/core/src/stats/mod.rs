//! Statistical and combinatorial verification: exact variances, CLT
//! goodness of fit, window-max exceedance probabilities, moment bounds,
//! and the transfer-function divergence witness.

pub mod accum;
pub mod clt;
pub mod combinatorics;
pub mod divergence;
pub mod moments;
pub mod nontight;
pub mod variance;

pub use accum::RunningMoments;
pub use clt::{clt_check, ks_distance, CltReport};
pub use combinatorics::{bell, bell_numbers, bell_u64, min_level_for_window_bound, union_lower_bound};
pub use divergence::{transfer_divergence, DivergenceReport, DivergenceTerm};
pub use moments::{moment_suite, MomentReport, ENUMERATION_BUDGET};
pub use nontight::{window_exceedance, ExceedanceMode, ExceedanceReport, ExceedanceSpec};
pub use variance::{
    coefficient_sq_sum, monte_carlo_level_variance, variance_level_exact, variance_profile,
    MonteCarloVariance, VarianceReport, VarianceRow,
};
