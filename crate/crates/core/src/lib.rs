//! Simulation and exact-verification laboratory for a strictly
//! stationary multilevel coboundary process built from sparse
//! independent ternary fields.
//!
//! The process adds, over a lacunary sequence of level scales, block
//! increments that telescope against a triangular transfer kernel, plus
//! an independent unit-variance noise. Rescaled partial sums satisfy the
//! central limit theorem, yet over each level's window `[2 n_k, n_k^2]`
//! the running maximum exceeds the level scale with probability bounded
//! away from zero, which rules out weak convergence of the partial-sum
//! paths. Everything quantitative about that picture is either computed
//! exactly here (coefficient maps, variances, dependence coefficients,
//! moment and divergence bounds) or estimated by seeded Monte Carlo with
//! explicit error margins.
//!
//! Modules:
//! * [`sequence`] — lacunary level sequences and their growth validation;
//! * [`field`] — sparse level fields, stencil evaluators, noise;
//! * [`sums`] — coefficient maps, closed partial-sum forms, event-driven
//!   sweeps, path functionals, the window-max statistic;
//! * [`stats`] — exact variances, CLT goodness of fit, exceedance
//!   probabilities, Bell-number moment bounds, divergence witnesses;
//! * [`mixing`] — exact dependence coefficients and the bound chain;
//! * [`rng`] — counter-based substreams for reproducible parallelism.

pub mod error;
pub mod field;
pub mod mixing;
pub mod report;
pub mod rng;
pub mod sequence;
pub mod stats;
pub mod sums;

pub use error::{Error, Result};
