//! Lower bounds witnessing the divergence of the transfer function.
//!
//! For each level `k` the transfer value exceeds `j` on the disjoint
//! events "exactly one site fires at lag `j`, every other relevant site
//! of every truncated level is silent". Summing `j * P(event)` gives the
//! per-level mass
//!
//! `term_k = G * n_k / (2 (n_k - 1))`,
//!
//! where `G` is the shared all-silent product
//! `prod_l ((n_l^2 - 1) / n_l^2)^(2 n_l - 1)`. The terms do not decay in
//! `k`: every term stays above `G / 2`, with consecutive ratios
//! `(1 - 1/n_{k+1}) / (1 - 1/n_k) > 1` exactly, so the partial sums grow
//! at least linearly.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DivergenceTerm {
    pub level: usize,
    pub level_scale: u64,
    pub value: f64,
    /// Exact numerator/denominator, rendered only at printable sizes.
    pub exact_num: Option<String>,
    pub exact_den: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub terms: Vec<DivergenceTerm>,
    pub partial_sums: Vec<f64>,
    /// `term_k >= 0.9 * term_{k+1}` for every consecutive pair, decided
    /// in exact integer arithmetic.
    pub non_decaying: bool,
    /// The shared all-silent product `G`.
    pub shared_product: f64,
}

/// f64 value of an unreduced big ratio via top-bits division.
fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    let shift = num.bits().max(den.bits()).saturating_sub(64);
    let num_top = (num >> shift).to_f64().expect("<= 64 bits");
    let den_top = (den >> shift).to_f64().expect("<= 64 bits");
    num_top / den_top
}

const PRINTABLE_BITS: u64 = 4096;

/// Exact per-level divergence terms for the first `k_max` levels.
pub fn transfer_divergence(levels: &[u64], k_max: usize) -> Result<DivergenceReport> {
    if k_max == 0 || k_max > levels.len() {
        return Err(Error::Range(format!(
            "k_max {k_max} outside 1..={}",
            levels.len()
        )));
    }
    let levels = &levels[..k_max];
    // Shared product over all truncated levels, kept unreduced: the
    // factors are coprime within each level and a final gcd is never
    // needed for rendering.
    let mut g_num = BigUint::one();
    let mut g_den = BigUint::one();
    for &n in levels {
        let n2 = BigUint::from(n) * BigUint::from(n);
        let exp = 2 * n as u32 - 1;
        g_num *= (&n2 - BigUint::one()).pow(exp);
        g_den *= n2.pow(exp);
    }
    let g = ratio_to_f64(&g_num, &g_den);

    let mut terms = Vec::with_capacity(k_max);
    let mut partial_sums = Vec::with_capacity(k_max);
    let mut acc = 0.0f64;
    for (ix, &n) in levels.iter().enumerate() {
        let num = &g_num * BigUint::from(n);
        let den = &g_den * BigUint::from(2 * (n - 1));
        let value = ratio_to_f64(&num, &den);
        acc += value;
        partial_sums.push(acc);
        let printable = num.bits() <= PRINTABLE_BITS && den.bits() <= PRINTABLE_BITS;
        terms.push(DivergenceTerm {
            level: ix + 1,
            level_scale: n,
            value,
            exact_num: printable.then(|| num.to_string()),
            exact_den: printable.then(|| den.to_string()),
        });
    }

    // term_k >= 0.9 term_{k+1}  <=>  10 n_k (n_{k+1} - 1) >= 9 n_{k+1} (n_k - 1)
    let non_decaying = levels.windows(2).all(|w| {
        let (a, b) = (w[0] as u128, w[1] as u128);
        10 * a * (b - 1) >= 9 * b * (a - 1)
    });

    Ok(DivergenceReport {
        terms,
        partial_sums,
        non_decaying,
        shared_product: g,
    })
}
