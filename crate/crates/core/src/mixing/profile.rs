//! Aggregate dependence-coefficient bounds across levels.
//!
//! Each level's increment process has dependence range `2 n_k` by
//! construction, and its coefficient at any shorter distance is bounded
//! by `4 / n_k` (through the near-certain all-silent atom of the
//! generating block). Levels are independent, so the process bound is
//! the sum of per-level bounds. A level contributes while the distance
//! `N` satisfies `N < 2 n_k` and drops to an exact zero from `N = 2 n_k`
//! on; that boundary convention is fixed here once and reproduced
//! verbatim in every report.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sequence::{LevelSequence, SequenceOrigin};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundRow {
    pub distance: u64,
    pub per_level: Vec<f64>,
    pub aggregate: f64,
}

/// Rate check for delta-rule sequences: the aggregate bound at distance
/// `2N` against the decay exponent `1 / (2 + delta)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateCheck {
    pub delta: f64,
    pub exponent: f64,
    /// `sup_N B(2N) * N^exponent` over the grid.
    pub sup_product: f64,
    pub at_distance: u64,
}

/// For adaptive sequences: `B(2 n_k) <= c_{2 n_k}` per level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BudgetRow {
    pub level: usize,
    pub aggregate_at_2nk: f64,
    pub target: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MixingBoundProfile {
    pub rows: Vec<BoundRow>,
    pub nonincreasing: bool,
    pub rate: Option<RateCheck>,
    pub budget: Option<Vec<BudgetRow>>,
}

/// Per-level bound at a distance: `4 / n_k` while the level is in range.
fn level_bound(n_k: u64, distance: u64) -> BigRational {
    if distance < 2 * n_k {
        BigRational::new(4.into(), BigInt::from(n_k))
    } else {
        BigRational::from_integer(0.into())
    }
}

/// Exact aggregate bound at a distance.
pub fn aggregate_bound(seq: &LevelSequence, distance: u64) -> BigRational {
    (1..=seq.len())
        .map(|k| level_bound(seq.n(k), distance))
        .sum()
}

/// Bound table over a distance grid, with the rate product for
/// delta-rule sequences and the per-level budget check for adaptive
/// ones.
pub fn beta_bound_profile(
    seq: &LevelSequence,
    grid: &[u64],
    delta: Option<f64>,
) -> Result<MixingBoundProfile> {
    if grid.is_empty() {
        return Err(Error::Range("empty distance grid".into()));
    }
    let mut rows = Vec::with_capacity(grid.len());
    for &distance in grid {
        let per_level: Vec<f64> = (1..=seq.len())
            .map(|k| level_bound(seq.n(k), distance).to_f64().expect("fits f64"))
            .collect();
        let aggregate = aggregate_bound(seq, distance).to_f64().expect("fits f64");
        rows.push(BoundRow {
            distance,
            per_level,
            aggregate,
        });
    }
    let mut sorted = rows.clone();
    sorted.sort_by_key(|r| r.distance);
    let nonincreasing = sorted.windows(2).all(|w| w[1].aggregate <= w[0].aggregate);

    let rate = delta.map(|d| {
        let exponent = 1.0 / (2.0 + d);
        let mut sup_product = 0.0f64;
        let mut at_distance = 0u64;
        for &big_n in grid {
            let b = aggregate_bound(seq, 2 * big_n).to_f64().expect("fits f64");
            let product = b * (big_n as f64).powf(exponent);
            if product > sup_product {
                sup_product = product;
                at_distance = big_n;
            }
        }
        RateCheck {
            delta: d,
            exponent,
            sup_product,
            at_distance,
        }
    });

    let budget = match seq.origin() {
        SequenceOrigin::Adaptive { budget } => {
            let mut rows = Vec::with_capacity(seq.len());
            for k in 1..=seq.len() {
                let b = aggregate_bound(seq, 2 * seq.n(k)).to_f64().expect("fits f64");
                let target = budget.eval(2 * seq.n(k))?;
                rows.push(BudgetRow {
                    level: k,
                    aggregate_at_2nk: b,
                    target,
                    ok: b <= target,
                });
            }
            Some(rows)
        }
        _ => None,
    };

    Ok(MixingBoundProfile {
        rows,
        nonincreasing,
        rate,
        budget,
    })
}
