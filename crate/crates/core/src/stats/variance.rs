//! Exact partial-sum variances.
//!
//! For one level the variance of `S_N` is `(sum_i c_i^2) / n_k^2` with
//! the coefficients from the two-ramp form. The square sum has closed
//! expressions on both flanks:
//!
//! * `N >= 2 n`: the two ramps are disjoint and the sum is horizon-free,
//!   `2 * (Q(n) + Q(n-1))` with `Q(m) = m(m+1)(2m+1)/6`;
//! * `N <= n`: overlapping ramps collapse to `2 n N^2 - N^3 + N`.
//!
//! The band in between is summed directly from the coefficient map.
//! Levels are independent, so process variances add.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::{IndexInterval, ProcessConfig};
use crate::stats::accum::RunningMoments;
use crate::sums::{coefficient_map, sum_closed};

fn square_pyramid(m: u64) -> u128 {
    let m = m as u128;
    m * (m + 1) * (2 * m + 1) / 6
}

/// Exact `sum_i c_i^2` for the level coefficients at a given horizon.
pub fn coefficient_sq_sum(level_scale: u64, horizon: u64) -> u128 {
    let n = level_scale;
    let big_n = horizon;
    if big_n >= 2 * n {
        2 * (square_pyramid(n) + square_pyramid(n - 1))
    } else if big_n <= n {
        let (n, big_n) = (n as u128, big_n as u128);
        2 * n * big_n * big_n - big_n * big_n * big_n + big_n
    } else {
        coefficient_map(level_scale, horizon).sum_of_squares()
    }
}

/// Exact variance of the level partial sum at a horizon, as a rational.
pub fn variance_level_exact(level_scale: u64, horizon: u64) -> BigRational {
    let num = BigInt::from(coefficient_sq_sum(level_scale, horizon));
    let den = BigInt::from(level_scale) * BigInt::from(level_scale);
    BigRational::new(num, den)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VarianceRow {
    pub horizon: u64,
    /// Index of the level band the horizon falls into.
    pub band_level: usize,
    pub per_level: Vec<f64>,
    pub total_increment: f64,
    /// `total_increment / N`
    pub ratio: f64,
    /// With unit noise variance: `total_increment + N`.
    pub total_process: f64,
    /// Head levels (`<= band_level`) against `3 n_band`.
    pub head_sum: f64,
    pub head_bound: f64,
    /// Tail levels (`> band_level`) against `(pi^2 / 3) N^2 / n_{band+1}`.
    pub tail_sum: f64,
    pub tail_bound: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VarianceReport {
    pub rows: Vec<VarianceRow>,
    pub sup_ratio: f64,
    pub splits_ok: bool,
}

/// Exact per-level variance table over a horizon list.
pub fn variance_profile(cfg: &ProcessConfig, horizons: &[u64]) -> Result<VarianceReport> {
    let levels: Vec<u64> = (1..=cfg.truncation).map(|k| cfg.seq.n(k)).collect();
    let mut rows = Vec::with_capacity(horizons.len());
    let mut sup_ratio = 0.0f64;
    let mut splits_ok = true;
    for &horizon in horizons {
        let per_level_exact: Vec<BigRational> = levels
            .iter()
            .map(|&n| variance_level_exact(n, horizon))
            .collect();
        let per_level: Vec<f64> = per_level_exact
            .iter()
            .map(|v| v.to_f64().expect("desk-scale variance fits f64"))
            .collect();
        let total: f64 = per_level.iter().sum();
        let ratio = total / horizon as f64;
        sup_ratio = sup_ratio.max(ratio);

        let band_level = match cfg.seq.level_index(horizon) {
            Ok(k) => k.min(cfg.truncation),
            Err(_) => 0, // horizon below the first level: everything is tail
        };
        let head_sum: f64 = per_level[..band_level].iter().sum();
        // per-level variance is at most 1.5 n_j for settled horizons and
        // doubling makes the head sum geometric
        let head_bound = if band_level > 0 {
            3.0 * levels[band_level - 1] as f64
        } else {
            0.0
        };
        let tail_sum: f64 = per_level[band_level..].iter().sum();
        let tail_bound = if band_level < levels.len() {
            let next = levels[band_level] as f64;
            let h = horizon as f64;
            (std::f64::consts::PI.powi(2) / 3.0) * h * h / next
        } else {
            0.0
        };
        let row_ok = head_sum <= head_bound + 1e-9
            && (band_level >= levels.len() || tail_sum <= tail_bound + 1e-9);
        splits_ok &= row_ok;
        rows.push(VarianceRow {
            horizon,
            band_level,
            per_level,
            total_increment: total,
            ratio,
            total_process: total + horizon as f64,
            head_sum,
            head_bound,
            tail_sum,
            tail_bound,
        });
    }
    Ok(VarianceReport {
        rows,
        sup_ratio,
        splits_ok,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonteCarloVariance {
    pub level: usize,
    pub horizon: u64,
    pub trials: u64,
    pub sample_variance: f64,
    pub exact_variance: f64,
    pub relative_error: f64,
}

/// Sample variance of one level's partial sum against the exact value.
pub fn monte_carlo_level_variance(
    cfg: &ProcessConfig,
    level: usize,
    horizon: u64,
    trials: u64,
) -> Result<MonteCarloVariance> {
    let n_k = cfg.seq.n(level);
    let iv = IndexInterval::new(1 - 2 * n_k as i64, horizon as i64 - 1)?;
    // Per-trial values come back in trial order, so the fold below is
    // independent of the thread count.
    let values: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<f64> {
            let field = cfg.sample_level(level, iv, trial)?;
            Ok(sum_closed(&field, horizon)? as f64)
        })
        .collect::<Result<_>>()?;
    let mut moments = RunningMoments::new();
    for v in values {
        moments.push(v);
    }
    let exact = variance_level_exact(n_k, horizon)
        .to_f64()
        .expect("fits f64");
    let sample = moments.sample_variance();
    Ok(MonteCarloVariance {
        level,
        horizon,
        trials,
        sample_variance: sample,
        exact_variance: exact,
        relative_error: (sample - exact).abs() / exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::NoiseSpec;
    use crate::sequence::LevelSequence;

    fn rational(num: i64, den: i64) -> BigRational {
        BigRational::new(num.into(), den.into())
    }

    #[test]
    fn closed_variances_match_known_values() {
        assert_eq!(variance_level_exact(2, 4), rational(3, 1));
        assert_eq!(variance_level_exact(2, 100), rational(3, 1));
        assert_eq!(variance_level_exact(2, 2), rational(5, 2));
        assert_eq!(variance_level_exact(3, 6), rational(38, 9));
        assert_eq!(variance_level_exact(3, 600), rational(38, 9));
    }

    #[test]
    fn closed_bands_match_the_coefficient_oracle() {
        for n_k in [2u64, 3, 5, 8] {
            for horizon in 1..=(6 * n_k * n_k).min(400) {
                let direct = coefficient_map(n_k, horizon).sum_of_squares();
                assert_eq!(
                    coefficient_sq_sum(n_k, horizon),
                    direct,
                    "n_k={n_k} N={horizon}"
                );
            }
        }
    }

    #[test]
    fn settled_variance_is_horizon_free_and_explicit() {
        for n_k in [2u64, 3, 5, 8, 64] {
            let want = {
                let q = |m: u64| (m * (m + 1) * (2 * m + 1) / 6) as i64;
                rational(2 * (q(n_k) + q(n_k - 1)), (n_k * n_k) as i64)
            };
            for horizon in [2 * n_k, 2 * n_k + 1, 4 * n_k, 100 * n_k] {
                assert_eq!(variance_level_exact(n_k, horizon), want, "n_k={n_k}");
            }
        }
    }

    #[test]
    fn short_horizon_ratio_window() {
        // variance * n / N^2 stays in [1, 3] while N <= n
        for exp in 3..=8u32 {
            let n_k = 1u64 << exp; // 8 .. 256
            for horizon in 1..=n_k {
                let v = variance_level_exact(n_k, horizon).to_f64().unwrap();
                let scaled = v * n_k as f64 / (horizon as f64 * horizon as f64);
                assert!(
                    (1.0..=3.0).contains(&scaled),
                    "n_k={n_k} N={horizon} scaled={scaled}"
                );
            }
        }
    }

    fn reference_config(seed: u64) -> ProcessConfig {
        let seq = LevelSequence::explicit(vec![2, 64, 65600]).unwrap();
        ProcessConfig::new(seq, 3, NoiseSpec::gaussian(), seed).unwrap()
    }

    #[test]
    fn profile_additivity_and_bounds() {
        let cfg = reference_config(3);
        let report = variance_profile(&cfg, &[4, 64, 256, 4096]).unwrap();
        for row in &report.rows {
            let sum: f64 = row.per_level.iter().sum();
            assert!((row.total_increment - sum).abs() < 1e-9);
            assert!((row.total_process - (sum + row.horizon as f64)).abs() < 1e-9);
        }
        assert!(report.splits_ok);

        // the configured tail bound the profile checks at N = 4096:
        // level-3 exact variance <= 2 N^2 / n_3
        let level3 = variance_level_exact(65600, 4096);
        let bound = rational(2 * 4096 * 4096, 65600);
        assert!(level3 <= bound);
        // and the reference scale of that bound is about 255.8
        let scale = (4096.0f64 * 4096.0) / 65600.0;
        assert!((scale - 255.8).abs() < 0.1);
    }

    #[test]
    fn single_level_profile_is_constant_once_settled() {
        let seq = LevelSequence::explicit(vec![8]).unwrap();
        let cfg = ProcessConfig::new(seq, 1, NoiseSpec::gaussian(), 1).unwrap();
        let report = variance_profile(&cfg, &[16, 17, 64, 1000]).unwrap();
        let first = report.rows[0].total_increment;
        for row in &report.rows {
            assert_eq!(row.total_increment, first);
        }
    }

    #[test]
    fn monte_carlo_matches_exact_within_tolerance() {
        let cfg = reference_config(12);
        let mc = monte_carlo_level_variance(&cfg, 2, 256, 20_000).unwrap();
        assert!(
            mc.relative_error < 0.05,
            "relative error {}",
            mc.relative_error
        );
    }
}
