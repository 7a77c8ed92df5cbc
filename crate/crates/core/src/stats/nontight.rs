//! Window-max exceedance probabilities.
//!
//! The statistic behind the failure of path tightness: over the window
//! `2 n_k <= N <= n_k^2`, how often does `max |S_N|` reach a multiple of
//! the level scale? Level mode simulates the focus level alone; full
//! mode simulates every truncated level. Each trial also records the
//! single-horizon exceedance at `N = n_k^2`, whose vanishing against the
//! persistent window max is the finite-dimensional contrast.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{IndexInterval, ProcessConfig};
use crate::report::EstimateWithCi;
use crate::stats::combinatorics::min_level_for_window_bound;
use crate::sums::{level_window_sweep, MAX_DENSE_RANGE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExceedanceMode {
    /// Only the focus level contributes.
    Level,
    /// All levels up to the configured truncation contribute.
    Full,
}

#[derive(Debug, Clone, Copy)]
pub struct ExceedanceSpec {
    pub level: usize,
    pub mode: ExceedanceMode,
    /// The window max is compared against `threshold * n_k`.
    pub threshold: f64,
    pub trials: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExceedanceReport {
    pub mode: ExceedanceMode,
    pub level: usize,
    pub level_scale: u64,
    pub threshold: f64,
    pub window: (u64, u64),
    pub estimate: EstimateWithCi,
    /// The analytic lower bound the estimate is tested against, when the
    /// spec parameters put one in force.
    pub analytic_bound: Option<f64>,
    /// `estimate - 3 se > analytic_bound`
    pub margin_pass: Option<bool>,
    /// Exceedance of `|S_{n_k^2}| >= n_k / 2` at the single last horizon.
    pub point_estimate: EstimateWithCi,
    /// Full mode: `sum_{j > level} 2 n_k / n_j`, the truncated bound on
    /// higher levels touching the window at all.
    pub intrusion_bound: Option<f64>,
}

/// Estimate `P(max_{2 n_k <= N <= n_k^2} |S_N| >= threshold * n_k)`.
pub fn window_exceedance(cfg: &ProcessConfig, spec: &ExceedanceSpec) -> Result<ExceedanceReport> {
    if spec.level < 1 || spec.level > cfg.truncation {
        return Err(Error::Range(format!(
            "level {} outside simulated levels 1..={}",
            spec.level, cfg.truncation
        )));
    }
    if spec.trials == 0 {
        return Err(Error::TooFewTrials { got: 0, min: 1 });
    }
    let n_k = cfg.seq.n(spec.level);
    let (window_lo, window_hi) = (2 * n_k, n_k * n_k);
    if window_hi - window_lo + 1 > MAX_DENSE_RANGE {
        return Err(Error::Capacity {
            what: format!(
                "window [{window_lo}, {window_hi}] exceeds the dense sweep budget; \
                 use focus+intrusion mode"
            ),
            index: Some(spec.level),
        });
    }
    let cutoff = spec.threshold * n_k as f64;
    let point_cutoff = n_k as f64 / 2.0;

    let levels: Vec<usize> = match spec.mode {
        ExceedanceMode::Level => vec![spec.level],
        ExceedanceMode::Full => (1..=cfg.truncation).collect(),
    };

    let (window_hits, point_hits) = (0..spec.trials)
        .into_par_iter()
        .map(|trial| -> Result<(u64, u64)> {
            let len = (window_hi - window_lo + 1) as usize;
            let mut profile = vec![0i64; len];
            for &level in &levels {
                let n_j = cfg.seq.n(level);
                let iv = IndexInterval::new(1 - 2 * n_j as i64, window_hi as i64 - 1)?;
                let field = cfg.sample_level(level, iv, trial)?;
                let sweep = level_window_sweep(&field, window_lo, window_hi)?;
                for (acc, v) in profile.iter_mut().zip(sweep) {
                    *acc += v;
                }
            }
            let max_abs = profile.iter().map(|v| v.abs()).max().unwrap_or(0);
            let last = profile.last().copied().unwrap_or(0);
            Ok((
                (max_abs as f64 >= cutoff) as u64,
                (last.abs() as f64 >= point_cutoff) as u64,
            ))
        })
        .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;

    let estimate = EstimateWithCi::from_hits(window_hits, spec.trials, cfg.master_seed);
    let point_estimate = EstimateWithCi::from_hits(point_hits, spec.trials, cfg.master_seed);

    let analytic_bound = match spec.mode {
        ExceedanceMode::Level
            if spec.threshold == 1.0 && n_k >= min_level_for_window_bound() =>
        {
            Some(0.25)
        }
        ExceedanceMode::Full if spec.threshold == 0.5 => Some(0.125),
        _ => None,
    };
    let margin_pass = analytic_bound.map(|b| estimate.exceeds_with_margin(b));
    let intrusion_bound = match spec.mode {
        ExceedanceMode::Full => Some(
            (spec.level + 1..=cfg.truncation)
                .map(|j| 2.0 * n_k as f64 / cfg.seq.n(j) as f64)
                .sum(),
        ),
        ExceedanceMode::Level => None,
    };

    Ok(ExceedanceReport {
        mode: spec.mode,
        level: spec.level,
        level_scale: n_k,
        threshold: spec.threshold,
        window: (window_lo, window_hi),
        estimate,
        analytic_bound,
        margin_pass,
        point_estimate,
        intrusion_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::NoiseSpec;
    use crate::sequence::LevelSequence;

    fn reference_config(seed: u64) -> ProcessConfig {
        let seq = LevelSequence::explicit(vec![2, 64, 65600]).unwrap();
        ProcessConfig::new(seq, 3, NoiseSpec::gaussian(), seed).unwrap()
    }

    #[test]
    fn level_mode_shape_and_determinism() {
        let cfg = reference_config(42);
        let spec = ExceedanceSpec {
            level: 2,
            mode: ExceedanceMode::Level,
            threshold: 1.0,
            trials: 200,
        };
        let a = window_exceedance(&cfg, &spec).unwrap();
        let b = window_exceedance(&cfg, &spec).unwrap();
        assert_eq!(a.estimate.estimate, b.estimate.estimate);
        assert_eq!(a.window, (128, 4096));
        assert_eq!(a.analytic_bound, Some(0.25));
        assert!(a.intrusion_bound.is_none());
    }

    #[test]
    fn full_mode_reports_intrusion_bound() {
        let cfg = reference_config(42);
        let spec = ExceedanceSpec {
            level: 2,
            mode: ExceedanceMode::Full,
            threshold: 0.5,
            trials: 100,
        };
        let report = window_exceedance(&cfg, &spec).unwrap();
        let want = 2.0 * 64.0 / 65600.0;
        assert!((report.intrusion_bound.unwrap() - want).abs() < 1e-12);
        assert_eq!(report.analytic_bound, Some(0.125));
    }

    #[test]
    fn small_scales_carry_no_analytic_bound() {
        // n_k = 2 is below the scale floor for the 1/4 bound
        let seq = LevelSequence::explicit(vec![2, 64]).unwrap();
        let cfg = ProcessConfig::new(seq, 2, NoiseSpec::gaussian(), 1).unwrap();
        let spec = ExceedanceSpec {
            level: 1,
            mode: ExceedanceMode::Level,
            threshold: 1.0,
            trials: 100,
        };
        let report = window_exceedance(&cfg, &spec).unwrap();
        assert_eq!(report.analytic_bound, None);
    }

    #[test]
    fn oversized_windows_advise_focus_mode() {
        let cfg = reference_config(1);
        let spec = ExceedanceSpec {
            level: 3,
            mode: ExceedanceMode::Full,
            threshold: 0.5,
            trials: 10,
        };
        let err = window_exceedance(&cfg, &spec).unwrap_err();
        assert!(err.to_string().contains("focus+intrusion"));
    }
}
