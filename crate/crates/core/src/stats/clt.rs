//! Goodness of fit of the rescaled process sums to the standard normal.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::field::{sample_noise, IndexInterval, ProcessConfig};
use crate::sums::sum_closed;

/// Two-sided Kolmogorov-Smirnov distance of a sample to a reference CDF.
/// Sorts in place.
pub fn ks_distance(values: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    values.sort_unstable_by(|a, b| a.partial_cmp(b).expect("no NaN in KS samples"));
    let n = values.len() as f64;
    let mut d = 0.0f64;
    for (ix, &x) in values.iter().enumerate() {
        let f = cdf(x);
        d = d.max((ix as f64 + 1.0) / n - f).max(f - ix as f64 / n);
    }
    d
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CltReport {
    pub scale: u64,
    pub trials: u64,
    pub seed: u64,
    pub sample_mean: f64,
    pub sample_sd: f64,
    pub ks: f64,
    /// Null 95% KS band `1.36 / sqrt(trials)` for reference.
    pub ks_null_band: f64,
}

/// Distribution of `S_n(process) / sqrt(n)` over seeded trials, with its
/// KS distance to the standard normal. Unit noise variance makes the
/// limit standard normal; the increment contribution telescopes away.
pub fn clt_check(cfg: &ProcessConfig, scale: u64, trials: u64) -> Result<CltReport> {
    if trials < 100 {
        return Err(Error::TooFewTrials {
            got: trials,
            min: 100,
        });
    }
    let mut values: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<f64> {
            let mut total = 0.0f64;
            for level in 1..=cfg.truncation {
                let n_k = cfg.seq.n(level);
                let iv = IndexInterval::new(1 - 2 * n_k as i64, scale as i64 - 1)?;
                let field = cfg.sample_level(level, iv, trial)?;
                total += sum_closed(&field, scale)? as f64;
            }
            let mut rng = cfg.noise_rng(trial);
            let noise = sample_noise(&cfg.noise, scale as usize, &mut rng);
            total += noise.iter().sum::<f64>();
            Ok(total / (scale as f64).sqrt())
        })
        .collect::<Result<_>>()?;

    let mean = values.iter().sum::<f64>() / trials as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / trials as f64;
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let ks = ks_distance(&mut values, |x| normal.cdf(x));
    Ok(CltReport {
        scale,
        trials,
        seed: cfg.master_seed,
        sample_mean: mean,
        sample_sd: var.sqrt(),
        ks,
        ks_null_band: 1.36 / (trials as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::NoiseSpec;
    use crate::sequence::LevelSequence;
    use statrs::distribution::ContinuousCDF;

    #[test]
    fn ks_plugin_identity_at_exact_quantiles() {
        // samples placed at the quantiles (i - 0.5)/n leave exactly
        // 0.5/n of discrepancy on each side
        let normal = Normal::new(0.0, 1.0).unwrap();
        for trials in [10usize, 100, 1000] {
            let mut values: Vec<f64> = (1..=trials)
                .map(|i| normal.inverse_cdf((i as f64 - 0.5) / trials as f64))
                .collect();
            // tolerance covers the cdf/inverse_cdf roundtrip error
            let d = ks_distance(&mut values, |x| normal.cdf(x));
            assert!(
                (d - 0.5 / trials as f64).abs() < 1e-9,
                "trials={trials} d={d}"
            );
        }
    }

    #[test]
    fn refuses_tiny_trial_counts() {
        let seq = LevelSequence::explicit(vec![2, 64]).unwrap();
        let cfg = ProcessConfig::new(seq, 2, NoiseSpec::gaussian(), 1).unwrap();
        assert!(matches!(
            clt_check(&cfg, 64, 99),
            Err(Error::TooFewTrials { .. })
        ));
    }

    #[test]
    fn deterministic_per_seed() {
        let seq = LevelSequence::explicit(vec![2, 64]).unwrap();
        let cfg = ProcessConfig::new(seq, 2, NoiseSpec::gaussian(), 77).unwrap();
        let a = clt_check(&cfg, 128, 200).unwrap();
        let b = clt_check(&cfg, 128, 200).unwrap();
        assert_eq!(a.ks, b.ks);
        assert_eq!(a.sample_mean, b.sample_mean);
    }

    #[test]
    fn pure_noise_is_close_to_normal() {
        // single tiny level: the increment part is negligible next to
        // the noise, so KS should sit near the null band
        let seq = LevelSequence::explicit(vec![1000]).unwrap();
        let cfg = ProcessConfig::new(seq, 1, NoiseSpec::gaussian(), 5).unwrap();
        let report = clt_check(&cfg, 256, 500).unwrap();
        assert!(report.ks < 4.0 * report.ks_null_band, "ks = {}", report.ks);
    }
}
