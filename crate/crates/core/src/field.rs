//! Sparse level fields and the per-level stencil evaluators.
//!
//! A level-`k` field assigns to each integer site an independent ternary
//! value: `+1` or `-1` each with probability `1/(2 n_k^2)`, else `0`.
//! Only the nonzero sites are stored. Two linear forms are evaluated on
//! a field:
//!
//! * `h_at(i)` — the level increment: the sum of the `n_k` most recent
//!   values minus the sum of the `n_k` before those,
//! * `transfer_at(i)` — minus the triangular-kernel sum with weights
//!   `1, 2, …, n_k, …, 2, 1` at lags `1 … 2 n_k - 1`.
//!
//! The two are tied by the telescoping identity
//! `h_at(i) = transfer_at(i) - transfer_at(i + 1)`, which is what makes
//! every partial-sum statistic of the increment collapse to boundary
//! terms.
//!
//! Evaluating a stencil whose window leaves the sampled interval is an
//! error, never an implicit zero.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{domain, substream};
use crate::sequence::LevelSequence;

/// Inclusive integer index range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexInterval {
    pub lo: i64,
    pub hi: i64,
}

impl IndexInterval {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::Range(format!("empty interval [{lo}, {hi}]")));
        }
        Ok(IndexInterval { lo, hi })
    }

    pub fn len(&self) -> u64 {
        (self.hi - self.lo) as u64 + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, i: i64) -> bool {
        self.lo <= i && i <= self.hi
    }

    pub fn covers(&self, lo: i64, hi: i64) -> bool {
        self.lo <= lo && hi <= self.hi
    }
}

/// Nonzero sites of one level's field over an interval.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseLevelField {
    level: usize,
    n_k: u64,
    interval: IndexInterval,
    events: BTreeMap<i64, i8>,
}

impl SparseLevelField {
    /// Sample a field site by site in distribution: the event count is
    /// drawn from the exact binomial and events are placed uniformly
    /// without replacement, which reproduces the per-site law.
    pub fn sample(
        level: usize,
        n_k: u64,
        interval: IndexInterval,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        if n_k < 2 {
            return Err(Error::InvalidSequence(format!(
                "level scale must be >= 2, got {n_k}"
            )));
        }
        let len = interval.len();
        if len > (1u64 << 62) {
            return Err(Error::Capacity {
                what: format!("interval of {len} sites exceeds the sampling guard"),
                index: Some(level),
            });
        }
        let p = 1.0 / (n_k as f64 * n_k as f64);
        let count = Binomial::new(len, p)
            .map_err(|e| Error::Range(format!("binomial parameters: {e}")))?
            .sample(rng);
        // Floyd's sampling: `count` distinct offsets, order-independent.
        let mut offsets = std::collections::BTreeSet::new();
        for r in (len - count)..len {
            let j = rng.random_range(0..=r);
            if !offsets.insert(j) {
                offsets.insert(r);
            }
        }
        let mut events = BTreeMap::new();
        for off in offsets {
            let value = if rng.random_bool(0.5) { 1i8 } else { -1i8 };
            events.insert(interval.lo + off as i64, value);
        }
        Ok(SparseLevelField {
            level,
            n_k,
            interval,
            events,
        })
    }

    /// Build a field from explicit events (tests, worked examples).
    pub fn from_events(
        level: usize,
        n_k: u64,
        interval: IndexInterval,
        events: impl IntoIterator<Item = (i64, i8)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (site, value) in events {
            if !interval.contains(site) {
                return Err(Error::Range(format!(
                    "event site {site} outside interval [{}, {}]",
                    interval.lo, interval.hi
                )));
            }
            if value != 1 && value != -1 {
                return Err(Error::Range(format!("event value must be +-1, got {value}")));
            }
            map.insert(site, value);
        }
        Ok(SparseLevelField {
            level,
            n_k,
            interval,
            events: map,
        })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn n_k(&self) -> u64 {
        self.n_k
    }

    pub fn interval(&self) -> IndexInterval {
        self.interval
    }

    pub fn event_count(&self) -> usize {
        self.events.len()
    }

    pub fn events(&self) -> impl Iterator<Item = (i64, i8)> + '_ {
        self.events.iter().map(|(&s, &v)| (s, v))
    }

    /// Signed events in `[lo, hi]`.
    pub fn events_in(&self, lo: i64, hi: i64) -> impl Iterator<Item = (i64, i8)> + '_ {
        self.events.range(lo..=hi).map(|(&s, &v)| (s, v))
    }

    /// Field value at a site inside the sampled interval.
    pub fn value(&self, i: i64) -> Result<i64> {
        if !self.interval.contains(i) {
            return Err(Error::Coverage {
                lo: i,
                hi: i,
                interval_lo: self.interval.lo,
                interval_hi: self.interval.hi,
            });
        }
        Ok(self.events.get(&i).copied().unwrap_or(0) as i64)
    }

    fn require_cover(&self, lo: i64, hi: i64) -> Result<()> {
        if self.interval.covers(lo, hi) {
            Ok(())
        } else {
            Err(Error::Coverage {
                lo,
                hi,
                interval_lo: self.interval.lo,
                interval_hi: self.interval.hi,
            })
        }
    }

    /// Level increment at time `i`: recent block minus the block before.
    /// Needs sites `[i - 2 n_k + 1, i]`.
    pub fn h_at(&self, i: i64) -> Result<i64> {
        let n = self.n_k as i64;
        self.require_cover(i - 2 * n + 1, i)?;
        let recent: i64 = self
            .events_in(i - n + 1, i)
            .map(|(_, v)| v as i64)
            .sum();
        let older: i64 = self
            .events_in(i - 2 * n + 1, i - n)
            .map(|(_, v)| v as i64)
            .sum();
        Ok(recent - older)
    }

    /// Per-level transfer value at time `i`: minus the triangular-kernel
    /// sum with weight `min(l, 2 n_k - l)` at lag `l = 1 … 2 n_k - 1`.
    /// Needs sites `[i - 2 n_k + 1, i - 1]`.
    pub fn transfer_at(&self, i: i64) -> Result<i64> {
        let n = self.n_k as i64;
        self.require_cover(i - 2 * n + 1, i - 1)?;
        let mut acc = 0i64;
        for (site, v) in self.events_in(i - 2 * n + 1, i - 1) {
            let lag = i - site;
            let weight = lag.min(2 * n - lag);
            acc += weight * v as i64;
        }
        Ok(-acc)
    }
}

/// Zero-mean unit-variance noise laws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseLaw {
    Gaussian,
    Rademacher,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub law: NoiseLaw,
    /// Stream id folded into substream derivation, so distinct noise
    /// components of one experiment stay independent.
    pub stream: u64,
}

impl NoiseSpec {
    pub fn gaussian() -> Self {
        NoiseSpec {
            law: NoiseLaw::Gaussian,
            stream: 0,
        }
    }

    pub fn rademacher() -> Self {
        NoiseSpec {
            law: NoiseLaw::Rademacher,
            stream: 0,
        }
    }
}

/// Draw `len` i.i.d. noise values.
pub fn sample_noise(spec: &NoiseSpec, len: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    match spec.law {
        NoiseLaw::Gaussian => (0..len).map(|_| StandardNormal.sample(rng)).collect(),
        NoiseLaw::Rademacher => (0..len)
            .map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 })
            .collect(),
    }
}

/// A reproducible process: sequence, simulated truncation depth, noise
/// law and master seed. Every random object of an experiment is a pure
/// function of this value plus a trial index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessConfig {
    pub seq: LevelSequence,
    /// Number of levels actually simulated (`<= seq.len()`).
    pub truncation: usize,
    pub noise: NoiseSpec,
    pub master_seed: u64,
}

impl ProcessConfig {
    pub fn new(
        seq: LevelSequence,
        truncation: usize,
        noise: NoiseSpec,
        master_seed: u64,
    ) -> Result<Self> {
        if truncation == 0 || truncation > seq.len() {
            return Err(Error::InvalidSequence(format!(
                "truncation {truncation} outside 1..={}",
                seq.len()
            )));
        }
        Ok(ProcessConfig {
            seq,
            truncation,
            noise,
            master_seed,
        })
    }

    /// Field substream for `(level, trial, interval)`.
    pub fn field_rng(&self, level: usize, trial: u64, interval: IndexInterval) -> ChaCha8Rng {
        substream(
            self.master_seed,
            domain::FIELD,
            &[
                level as u64,
                trial,
                interval.lo as u64,
                interval.hi as u64,
            ],
        )
    }

    pub fn noise_rng(&self, trial: u64) -> ChaCha8Rng {
        substream(self.master_seed, domain::NOISE, &[self.noise.stream, trial])
    }

    /// Sample the level-`k` field over `interval` for one trial.
    pub fn sample_level(
        &self,
        level: usize,
        interval: IndexInterval,
        trial: u64,
    ) -> Result<SparseLevelField> {
        let mut rng = self.field_rng(level, trial, interval);
        SparseLevelField::sample(level, self.seq.n(level), interval, &mut rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    fn interval(lo: i64, hi: i64) -> IndexInterval {
        IndexInterval::new(lo, hi).unwrap()
    }

    fn lone(n_k: u64, site: i64, lo: i64, hi: i64) -> SparseLevelField {
        SparseLevelField::from_events(1, n_k, interval(lo, hi), [(site, 1i8)]).unwrap()
    }

    #[test]
    fn h_stencil_of_a_lone_event() {
        let f = lone(2, 0, -10, 10);
        let expected = [(0, 1), (1, 1), (2, -1), (3, -1)];
        for (i, want) in expected {
            assert_eq!(f.h_at(i).unwrap(), want, "i={i}");
        }
        for i in [-3, -2, -1, 4, 5, 6] {
            assert_eq!(f.h_at(i).unwrap(), 0, "i={i}");
        }
    }

    #[test]
    fn h_of_empty_and_overlapping_fields() {
        let empty =
            SparseLevelField::from_events(1, 2, interval(-10, 10), []).unwrap();
        for i in -6..=10 {
            assert_eq!(empty.h_at(i).unwrap(), 0);
        }
        let two = SparseLevelField::from_events(
            1,
            2,
            interval(-10, 10),
            [(0, 1i8), (1, 1i8)],
        )
        .unwrap();
        assert_eq!(two.h_at(1).unwrap(), 2);
    }

    #[test]
    fn coverage_is_never_implicit_zero() {
        let f = lone(2, 0, -3, 10);
        assert!(f.h_at(0).is_ok());
        assert!(matches!(f.h_at(-1), Err(Error::Coverage { .. })));
        assert!(f.transfer_at(0).is_ok());
        assert!(matches!(f.transfer_at(-1), Err(Error::Coverage { .. })));
    }

    #[test]
    fn transfer_kernel_pattern() {
        // weights 1, 2, 1 at lags 1, 2, 3 for n_k = 2
        let f = lone(2, -1, -10, 10);
        assert_eq!(f.transfer_at(0).unwrap(), -1);
        let f = lone(2, -2, -10, 10);
        assert_eq!(f.transfer_at(0).unwrap(), -2);
        let f = lone(2, -3, -10, 10);
        assert_eq!(f.transfer_at(0).unwrap(), -1);
        let empty = SparseLevelField::from_events(1, 2, interval(-10, 10), []).unwrap();
        assert_eq!(empty.transfer_at(0).unwrap(), 0);
    }

    #[test]
    fn telescoping_identity_on_random_fields() {
        for trial in 0..40u64 {
            for n_k in [2u64, 3, 5] {
                let iv = interval(-40, 40);
                let mut rng = substream(99, domain::FIELD, &[n_k, trial]);
                // dense-ish test fields: force a few extra events
                let mut f = SparseLevelField::sample(1, n_k, iv, &mut rng).unwrap();
                for s in [-7i64, -1, 3] {
                    f.events.insert(s, if trial % 2 == 0 { 1 } else { -1 });
                }
                for i in 0..20i64 {
                    let lhs = f.h_at(i).unwrap();
                    let rhs = f.transfer_at(i).unwrap() - f.transfer_at(i + 1).unwrap();
                    assert_eq!(lhs, rhs, "n_k={n_k} i={i}");
                }
            }
        }
    }

    #[test]
    fn constant_field_maps_to_zero() {
        // stencil mass is zero: n_k plus-coefficients, n_k minus-coefficients
        let iv = interval(-12, 12);
        let all = SparseLevelField::from_events(
            1,
            3,
            iv,
            (-12..=12).map(|s| (s, 1i8)),
        )
        .unwrap();
        for i in -6..=12 {
            assert_eq!(all.h_at(i).unwrap(), 0);
        }
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let iv = interval(0, 9999);
        let a = SparseLevelField::sample(2, 8, iv, &mut substream(5, domain::FIELD, &[2, 0]))
            .unwrap();
        let b = SparseLevelField::sample(2, 8, iv, &mut substream(5, domain::FIELD, &[2, 0]))
            .unwrap();
        assert_eq!(a, b);
        let c = SparseLevelField::sample(2, 8, iv, &mut substream(5, domain::FIELD, &[2, 1]))
            .unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn event_count_matches_binomial_mean() {
        // expected count = len / n_k^2 = 4096*64 / 4096 = 64
        let n_k = 64u64;
        let iv = interval(0, 4096 * 64 - 1);
        let trials = 200u64;
        let mut total = 0usize;
        for t in 0..trials {
            let f =
                SparseLevelField::sample(1, n_k, iv, &mut substream(11, domain::FIELD, &[t]))
                    .unwrap();
            total += f.event_count();
        }
        let mean = total as f64 / trials as f64;
        // SD of the mean: sqrt(64 / trials) ~ 0.57
        let sd = (64.0f64 / trials as f64).sqrt();
        assert!(
            (mean - 64.0).abs() < 3.0 * sd + 1e-9,
            "mean {mean}, want 64 +- {}",
            3.0 * sd
        );
    }

    #[test]
    fn one_site_law_within_three_sigma() {
        // site nonzero with probability 1/n_k^2; use many short trials
        let n_k = 4u64;
        let p = 1.0 / 16.0;
        let trials = 100_000u64;
        let mut hits = 0u64;
        for t in 0..trials {
            let f = SparseLevelField::sample(
                1,
                n_k,
                interval(0, 15),
                &mut substream(13, domain::FIELD, &[t]),
            )
            .unwrap();
            if f.value(7).unwrap() != 0 {
                hits += 1;
            }
        }
        let freq = hits as f64 / trials as f64;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((freq - p).abs() <= 3.0 * sigma, "freq {freq} vs {p}");
    }

    #[test]
    fn disjoint_intervals_are_independent() {
        // chi-square independence of (count1, count2) over paired draws
        let n_k = 2u64;
        let trials = 10_000u64;
        let cells = 4usize; // counts 0, 1, 2, >=3
        let mut table = vec![vec![0u64; cells]; cells];
        for t in 0..trials {
            let f1 = SparseLevelField::sample(
                1,
                n_k,
                interval(0, 7),
                &mut substream(17, domain::FIELD, &[1, t, 0, 7]),
            )
            .unwrap();
            let f2 = SparseLevelField::sample(
                1,
                n_k,
                interval(100, 107),
                &mut substream(17, domain::FIELD, &[1, t, 100, 107]),
            )
            .unwrap();
            let a = f1.event_count().min(cells - 1);
            let b = f2.event_count().min(cells - 1);
            table[a][b] += 1;
        }
        let row: Vec<f64> = (0..cells)
            .map(|i| table[i].iter().sum::<u64>() as f64)
            .collect();
        let col: Vec<f64> = (0..cells)
            .map(|j| (0..cells).map(|i| table[i][j]).sum::<u64>() as f64)
            .collect();
        let mut chi2 = 0.0;
        let mut df = 0i64;
        for i in 0..cells {
            for j in 0..cells {
                let expected = row[i] * col[j] / trials as f64;
                if expected >= 5.0 {
                    let d = table[i][j] as f64 - expected;
                    chi2 += d * d / expected;
                    df += 1;
                }
            }
        }
        let df = (df - (cells as i64 - 1) - (cells as i64 - 1) - 1).max(1) as f64;
        // chi-square mean df, sd sqrt(2 df); 3-sigma acceptance
        assert!(
            chi2 < df + 3.0 * (2.0 * df).sqrt(),
            "chi2 {chi2} vs df {df}"
        );
    }

    #[test]
    fn noise_laws() {
        let spec = NoiseSpec::rademacher();
        let vals = sample_noise(&spec, 1000, &mut substream(3, domain::NOISE, &[0]));
        assert!(vals.iter().all(|&v| v == 1.0 || v == -1.0));

        let spec = NoiseSpec::gaussian();
        let vals = sample_noise(&spec, 1_000_000, &mut substream(3, domain::NOISE, &[1]));
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        assert!(mean.abs() < 4.0 / (vals.len() as f64).sqrt());

        let again = sample_noise(&spec, 1_000_000, &mut substream(3, domain::NOISE, &[1]));
        assert_eq!(vals, again);
    }

    #[test]
    fn site_law_moments_are_exact() {
        // E[e] = 0 and E[e^2] = 1/n_k^2, directly from the law
        use num_rational::BigRational;
        use num_traits::Zero;
        for n_k in [2u64, 8, 64] {
            let law = crate::mixing::ternary_site_law(n_k);
            let mean: BigRational = law
                .outcomes
                .iter()
                .map(|(v, p)| BigRational::from_integer((*v).into()) * p)
                .sum();
            assert!(mean.is_zero());
            let second: BigRational = law
                .outcomes
                .iter()
                .map(|(v, p)| BigRational::from_integer((v * v).into()) * p)
                .sum();
            let want = BigRational::new(1.into(), (n_k as i64 * n_k as i64).into());
            assert_eq!(second, want);
        }
    }
}
