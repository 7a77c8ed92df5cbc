//! Exact partial-sum machinery.
//!
//! For one level with scale `n`, the partial sum `S_N` of the level
//! increment is a linear form in field values whose coefficients are the
//! difference of two triangular ramps `1, 2, …, n, …, 2, 1`: one anchored
//! at the horizon `N`, one anchored at the origin. Everything here
//! exploits that structure:
//!
//! * [`coefficient_map`] — the convolution oracle: coefficients obtained
//!   by summing the raw stencil over the horizon, in exact integers;
//! * [`sum_direct`] — the definition: add up increment values one index
//!   at a time;
//! * [`sum_closed`] — the two-ramp closed form, `O(events in window)`;
//! * [`path_profile`] — full sweeps of `S_N` over an `N`-range, driven by
//!   events: each event touches `S_N` only while a moving window passes
//!   over it, so a profile costs `O(range + events)` per level instead of
//!   `O(range * n)`.
//!
//! All integer arithmetic is exact; only the noise component is floating
//! point, accumulated with Neumaier compensation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{sample_noise, IndexInterval, ProcessConfig, SparseLevelField};

/// Triangular ramp: `min(d, 2n - d)` for `1 <= d <= 2n - 1`, else 0.
#[inline]
fn ramp(n: i64, d: i64) -> i64 {
    if d >= 1 && d < 2 * n {
        d.min(2 * n - d)
    } else {
        0
    }
}

/// Contribution of an event at `site` to `S_N`: moving ramp anchored at
/// the horizon minus the static ramp anchored at the origin.
#[inline]
fn event_weight(n: i64, site: i64, horizon: i64) -> i64 {
    ramp(n, site - horizon + 2 * n) - ramp(n, site + 2 * n)
}

/// Closed evaluation of `S_N` over an explicit event list.
fn closed_sum_events<I>(events: I, n: i64, horizon: i64) -> i64
where
    I: IntoIterator<Item = (i64, i8)>,
{
    events
        .into_iter()
        .map(|(s, v)| v as i64 * event_weight(n, s, horizon))
        .sum()
}

/// Integer coefficients of `S_N` as a linear form in field values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientMap {
    pub level_scale: u64,
    pub horizon: u64,
    /// Dense hull `[1 - 2n, N - 1]`, zeros included.
    lo: i64,
    coeffs: Vec<i64>,
}

impl CoefficientMap {
    pub fn support_lo(&self) -> i64 {
        self.lo
    }

    pub fn support_hi(&self) -> i64 {
        self.lo + self.coeffs.len() as i64 - 1
    }

    pub fn get(&self, i: i64) -> i64 {
        if i < self.lo || i > self.support_hi() {
            0
        } else {
            self.coeffs[(i - self.lo) as usize]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(ix, &c)| (self.lo + ix as i64, c))
    }

    pub fn coefficient_sum(&self) -> i64 {
        self.coeffs.iter().sum()
    }

    pub fn sum_of_squares(&self) -> u128 {
        self.coeffs.iter().map(|&c| (c * c) as u128).sum()
    }

    /// `sum_i c_i * field(i)`, with full coverage of the hull required.
    pub fn contract(&self, field: &SparseLevelField) -> Result<i64> {
        let iv = field.interval();
        if !iv.covers(self.lo, self.support_hi()) {
            return Err(Error::Coverage {
                lo: self.lo,
                hi: self.support_hi(),
                interval_lo: iv.lo,
                interval_hi: iv.hi,
            });
        }
        Ok(field
            .events_in(self.lo, self.support_hi())
            .map(|(s, v)| v as i64 * self.get(s))
            .sum())
    }
}

/// Convolution oracle: `c_i = sum_{j=0}^{N-1} stencil(i - j)` with the
/// raw stencil `+1` at lags `0..n-1`, `-1` at lags `n..2n-1`, computed
/// through the stencil's prefix sums.
pub fn coefficient_map(level_scale: u64, horizon: u64) -> CoefficientMap {
    let n = level_scale as i64;
    let big_n = horizon as i64;
    // prefix(l) = sum of stencil over lags 0..=l
    let prefix = |l: i64| -> i64 {
        if l < 0 {
            0
        } else if l < n {
            l + 1
        } else if l < 2 * n {
            2 * n - 1 - l
        } else {
            0
        }
    };
    let lo = 1 - 2 * n;
    let hi = big_n - 1;
    let coeffs = (lo..=hi)
        .map(|i| {
            let first_lag = (-i).max(0);
            let last_lag = (big_n - 1 - i).min(2 * n - 1);
            prefix(last_lag) - prefix(first_lag - 1)
        })
        .collect();
    CoefficientMap {
        level_scale,
        horizon,
        lo,
        coeffs,
    }
}

/// The two-ramp closed form as an explicit coefficient map: ascending and
/// descending runs anchored at the horizon, minus the mirrored runs at
/// the origin. Overlapping runs merge additively; the result matches the
/// convolution oracle for every `N >= 1`.
pub fn closed_map_two_block(level_scale: u64, horizon: u64) -> CoefficientMap {
    let n = level_scale as i64;
    let big_n = horizon as i64;
    let lo = 1 - 2 * n;
    let hi = (big_n - 1).max(lo);
    let mut coeffs = vec![0i64; (hi - lo + 1) as usize];
    let mut add = |site: i64, c: i64| {
        if site >= lo && site <= hi {
            coeffs[(site - lo) as usize] += c;
        }
    };
    for j in 1..=n {
        add(j + big_n - 2 * n, j);
        add(j - 2 * n, -j);
    }
    for j in 1..n {
        add(j + big_n - n, n - j);
        add(j - n, -(n - j));
    }
    CoefficientMap {
        level_scale,
        horizon,
        lo,
        coeffs,
    }
}

/// Short-horizon closed form, valid for `1 <= N <= n`: a ramp pair
/// shifted by the level scale plus a flat block of height `N`.
pub fn closed_map_short_horizon(level_scale: u64, horizon: u64) -> Result<CoefficientMap> {
    let n = level_scale as i64;
    let big_n = horizon as i64;
    if big_n < 1 || big_n > n {
        return Err(Error::Range(format!(
            "short-horizon form needs 1 <= N <= {n}, got {big_n}"
        )));
    }
    let lo = 1 - 2 * n;
    let hi = big_n - 1;
    let mut coeffs = vec![0i64; (hi - lo + 1) as usize];
    let mut add = |site: i64, c: i64| {
        debug_assert!(site >= lo && site <= hi);
        coeffs[(site - lo) as usize] += c;
    };
    for j in 1..big_n {
        add(j - n, j);
        add(big_n - j, j);
        add(j - 2 * n, -j);
        add(big_n - j - n, -j);
    }
    for j in big_n..=n {
        add(j - n, big_n);
        add(j - 2 * n, -big_n);
    }
    Ok(CoefficientMap {
        level_scale,
        horizon,
        lo,
        coeffs,
    })
}

fn require_sum_coverage(field: &SparseLevelField, horizon: u64) -> Result<()> {
    let n = field.n_k() as i64;
    let iv = field.interval();
    let (lo, hi) = (1 - 2 * n, horizon as i64 - 1);
    if iv.covers(lo, hi) {
        Ok(())
    } else {
        Err(Error::Coverage {
            lo,
            hi,
            interval_lo: iv.lo,
            interval_hi: iv.hi,
        })
    }
}

/// `S_N` by definition: increment values added one index at a time.
pub fn sum_direct(field: &SparseLevelField, horizon: u64) -> Result<i64> {
    require_sum_coverage(field, horizon)?;
    let mut acc = 0i64;
    for j in 0..horizon as i64 {
        acc += field.h_at(j)?;
    }
    Ok(acc)
}

/// `S_N` by the two-ramp closed form, `O(events in window)`.
pub fn sum_closed(field: &SparseLevelField, horizon: u64) -> Result<i64> {
    require_sum_coverage(field, horizon)?;
    let n = field.n_k() as i64;
    Ok(closed_sum_events(
        field.events_in(1 - 2 * n, horizon as i64 - 1),
        n,
        horizon as i64,
    ))
}

/// Signed event mass inside a sliding site window; both bounds only move
/// right, so a whole sweep costs `O(events)` in pointer movement.
struct WindowSum<'a> {
    events: &'a [(i64, i64)],
    lo_ix: usize,
    hi_ix: usize,
    sum: i64,
}

impl<'a> WindowSum<'a> {
    fn new(events: &'a [(i64, i64)], lo: i64, hi: i64) -> Self {
        let mut w = WindowSum {
            events,
            lo_ix: 0,
            hi_ix: 0,
            sum: 0,
        };
        w.slide(lo, hi);
        w
    }

    fn slide(&mut self, lo: i64, hi: i64) {
        while self.hi_ix < self.events.len() && self.events[self.hi_ix].0 <= hi {
            self.sum += self.events[self.hi_ix].1;
            self.hi_ix += 1;
        }
        while self.lo_ix < self.hi_ix && self.events[self.lo_ix].0 < lo {
            self.sum -= self.events[self.lo_ix].1;
            self.lo_ix += 1;
        }
    }
}

/// Dense `S_N` profile of a single level over `n_lo..=n_hi` by
/// incremental update.
pub fn level_window_sweep(field: &SparseLevelField, n_lo: u64, n_hi: u64) -> Result<Vec<i64>> {
    if n_lo < 1 || n_lo > n_hi {
        return Err(Error::Range(format!("bad sweep range [{n_lo}, {n_hi}]")));
    }
    require_sum_coverage(field, n_hi)?;
    let n = field.n_k() as i64;
    let events: Vec<(i64, i64)> = field
        .events_in(1 - 2 * n, n_hi as i64 - 1)
        .map(|(s, v)| (s, v as i64))
        .collect();
    let mut out = Vec::with_capacity((n_hi - n_lo + 1) as usize);
    let mut s = closed_sum_events(events.iter().map(|&(s, v)| (s, v as i8)), n, n_lo as i64);
    out.push(s);
    let start = n_lo as i64;
    // Step rule: S_{N+1} - S_N = mass(N+1-n ..= N) - mass(N+1-2n ..= N-n).
    let mut recent = WindowSum::new(&events, start + 1 - n, start);
    let mut older = WindowSum::new(&events, start + 1 - 2 * n, start - n);
    for big_n in start..n_hi as i64 {
        s += recent.sum - older.sum;
        out.push(s);
        recent.slide(big_n + 2 - n, big_n + 1);
        older.slide(big_n + 2 - 2 * n, big_n + 1 - n);
    }
    Ok(out)
}

/// Dense profile of partial sums over an `N`-range: exact integer
/// increment part, compensated noise part, and their sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub n_lo: u64,
    pub s_h: Vec<i64>,
    pub s_m: Vec<f64>,
    pub s_y: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Series {
    Increment,
    Noise,
    Total,
}

impl PathSample {
    pub fn from_series(n_lo: u64, s_h: Vec<i64>, s_m: Vec<f64>) -> Self {
        assert_eq!(s_h.len(), s_m.len());
        let s_y = s_h.iter().zip(&s_m).map(|(&h, &m)| h as f64 + m).collect();
        PathSample { n_lo, s_h, s_m, s_y }
    }

    pub fn n_hi(&self) -> u64 {
        self.n_lo + self.s_h.len() as u64 - 1
    }

    fn index(&self, n: u64) -> Result<usize> {
        if n < self.n_lo || n > self.n_hi() {
            return Err(Error::Range(format!(
                "N = {n} outside path range [{}, {}]",
                self.n_lo,
                self.n_hi()
            )));
        }
        Ok((n - self.n_lo) as usize)
    }

    pub fn increment(&self, n: u64) -> Result<i64> {
        if n == 0 {
            return Ok(0);
        }
        Ok(self.s_h[self.index(n)?])
    }

    pub fn value(&self, series: Series, n: u64) -> Result<f64> {
        if n == 0 {
            return Ok(0.0);
        }
        let ix = self.index(n)?;
        Ok(match series {
            Series::Increment => self.s_h[ix] as f64,
            Series::Noise => self.s_m[ix],
            Series::Total => self.s_y[ix],
        })
    }
}

/// Piecewise profile of a single focus level over a long range: between
/// event windows the sum is a constant, so only the windows are stored.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FocusPath {
    pub level: usize,
    pub n_k: u64,
    pub n_lo: u64,
    pub n_hi: u64,
    /// Value of `S_N` wherever no event window is active.
    pub static_value: i64,
    pub segments: Vec<Segment>,
    pub intrusion: IntrusionReport,
    /// Deterministic bound `2 * sum_{j < level} n_j^2` on the combined
    /// contribution of all lower levels anywhere in the range.
    pub lower_level_envelope: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Segment {
    pub n_start: u64,
    pub values: Vec<i64>,
}

/// Whether higher levels could touch the focus range at all.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntrusionReport {
    pub flagged: bool,
    pub levels_with_events: Vec<usize>,
    /// `sum_{j > level} 2 n_level / n_j`, the truncated probability
    /// bound on any higher level interfering with the range.
    pub probability_bound: f64,
}

impl FocusPath {
    /// Max of `|S_N|` over `[lo, hi]` intersected with the stored range.
    pub fn max_abs_over(&self, lo: u64, hi: u64) -> Option<(i64, u64)> {
        let lo = lo.max(self.n_lo);
        let hi = hi.min(self.n_hi);
        if lo > hi {
            return None;
        }
        let mut best: Option<(i64, u64)> = None;
        let mut covered = 0u64;
        for seg in &self.segments {
            let seg_end = seg.n_start + seg.values.len() as u64 - 1;
            if seg_end < lo || seg.n_start > hi {
                continue;
            }
            let a = lo.max(seg.n_start);
            let b = hi.min(seg_end);
            covered += b - a + 1;
            for n in a..=b {
                let v = seg.values[(n - seg.n_start) as usize];
                if best.map_or(true, |(m, _)| v.abs() > m) {
                    best = Some((v.abs(), n));
                }
            }
        }
        if covered < hi - lo + 1 {
            let v = self.static_value.abs();
            if best.map_or(true, |(m, _)| v > m) {
                // argmax reported at the first uncovered index
                let mut n = lo;
                'outer: while n <= hi {
                    let mut inside = false;
                    for seg in &self.segments {
                        let seg_end = seg.n_start + seg.values.len() as u64 - 1;
                        if seg.n_start <= n && n <= seg_end {
                            n = seg_end + 1;
                            inside = true;
                            break;
                        }
                    }
                    if !inside {
                        break 'outer;
                    }
                }
                best = Some((v, n.min(hi)));
            }
        }
        best
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathMode {
    /// Every level evaluated exactly on a dense range.
    Full,
    /// Only the focus level evaluated exactly; higher levels reduce to
    /// an intrusion flag, lower levels to a deterministic envelope.
    FocusIntrusion,
}

#[derive(Debug, Clone, Copy)]
pub struct ProfileRequest {
    pub n_lo: u64,
    pub n_hi: u64,
    pub focus_level: usize,
    pub mode: PathMode,
}

#[derive(Debug, Clone)]
pub enum Profile {
    Full(PathSample),
    Focus(FocusPath),
}

/// Dense ranges above this length must use focus mode.
pub const MAX_DENSE_RANGE: u64 = 1 << 26;
/// Guard on expected materialized events per profile.
pub const MAX_EXPECTED_EVENTS: f64 = 1e7;

/// Build a partial-sum profile for one trial of the configured process.
pub fn path_profile(cfg: &ProcessConfig, req: &ProfileRequest, trial: u64) -> Result<Profile> {
    if req.n_lo < 1 || req.n_lo > req.n_hi {
        return Err(Error::Range(format!(
            "bad N-range [{}, {}]",
            req.n_lo, req.n_hi
        )));
    }
    if req.focus_level < 1 || req.focus_level > cfg.truncation {
        return Err(Error::Range(format!(
            "focus level {} outside simulated levels 1..={}",
            req.focus_level, cfg.truncation
        )));
    }
    match req.mode {
        PathMode::Full => full_profile(cfg, req, trial).map(Profile::Full),
        PathMode::FocusIntrusion => focus_profile(cfg, req, trial).map(Profile::Focus),
    }
}

fn level_interval(n_k: u64, n_hi: u64) -> IndexInterval {
    IndexInterval::new(1 - 2 * n_k as i64, n_hi as i64 - 1).expect("nonempty by construction")
}

fn full_profile(cfg: &ProcessConfig, req: &ProfileRequest, trial: u64) -> Result<PathSample> {
    let len = req.n_hi - req.n_lo + 1;
    if len > MAX_DENSE_RANGE {
        return Err(Error::Capacity {
            what: format!(
                "dense range of {len} values exceeds {MAX_DENSE_RANGE}; use focus+intrusion mode"
            ),
            index: None,
        });
    }
    let expected: f64 = (1..=cfg.truncation)
        .map(|j| {
            let n_j = cfg.seq.n(j) as f64;
            (req.n_hi as f64 + 2.0 * n_j) / (n_j * n_j)
        })
        .sum();
    if expected > MAX_EXPECTED_EVENTS {
        return Err(Error::Capacity {
            what: format!(
                "expected event count {expected:.0} exceeds {MAX_EXPECTED_EVENTS}; \
                 use focus+intrusion mode"
            ),
            index: None,
        });
    }

    let mut s_h = vec![0i64; len as usize];
    for level in 1..=cfg.truncation {
        let iv = level_interval(cfg.seq.n(level), req.n_hi);
        let field = cfg.sample_level(level, iv, trial)?;
        let sweep = level_window_sweep(&field, req.n_lo, req.n_hi)?;
        for (acc, v) in s_h.iter_mut().zip(sweep) {
            *acc += v;
        }
    }

    // Noise prefix sums with Neumaier compensation.
    let mut rng = cfg.noise_rng(trial);
    let draws = sample_noise(&cfg.noise, req.n_hi as usize, &mut rng);
    let mut s_m = Vec::with_capacity(len as usize);
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for (ix, &x) in draws.iter().enumerate() {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
        let n = ix as u64 + 1;
        if n >= req.n_lo {
            s_m.push(sum + comp);
        }
    }
    Ok(PathSample::from_series(req.n_lo, s_h, s_m))
}

fn focus_profile(cfg: &ProcessConfig, req: &ProfileRequest, trial: u64) -> Result<FocusPath> {
    let level = req.focus_level;
    let n_k = cfg.seq.n(level);
    let n = n_k as i64;
    let iv = level_interval(n_k, req.n_hi);
    let field = cfg.sample_level(level, iv, trial)?;

    let static_value = -field
        .events_in(1 - 2 * n, -1)
        .map(|(s, v)| v as i64 * ramp(n, s + 2 * n))
        .sum::<i64>();

    // Merge event windows [s+1, s+2n-1] clipped to the request range.
    let mut windows: Vec<(u64, u64)> = Vec::new();
    for (s, _) in field.events() {
        let a = (s + 1).max(req.n_lo as i64);
        let b = (s + 2 * n - 1).min(req.n_hi as i64);
        if a > b {
            continue;
        }
        let (a, b) = (a as u64, b as u64);
        match windows.last_mut() {
            Some(last) if a <= last.1 + 1 => last.1 = last.1.max(b),
            _ => windows.push((a, b)),
        }
    }
    let mut segments = Vec::with_capacity(windows.len());
    for (a, b) in windows {
        let values = level_window_sweep(&field, a, b)?;
        segments.push(Segment {
            n_start: a,
            values,
        });
    }

    let mut levels_with_events = Vec::new();
    let mut probability_bound = 0.0f64;
    for j in level + 1..=cfg.truncation {
        let n_j = cfg.seq.n(j);
        probability_bound += 2.0 * n_k as f64 / n_j as f64;
        let iv_j = level_interval(n_j, req.n_hi);
        let field_j = cfg.sample_level(j, iv_j, trial)?;
        let touches = field_j.events().any(|(s, _)| {
            let in_static = s < 0;
            let window_hits =
                s + 1 <= req.n_hi as i64 && s + 2 * n_j as i64 - 1 >= req.n_lo as i64;
            in_static || window_hits
        });
        if touches {
            levels_with_events.push(j);
        }
    }

    let lower_level_envelope: u64 = (1..level)
        .map(|j| {
            let n_j = cfg.seq.n(j) as u128;
            (2 * n_j * n_j) as u64
        })
        .sum();

    Ok(FocusPath {
        level,
        n_k,
        n_lo: req.n_lo,
        n_hi: req.n_hi,
        static_value,
        segments,
        intrusion: IntrusionReport {
            flagged: !levels_with_events.is_empty(),
            levels_with_events,
            probability_bound,
        },
        lower_level_envelope,
    })
}

/// Path functionals: the polygonal interpolation of rescaled partial
/// sums and its right-continuous step variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathKind {
    Polygonal,
    Step,
}

pub fn path_functional(
    path: &PathSample,
    series: Series,
    scale: u64,
    t: f64,
    kind: PathKind,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Range(format!("t = {t} outside [0, 1]")));
    }
    let nt = scale as f64 * t;
    let floor = nt.floor() as u64;
    let frac = nt - floor as f64;
    let base = path.value(series, floor)?;
    match kind {
        PathKind::Step => Ok(base),
        PathKind::Polygonal => {
            if frac == 0.0 {
                Ok(base)
            } else {
                let next = path.value(series, floor + 1)?;
                Ok(base + frac * (next - base))
            }
        }
    }
}

/// The window-max statistic `max |S_N| / n_k` over the level-`k` window
/// `[2 n_k, n_k^2]` (intersected with what the profile covers).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MaxStat {
    pub value: f64,
    pub max_abs: i64,
    pub argmax: u64,
    pub n_lo: u64,
    pub n_hi: u64,
}

pub fn max_statistic(profile: &Profile, n_k: u64) -> Result<MaxStat> {
    let (window_lo, window_hi) = (2 * n_k, n_k * n_k);
    match profile {
        Profile::Full(path) => {
            let lo = window_lo.max(path.n_lo);
            let hi = window_hi.min(path.n_hi());
            if lo > hi {
                return Err(Error::Range(format!(
                    "path range [{}, {}] misses the window [{window_lo}, {window_hi}]",
                    path.n_lo,
                    path.n_hi()
                )));
            }
            let mut max_abs = 0i64;
            let mut argmax = lo;
            for n in lo..=hi {
                let v = path.increment(n)?.abs();
                if v > max_abs {
                    max_abs = v;
                    argmax = n;
                }
            }
            Ok(MaxStat {
                value: max_abs as f64 / n_k as f64,
                max_abs,
                argmax,
                n_lo: lo,
                n_hi: hi,
            })
        }
        Profile::Focus(focus) => {
            let (max_abs, argmax) = focus
                .max_abs_over(window_lo, window_hi)
                .ok_or_else(|| {
                    Error::Range(format!(
                        "focus range [{}, {}] misses the window [{window_lo}, {window_hi}]",
                        focus.n_lo, focus.n_hi
                    ))
                })?;
            Ok(MaxStat {
                value: max_abs as f64 / n_k as f64,
                max_abs,
                argmax,
                n_lo: window_lo.max(focus.n_lo),
                n_hi: window_hi.min(focus.n_hi),
            })
        }
    }
}
