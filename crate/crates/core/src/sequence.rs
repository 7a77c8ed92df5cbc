//! Lacunary level sequences.
//!
//! A [`LevelSequence`] holds the strictly increasing integers `n_1 < n_2 < …`
//! that set the scale of every level of the construction. Growth is
//! validated per index against three conditions:
//!
//! * doubling: `n_{k+1} >= 2 n_k` (implies summability of `1/n_k`),
//! * quadratic-sum growth: `16 * (n_1^2 + … + n_k^2) <= n_{k+1}`,
//! * super-geometric growth: `n_{k+1} >= (k+1)^2 n_k`.
//!
//! The two growth conditions may fail at small indices for perfectly good
//! sequences, so validation records the smallest index `K0` from which
//! both hold through the end instead of rejecting.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a sequence was produced; carried in serialized form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SequenceOrigin {
    Explicit,
    /// `n_k = floor(16^((2+delta)^k))`; `delta` is kept as the decimal
    /// string it was built from so the rule stays exact.
    DeltaRule { delta: String },
    Adaptive { budget: RateBudget },
}

/// A decreasing positive rate target `c_j`, given as an evaluable rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum RateBudget {
    Constant { value: f64 },
    /// `c_j = 1 / max(j, 1)`.
    InvLinear,
    /// `c_j = max(j, 1)^(-alpha)`.
    InvPower { alpha: f64 },
}

impl RateBudget {
    pub fn eval(&self, j: u64) -> Result<f64> {
        let c = match self {
            RateBudget::Constant { value } => *value,
            RateBudget::InvLinear => 1.0 / j.max(1) as f64,
            RateBudget::InvPower { alpha } => (j.max(1) as f64).powf(-alpha),
        };
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::Budget(format!(
                "rate rule {self} is not positive at index {j} (got {c})"
            )));
        }
        Ok(c)
    }
}

impl fmt::Display for RateBudget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateBudget::Constant { value } => write!(f, "constant:{value}"),
            RateBudget::InvLinear => write!(f, "inv-linear"),
            RateBudget::InvPower { alpha } => write!(f, "inv-power:{alpha}"),
        }
    }
}

impl FromStr for RateBudget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "inv-linear" {
            return Ok(RateBudget::InvLinear);
        }
        if let Some(v) = s.strip_prefix("constant:") {
            let value: f64 = v
                .parse()
                .map_err(|_| Error::Budget(format!("bad constant rate {v:?}")))?;
            return Ok(RateBudget::Constant { value });
        }
        if let Some(v) = s.strip_prefix("inv-power:") {
            let alpha: f64 = v
                .parse()
                .map_err(|_| Error::Budget(format!("bad power {v:?}")))?;
            return Ok(RateBudget::InvPower { alpha });
        }
        Err(Error::Budget(format!(
            "unknown rate rule {s:?} (expected inv-linear, constant:<c>, inv-power:<a>)"
        )))
    }
}

/// Per-index growth checks for `k` (the condition couples `n_k` to `n_{k+1}`).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GrowthCheck {
    pub k: usize,
    /// `n_{k+1} >= 2 n_k`
    pub doubling: bool,
    /// `16 * sum_{j<=k} n_j^2 <= n_{k+1}`
    pub quad_sum: bool,
    /// `n_{k+1} >= (k+1)^2 n_k`
    pub super_geometric: bool,
}

/// Outcome of [`validate_lacunary`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    /// `n_1 >= 2`
    pub first_level_ok: bool,
    pub checks: Vec<GrowthCheck>,
    /// Smallest index `K0` such that quadratic-sum and super-geometric
    /// growth hold for every `k` in `[K0, K)`. Equals `K` when the last
    /// checked index fails (nothing validated).
    pub validated_from: usize,
    /// Doubling holds at every index.
    pub doubling_everywhere: bool,
}

impl ValidationReport {
    /// All conditions hold from the very first index.
    pub fn fully_lacunary(&self) -> bool {
        self.first_level_ok && self.doubling_everywhere && self.validated_from == 1
    }

    /// Human-readable list of failed conditions, for CLI surfaces.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.first_level_ok {
            out.push("first level must be >= 2".to_string());
        }
        for c in &self.checks {
            if !c.doubling {
                out.push(format!("doubling condition n_{} >= 2 n_{} fails", c.k + 1, c.k));
            }
            if !c.quad_sum {
                out.push(format!(
                    "quadratic-sum growth condition 16*(n_1^2+..+n_{}^2) <= n_{} fails",
                    c.k,
                    c.k + 1
                ));
            }
            if !c.super_geometric {
                out.push(format!(
                    "super-geometric growth condition n_{} >= {}^2 * n_{} fails",
                    c.k + 1,
                    c.k + 1,
                    c.k
                ));
            }
        }
        out
    }
}

/// Validate a raw level list. Errors only on structural defects
/// (empty or not strictly increasing); growth failures are reported.
pub fn validate_lacunary(levels: &[u64]) -> Result<ValidationReport> {
    if levels.is_empty() {
        return Err(Error::InvalidSequence("no levels given".into()));
    }
    if levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidSequence(
            "levels must be strictly increasing".into(),
        ));
    }
    let k_count = levels.len();
    let mut checks = Vec::with_capacity(k_count.saturating_sub(1));
    // Squares can overflow fixed width for fast-growing sequences; the
    // validator works in big integers throughout.
    let mut sq_sum = BigUint::zero();
    for k in 1..k_count {
        let prev = levels[k - 1];
        let next = levels[k];
        sq_sum += BigUint::from(prev) * BigUint::from(prev);
        let quad_sum = BigUint::from(16u32) * &sq_sum <= BigUint::from(next);
        let factor = BigUint::from((k + 1) as u64) * BigUint::from((k + 1) as u64);
        let super_geometric = BigUint::from(next) >= factor * BigUint::from(prev);
        checks.push(GrowthCheck {
            k,
            doubling: next >= 2 * prev,
            quad_sum,
            super_geometric,
        });
    }
    let mut validated_from = k_count;
    for c in checks.iter().rev() {
        if c.quad_sum && c.super_geometric {
            validated_from = c.k;
        } else {
            break;
        }
    }
    Ok(ValidationReport {
        first_level_ok: levels[0] >= 2,
        doubling_everywhere: checks.iter().all(|c| c.doubling),
        checks,
        validated_from,
    })
}

/// The lacunary integers driving the construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSequence {
    levels: Vec<u64>,
    origin: SequenceOrigin,
    /// `K0` from the stored validation; never assumed to be 1.
    validated_from: usize,
}

impl LevelSequence {
    pub fn explicit(levels: Vec<u64>) -> Result<Self> {
        Self::with_origin(levels, SequenceOrigin::Explicit)
    }

    fn with_origin(levels: Vec<u64>, origin: SequenceOrigin) -> Result<Self> {
        let report = validate_lacunary(&levels)?;
        if !report.first_level_ok {
            return Err(Error::InvalidSequence(format!(
                "first level must be >= 2, got {}",
                levels[0]
            )));
        }
        Ok(LevelSequence {
            levels,
            origin,
            validated_from: report.validated_from,
        })
    }

    /// `n_k = floor(16^((2+delta)^k))` in 64-bit arithmetic. The floors
    /// are certified exact by the big-integer path; levels that do not
    /// fit 64 bits produce a capacity error naming the first offending k.
    pub fn delta_rule(delta: &str, count: usize) -> Result<Self> {
        let big = delta_rule_levels_big(delta, count)?;
        let mut levels = Vec::with_capacity(count);
        for (ix, value) in big.iter().enumerate() {
            match value.to_u64() {
                Some(v) => levels.push(v),
                None => {
                    return Err(Error::Capacity {
                        what: format!("level does not fit 64 bits ({} bits)", value.bits()),
                        index: Some(ix + 1),
                    })
                }
            }
        }
        Self::with_origin(
            levels,
            SequenceOrigin::DeltaRule {
                delta: delta.to_string(),
            },
        )
    }

    /// Recursive choice `n_1 = 2`, `n_{k+1}` = the smallest integer
    /// meeting every active constraint: `ceil(8 / c_{2 n_k})`, doubling,
    /// and (when `enforce_lacunarity`) the two growth conditions.
    pub fn adaptive(budget: RateBudget, count: usize, enforce_lacunarity: bool) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidSequence("no levels requested".into()));
        }
        let mut levels: Vec<u64> = vec![2];
        let mut sq_sum: u128 = 0;
        let mut last_rate: Option<(u64, f64)> = None;
        for k in 1..count {
            let prev = levels[k - 1];
            let j = 2 * prev;
            let c = budget.eval(j)?;
            if let Some((pj, pc)) = last_rate {
                if c > pc {
                    return Err(Error::Budget(format!(
                        "rate rule is not decreasing: c_{j} = {c} > c_{pj} = {pc}"
                    )));
                }
            }
            last_rate = Some((j, c));
            let rate_floor = (8.0 / c).ceil();
            if !(rate_floor <= u64::MAX as f64) {
                return Err(Error::Capacity {
                    what: format!("ceil(8 / c_{j}) does not fit 64 bits"),
                    index: Some(k + 1),
                });
            }
            let mut next = (rate_floor as u64).max(2 * prev);
            if enforce_lacunarity {
                sq_sum += (prev as u128) * (prev as u128);
                let quad = 16u128 * sq_sum;
                let geo = ((k + 1) as u128).pow(2) * prev as u128;
                let need = quad.max(geo);
                if need > u64::MAX as u128 {
                    return Err(Error::Capacity {
                        what: "growth constraint exceeds 64 bits".into(),
                        index: Some(k + 1),
                    });
                }
                next = next.max(need as u64);
            }
            levels.push(next);
        }
        Self::with_origin(levels, SequenceOrigin::Adaptive { budget })
    }

    pub fn levels(&self) -> &[u64] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// `n_k` for a 1-based level index.
    pub fn n(&self, k: usize) -> u64 {
        self.levels[k - 1]
    }

    pub fn origin(&self) -> &SequenceOrigin {
        &self.origin
    }

    pub fn validated_from(&self) -> usize {
        self.validated_from
    }

    pub fn validate(&self) -> ValidationReport {
        validate_lacunary(&self.levels).expect("stored sequence is structurally valid")
    }

    /// The unique `k` with `n_k <= n < n_{k+1}`; the last level is
    /// unbounded above.
    pub fn level_index(&self, n: u64) -> Result<usize> {
        if n < self.levels[0] {
            return Err(Error::BelowRange {
                n,
                first: self.levels[0],
            });
        }
        Ok(self.levels.partition_point(|&l| l <= n))
    }
}

/// Parse a decimal string like `"0.1"` into an exact rational.
fn parse_decimal(s: &str) -> Result<BigRational> {
    let bad = || Error::InvalidSequence(format!("cannot parse {s:?} as a decimal number"));
    let (int_part, frac_part) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let digits: String = format!("{int_part}{frac_part}");
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let num = BigInt::parse_bytes(digits.as_bytes(), 10).ok_or_else(bad)?;
    let den = BigInt::from(10u32).pow(frac_part.len() as u32);
    Ok(BigRational::new(num, den))
}

/// `floor(16^((2+delta)^k))` for `k = 1..=count`, exact at any size.
pub fn delta_rule_levels_big(delta: &str, count: usize) -> Result<Vec<BigUint>> {
    let delta = parse_decimal(delta)?;
    if !delta.is_positive() {
        return Err(Error::InvalidSequence("delta must be positive".into()));
    }
    let base = delta + BigRational::from_integer(BigInt::from(2));
    let mut exponent = BigRational::one();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        exponent *= &base;
        // 16^x = 2^(4x)
        let log2 = &exponent * BigRational::from_integer(BigInt::from(4));
        out.push(floor_pow2(&log2));
    }
    Ok(out)
}

/// `floor(2^x)` for rational `x > 0`, certified by interval arithmetic.
///
/// The fractional part of the exponent is expanded in binary; `2^(2^-i)`
/// factors come from iterated integer square roots carried as
/// lower/upper fixed-point bounds. Precision doubles until the two
/// bounds floor to the same integer, so a floor near an integer can
/// never flip. Rational non-integer exponents make `2^x` irrational,
/// so the loop terminates.
fn floor_pow2(x: &BigRational) -> BigUint {
    let int_part = x.floor().to_integer();
    let frac = x - BigRational::from_integer(int_part.clone());
    let shift = int_part
        .to_biguint()
        .expect("exponent is positive")
        .to_u64()
        .expect("integer part of the exponent fits 64 bits");
    if frac.is_zero() {
        return BigUint::one() << shift;
    }
    let mut precision = (shift + 64).next_power_of_two();
    loop {
        if let Some(v) = try_floor_pow2(&frac, shift, precision) {
            return v;
        }
        precision *= 2;
    }
}

/// One attempt at `floor(2^(shift + frac))` with `precision` fraction bits.
fn try_floor_pow2(frac: &BigRational, shift: u64, precision: u64) -> Option<BigUint> {
    let p = precision;
    let one = BigUint::one() << p;

    // Binary digits of frac, most significant first, plus a sticky tail.
    let mut digits = Vec::with_capacity(p as usize);
    let mut rest = frac.clone();
    for _ in 0..p {
        rest *= BigRational::from_integer(BigInt::from(2));
        if rest >= BigRational::one() {
            digits.push(true);
            rest -= BigRational::one();
        } else {
            digits.push(false);
        }
    }
    let tail_nonzero = !rest.is_zero();

    // acc_* are fixed-point with p fraction bits: lo <= 2^frac * 2^p <= hi.
    let mut acc_lo = one.clone();
    let mut acc_hi = one.clone();
    // root bounds for 2^(2^-i), starting at i = 1 with sqrt(2).
    let mut root_lo = (BigUint::from(2u32) << (2 * p)).sqrt();
    let mut root_hi = &root_lo + 1u32;
    for (i, &bit) in digits.iter().enumerate() {
        if i > 0 {
            root_lo = (&root_lo << p).sqrt();
            root_hi = (&root_hi << p).sqrt() + 1u32;
        }
        if bit {
            acc_lo = (&acc_lo * &root_lo) >> p;
            acc_hi = ((&acc_hi * &root_hi) >> p) + 1u32;
        }
    }
    if tail_nonzero {
        // Remaining exponent < 2^-p, so the factor is < 1 + 2^(1-p).
        acc_hi = &acc_hi + (&acc_hi >> (p - 1)) + 1u32;
    }

    let f_lo = (acc_lo << shift) >> p;
    let f_hi = (acc_hi << shift) >> p;
    (f_lo == f_hi).then_some(f_lo)
}
