//! Brute-force dependence of two finite blocks of one level's increment
//! process, by exact enumeration of every field configuration.
//!
//! The past block holds the increment values at times `-L ..= 0`, the
//! future block at times `N ..= N + L`. Together they read a finite set
//! of field sites; enumerating all ternary configurations of those sites
//! with their product probabilities gives the exact joint law of the two
//! value vectors and hence the exact total-variation coefficient. Once
//! `N >= 2 n_k` the two site windows are disjoint and the result is an
//! exact zero.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rationals cross serialization boundaries as decimal
/// numerator/denominator strings.
mod rational_strings {
    use super::*;
    use serde::de::Error as _;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Parts {
        num: String,
        den: String,
    }

    pub fn serialize<S: Serializer>(v: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        Parts {
            num: v.numer().to_string(),
            den: v.denom().to_string(),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<BigRational, D::Error> {
        let parts = Parts::deserialize(d)?;
        let num: BigInt = parts.num.parse().map_err(D::Error::custom)?;
        let den: BigInt = parts.den.parse().map_err(D::Error::custom)?;
        Ok(BigRational::new(num, den))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindowBetaResult {
    pub level_scale: u64,
    pub gap: u64,
    pub half_width: u64,
    #[serde(with = "rational_strings")]
    pub beta: BigRational,
    /// Count of distinct field sites enumerated.
    pub coords: usize,
    pub configurations: u64,
    /// Site windows read by the two blocks.
    pub past_sites: (i64, i64),
    pub future_sites: (i64, i64),
    pub windows_disjoint: bool,
    /// Distinct joint value-vector pairs seen.
    pub joint_states: usize,
}

/// Exact block dependence coefficient with an enumeration budget on
/// `3^coords`.
pub fn finite_window_beta_exact(
    n_k: u64,
    gap: u64,
    half_width: u64,
    budget: u64,
) -> Result<WindowBetaResult> {
    let n = n_k as i64;
    let l = half_width as i64;
    let big_n = gap as i64;

    let past_sites = (-l - 2 * n + 1, 0i64);
    let future_sites = (big_n - 2 * n + 1, big_n + l);
    let mut coords: Vec<i64> = Vec::new();
    for s in past_sites.0..=past_sites.1 {
        coords.push(s);
    }
    for s in future_sites.0..=future_sites.1 {
        if s > past_sites.1 {
            coords.push(s);
        }
    }
    let m = coords.len();
    let configurations = 3u64
        .checked_pow(m as u32)
        .filter(|&c| c <= budget)
        .ok_or(Error::EnumerationBudget {
            coords: m,
            budget,
        })?;

    // Stencil reads per block time, as coordinate indices with signs.
    let coord_ix: BTreeMap<i64, usize> =
        coords.iter().enumerate().map(|(ix, &s)| (s, ix)).collect();
    let reads_for = |time: i64| -> Vec<(usize, i64)> {
        let mut reads = Vec::with_capacity(2 * n as usize);
        for lag in 0..n {
            reads.push((coord_ix[&(time - lag)], 1));
        }
        for lag in n..2 * n {
            reads.push((coord_ix[&(time - lag)], -1));
        }
        reads
    };
    let past_reads: Vec<Vec<(usize, i64)>> = (-l..=0).map(reads_for).collect();
    let future_reads: Vec<Vec<(usize, i64)>> =
        (big_n..=big_n + l).map(reads_for).collect();

    // Configuration probability numerators over the common denominator
    // (2 n^2)^m: a configuration with z silent sites carries
    // (2 n^2 - 2)^z.
    let silent_weight = BigUint::from(2 * n_k * n_k - 2);
    let mut weight_by_silent = Vec::with_capacity(m + 1);
    let mut w = BigUint::one();
    weight_by_silent.push(w.clone());
    for _ in 0..m {
        w *= &silent_weight;
        weight_by_silent.push(w.clone());
    }

    let mut joint: BTreeMap<(Vec<i64>, Vec<i64>), BigUint> = BTreeMap::new();
    let mut values = vec![0i64; m];
    let mut digits = vec![0u8; m];
    let mut silent = m;
    loop {
        let past: Vec<i64> = past_reads
            .iter()
            .map(|reads| reads.iter().map(|&(ix, sign)| sign * values[ix]).sum())
            .collect();
        let future: Vec<i64> = future_reads
            .iter()
            .map(|reads| reads.iter().map(|&(ix, sign)| sign * values[ix]).sum())
            .collect();
        *joint.entry((past, future)).or_default() += &weight_by_silent[silent];

        // advance the ternary odometer: 0 -> +1 -> -1 -> carry
        let mut pos = 0;
        loop {
            if pos == m {
                break;
            }
            match digits[pos] {
                0 => {
                    digits[pos] = 1;
                    values[pos] = 1;
                    silent -= 1;
                    break;
                }
                1 => {
                    digits[pos] = 2;
                    values[pos] = -1;
                    break;
                }
                _ => {
                    digits[pos] = 0;
                    values[pos] = 0;
                    silent += 1;
                    pos += 1;
                }
            }
        }
        if pos == m {
            break;
        }
    }

    // Marginals and the total-variation sum, all over denominator D.
    let mut row: BTreeMap<Vec<i64>, BigUint> = BTreeMap::new();
    let mut col: BTreeMap<Vec<i64>, BigUint> = BTreeMap::new();
    for ((past, future), wgt) in &joint {
        *row.entry(past.clone()).or_default() += wgt;
        *col.entry(future.clone()).or_default() += wgt;
    }
    let d: BigUint = BigUint::from(2 * n_k * n_k).pow(m as u32);
    // half sum of |J * D - R * C| over all pairs, including pairs with
    // zero joint mass
    let mut total = BigInt::from(0u32);
    for (r_key, r_w) in &row {
        for (c_key, c_w) in &col {
            let j_w = joint
                .get(&(r_key.clone(), c_key.clone()))
                .cloned()
                .unwrap_or_default();
            let diff = BigInt::from(j_w * &d) - BigInt::from(r_w * c_w);
            total += BigInt::from(diff.magnitude().clone());
        }
    }
    let beta = BigRational::new(total, BigInt::from(2u32) * BigInt::from(&d * &d));

    Ok(WindowBetaResult {
        level_scale: n_k,
        gap,
        half_width,
        beta,
        coords: m,
        configurations,
        past_sites,
        future_sites,
        windows_disjoint: future_sites.0 > past_sites.1,
        joint_states: joint.len(),
    })
}
