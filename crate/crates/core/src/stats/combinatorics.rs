//! Bell numbers, the union lower bound, and the window-bound scale floor.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};

/// `B_0 … B_p` by the binomial recursion
/// `B_{p+1} = sum_k C(p, k) B_k`, exact at any size.
pub fn bell_numbers(up_to: usize) -> Vec<BigUint> {
    let mut bell: Vec<BigUint> = Vec::with_capacity(up_to + 1);
    bell.push(BigUint::one());
    // Pascal row for C(p, k), updated in place.
    let mut row: Vec<BigUint> = vec![BigUint::one()];
    for p in 0..up_to {
        let next: BigUint = (0..=p).map(|k| &row[k] * &bell[k]).sum();
        bell.push(next);
        row.push(BigUint::one());
        for k in (1..=p).rev() {
            row[k] = &row[k] + &row[k - 1];
        }
    }
    bell
}

pub fn bell(p: usize) -> BigUint {
    bell_numbers(p).pop().expect("nonempty by construction")
}

/// Fixed-width variant with an explicit overflow guard.
pub fn bell_u64(p: usize) -> Result<u64> {
    bell(p).to_u64().ok_or(Error::Capacity {
        what: format!("Bell number B_{p} does not fit 64 bits"),
        index: Some(p),
    })
}

/// First- and second-order lower bound on a union probability:
/// `sum p_i - sum_{i<j} q_ij`.
pub fn union_lower_bound(p: &[f64], pairwise: &[Vec<f64>]) -> Result<f64> {
    let n = p.len();
    if pairwise.len() != n || pairwise.iter().any(|row| row.len() != n) {
        return Err(Error::Range(format!(
            "pairwise matrix must be {n} x {n}"
        )));
    }
    for (i, &pi) in p.iter().enumerate() {
        if !(0.0..=1.0).contains(&pi) {
            return Err(Error::Range(format!("p[{i}] = {pi} outside [0, 1]")));
        }
        for j in 0..n {
            if (pairwise[i][j] - pairwise[j][i]).abs() > 1e-12 {
                return Err(Error::Range(format!(
                    "pairwise matrix not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    let singles: f64 = p.iter().sum();
    let mut pairs = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            pairs += pairwise[i][j];
        }
    }
    Ok(singles - pairs)
}

/// Smallest integer `m >= 3` with `(1 - 2/m) * ((1 - 2/m)^3 - 1/2) > 1/4`,
/// decided in exact rational arithmetic. Level scales at or above this
/// floor admit the 1/4 window-max lower bound.
pub fn min_level_for_window_bound() -> u64 {
    let quarter = BigRational::new(1.into(), 4.into());
    let half = BigRational::new(1.into(), 2.into());
    for m in 3u64.. {
        let base = BigRational::new((m as i64 - 2).into(), (m as i64).into());
        let value = &base * (&base * &base * &base - &half);
        if value > quarter {
            return m;
        }
    }
    unreachable!("the expression tends to 1/2")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_table() {
        let b = bell_numbers(10);
        assert_eq!(b[0], BigUint::from(1u32));
        assert_eq!(b[1], BigUint::from(1u32));
        assert_eq!(b[2], BigUint::from(2u32));
        assert_eq!(b[3], BigUint::from(5u32));
        assert_eq!(b[10], BigUint::from(115975u32));
    }

    #[test]
    fn bell_recursion_and_monotonicity() {
        let b = bell_numbers(21);
        // re-derive each entry from the recursion with a fresh Pascal row
        for p in 0..=20usize {
            let mut row = vec![BigUint::one()];
            for _ in 0..p {
                let mut next = vec![BigUint::one()];
                for k in 1..row.len() {
                    next.push(&row[k - 1] + &row[k]);
                }
                next.push(BigUint::one());
                row = next;
            }
            let want: BigUint = (0..=p).map(|k| &row[k] * &b[k]).sum();
            assert_eq!(b[p + 1], want, "p={p}");
            assert!(b[p + 1] >= b[p]);
        }
    }

    #[test]
    fn bell_u64_overflow_guard() {
        assert_eq!(bell_u64(10).unwrap(), 115975);
        assert!(bell_u64(25).is_ok());
        assert!(matches!(bell_u64(26), Err(Error::Capacity { .. })));
    }

    #[test]
    fn union_bound_examples() {
        // two disjoint events: the bound is exact
        let b = union_lower_bound(&[0.3, 0.3], &vec![vec![0.0; 2]; 2]).unwrap();
        assert!((b - 0.6).abs() < 1e-15);

        // two independent events: inclusion-exclusion is exact at n = 2
        let q = vec![vec![0.0, 0.25], vec![0.25, 0.0]];
        let b = union_lower_bound(&[0.5, 0.5], &q).unwrap();
        assert!((b - 0.75).abs() < 1e-15);

        // three fair events, pairwise 1/4: bound 0.75 <= exact 0.875
        let q = vec![
            vec![0.0, 0.25, 0.25],
            vec![0.25, 0.0, 0.25],
            vec![0.25, 0.25, 0.0],
        ];
        let b = union_lower_bound(&[0.5; 3], &q).unwrap();
        assert!((b - 0.75).abs() < 1e-15);
        // brute force over the 8 outcomes of three independent coins
        let mut union = 0.0;
        for mask in 1u32..8 {
            union += 0.125;
            let _ = mask;
        }
        assert!(b <= union + 1e-15);
        assert!((union - 0.875).abs() < 1e-15);
    }

    #[test]
    fn union_bound_never_exceeds_truth_on_atom_systems() {
        // all event systems over <= 4 atoms with dyadic atom masses:
        // events are unions of atoms, probabilities from the atom masses
        let atom_sets: [&[f64]; 3] = [
            &[0.5, 0.5],
            &[0.25, 0.25, 0.5],
            &[0.125, 0.375, 0.25, 0.25],
        ];
        for atoms in atom_sets {
            let m = atoms.len();
            let prob = |mask: u32| -> f64 {
                (0..m)
                    .filter(|&i| mask & (1 << i) != 0)
                    .map(|i| atoms[i])
                    .sum()
            };
            let verify = |sel: &[u32]| {
                let p: Vec<f64> = sel.iter().map(|&e| prob(e)).collect();
                let n = sel.len();
                let mut q = vec![vec![0.0; n]; n];
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            q[i][j] = prob(sel[i] & sel[j]);
                        }
                    }
                }
                let bound = union_lower_bound(&p, &q).unwrap();
                let union = prob(sel.iter().fold(0, |acc, &e| acc | e));
                assert!(
                    bound <= union + 1e-12,
                    "atoms {atoms:?} events {sel:?}: {bound} > {union}"
                );
            };
            // every pair and every triple of nonempty events
            let events: Vec<u32> = (1..(1u32 << m)).collect();
            for a in 0..events.len() {
                for b in (a + 1)..events.len() {
                    verify(&[events[a], events[b]]);
                    for c in (b + 1)..events.len() {
                        verify(&[events[a], events[b], events[c]]);
                    }
                }
            }
        }
    }

    #[test]
    fn window_bound_floor_is_25() {
        assert_eq!(min_level_for_window_bound(), 25);
        // direct evaluation on both sides of the boundary
        let f = |m: f64| (1.0 - 2.0 / m) * ((1.0 - 2.0 / m).powi(3) - 0.5);
        assert!(f(25.0) > 0.25);
        assert!(f(24.0) < 0.25);
        assert!(min_level_for_window_bound() >= 3);
    }
}
