//! Exact dependence coefficients of finite partitions.
//!
//! All probabilities are exact rationals; floats appear only when a
//! caller renders a report. The three coefficients of a joint law are
//!
//! * `beta`: half the total-variation distance between the joint law and
//!   the product of its marginals (a plain double sum, never guarded),
//! * `alpha`: the largest covariance discrepancy over unions of atoms,
//! * `phi`: the largest conditional-probability discrepancy over unions,
//!
//! the last two by subset enumeration behind an atom-count guard.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One coordinate's discrete law: outcome values with probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateLaw {
    pub outcomes: Vec<(i64, BigRational)>,
}

impl CoordinateLaw {
    pub fn sum_of_squares(&self) -> BigRational {
        self.outcomes.iter().map(|(_, p)| p * p).sum()
    }

    pub fn max_prob(&self) -> BigRational {
        self.outcomes
            .iter()
            .map(|(_, p)| p.clone())
            .max()
            .expect("law has outcomes")
    }
}

/// The site law of a level field: `+-1` with probability `1/(2 n_k^2)`
/// each, zero otherwise.
pub fn ternary_site_law(n_k: u64) -> CoordinateLaw {
    let n2 = BigInt::from(n_k) * BigInt::from(n_k);
    let q = BigRational::new(BigInt::one(), 2 * &n2);
    let zero = BigRational::new(&n2 - BigInt::one(), n2);
    CoordinateLaw {
        outcomes: vec![(-1, q.clone()), (0, zero), (1, q)],
    }
}

/// A finite partition, either listed atom by atom or generated as the
/// product of independent coordinate laws.
#[derive(Debug, Clone, PartialEq)]
pub enum FinitePartition {
    Atoms(Vec<(String, BigRational)>),
    Product(Vec<CoordinateLaw>),
}

impl FinitePartition {
    pub fn validate(&self) -> Result<()> {
        let check_total = |total: BigRational, what: &str| {
            if total != BigRational::one() {
                Err(Error::Range(format!("{what} probabilities sum to {total}, not 1")))
            } else {
                Ok(())
            }
        };
        match self {
            FinitePartition::Atoms(atoms) => {
                if atoms.iter().any(|(_, p)| !p.is_positive()) {
                    return Err(Error::Range("atom probabilities must be positive".into()));
                }
                check_total(atoms.iter().map(|(_, p)| p.clone()).sum(), "atom")
            }
            FinitePartition::Product(laws) => {
                for law in laws {
                    if law.outcomes.iter().any(|(_, p)| !p.is_positive()) {
                        return Err(Error::Range("outcome probabilities must be positive".into()));
                    }
                    check_total(law.outcomes.iter().map(|(_, p)| p.clone()).sum(), "coordinate")?;
                }
                Ok(())
            }
        }
    }

    pub fn max_atom_prob(&self) -> BigRational {
        match self {
            FinitePartition::Atoms(atoms) => atoms
                .iter()
                .map(|(_, p)| p.clone())
                .max()
                .expect("partition has atoms"),
            FinitePartition::Product(laws) => laws
                .iter()
                .map(CoordinateLaw::max_prob)
                .product(),
        }
    }

    pub fn sum_sq_atom_prob(&self) -> BigRational {
        match self {
            FinitePartition::Atoms(atoms) => atoms.iter().map(|(_, p)| p * p).sum(),
            FinitePartition::Product(laws) => laws
                .iter()
                .map(CoordinateLaw::sum_of_squares)
                .product(),
        }
    }
}

/// Joint probabilities of two finite partitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointLaw {
    pub cells: Vec<Vec<BigRational>>,
}

impl JointLaw {
    pub fn new(cells: Vec<Vec<BigRational>>) -> Result<Self> {
        if cells.is_empty() || cells[0].is_empty() {
            return Err(Error::Range("joint law needs at least one cell".into()));
        }
        let cols = cells[0].len();
        if cells.iter().any(|row| row.len() != cols) {
            return Err(Error::Range("joint law rows have unequal lengths".into()));
        }
        if cells.iter().flatten().any(|p| p.is_negative()) {
            return Err(Error::Range("joint probabilities must be nonnegative".into()));
        }
        let total: BigRational = cells.iter().flatten().cloned().sum();
        if total != BigRational::one() {
            return Err(Error::Range(format!("joint law sums to {total}, not 1")));
        }
        Ok(JointLaw { cells })
    }

    /// The self-joint of a partition: mass only on the diagonal.
    pub fn diagonal(partition: &FinitePartition) -> Result<Self> {
        let atoms: Vec<BigRational> = match partition {
            FinitePartition::Atoms(a) => a.iter().map(|(_, p)| p.clone()).collect(),
            FinitePartition::Product(laws) => {
                let mut atoms = vec![BigRational::one()];
                for law in laws {
                    let mut next = Vec::with_capacity(atoms.len() * law.outcomes.len());
                    for a in &atoms {
                        for (_, p) in &law.outcomes {
                            next.push(a * p);
                        }
                    }
                    atoms = next;
                }
                atoms
            }
        };
        let m = atoms.len();
        let mut cells = vec![vec![BigRational::zero(); m]; m];
        for (i, p) in atoms.into_iter().enumerate() {
            cells[i][i] = p;
        }
        JointLaw::new(cells)
    }

    pub fn row_marginal(&self) -> Vec<BigRational> {
        self.cells.iter().map(|row| row.iter().cloned().sum()).collect()
    }

    pub fn col_marginal(&self) -> Vec<BigRational> {
        let cols = self.cells[0].len();
        (0..cols)
            .map(|j| self.cells.iter().map(|row| row[j].clone()).sum())
            .collect()
    }
}

/// Atom-count ceiling for the subset enumerations behind alpha and phi.
pub const SUBSET_GUARD: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct MixingTriple {
    pub beta: BigRational,
    pub alpha: Option<BigRational>,
    pub phi: Option<BigRational>,
    /// True when the guard suppressed the subset enumerations.
    pub subsets_skipped: bool,
}

/// Exact dependence coefficients of a joint law.
pub fn partition_coefficients(joint: &JointLaw) -> Result<MixingTriple> {
    let rows = joint.row_marginal();
    let cols = joint.col_marginal();

    let mut beta = BigRational::zero();
    for (i, row) in joint.cells.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            beta += (cell - &rows[i] * &cols[j]).abs();
        }
    }
    beta /= BigRational::from_integer(2.into());

    if rows.len() > SUBSET_GUARD || cols.len() > SUBSET_GUARD {
        return Ok(MixingTriple {
            beta,
            alpha: None,
            phi: None,
            subsets_skipped: true,
        });
    }

    // For a fixed row subset S the inner optimum over column subsets is
    // the positive mass of d_j = mu(S x {j}) - mu(S) q_j, whose total is
    // zero, so one pass per subset suffices.
    let mut alpha = BigRational::zero();
    let mut phi = BigRational::zero();
    for mask in 1u32..(1 << rows.len()) {
        let mut mu_s = BigRational::zero();
        let mut slice = vec![BigRational::zero(); cols.len()];
        for (i, row) in joint.cells.iter().enumerate() {
            if mask & (1 << i) != 0 {
                mu_s += &rows[i];
                for (j, cell) in row.iter().enumerate() {
                    slice[j] += cell;
                }
            }
        }
        let mut alpha_s = BigRational::zero();
        for (j, s) in slice.iter().enumerate() {
            let d = s - &mu_s * &cols[j];
            if d.is_positive() {
                alpha_s += d;
            }
        }
        if alpha_s > alpha {
            alpha = alpha_s.clone();
        }
        if mu_s.is_positive() {
            let mut phi_s = BigRational::zero();
            for (j, s) in slice.iter().enumerate() {
                let d = s / &mu_s - &cols[j];
                if d.is_positive() {
                    phi_s += d;
                }
            }
            if phi_s > phi {
                phi = phi_s;
            }
        }
    }
    Ok(MixingTriple {
        beta,
        alpha: Some(alpha),
        phi: Some(phi),
        subsets_skipped: false,
    })
}

/// Exact self-dependence of a product partition:
/// `beta(sigma(Z), sigma(Z)) = 1 - prod_coords sum_v p_v^2`.
pub fn self_beta_product(laws: &[CoordinateLaw]) -> BigRational {
    let prod: BigRational = laws.iter().map(CoordinateLaw::sum_of_squares).product();
    BigRational::one() - prod
}

/// Atom bound on self-dependence: `2 (1 - max atom probability)`; a
/// partition dominated by one near-certain atom is nearly independent of
/// itself in total variation.
pub fn atom_beta_bound(partition: &FinitePartition) -> BigRational {
    BigRational::from_integer(2.into()) * (BigRational::one() - partition.max_atom_prob())
}
