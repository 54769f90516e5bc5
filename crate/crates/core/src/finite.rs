//! Targets and proposals on a finite state space `{0, .., n-1}`.
//!
//! Mostly useful for checking samplers against exactly assembled kernels.

use crate::mcmc::{ProposalKernel, RngStream, StateSpaceKind, Target};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct FiniteTarget {
    log_mass: Vec<f64>,
}

impl FiniteTarget {
    pub fn from_log_mass(log_mass: Vec<f64>) -> Self {
        Self { log_mass }
    }

    pub fn from_weights(weights: &[f64]) -> Self {
        Self {
            log_mass: weights.iter().map(|w| w.ln()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.log_mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_mass.is_empty()
    }

    /// Normalised probabilities.
    pub fn probabilities(&self) -> Vec<f64> {
        let z = crate::math::log_sum_exp(&self.log_mass);
        self.log_mass.iter().map(|l| (l - z).exp()).collect()
    }
}

impl Target for FiniteTarget {
    type State = usize;

    fn log_density(&self, state: &usize) -> f64 {
        self.log_mass.get(*state).copied().unwrap_or(f64::NEG_INFINITY)
    }

    fn state_space(&self) -> StateSpaceKind {
        StateSpaceKind::Finite(self.log_mass.len())
    }
}

/// Proposal given by a row-stochastic matrix with zero diagonal.
#[derive(Clone, Debug)]
pub struct TableProposal {
    rows: Vec<Vec<f64>>,
    symmetric: bool,
}

impl TableProposal {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidConfig(format!("row {i} has {} entries, expected {n}", row.len())));
            }
            if row[i] != 0.0 {
                return Err(Error::InvalidConfig(format!("row {i} proposes the current state")));
            }
            if row.iter().any(|p| *p < 0.0 || !p.is_finite()) {
                return Err(Error::InvalidConfig(format!("row {i} has an invalid probability")));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidConfig(format!("row {i} sums to {total}")));
            }
        }
        let symmetric = (0..n).all(|i| (0..n).all(|j| rows[i][j] == rows[j][i]));
        Ok(Self { rows, symmetric })
    }

    /// Uniform over the other `n - 1` states.
    pub fn uniform(n: usize) -> Self {
        assert!(n >= 2, "need at least two states");
        let p = 1.0 / (n - 1) as f64;
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else { p }).collect())
            .collect();
        Self {
            rows,
            symmetric: true,
        }
    }

    pub fn probability(&self, from: usize, to: usize) -> f64 {
        self.rows[from][to]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

impl ProposalKernel<usize> for TableProposal {
    fn sample(&self, current: &usize, rng: &mut RngStream) -> usize {
        let row = &self.rows[*current];
        let u = rng.open_unit();
        let mut acc = 0.0;
        let mut last = *current;
        for (j, p) in row.iter().enumerate() {
            if *p > 0.0 {
                acc += p;
                last = j;
                if u < acc {
                    return j;
                }
            }
        }
        last
    }

    fn log_density(&self, from: &usize, to: &usize) -> f64 {
        self.rows[*from][*to].ln()
    }

    fn is_symmetric(&self) -> bool {
        self.symmetric
    }
}
