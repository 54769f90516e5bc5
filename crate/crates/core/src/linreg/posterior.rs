use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use super::RegressionData;
use crate::diagnostics::CsvFields;
use crate::mcmc::{StateSpaceKind, Target};
use crate::{Error, Result};

/// Relative pivot tolerance below which a model's Gram submatrix is treated as singular.
pub const SINGULAR_PIVOT_TOL: f64 = 1e-10;

/// Inclusion vector `gamma`; entry `j` says whether covariate `j` is in the model.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModelIndex(Vec<bool>);

impl ModelIndex {
    pub fn new(gamma: Vec<bool>) -> Self {
        Self(gamma)
    }

    pub fn empty(p: usize) -> Self {
        Self(vec![false; p])
    }

    pub fn full(p: usize) -> Self {
        Self(vec![true; p])
    }

    /// Bit `j` of `mask` becomes entry `j`.
    pub fn from_mask(mask: u64, p: usize) -> Self {
        Self((0..p).map(|j| mask >> j & 1 == 1).collect())
    }

    pub fn to_mask(&self) -> u64 {
        self.0.iter().enumerate().fold(0, |m, (j, &b)| m | (b as u64) << j)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn size(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn included(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&j| self.0[j]).collect()
    }

    pub fn flipped(&self, j: usize) -> Self {
        let mut g = self.0.clone();
        g[j] = !g[j];
        Self(g)
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }
}

impl AsRef<[bool]> for ModelIndex {
    fn as_ref(&self) -> &[bool] {
        &self.0
    }
}

impl CsvFields for ModelIndex {
    fn field_names(&self) -> Vec<String> {
        (1..=self.0.len()).map(|j| format!("gamma_{j}")).collect()
    }
    fn fields(&self) -> Vec<String> {
        self.0.iter().map(|&b| (b as u8).to_string()).collect()
    }
}

/// Marginal posterior over inclusion vectors for a fixed dataset.
#[derive(Debug)]
pub struct LinearModelPosterior {
    n: usize,
    p: usize,
    gram: Vec<f64>,
    xty: Vec<f64>,
    yty: f64,
    singular: AtomicU64,
}

impl LinearModelPosterior {
    pub fn new(data: &RegressionData) -> Self {
        let (n, p) = (data.n(), data.p());
        let mut gram = vec![0.0; p * p];
        let mut xty = vec![0.0; p];
        for i in 0..n {
            let yi = data.y()[i];
            for a in 0..p {
                let xa = data.x(i, a);
                xty[a] += xa * yi;
                for b in a..p {
                    gram[a * p + b] += xa * data.x(i, b);
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                gram[a * p + b] = gram[b * p + a];
            }
        }
        let yty = data.y().iter().map(|v| v * v).sum();
        Self {
            n,
            p,
            gram,
            xty,
            yty,
            singular: AtomicU64::new(0),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Number of evaluations so far that hit a singular Gram submatrix.
    pub fn singular_count(&self) -> u64 {
        self.singular.load(Ordering::Relaxed)
    }

    /// `Y'X_g (X_g'X_g)^-1 X_g'Y`, or `None` if the submatrix is numerically singular.
    pub fn projection(&self, gamma: &[bool]) -> Option<f64> {
        let sel: Vec<usize> = (0..self.p).filter(|&j| gamma[j]).collect();
        let k = sel.len();
        if k == 0 {
            return Some(0.0);
        }
        let max_diag = sel.iter().map(|&j| self.gram[j * self.p + j]).fold(0.0, f64::max);
        let tol = SINGULAR_PIVOT_TOL * max_diag;
        // in-place lower Cholesky factor of the selected block
        let mut l = vec![0.0; k * k];
        for a in 0..k {
            for b in 0..=a {
                let mut s = self.gram[sel[a] * self.p + sel[b]];
                for c in 0..b {
                    s -= l[a * k + c] * l[b * k + c];
                }
                if a == b {
                    if !(s > tol) {
                        return None;
                    }
                    l[a * k + a] = s.sqrt();
                } else {
                    l[a * k + b] = s / l[b * k + b];
                }
            }
        }
        // forward solve L z = X_g'Y; the projection is |z|^2
        let mut z = vec![0.0; k];
        for a in 0..k {
            let mut s = self.xty[sel[a]];
            for c in 0..a {
                s -= l[a * k + c] * z[c];
            }
            z[a] = s / l[a * k + a];
        }
        Some(z.iter().map(|v| v * v).sum())
    }

    /// Log marginal posterior up to a constant.
    pub fn log_marginal(&self, gamma: &[bool]) -> f64 {
        assert_eq!(gamma.len(), self.p, "inclusion vector has wrong length");
        let Some(proj) = self.projection(gamma) else {
            self.singular.fetch_add(1, Ordering::Relaxed);
            return f64::NEG_INFINITY;
        };
        debug_assert!(
            proj >= -1e-9 * self.yty && proj <= self.yty * (1.0 + 1e-9),
            "projection {proj} outside [0, {}]",
            self.yty
        );
        let n = self.n as f64;
        let size = gamma.iter().filter(|&&b| b).count() as f64;
        let rss = self.yty - n / (n + 1.0) * proj;
        -0.5 * size * (1.0 + n).ln() - 0.5 * n * rss.ln()
    }

    pub fn check_index(&self, gamma: &ModelIndex) -> Result<()> {
        if gamma.len() != self.p {
            return Err(Error::InvalidConfig(format!(
                "inclusion vector has length {}, data has {} covariates",
                gamma.len(),
                self.p
            )));
        }
        Ok(())
    }
}

impl Target for LinearModelPosterior {
    type State = ModelIndex;

    fn log_density(&self, state: &ModelIndex) -> f64 {
        self.log_marginal(state.as_slice())
    }

    fn state_space(&self) -> StateSpaceKind {
        StateSpaceKind::BinaryVector(self.p)
    }
}
