use super::{LinearModelPosterior, ModelIndex};
use crate::math::log_sum_exp;
use crate::{Error, Result};

pub const MAX_ENUMERATION_P: usize = 20;

/// Exact posterior over all `2^p` models, indexed by bitmask.
#[derive(Clone, Debug)]
pub struct ExactPosterior {
    pub p: usize,
    pub log_probabilities: Vec<f64>,
    pub inclusion: Vec<f64>,
}

impl ExactPosterior {
    pub fn probability(&self, gamma: &ModelIndex) -> f64 {
        self.log_probabilities[gamma.to_mask() as usize].exp()
    }

    /// Models sorted by decreasing posterior probability.
    pub fn ranked(&self) -> Vec<(ModelIndex, f64)> {
        let mut v: Vec<(ModelIndex, f64)> = self
            .log_probabilities
            .iter()
            .enumerate()
            .map(|(m, lp)| (ModelIndex::from_mask(m as u64, self.p), lp.exp()))
            .collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1));
        v
    }
}

pub fn enumerate_exact_posterior(post: &LinearModelPosterior, p_max: usize) -> Result<ExactPosterior> {
    let p = post.p();
    let max = p_max.min(MAX_ENUMERATION_P);
    if p > max {
        return Err(Error::EnumerationTooLarge { p, max });
    }
    let log_mass: Vec<f64> = (0..1u64 << p)
        .map(|m| post.log_marginal(ModelIndex::from_mask(m, p).as_slice()))
        .collect();
    let z = log_sum_exp(&log_mass);
    let log_probabilities: Vec<f64> = log_mass.iter().map(|l| l - z).collect();
    let mut inclusion = vec![0.0; p];
    for (m, lp) in log_probabilities.iter().enumerate() {
        let w = lp.exp();
        for (j, inc) in inclusion.iter_mut().enumerate() {
            if m >> j & 1 == 1 {
                *inc += w;
            }
        }
    }
    Ok(ExactPosterior {
        p,
        log_probabilities,
        inclusion,
    })
}
