//! Scalar Gaussian mixture target and the uniform random-walk proposal.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::math::{log_sum_exp, LN_SQRT_2PI};
use crate::mcmc::{ProposalKernel, RngStream, StateSpaceKind, Target};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MixtureSpec", into = "MixtureSpec")]
pub struct GaussianMixture {
    means: Vec<f64>,
    stddevs: Vec<f64>,
    weights: Vec<f64>,
    log_weights: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct MixtureSpec {
    means: Vec<f64>,
    stddevs: Vec<f64>,
    weights: Vec<f64>,
}

impl TryFrom<MixtureSpec> for GaussianMixture {
    type Error = Error;
    fn try_from(s: MixtureSpec) -> Result<Self> {
        GaussianMixture::new(s.means, s.stddevs, s.weights)
    }
}

impl From<GaussianMixture> for MixtureSpec {
    fn from(m: GaussianMixture) -> Self {
        MixtureSpec {
            means: m.means,
            stddevs: m.stddevs,
            weights: m.weights,
        }
    }
}

impl GaussianMixture {
    pub fn new(means: Vec<f64>, stddevs: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let k = means.len();
        if k == 0 {
            return Err(Error::InvalidMixture("no components".into()));
        }
        if stddevs.len() != k || weights.len() != k {
            return Err(Error::InvalidMixture(format!(
                "{} means, {} stddevs, {} weights",
                k,
                stddevs.len(),
                weights.len()
            )));
        }
        if means.iter().any(|m| !m.is_finite()) {
            return Err(Error::InvalidMixture("means must be finite".into()));
        }
        if stddevs.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidMixture("stddevs must be positive".into()));
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::InvalidMixture("weights must be positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMixture(format!("weights sum to {total}, not 1")));
        }
        let log_weights = weights.iter().map(|w| w.ln()).collect();
        Ok(Self {
            means,
            stddevs,
            weights,
            log_weights,
        })
    }

    /// The five-component mixture of the reference experiment.
    pub fn reference() -> Self {
        Self::new(
            vec![-8.85, -2.65, 2.63, 3.85, 4.35],
            vec![0.18, 0.51, 0.50, 0.42, 0.24],
            vec![0.22, 0.22, 0.23, 0.15, 0.18],
        )
        .expect("reference mixture is valid")
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn stddevs(&self) -> &[f64] {
        &self.stddevs
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn n_components(&self) -> usize {
        self.means.len()
    }

    pub fn log_density(&self, x: f64) -> f64 {
        let terms: Vec<f64> = (0..self.means.len())
            .map(|k| {
                let z = (x - self.means[k]) / self.stddevs[k];
                self.log_weights[k] - 0.5 * z * z - self.stddevs[k].ln() - LN_SQRT_2PI
            })
            .collect();
        log_sum_exp(&terms)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        (0..self.means.len())
            .map(|k| {
                let z = (x - self.means[k]) / (self.stddevs[k] * std::f64::consts::SQRT_2);
                self.weights[k] * 0.5 * libm::erfc(-z)
            })
            .sum()
    }

    /// Probability of `(lo, hi)`.
    pub fn mass(&self, lo: f64, hi: f64) -> f64 {
        self.cdf(hi) - self.cdf(lo)
    }

    /// Interval hull of `mean ± half_width_sd * sd` over the given components.
    pub fn region(&self, components: &[usize], half_width_sd: f64) -> (f64, f64) {
        let lo = components
            .iter()
            .map(|&k| self.means[k] - half_width_sd * self.stddevs[k])
            .fold(f64::INFINITY, f64::min);
        let hi = components
            .iter()
            .map(|&k| self.means[k] + half_width_sd * self.stddevs[k])
            .fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }
}

/// Component groups forming the visually distinct modes of
/// [`GaussianMixture::reference`]; components 3 and 4 (means 2.63 and 3.85)
/// merge into one mode.
pub const REFERENCE_MODE_GROUPS: [&[usize]; 4] = [&[0], &[1], &[2, 3], &[4]];

impl Target for GaussianMixture {
    type State = f64;

    fn log_density(&self, state: &f64) -> f64 {
        GaussianMixture::log_density(self, *state)
    }

    fn state_space(&self) -> StateSpaceKind {
        StateSpaceKind::ContinuousScalar
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomMixtureConfig {
    pub n_components: usize,
    pub mean_range: (f64, f64),
    pub sd_range: (f64, f64),
    pub weight_range: (f64, f64),
}

impl Default for RandomMixtureConfig {
    fn default() -> Self {
        Self {
            n_components: 5,
            mean_range: (-10.0, 10.0),
            sd_range: (0.1, 1.0),
            weight_range: (1.0, 5.0),
        }
    }
}

/// Means, standard deviations and unnormalised weights drawn uniformly from
/// their ranges; weights are then normalised.
pub fn random_mixture(cfg: &RandomMixtureConfig, seed: u64) -> Result<GaussianMixture> {
    let valid = |(a, b): (f64, f64)| a.is_finite() && b.is_finite() && a < b;
    if cfg.n_components == 0 {
        return Err(Error::InvalidMixture("need at least one component".into()));
    }
    if !valid(cfg.mean_range) || !valid(cfg.sd_range) || !valid(cfg.weight_range) {
        return Err(Error::InvalidMixture("ranges must be finite with lo < hi".into()));
    }
    if cfg.sd_range.0 <= 0.0 || cfg.weight_range.0 <= 0.0 {
        return Err(Error::InvalidMixture("sd and weight ranges must be positive".into()));
    }
    let mut rng = RngStream::new(seed, 0);
    let k = cfg.n_components;
    let means: Vec<f64> = (0..k).map(|_| rng.random_range(cfg.mean_range.0..cfg.mean_range.1)).collect();
    let stddevs: Vec<f64> = (0..k).map(|_| rng.random_range(cfg.sd_range.0..cfg.sd_range.1)).collect();
    let raw: Vec<f64> = (0..k)
        .map(|_| rng.random_range(cfg.weight_range.0..cfg.weight_range.1))
        .collect();
    let total: f64 = raw.iter().sum();
    let mut weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    // absorb rounding so the weights sum to one
    let drift: f64 = 1.0 - weights.iter().sum::<f64>();
    weights[k - 1] += drift;
    GaussianMixture::new(means, stddevs, weights)
}

/// Uniform proposal on `(x - delta, x + delta)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformWalkProposal {
    delta: f64,
}

impl UniformWalkProposal {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidConfig(format!("random-walk half-width {delta} must be positive")));
        }
        Ok(Self { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

impl ProposalKernel<f64> for UniformWalkProposal {
    fn sample(&self, current: &f64, rng: &mut RngStream) -> f64 {
        loop {
            let y = current + self.delta * (2.0 * rng.open_unit() - 1.0);
            if y != *current {
                return y;
            }
        }
    }

    fn log_density(&self, from: &f64, to: &f64) -> f64 {
        if (to - from).abs() < self.delta {
            -(2.0 * self.delta).ln()
        } else {
            f64::NEG_INFINITY
        }
    }

    fn is_symmetric(&self) -> bool {
        true
    }
}
