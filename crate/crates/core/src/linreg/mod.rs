//! Bayesian variable selection for the Gaussian linear model.
//!
//! The target is the marginal posterior of the inclusion vector `gamma`
//! under a uniform model prior, with regression coefficients and noise
//! variance integrated out:
//! `(1+n)^(-|gamma|/2) * (Y'Y - n/(n+1) * Y'X_g (X_g'X_g)^-1 X_g'Y)^(-n/2)`.

mod data;
mod enumerate;
mod posterior;
mod proposal;

pub use data::{generate_dataset, GeneratedDataset, GeneratorConfig, RegressionData};
pub use enumerate::{enumerate_exact_posterior, ExactPosterior, MAX_ENUMERATION_P};
pub use posterior::{LinearModelPosterior, ModelIndex, SINGULAR_PIVOT_TOL};
pub use proposal::{FlipSweep, RandomFlip, SingleFlip};
