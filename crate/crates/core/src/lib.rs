//! Multi-chain Markov chain Monte Carlo for Bayesian model selection.
//!
//! The crate provides three chain drivers over a common [`Target`] /
//! [`Proposal`] interface:
//!
//! - single-chain Metropolis-Hastings ([`samplers::run_mh`]),
//! - parallel tempering with Geyer or Liu swap scheduling ([`samplers::run_pt`]),
//! - the parallel hierarchical sampler, where chain 1 swaps unconditionally with a
//!   uniformly chosen auxiliary chain every iteration ([`samplers::run_phs`]).
//!
//! Three model-selection targets ship with it: a scalar Gaussian mixture
//! ([`mixture`]), regression variable selection over binary inclusion vectors
//! ([`linreg`]) and Weibull survival trees with a Laplace-approximated marginal
//! posterior ([`cart`]). [`diagnostics`] holds inclusion probabilities, Monte
//! Carlo standard errors, histograms and report export.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cart;
pub mod diagnostics;
pub mod error;
pub mod finite;
pub mod linreg;
pub mod math;
pub mod mcmc;
pub mod mixture;
pub mod samplers;

pub use error::{Error, Result};
pub use mcmc::{
    mh_accept_log_ratio, mh_step, mh_step_tempered, Candidate, ChainState, Proposal,
    ProposalKernel, RngStream, StateSpaceKind, StepCounts, Target, Update,
};
