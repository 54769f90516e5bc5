//! Chain drivers: single-chain Metropolis-Hastings, parallel tempering and
//! the parallel hierarchical sampler.
//!
//! All drivers are deterministic functions of their configuration and seed.
//! Chain `m` draws from `RngStream::new(seed, m)`; sampler-level choices
//! (swap schedule, swap partners) use the [`RngStream::CONTROL`] stream, so
//! running the per-chain updates of one iteration in parallel does not change
//! any result.
//!
//! [`RngStream::CONTROL`]: crate::mcmc::RngStream::CONTROL

mod ensemble;
mod ladder;
mod mh;
mod phs;
mod pt;

pub use ensemble::{Ensemble, EnsembleStats, Recorder, Run, RunOptions};
pub use ladder::{HeatedTarget, SwapMode, TemperatureLadder};
pub use mh::{run_mh, run_mh_with};
pub use phs::{phs_iteration, run_phs, run_phs_with, Exchange, PlainSwap};
pub use pt::{pt_swap_log_ratio, pt_swap_step, pt_update_step, run_pt, run_pt_with};
