//! Target and proposal abstractions, the single-step Metropolis-Hastings
//! transition and per-chain random number streams.

mod mh;
mod rng;
mod target;

pub use mh::{mh_accept_log_ratio, mh_step, mh_step_tempered, StepCounts, Update};
pub use rng::RngStream;
pub use target::{Candidate, ChainState, Proposal, ProposalKernel, StateSpaceKind, Target};
