use super::{ChainState, Proposal, ProposalKernel, RngStream, Target};
use crate::{Error, Result};

/// Proposed / accepted move counts accumulated by one chain.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepCounts {
    pub proposed: u64,
    pub accepted: u64,
}

impl StepCounts {
    pub fn add(&mut self, other: StepCounts) {
        self.proposed += other.proposed;
        self.accepted += other.accepted;
    }

    pub fn rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }
}

/// Log of the Metropolis-Hastings ratio for moving from `current` to `candidate`:
/// `log f(y) + log q(x|y) - log f(x) - log q(y|x)`.
///
/// The proposal terms are skipped for symmetric kernels.
pub fn mh_accept_log_ratio<T, K>(
    target: &T,
    proposal: &K,
    current: &ChainState<T::State>,
    candidate: &T::State,
) -> Result<f64>
where
    T: Target,
    K: ProposalKernel<T::State>,
{
    let current_ld = current.log_density();
    if !current_ld.is_finite() {
        return Err(Error::NonFiniteCurrent(current_ld));
    }
    let candidate_ld = target.log_density(candidate);
    if candidate_ld == f64::NEG_INFINITY || candidate_ld.is_nan() {
        return Ok(f64::NEG_INFINITY);
    }
    let mut ratio = candidate_ld - current_ld;
    if !proposal.is_symmetric() {
        ratio += proposal.log_density(candidate, current.value())
            - proposal.log_density(current.value(), candidate);
    }
    Ok(ratio)
}

/// One Metropolis-Hastings transition against `target`.
///
/// Returns whether the candidate was accepted.
pub fn mh_step<T, P>(
    target: &T,
    proposal: &P,
    current: &mut ChainState<T::State>,
    rng: &mut RngStream,
) -> Result<bool>
where
    T: Target,
    P: Proposal<T::State> + ?Sized,
{
    mh_step_tempered(target, proposal, 1.0, current, rng)
}

/// Metropolis-Hastings transition against `f(x)^inv_temp`.
///
/// The candidate is drawn first, then one uniform `U`; the move is accepted
/// iff `ln U < min(0, log ratio)`. Both draws happen on every call so the
/// stream position depends only on the number of steps taken.
pub fn mh_step_tempered<T, P>(
    target: &T,
    proposal: &P,
    inv_temp: f64,
    current: &mut ChainState<T::State>,
    rng: &mut RngStream,
) -> Result<bool>
where
    T: Target,
    P: Proposal<T::State> + ?Sized,
{
    let current_ld = current.log_density();
    if !current_ld.is_finite() {
        return Err(Error::NonFiniteCurrent(current_ld));
    }
    let candidate = proposal.propose(current.value(), rng);
    let candidate_ld = target.log_density(&candidate.state);
    let log_ratio = if candidate_ld == f64::NEG_INFINITY || candidate_ld.is_nan() {
        f64::NEG_INFINITY
    } else {
        inv_temp * (candidate_ld - current_ld) + candidate.log_proposal_ratio
    };
    let u = rng.open_unit();
    // NaN ratios compare false and are rejected.
    let accepted = u.ln() < log_ratio.min(0.0);
    if accepted {
        current.set(candidate.state, candidate_ld);
    }
    Ok(accepted)
}

/// One within-chain update: a single MH step, or a composite sweep of them.
pub trait Update<S>: Sync {
    fn update<T: Target<State = S>>(
        &self,
        target: &T,
        inv_temp: f64,
        chain: &mut ChainState<S>,
        rng: &mut RngStream,
    ) -> Result<StepCounts>;
}

impl<S, P: Proposal<S>> Update<S> for P {
    fn update<T: Target<State = S>>(
        &self,
        target: &T,
        inv_temp: f64,
        chain: &mut ChainState<S>,
        rng: &mut RngStream,
    ) -> Result<StepCounts> {
        let accepted = mh_step_tempered(target, self, inv_temp, chain, rng)?;
        Ok(StepCounts {
            proposed: 1,
            accepted: accepted as u64,
        })
    }
}
