use super::{Ensemble, EnsembleStats, Recorder, Run, RunOptions};
use crate::diagnostics::Trace;
use crate::mcmc::{ChainState, Target, Update};
use crate::Result;

/// Single-chain Metropolis-Hastings. The trace holds the state after each of
/// the `n_iter` steps. Chain 0 draws from stream `(seed, 0)`.
pub fn run_mh<T, U>(target: &T, kernel: &U, init: T::State, opts: RunOptions) -> Result<Run<T::State>>
where
    T: Target,
    U: Update<T::State>,
{
    let mut trace = Trace::with_capacity(0, opts.n_iter);
    let (stats, final_chains) = run_mh_with(target, kernel, init, opts, &mut trace)?;
    Ok(Run {
        trace,
        stats,
        final_chains,
    })
}

pub fn run_mh_with<T, U, R>(
    target: &T,
    kernel: &U,
    init: T::State,
    opts: RunOptions,
    recorder: &mut R,
) -> Result<(EnsembleStats, Vec<ChainState<T::State>>)>
where
    T: Target,
    U: Update<T::State>,
    R: Recorder<T::State> + ?Sized,
{
    opts.check()?;
    let mut ens = Ensemble::new(target, vec![init], opts.seed)?;
    let kernels = std::slice::from_ref(kernel);
    for iter in 0..opts.n_iter {
        ens.update_chains(target, kernels, &[1.0], |_| true, false)?;
        recorder.record(iter, ens.chains(), &ens.stats);
    }
    let stats = ens.stats.clone();
    Ok((stats, ens.into_chains()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite::{FiniteTarget, TableProposal};
    use crate::mcmc::{Candidate, Proposal, RngStream};

    /// Always proposes a zero-mass state.
    struct Nowhere;
    impl Proposal<usize> for Nowhere {
        fn propose(&self, _: &usize, _: &mut RngStream) -> Candidate<usize> {
            Candidate {
                state: 99,
                log_proposal_ratio: 0.0,
            }
        }
    }

    #[test]
    fn forced_rejection_single_step() {
        let target = FiniteTarget::from_weights(&[1.0, 1.0]);
        let run = run_mh(&target, &Nowhere, 1, RunOptions::new(1, 0)).unwrap();
        assert_eq!(run.trace.states(), &[1]);
        assert_eq!(run.stats.moves[0].accepted, 0);
        assert_eq!(run.stats.moves[0].proposed, 1);
    }

    #[test]
    fn zero_iterations_rejected() {
        let target = FiniteTarget::from_weights(&[1.0, 1.0]);
        assert!(run_mh(&target, &Nowhere, 1, RunOptions::new(0, 0)).is_err());
    }

    #[test]
    fn zero_mass_init_rejected() {
        let target = FiniteTarget::from_weights(&[1.0, 0.0]);
        let q = TableProposal::uniform(2);
        assert!(run_mh(&target, &q, 1, RunOptions::new(10, 0)).is_err());
    }

    #[test]
    fn deterministic_given_seed() {
        let target = FiniteTarget::from_weights(&[1.0, 2.0, 3.0, 0.5]);
        let q = TableProposal::uniform(4);
        let a = run_mh(&target, &q, 0, RunOptions::new(2000, 9)).unwrap();
        let b = run_mh(&target, &q, 0, RunOptions::new(2000, 9)).unwrap();
        let c = run_mh(&target, &q, 0, RunOptions::new(2000, 10)).unwrap();
        assert_eq!(a.trace.states(), b.trace.states());
        assert_ne!(a.trace.states(), c.trace.states());
    }

    #[test]
    fn shift_invariance() {
        let weights = [1.0, 2.0, 3.0, 0.5, 4.0];
        let base = FiniteTarget::from_weights(&weights);
        let shifted = FiniteTarget::from_log_mass(weights.iter().map(|w| w.ln() + 37.25).collect());
        let q = TableProposal::uniform(5);
        let a = run_mh(&base, &q, 0, RunOptions::new(20_000, 5)).unwrap();
        let b = run_mh(&shifted, &q, 0, RunOptions::new(20_000, 5)).unwrap();
        assert_eq!(a.trace.states(), b.trace.states());
    }
}
