use rand::Rng;

use super::{Ensemble, EnsembleStats, Recorder, Run, RunOptions};
use crate::diagnostics::Trace;
use crate::mcmc::{ChainState, RngStream, Target, Update};
use crate::{Error, Result};

/// The cross-chain move between chain 1 and the selected auxiliary chain.
/// Always accepted; implementations must leave both chains valid with
/// correctly cached log densities.
pub trait Exchange<T: Target>: Sync {
    fn exchange(
        &self,
        target: &T,
        first: &mut ChainState<T::State>,
        other: &mut ChainState<T::State>,
        rng: &mut RngStream,
    ) -> Result<()>;
}

/// Exchanges the two chain values outright.
#[derive(Clone, Copy, Debug, Default)]
pub struct PlainSwap;

impl<T: Target> Exchange<T> for PlainSwap {
    fn exchange(
        &self,
        _target: &T,
        first: &mut ChainState<T::State>,
        other: &mut ChainState<T::State>,
        _rng: &mut RngStream,
    ) -> Result<()> {
        std::mem::swap(first, other);
        Ok(())
    }
}

/// One PHS iteration with a given partner `m` (0-based, in `1..M`):
/// exchange chain 0 with chain `m`, then update every chain except 0 and `m`.
pub fn phs_iteration<T, U, X>(
    target: &T,
    kernels: &[U],
    exchange: &X,
    ens: &mut Ensemble<T::State>,
    m: usize,
    parallel: bool,
) -> Result<()>
where
    T: Target,
    U: Update<T::State>,
    X: Exchange<T> + ?Sized,
{
    let n = ens.len();
    assert!(m >= 1 && m < n, "partner index {m} out of range 1..{n}");
    let mut control = ens.control().clone();
    {
        let (first, other) = ens.chain_pair_mut(0, m);
        exchange.exchange(target, first, other, &mut control)?;
    }
    *ens.control() = control;
    ens.stats.swap_attempts += 1;
    ens.stats.swap_accepts += 1;
    let ones = vec![1.0; n];
    ens.update_chains(target, kernels, &ones, |i| i != 0 && i != m, parallel)
}

/// Parallel hierarchical sampler with unconditional swaps between chain 1 and
/// a uniformly chosen auxiliary chain. Needs at least three chains; the trace
/// follows chain 1 (index 0).
pub fn run_phs<T, U, X>(
    target: &T,
    kernels: &[U],
    exchange: &X,
    init: T::State,
    opts: RunOptions,
) -> Result<Run<T::State>>
where
    T: Target,
    U: Update<T::State>,
    X: Exchange<T> + ?Sized,
{
    let mut trace = Trace::with_capacity(0, opts.n_iter);
    let (stats, final_chains) = run_phs_with(target, kernels, exchange, init, opts, &mut trace)?;
    Ok(Run {
        trace,
        stats,
        final_chains,
    })
}

pub fn run_phs_with<T, U, X, R>(
    target: &T,
    kernels: &[U],
    exchange: &X,
    init: T::State,
    opts: RunOptions,
    recorder: &mut R,
) -> Result<(EnsembleStats, Vec<ChainState<T::State>>)>
where
    T: Target,
    U: Update<T::State>,
    X: Exchange<T> + ?Sized,
    R: Recorder<T::State> + ?Sized,
{
    opts.check()?;
    let m = kernels.len();
    if m < 3 {
        return Err(Error::TooFewChains { min: 3, got: m });
    }
    let mut ens = Ensemble::replicated(target, init, m, opts.seed)?;
    for iter in 0..opts.n_iter {
        let partner = 1 + ens.control().random_range(0..m - 1);
        phs_iteration(target, kernels, exchange, &mut ens, partner, opts.parallel)?;
        recorder.record(iter, ens.chains(), &ens.stats);
    }
    let stats = ens.stats.clone();
    Ok((stats, ens.into_chains()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite::{FiniteTarget, TableProposal};

    #[test]
    fn forced_partner_iteration() {
        let target = FiniteTarget::from_weights(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let q = TableProposal::uniform(5);
        let kernels = vec![q.clone(), q.clone(), q];
        let mut ens = Ensemble::new(&target, vec![0, 1, 2], 17).unwrap();
        phs_iteration(&target, &kernels, &PlainSwap, &mut ens, 1, false).unwrap();
        let vals: Vec<usize> = ens.chains().iter().map(|c| *c.value()).collect();
        assert_eq!(vals[0], 1);
        assert_eq!(vals[1], 0);
        assert_eq!(ens.stats.moves[0].proposed, 0);
        assert_eq!(ens.stats.moves[1].proposed, 0);
        assert_eq!(ens.stats.moves[2].proposed, 1);
        assert_eq!(ens.stats.swap_accepts, 1);
    }

    #[test]
    fn needs_three_chains() {
        let target = FiniteTarget::from_weights(&[1.0, 2.0]);
        let q = TableProposal::uniform(2);
        let err = run_phs(&target, &[q.clone(), q], &PlainSwap, 0, RunOptions::new(10, 0)).unwrap_err();
        assert!(matches!(err, Error::TooFewChains { min: 3, got: 2 }));
    }

    #[test]
    fn first_chain_only_changes_by_swaps() {
        let target = FiniteTarget::from_weights(&[1.0, 2.0, 3.0, 4.0]);
        let q = TableProposal::uniform(4);
        let kernels = vec![q; 4];
        let mut ens = Ensemble::new(&target, vec![0, 1, 2, 3], 5).unwrap();
        for it in 0..2000 {
            let partner = 1 + it % 3;
            let partner_before = *ens.chains()[partner].value();
            let mut before: Vec<usize> = ens.chains().iter().map(|c| *c.value()).collect();
            phs_iteration(&target, &kernels, &PlainSwap, &mut ens, partner, false).unwrap();
            assert_eq!(*ens.chains()[0].value(), partner_before);
            // partner holds chain 1's old value, untouched this iteration
            assert_eq!(*ens.chains()[partner].value(), before[0]);
            before.swap(0, partner);
            for (i, c) in ens.chains().iter().enumerate() {
                if i != 0 && i != partner {
                    assert_eq!(c.log_density(), target.log_density(c.value()));
                }
            }
        }
    }

    #[test]
    fn parallel_matches_serial() {
        let target = FiniteTarget::from_weights(&[1.0, 2.0, 3.0, 4.0, 0.3]);
        let q = TableProposal::uniform(5);
        let kernels = vec![q; 6];
        let serial = run_phs(&target, &kernels, &PlainSwap, 0, RunOptions::new(3000, 8)).unwrap();
        let par = run_phs(&target, &kernels, &PlainSwap, 0, RunOptions::new(3000, 8).parallel(true)).unwrap();
        assert_eq!(serial.trace.states(), par.trace.states());
        assert_eq!(serial.stats, par.stats);
    }
}
