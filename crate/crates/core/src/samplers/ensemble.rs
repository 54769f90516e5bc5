use rayon::prelude::*;

use crate::diagnostics::Trace;
use crate::mcmc::{ChainState, RngStream, StepCounts, Target, Update};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    pub n_iter: usize,
    pub seed: u64,
    /// Run the independent per-chain updates of each iteration on the rayon
    /// pool. Results are identical either way.
    pub parallel: bool,
}

impl RunOptions {
    pub fn new(n_iter: usize, seed: u64) -> Self {
        Self {
            n_iter,
            seed,
            parallel: false,
        }
    }

    pub fn parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    pub(crate) fn check(&self) -> Result<()> {
        if self.n_iter == 0 {
            return Err(Error::InvalidConfig("n_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// Move statistics for an ensemble.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EnsembleStats {
    pub moves: Vec<StepCounts>,
    pub swap_attempts: u64,
    pub swap_accepts: u64,
}

impl EnsembleStats {
    pub fn new(m: usize) -> Self {
        Self {
            moves: vec![StepCounts::default(); m],
            swap_attempts: 0,
            swap_accepts: 0,
        }
    }

    pub fn acceptance_rates(&self) -> Vec<f64> {
        self.moves.iter().map(StepCounts::rate).collect()
    }

    pub fn swap_rate(&self) -> f64 {
        if self.swap_attempts == 0 {
            0.0
        } else {
            self.swap_accepts as f64 / self.swap_attempts as f64
        }
    }
}

/// Observes the ensemble after every iteration.
pub trait Recorder<S> {
    fn record(&mut self, iteration: usize, chains: &[ChainState<S>], stats: &EnsembleStats);
}

impl<S, F> Recorder<S> for F
where
    F: FnMut(usize, &[ChainState<S>], &EnsembleStats),
{
    fn record(&mut self, iteration: usize, chains: &[ChainState<S>], stats: &EnsembleStats) {
        self(iteration, chains, stats)
    }
}

/// M chains with their own random streams, plus a control stream for
/// sampler-level decisions.
#[derive(Clone, Debug)]
pub struct Ensemble<S> {
    chains: Vec<ChainState<S>>,
    rngs: Vec<RngStream>,
    control: RngStream,
    pub stats: EnsembleStats,
}

impl<S: Clone + Send + Sync> Ensemble<S> {
    pub fn new<T: Target<State = S>>(target: &T, inits: Vec<S>, seed: u64) -> Result<Self> {
        if inits.is_empty() {
            return Err(Error::TooFewChains { min: 1, got: 0 });
        }
        let chains = inits
            .into_iter()
            .map(|v| ChainState::new(target, v))
            .collect::<Result<Vec<_>>>()?;
        let m = chains.len();
        Ok(Self {
            rngs: (0..m as u64).map(|i| RngStream::new(seed, i)).collect(),
            control: RngStream::new(seed, RngStream::CONTROL),
            stats: EnsembleStats::new(m),
            chains,
        })
    }

    pub fn replicated<T: Target<State = S>>(target: &T, init: S, m: usize, seed: u64) -> Result<Self> {
        Self::new(target, vec![init; m], seed)
    }

    pub fn len(&self) -> usize {
        self.chains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chains.is_empty()
    }

    pub fn chains(&self) -> &[ChainState<S>] {
        &self.chains
    }

    pub fn into_chains(self) -> Vec<ChainState<S>> {
        self.chains
    }

    pub(crate) fn control(&mut self) -> &mut RngStream {
        &mut self.control
    }

    pub(crate) fn chains_mut(&mut self) -> &mut [ChainState<S>] {
        &mut self.chains
    }

    pub(crate) fn chain_pair_mut(
        &mut self,
        a: usize,
        b: usize,
    ) -> (&mut ChainState<S>, &mut ChainState<S>) {
        assert!(a < b, "chain_pair_mut needs a < b");
        let (lo, hi) = self.chains.split_at_mut(b);
        (&mut lo[a], &mut hi[0])
    }

    /// Applies one update to every chain whose index passes `include`,
    /// chain `m` targeting `f^inv_temps[m]`.
    pub(crate) fn update_chains<T, U>(
        &mut self,
        target: &T,
        kernels: &[U],
        inv_temps: &[f64],
        include: impl Fn(usize) -> bool + Sync,
        parallel: bool,
    ) -> Result<()>
    where
        T: Target<State = S>,
        U: Update<S>,
    {
        let counts: Vec<Option<StepCounts>> = if parallel {
            self.chains
                .par_iter_mut()
                .zip(self.rngs.par_iter_mut())
                .enumerate()
                .map(|(i, (chain, rng))| {
                    if include(i) {
                        kernels[i].update(target, inv_temps[i], chain, rng).map(Some)
                    } else {
                        Ok(None)
                    }
                })
                .collect::<Result<_>>()?
        } else {
            self.chains
                .iter_mut()
                .zip(self.rngs.iter_mut())
                .enumerate()
                .map(|(i, (chain, rng))| {
                    if include(i) {
                        kernels[i].update(target, inv_temps[i], chain, rng).map(Some)
                    } else {
                        Ok(None)
                    }
                })
                .collect::<Result<_>>()?
        };
        for (i, c) in counts.into_iter().enumerate() {
            if let Some(c) = c {
                self.stats.moves[i].add(c);
            }
        }
        Ok(())
    }
}

/// Result of a driver run that recorded the sampled (first) chain.
#[derive(Clone, Debug)]
pub struct Run<S> {
    pub trace: Trace<S>,
    pub stats: EnsembleStats,
    pub final_chains: Vec<ChainState<S>>,
}
