use rand::Rng;

use super::{Ensemble, EnsembleStats, Recorder, Run, RunOptions, SwapMode, TemperatureLadder};
use crate::diagnostics::Trace;
use crate::mcmc::{ChainState, Target, Update};
use crate::{Error, Result};

/// Log acceptance ratio for exchanging the states of chains `j` and `k`:
/// `(1/T_j - 1/T_k) * (log f(x_k) - log f(x_j))`.
pub fn pt_swap_log_ratio<S>(
    chains: &[ChainState<S>],
    ladder: &TemperatureLadder,
    j: usize,
    k: usize,
) -> f64 {
    assert!(j != k, "swap partners must differ");
    let t = ladder.temperatures();
    let coef = 1.0 / t[j] - 1.0 / t[k];
    if coef == 0.0 {
        return 0.0;
    }
    coef * (chains[k].log_density() - chains[j].log_density())
}

/// Proposes an ordered pair uniformly among the `M(M-1)` options and
/// exchanges the two states with the tempered Metropolis probability.
pub fn pt_swap_step<S: Clone + Send + Sync>(ens: &mut Ensemble<S>, ladder: &TemperatureLadder) -> bool {
    let m = ens.len();
    debug_assert!(m >= 2);
    let control = ens.control();
    let j = control.random_range(0..m);
    let mut k = control.random_range(0..m - 1);
    if k >= j {
        k += 1;
    }
    let log_ratio = pt_swap_log_ratio(ens.chains(), ladder, j, k);
    let u = ens.control().open_unit();
    let accepted = u.ln() < log_ratio.min(0.0);
    ens.stats.swap_attempts += 1;
    if accepted {
        ens.stats.swap_accepts += 1;
        ens.chains_mut().swap(j, k);
    }
    accepted
}

/// Updates every chain once against its heated target.
pub fn pt_update_step<T, U>(
    target: &T,
    kernels: &[U],
    inv_temps: &[f64],
    ens: &mut Ensemble<T::State>,
    parallel: bool,
) -> Result<()>
where
    T: Target,
    U: Update<T::State>,
{
    ens.update_chains(target, kernels, inv_temps, |_| true, parallel)
}

/// Parallel tempering; the trace follows the cold chain (index 0).
pub fn run_pt<T, U>(
    target: &T,
    ladder: &TemperatureLadder,
    kernels: &[U],
    mode: SwapMode,
    init: T::State,
    opts: RunOptions,
) -> Result<Run<T::State>>
where
    T: Target,
    U: Update<T::State>,
{
    let mut trace = Trace::with_capacity(0, opts.n_iter);
    let (stats, final_chains) = run_pt_with(target, ladder, kernels, mode, init, opts, &mut trace)?;
    Ok(Run {
        trace,
        stats,
        final_chains,
    })
}

pub fn run_pt_with<T, U, R>(
    target: &T,
    ladder: &TemperatureLadder,
    kernels: &[U],
    mode: SwapMode,
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
    let m = ladder.len();
    if kernels.len() != m {
        return Err(Error::ChainCountMismatch {
            expected: m,
            got: kernels.len(),
        });
    }
    match mode {
        SwapMode::PhsUniform => {
            return Err(Error::InvalidConfig(
                "parallel tempering needs a pt-deterministic or pt-independent swap mode".into(),
            ))
        }
        SwapMode::PtIndependent(s) if !(s > 0.0 && s < 1.0) => {
            return Err(Error::InvalidConfig(format!("swap rate {s} must lie in (0, 1)")))
        }
        _ => {}
    }
    let inv_temps = ladder.inverse_temperatures();
    let mut ens = Ensemble::replicated(target, init, m, opts.seed)?;
    // Geyer's schedule starts with an update.
    let mut previous_was_swap = true;
    for iter in 0..opts.n_iter {
        let swap = if m < 2 {
            false
        } else {
            match mode {
                SwapMode::PtDeterministic => !previous_was_swap,
                SwapMode::PtIndependent(s) => ens.control().open_unit() < s,
                SwapMode::PhsUniform => unreachable!(),
            }
        };
        if swap {
            pt_swap_step(&mut ens, ladder);
        } else {
            pt_update_step(target, kernels, &inv_temps, &mut ens, opts.parallel)?;
        }
        previous_was_swap = swap;
        recorder.record(iter, ens.chains(), &ens.stats);
    }
    let stats = ens.stats.clone();
    Ok((stats, ens.into_chains()))
}
