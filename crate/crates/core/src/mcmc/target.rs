use super::RngStream;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateSpaceKind {
    ContinuousScalar,
    /// Binary vectors of the given length.
    BinaryVector(usize),
    Tree,
    /// A finite set `{0, .., n-1}`.
    Finite(usize),
}

/// An unnormalised log density (or log mass) over some state space.
///
/// Samplers only ever use differences of `log_density`, so any additive
/// constant is irrelevant. Returning `-inf` marks a state as having zero mass.
pub trait Target: Sync {
    type State: Clone + Send + Sync;

    fn log_density(&self, state: &Self::State) -> f64;

    fn state_space(&self) -> StateSpaceKind;
}

/// A proposed move together with `log q(current | candidate) - log q(candidate | current)`.
#[derive(Clone, Debug)]
pub struct Candidate<S> {
    pub state: S,
    pub log_proposal_ratio: f64,
}

/// A proposal mechanism that reports its own Hastings correction.
///
/// This is the interface the chain drivers use. Proposals with explicit
/// densities implement [`ProposalKernel`] instead and get this trait for free.
pub trait Proposal<S>: Sync {
    fn propose(&self, current: &S, rng: &mut RngStream) -> Candidate<S>;
}

/// A proposal with an explicit transition density `q(to | from)`.
///
/// `sample` must never return `current` itself.
pub trait ProposalKernel<S>: Sync {
    fn sample(&self, current: &S, rng: &mut RngStream) -> S;

    /// `log q(to | from)`.
    fn log_density(&self, from: &S, to: &S) -> f64;

    fn is_symmetric(&self) -> bool;
}

impl<S, K: ProposalKernel<S>> Proposal<S> for K {
    fn propose(&self, current: &S, rng: &mut RngStream) -> Candidate<S> {
        let state = self.sample(current, rng);
        let log_proposal_ratio = if self.is_symmetric() {
            0.0
        } else {
            self.log_density(&state, current) - self.log_density(current, &state)
        };
        Candidate {
            state,
            log_proposal_ratio,
        }
    }
}

/// A chain value paired with its cached (untempered) log density.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainState<S> {
    value: S,
    log_density: f64,
}

impl<S> ChainState<S> {
    /// Evaluates the target at `value`. Fails if the value has zero mass.
    pub fn new<T: Target<State = S>>(target: &T, value: S) -> Result<Self> {
        let log_density = target.log_density(&value);
        if !log_density.is_finite() {
            return Err(Error::NonFiniteCurrent(log_density));
        }
        Ok(Self { value, log_density })
    }

    /// Pairs a value with a log density the caller has already computed.
    pub fn from_parts(value: S, log_density: f64) -> Self {
        Self { value, log_density }
    }

    pub fn value(&self) -> &S {
        &self.value
    }

    pub fn log_density(&self) -> f64 {
        self.log_density
    }

    pub fn into_value(self) -> S {
        self.value
    }

    pub(crate) fn set(&mut self, value: S, log_density: f64) {
        self.value = value;
        self.log_density = log_density;
    }
}
