use rand::seq::SliceRandom;
use rand::Rng;

use super::ModelIndex;
use crate::mcmc::{mh_step_tempered, ChainState, ProposalKernel, RngStream, StepCounts, Target, Update};
use crate::Result;

/// Flips one fixed coordinate. An involution, so symmetric.
#[derive(Clone, Copy, Debug)]
pub struct SingleFlip(pub usize);

impl ProposalKernel<ModelIndex> for SingleFlip {
    fn sample(&self, current: &ModelIndex, _rng: &mut RngStream) -> ModelIndex {
        current.flipped(self.0)
    }

    fn log_density(&self, from: &ModelIndex, to: &ModelIndex) -> f64 {
        if *to == from.flipped(self.0) {
            0.0
        } else {
            f64::NEG_INFINITY
        }
    }

    fn is_symmetric(&self) -> bool {
        true
    }
}

/// Flips one coordinate chosen uniformly at random.
#[derive(Clone, Copy, Debug, Default)]
pub struct RandomFlip;

impl ProposalKernel<ModelIndex> for RandomFlip {
    fn sample(&self, current: &ModelIndex, rng: &mut RngStream) -> ModelIndex {
        let j = rng.random_range(0..current.len());
        current.flipped(j)
    }

    fn log_density(&self, from: &ModelIndex, to: &ModelIndex) -> f64 {
        let differing = from.as_slice().iter().zip(to.as_slice()).filter(|(a, b)| a != b).count();
        if differing == 1 {
            -(from.len() as f64).ln()
        } else {
            f64::NEG_INFINITY
        }
    }

    fn is_symmetric(&self) -> bool {
        true
    }
}

/// Random-scan sweep: the coordinates are visited in a uniformly random
/// order and each visit is one single-flip Metropolis-Hastings step.
#[derive(Clone, Copy, Debug, Default)]
pub struct FlipSweep;

impl Update<ModelIndex> for FlipSweep {
    fn update<T: Target<State = ModelIndex>>(
        &self,
        target: &T,
        inv_temp: f64,
        chain: &mut ChainState<ModelIndex>,
        rng: &mut RngStream,
    ) -> Result<StepCounts> {
        let mut order: Vec<usize> = (0..chain.value().len()).collect();
        order.shuffle(rng);
        let mut counts = StepCounts::default();
        for j in order {
            let accepted = mh_step_tempered(target, &SingleFlip(j), inv_temp, chain, rng)?;
            counts.add(StepCounts {
                proposed: 1,
                accepted: accepted as u64,
            });
        }
        Ok(counts)
    }
}
