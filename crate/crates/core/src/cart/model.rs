use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use super::laplace::{leaf_log_evidence, LeafStats};
use super::{RuleSpace, SurvivalDataset, Tree};
use crate::mcmc::{StateSpaceKind, Target};
use crate::{Error, Result};

pub const DEFAULT_MAX_LEAVES: usize = 30;

#[derive(Clone, Debug, PartialEq)]
pub struct LeafFit {
    pub stats: LeafStats,
    /// Laplace log evidence, `-inf` for an improper leaf or a failed mode search.
    pub log_evidence: f64,
}

/// A tree with the per-leaf statistics and evidence it induces on the data.
/// Built only through [`TreeModel`], so the cached values always match the tree.
#[derive(Clone, Debug, PartialEq)]
pub struct FittedTree {
    tree: Tree,
    leaves: Vec<Arc<LeafFit>>,
}

impl FittedTree {
    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn leaves(&self) -> impl Iterator<Item = &LeafFit> {
        self.leaves.iter().map(|l| l.as_ref())
    }

    pub fn n_leaves(&self) -> usize {
        self.leaves.len()
    }

    pub fn into_tree(self) -> Tree {
        self.tree
    }
}

/// Posterior over tree structures for a survival dataset: uniform prior on
/// trees with at most `max_leaves` leaves, Laplace-approximated marginal
/// likelihood.
#[derive(Debug)]
pub struct TreeModel {
    data: SurvivalDataset,
    rules: RuleSpace,
    max_leaves: usize,
    failed_modes: AtomicU64,
}

impl TreeModel {
    pub fn new(data: SurvivalDataset, max_leaves: usize) -> Result<Self> {
        if max_leaves == 0 {
            return Err(Error::InvalidConfig("max_leaves must be at least 1".into()));
        }
        let rules = RuleSpace::new(&data)?;
        Ok(Self {
            data,
            rules,
            max_leaves,
            failed_modes: AtomicU64::new(0),
        })
    }

    pub fn data(&self) -> &SurvivalDataset {
        &self.data
    }

    pub fn rules(&self) -> &RuleSpace {
        &self.rules
    }

    pub fn max_leaves(&self) -> usize {
        self.max_leaves
    }

    /// Leaf evaluations whose mode search failed so far.
    pub fn failed_mode_count(&self) -> u64 {
        self.failed_modes.load(Ordering::Relaxed)
    }

    fn fit_leaf(&self, members: Vec<usize>) -> LeafFit {
        let stats = LeafStats::from_members(&self.data, members);
        let log_evidence = match leaf_log_evidence(&stats) {
            Ok(v) => v,
            Err(Error::ModeNotFound(_)) => {
                self.failed_modes.fetch_add(1, Ordering::Relaxed);
                f64::NEG_INFINITY
            }
            Err(_) => f64::NEG_INFINITY,
        };
        LeafFit { stats, log_evidence }
    }

    /// Fits every leaf from scratch.
    pub fn fit(&self, tree: Tree) -> FittedTree {
        let parts = tree.partition(&self.rules, (0..self.data.len()).collect());
        let leaves = parts.into_iter().map(|m| Arc::new(self.fit_leaf(m))).collect();
        FittedTree { tree, leaves }
    }

    /// Fits `tree`, reusing the leaves of `previous` whose membership is unchanged.
    pub fn refit(&self, tree: Tree, previous: &FittedTree) -> FittedTree {
        let known: HashMap<&[usize], &Arc<LeafFit>> =
            previous.leaves.iter().map(|l| (l.stats.members.as_slice(), l)).collect();
        let parts = tree.partition(&self.rules, (0..self.data.len()).collect());
        let leaves = parts
            .into_iter()
            .map(|m| match known.get(m.as_slice()) {
                Some(&l) => Arc::clone(l),
                None => Arc::new(self.fit_leaf(m)),
            })
            .collect();
        FittedTree { tree, leaves }
    }

    /// Sum of leaf log evidences; `-inf` if a leaf is improper or the tree is too large.
    pub fn log_marginal(&self, fitted: &FittedTree) -> f64 {
        if fitted.leaves.len() > self.max_leaves {
            return f64::NEG_INFINITY;
        }
        fitted.leaves.iter().map(|l| l.log_evidence).sum()
    }

    pub fn tree_log_marginal(&self, tree: &Tree) -> f64 {
        self.log_marginal(&self.fit(tree.clone()))
    }

    /// Checks a tree against the data: partition, leaf propriety and size cap.
    pub fn is_valid(&self, fitted: &FittedTree) -> bool {
        self.log_marginal(fitted).is_finite()
    }
}

impl Target for TreeModel {
    type State = FittedTree;

    fn log_density(&self, state: &FittedTree) -> f64 {
        self.log_marginal(state)
    }

    fn state_space(&self) -> StateSpaceKind {
        StateSpaceKind::Tree
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cart::{Covariate, Rule};
    use crate::math::LN_SQRT_2PI;

    fn dataset() -> SurvivalDataset {
        let times = vec![1.0, 2.5, 0.7, 3.2, 1.9, 4.4, 0.3, 2.2, 5.1, 1.4];
        let events = vec![true, true, false, true, true, true, true, false, true, true];
        let x: Vec<f64> = (0..10).map(|j| j as f64).collect();
        SurvivalDataset::new(times, events, vec![Covariate::continuous("x", x)]).unwrap()
    }

    #[test]
    fn root_value() {
        let model = TreeModel::new(dataset(), 5).unwrap();
        let fit = model.fit(Tree::Leaf);
        let s = &fit.leaves().next().unwrap().stats;
        let m = crate::cart::laplace::leaf_mode(s).unwrap();
        let want = LN_SQRT_2PI + m.value - 0.5 * (-m.second).ln();
        assert!((model.log_marginal(&fit) - want).abs() < 1e-12);
    }

    #[test]
    fn size_cap_and_propriety() {
        let model = TreeModel::new(dataset(), 2).unwrap();
        let t = Tree::stump(Rule { covariate: 0, index: 4 });
        assert!(model.tree_log_marginal(&t).is_finite());
        // x <= 0 isolates one observation
        let t = Tree::stump(Rule { covariate: 0, index: 0 });
        assert_eq!(model.tree_log_marginal(&t), f64::NEG_INFINITY);
        let t = Tree::split(Rule { covariate: 0, index: 4 }, Tree::stump(Rule { covariate: 0, index: 1 }), Tree::Leaf);
        assert_eq!(model.tree_log_marginal(&t), f64::NEG_INFINITY);
    }

    #[test]
    fn refit_matches_fresh_fit() {
        let model = TreeModel::new(dataset(), 5).unwrap();
        let a = model.fit(Tree::stump(Rule { covariate: 0, index: 4 }));
        let t = Tree::split(Rule { covariate: 0, index: 4 }, Tree::Leaf, Tree::stump(Rule { covariate: 0, index: 6 }));
        let b = model.refit(t.clone(), &a);
        assert_eq!(b, model.fit(t));
        assert!(Arc::ptr_eq(&a.leaves[0], &b.leaves[0]));
    }
}
