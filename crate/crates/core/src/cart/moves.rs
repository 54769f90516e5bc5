use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tree::{is_prefix, NodePath};
use super::{FittedTree, Tree, TreeModel};
use crate::mcmc::{Candidate, ChainState, Proposal, RngStream, Target};
use crate::samplers::Exchange;
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveKind {
    Insert,
    Delete,
    Change,
    Permute,
    Graft,
}

/// Within-chain moves applicable to `tree`, in a fixed order.
pub fn applicable_moves(model: &TreeModel, tree: &Tree) -> Vec<MoveKind> {
    let internal = tree.n_internal();
    let mut out = Vec::with_capacity(5);
    if tree.n_leaves() < model.max_leaves() && !model.rules().is_empty() {
        out.push(MoveKind::Insert);
    }
    if internal >= 1 {
        out.push(MoveKind::Delete);
        if model.rules().total() > 1 {
            out.push(MoveKind::Change);
        }
    }
    if internal >= 2 {
        out.push(MoveKind::Permute);
        out.push(MoveKind::Graft);
    }
    out
}

/// A proposed tree with its move type and `log q(T'->T) - log q(T->T')`.
#[derive(Clone, Debug)]
pub struct TreeMove {
    pub kind: MoveKind,
    pub tree: Tree,
    pub log_proposal_ratio: f64,
}

/// Draws one of the applicable moves uniformly and applies it.
///
/// - insert: split a uniform leaf with a rule from the rule proposal;
/// - delete: collapse a uniform node whose children are both leaves;
/// - change: redraw the rule of a uniform internal node, excluding the current rule;
/// - permute: permute the rules of a uniform subset of `k` internal nodes, `k` uniform on `2..=internal`;
/// - graft: swap a uniform non-root internal subtree with a uniform leaf outside it.
///
/// Returns `None` when no move applies (an empty rule space and a root tree).
pub fn propose_tree_move(model: &TreeModel, tree: &Tree, rng: &mut RngStream) -> Option<TreeMove> {
    let moves = applicable_moves(model, tree);
    if moves.is_empty() {
        return None;
    }
    let kind = moves[rng.random_range(0..moves.len())];
    let rules = model.rules();
    let mut next = tree.clone();
    let mut log_ratio = 0.0;
    match kind {
        MoveKind::Insert => {
            let leaves = tree.leaf_paths();
            let path = &leaves[rng.random_range(0..leaves.len())];
            let rule = rules.sample(rng);
            next.replace(path, Tree::stump(rule));
            let cherries = next.cherry_paths().len() as f64;
            log_ratio = (leaves.len() as f64).ln() - rules.log_prob(&rule) - cherries.ln();
        }
        MoveKind::Delete => {
            let cherries = tree.cherry_paths();
            let path = &cherries[rng.random_range(0..cherries.len())];
            let rule = next.replace(path, Tree::Leaf).rule().expect("cherry has a rule");
            log_ratio = (cherries.len() as f64).ln() + rules.log_prob(&rule) - (next.n_leaves() as f64).ln();
        }
        MoveKind::Change => {
            let internal = tree.internal_paths();
            let path = &internal[rng.random_range(0..internal.len())];
            let old = tree.get(path).and_then(Tree::rule).expect("internal node has a rule");
            let new = loop {
                let r = rules.sample(rng);
                if r != old {
                    break r;
                }
            };
            next.set_rule(path, new);
            let (p_old, p_new) = (rules.log_prob(&old), rules.log_prob(&new));
            log_ratio = p_old - (-p_new.exp()).ln_1p() - p_new + (-p_old.exp()).ln_1p();
        }
        MoveKind::Permute => {
            let internal = tree.internal_paths();
            let k = rng.random_range(2..=internal.len());
            let chosen: Vec<usize> = index::sample(rng, internal.len(), k).into_vec();
            let mut moved: Vec<_> = chosen.iter().map(|&i| tree.get(&internal[i]).and_then(Tree::rule).unwrap()).collect();
            moved.shuffle(rng);
            for (&i, r) in chosen.iter().zip(moved) {
                next.set_rule(&internal[i], r);
            }
        }
        MoveKind::Graft => {
            let candidates: Vec<NodePath> = tree.internal_paths().into_iter().filter(|p| !p.is_empty()).collect();
            let v = &candidates[rng.random_range(0..candidates.len())];
            let outside: Vec<NodePath> = tree.leaf_paths().into_iter().filter(|l| !is_prefix(v, l)).collect();
            let leaf = &outside[rng.random_range(0..outside.len())];
            let sub = next.replace(v, Tree::Leaf);
            next.replace(leaf, sub);
        }
    }
    log_ratio += (moves.len() as f64).ln() - (applicable_moves(model, &next).len() as f64).ln();
    Some(TreeMove {
        kind,
        tree: next,
        log_proposal_ratio: log_ratio,
    })
}

/// The five within-chain moves as a chain proposal.
#[derive(Clone, Copy, Debug)]
pub struct TreeProposal<'a> {
    pub model: &'a TreeModel,
}

impl<'a> TreeProposal<'a> {
    pub fn new(model: &'a TreeModel) -> Self {
        Self { model }
    }
}

impl Proposal<FittedTree> for TreeProposal<'_> {
    fn propose(&self, current: &FittedTree, rng: &mut RngStream) -> Candidate<FittedTree> {
        match propose_tree_move(self.model, current.tree(), rng) {
            Some(mv) => Candidate {
                state: self.model.refit(mv.tree, current),
                log_proposal_ratio: mv.log_proposal_ratio,
            },
            // nothing to propose: a rejected null move
            None => Candidate {
                state: current.clone(),
                log_proposal_ratio: f64::NEG_INFINITY,
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossMoveKind {
    WholeSwap,
    CrossInsert,
    CrossGraft,
    CrossChange,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossMoveSet {
    /// Uniform over whole swap, cross-insert, cross-graft and cross-change.
    #[default]
    All,
    WholeSwapOnly,
}

/// Cross-chain tree exchange between chain 1 and its partner, always accepted.
///
/// - whole swap: exchange the trees;
/// - cross-insert: pick a terminal split (a node with two leaf children) in
///   each tree and exchange their rules;
/// - cross-graft: pick a non-root internal subtree in each tree and exchange them;
/// - cross-change: pick an internal position present in both trees and
///   exchange the rules there.
///
/// If the structured variant has no ingredients or leaves either tree invalid,
/// the trees are swapped whole instead.
#[derive(Clone, Copy, Debug, Default)]
pub struct TreeExchange {
    pub moves: CrossMoveSet,
}

impl TreeExchange {
    pub fn new(moves: CrossMoveSet) -> Self {
        Self { moves }
    }

    /// The exchanged pair of trees, or `None` to fall back to a whole swap.
    pub fn structured(kind: CrossMoveKind, a: &Tree, b: &Tree, rng: &mut RngStream) -> Option<(Tree, Tree)> {
        let pick = |paths: Vec<NodePath>, rng: &mut RngStream| -> Option<NodePath> {
            if paths.is_empty() {
                None
            } else {
                Some(paths[rng.random_range(0..paths.len())].clone())
            }
        };
        let (mut a2, mut b2) = (a.clone(), b.clone());
        match kind {
            CrossMoveKind::WholeSwap => return None,
            CrossMoveKind::CrossInsert => {
                let pa = pick(a.cherry_paths(), rng)?;
                let pb = pick(b.cherry_paths(), rng)?;
                let ra = a.get(&pa)?.rule()?;
                let rb = b.get(&pb)?.rule()?;
                a2.set_rule(&pa, rb);
                b2.set_rule(&pb, ra);
            }
            CrossMoveKind::CrossGraft => {
                let nonroot = |t: &Tree| t.internal_paths().into_iter().filter(|p| !p.is_empty()).collect();
                let pa = pick(nonroot(a), rng)?;
                let pb = pick(nonroot(b), rng)?;
                let sa = a2.replace(&pa, Tree::Leaf);
                let sb = b2.replace(&pb, sa);
                a2.replace(&pa, sb);
            }
            CrossMoveKind::CrossChange => {
                let shared: Vec<NodePath> = a
                    .internal_paths()
                    .into_iter()
                    .filter(|p| b.get(p).is_some_and(|n| !n.is_leaf()))
                    .collect();
                let p = pick(shared, rng)?;
                let ra = a.get(&p)?.rule()?;
                let rb = b.get(&p)?.rule()?;
                a2.set_rule(&p, rb);
                b2.set_rule(&p, ra);
            }
        }
        Some((a2, b2))
    }
}

impl Exchange<TreeModel> for TreeExchange {
    fn exchange(
        &self,
        model: &TreeModel,
        first: &mut ChainState<FittedTree>,
        other: &mut ChainState<FittedTree>,
        rng: &mut RngStream,
    ) -> Result<()> {
        const KINDS: [CrossMoveKind; 4] = [
            CrossMoveKind::WholeSwap,
            CrossMoveKind::CrossInsert,
            CrossMoveKind::CrossGraft,
            CrossMoveKind::CrossChange,
        ];
        let kind = match self.moves {
            CrossMoveSet::All => KINDS[rng.random_range(0..KINDS.len())],
            CrossMoveSet::WholeSwapOnly => CrossMoveKind::WholeSwap,
        };
        if let Some((ta, tb)) = Self::structured(kind, first.value().tree(), other.value().tree(), rng) {
            let fa = model.refit(ta, first.value());
            let fb = model.refit(tb, other.value());
            let (la, lb) = (model.log_density(&fa), model.log_density(&fb));
            if la.is_finite() && lb.is_finite() {
                *first = ChainState::from_parts(fa, la);
                *other = ChainState::from_parts(fb, lb);
                return Ok(());
            }
        }
        std::mem::swap(first, other);
        Ok(())
    }
}
