use serde::{Deserialize, Serialize};

use super::km::KmRow;
use super::{FittedTree, RuleDescription, Tree, TreeModel};
use crate::mcmc::ChainState;
use crate::samplers::{EnsembleStats, Recorder};
use crate::Result;

/// Nested JSON form of a fitted tree. Leaves are numbered from 1, left to right.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNodeReport {
    Split {
        rule: RuleDescription,
        left: Box<TreeNodeReport>,
        right: Box<TreeNodeReport>,
    },
    Leaf {
        leaf: usize,
        size: usize,
        uncensored: usize,
        log_evidence: f64,
    },
}

impl TreeNodeReport {
    pub fn new(model: &TreeModel, fitted: &FittedTree) -> Self {
        let leaves: Vec<_> = fitted.leaves().collect();
        let mut next = 0;
        Self::build(model, fitted.tree(), &leaves, &mut next)
    }

    fn build(model: &TreeModel, t: &Tree, leaves: &[&super::LeafFit], next: &mut usize) -> Self {
        match t {
            Tree::Leaf => {
                let l = leaves[*next];
                *next += 1;
                TreeNodeReport::Leaf {
                    leaf: *next,
                    size: l.stats.size(),
                    uncensored: l.stats.uncensored,
                    log_evidence: l.log_evidence,
                }
            }
            Tree::Split { rule, left, right } => TreeNodeReport::Split {
                rule: model.rules().describe(rule),
                left: Box::new(Self::build(model, left, leaves, next)),
                right: Box::new(Self::build(model, right, leaves, next)),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModalTreeReport {
    pub log_marginal: f64,
    pub leaves: usize,
    /// 1-based iteration at which the tree was first visited.
    pub first_visit: usize,
    pub tree: TreeNodeReport,
}

/// Kaplan-Meier row for every leaf of a fitted tree.
pub fn km_table(model: &TreeModel, fitted: &FittedTree) -> Result<Vec<KmRow>> {
    let data = model.data();
    fitted
        .leaves()
        .enumerate()
        .map(|(k, l)| {
            let times: Vec<f64> = l.stats.members.iter().map(|&j| data.times()[j]).collect();
            let events: Vec<bool> = l.stats.members.iter().map(|&j| data.events()[j]).collect();
            KmRow::new(k + 1, &times, &events)
        })
        .collect()
}

/// Per-iteration row of a tree-sampler trace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeTraceRow {
    pub iteration: usize,
    pub log_marginal: f64,
    pub leaves: usize,
}

/// Streaming summary of chain 1 of a tree sampler: trace rows, covariate
/// usage counts and the highest-posterior tree visited (earliest on ties).
#[derive(Clone, Debug)]
pub struct TreeRunSummary {
    pub rows: Vec<TreeTraceRow>,
    pub covariate_counts: Vec<u64>,
    /// Which covariates the recorded tree splits on, per iteration.
    pub usage: Vec<Vec<bool>>,
    pub modal: Option<(FittedTree, f64, usize)>,
}

impl TreeRunSummary {
    pub fn new(n_covariates: usize) -> Self {
        Self {
            rows: Vec::new(),
            covariate_counts: vec![0; n_covariates],
            usage: Vec::new(),
            modal: None,
        }
    }

    /// Fraction of recorded trees that split on each covariate.
    pub fn inclusion_probabilities(&self) -> Vec<f64> {
        let n = self.rows.len().max(1) as f64;
        self.covariate_counts.iter().map(|&c| c as f64 / n).collect()
    }

    pub fn modal_report(&self, model: &TreeModel) -> Option<ModalTreeReport> {
        self.modal.as_ref().map(|(t, lm, it)| ModalTreeReport {
            log_marginal: *lm,
            leaves: t.n_leaves(),
            first_visit: *it,
            tree: TreeNodeReport::new(model, t),
        })
    }

    pub fn write_trace_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

impl Recorder<FittedTree> for TreeRunSummary {
    fn record(&mut self, iteration: usize, chains: &[ChainState<FittedTree>], _stats: &EnsembleStats) {
        let c = &chains[0];
        let lm = c.log_density();
        let tree = c.value().tree();
        self.rows.push(TreeTraceRow {
            iteration: iteration + 1,
            log_marginal: lm,
            leaves: tree.n_leaves(),
        });
        let mut used = vec![false; self.covariate_counts.len()];
        for r in tree.rules() {
            used[r.covariate] = true;
        }
        for (c, &u) in self.covariate_counts.iter_mut().zip(&used) {
            *c += u as u64;
        }
        self.usage.push(used);
        if self.modal.as_ref().is_none_or(|(_, best, _)| lm > *best) {
            self.modal = Some((c.value().clone(), lm, iteration + 1));
        }
    }
}
