//! Bayesian survival trees with Weibull leaves.
//!
//! Each leaf holds a Weibull model with density `alpha beta t^(alpha-1)
//! exp(-beta t^alpha)` under the prior `1/(alpha beta)`. The scale is
//! integrated out exactly and the shape by Laplace's method ([`laplace`]), so
//! a tree's log posterior is a sum of per-leaf evidences. Trees are sampled
//! with five within-chain moves ([`TreeProposal`]) and, under the parallel
//! hierarchical sampler, the cross-chain exchange [`TreeExchange`].

mod data;
mod enumerate;
mod km;
pub mod laplace;
mod model;
mod moves;
mod report;
mod rules;
mod tree;

pub use data::{
    Covariate, CovariateKind, CovariateSpec, CovariateValues, IngestError, SurvivalDataset, SurvivalSchema,
};
pub use enumerate::{enumerate_tree_posterior, enumerate_trees, TreePosteriorTable, MAX_ENUMERATED_TREES};
pub use km::{kaplan_meier, read_km_table, write_km_table, KmRow, KM_TABLE_TIMES};
pub use laplace::LeafStats;
pub use model::{FittedTree, LeafFit, TreeModel, DEFAULT_MAX_LEAVES};
pub use moves::{
    applicable_moves, propose_tree_move, CrossMoveKind, CrossMoveSet, MoveKind, TreeExchange, TreeMove, TreeProposal,
};
pub use report::{km_table, ModalTreeReport, TreeNodeReport, TreeRunSummary, TreeTraceRow};
pub use rules::{Rule, RuleDescription, RuleSpace, MAX_CATEGORIES};
pub use tree::{is_prefix, NodePath, Tree};
