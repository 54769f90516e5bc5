use super::{Rule, Tree, TreeModel};
use crate::math::log_sum_exp;
use crate::{Error, Result};

/// Largest tree space [`enumerate_trees`] will build.
pub const MAX_ENUMERATED_TREES: usize = 2_000_000;

fn count_trees(n_rules: usize, max_leaves: usize) -> Option<usize> {
    // c[b] = trees with exactly b leaves
    let mut c = vec![0usize; max_leaves + 1];
    c[1] = 1;
    for b in 2..=max_leaves {
        let mut s = 0usize;
        for k in 1..b {
            s = s.checked_add(c[k].checked_mul(c[b - k])?.checked_mul(n_rules)?)?;
        }
        c[b] = s;
    }
    c.iter().try_fold(0usize, |acc, &x| acc.checked_add(x))
}

fn trees_with_leaves(rules: &[Rule], b: usize, memo: &mut Vec<Option<Vec<Tree>>>) -> Vec<Tree> {
    if let Some(ts) = &memo[b] {
        return ts.clone();
    }
    let out = if b == 1 {
        vec![Tree::Leaf]
    } else {
        let mut out = Vec::new();
        for k in 1..b {
            let lefts = trees_with_leaves(rules, k, memo);
            let rights = trees_with_leaves(rules, b - k, memo);
            for r in rules {
                for l in &lefts {
                    for rt in &rights {
                        out.push(Tree::split(*r, l.clone(), rt.clone()));
                    }
                }
            }
        }
        out
    };
    memo[b] = Some(out.clone());
    out
}

/// Every tree over the model's rule space with at most `max_leaves` leaves,
/// including ones with improper leaves.
pub fn enumerate_trees(model: &TreeModel) -> Result<Vec<Tree>> {
    let rules = model.rules().all();
    let b_max = model.max_leaves();
    match count_trees(rules.len(), b_max) {
        Some(n) if n <= MAX_ENUMERATED_TREES => {}
        _ => {
            return Err(Error::InvalidConfig(format!(
                "tree space with {} rules and up to {b_max} leaves exceeds {MAX_ENUMERATED_TREES} trees",
                rules.len()
            )))
        }
    }
    let mut memo = vec![None; b_max + 1];
    Ok((1..=b_max).flat_map(|b| trees_with_leaves(&rules, b, &mut memo)).collect())
}

/// Exact normalised posterior over an enumerated tree space.
#[derive(Clone, Debug)]
pub struct TreePosteriorTable {
    pub trees: Vec<Tree>,
    pub log_marginals: Vec<f64>,
    pub probabilities: Vec<f64>,
}

impl TreePosteriorTable {
    pub fn index_of(&self, tree: &Tree) -> Option<usize> {
        self.trees.iter().position(|t| t == tree)
    }
}

pub fn enumerate_tree_posterior(model: &TreeModel) -> Result<TreePosteriorTable> {
    let trees = enumerate_trees(model)?;
    let log_marginals: Vec<f64> = trees.iter().map(|t| model.tree_log_marginal(t)).collect();
    let z = log_sum_exp(&log_marginals);
    if !z.is_finite() {
        return Err(Error::InvalidData("no tree in the enumerated space has proper leaves".into()));
    }
    let probabilities = log_marginals.iter().map(|l| (l - z).exp()).collect();
    Ok(TreePosteriorTable {
        trees,
        log_marginals,
        probabilities,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cart::{Covariate, SurvivalDataset};

    #[test]
    fn counts_match_formula() {
        // 1 + R + 2R^2 for up to three leaves
        assert_eq!(count_trees(6, 3), Some(1 + 6 + 72));
        assert_eq!(count_trees(2, 4), Some(1 + 2 + 8 + 40));
        let data = SurvivalDataset::new(
            vec![1.0, 2.0, 3.0, 4.0],
            vec![true; 4],
            vec![Covariate::ordinal("x", vec![1.0, 2.0, 3.0, 3.0])],
        )
        .unwrap();
        let model = TreeModel::new(data, 4).unwrap();
        let trees = enumerate_trees(&model).unwrap();
        assert_eq!(trees.len(), 1 + 2 + 8 + 40);
        let unique: std::collections::HashSet<_> = trees.iter().collect();
        assert_eq!(unique.len(), trees.len());
    }

    #[test]
    fn guard() {
        assert_eq!(count_trees(1000, 40), None);
    }
}
