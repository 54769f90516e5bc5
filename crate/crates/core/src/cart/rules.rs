use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{CovariateValues, SurvivalDataset};
use crate::mcmc::RngStream;
use crate::{Error, Result};

/// Most observed levels a categorical covariate may have.
pub const MAX_CATEGORIES: usize = 24;

/// A splitting rule: covariate plus an index into that covariate's rule list.
///
/// For a numeric covariate, rule `i` sends an observation left iff its value
/// is at most the midpoint between the `i`-th and `(i+1)`-th distinct observed
/// values. For a categorical covariate, rule `i` sends left the observed levels
/// in the bitmask `1 | i << 1`; the first observed level always goes left, so
/// each subset/complement pair appears once.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Rule {
    pub covariate: usize,
    pub index: u32,
}

#[derive(Clone, Debug)]
enum CovariateRules {
    Threshold { distinct: Vec<f64>, rank: Vec<u32> },
    Subset { levels: Vec<String>, local: Vec<u32> },
}

impl CovariateRules {
    fn count(&self) -> usize {
        match self {
            Self::Threshold { distinct, .. } => distinct.len().saturating_sub(1),
            Self::Subset { levels, .. } => (1usize << (levels.len().max(1) - 1)) - 1,
        }
    }
}

/// Human-readable form of a rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RuleDescription {
    Threshold { covariate: String, threshold: f64 },
    Subset { covariate: String, left_levels: Vec<String> },
}

/// The finite set of splitting rules induced by a dataset, with the
/// proposal distribution: uniform over covariates that admit a rule, then
/// uniform over that covariate's rules.
#[derive(Clone, Debug)]
pub struct RuleSpace {
    rules: Vec<CovariateRules>,
    names: Vec<String>,
    active: Vec<usize>,
}

impl RuleSpace {
    pub fn new(data: &SurvivalDataset) -> Result<Self> {
        let mut rules = Vec::new();
        for c in data.covariates() {
            rules.push(match &c.values {
                CovariateValues::Numeric(v) => {
                    let mut distinct = v.clone();
                    distinct.sort_by(f64::total_cmp);
                    distinct.dedup();
                    let rank = v
                        .iter()
                        .map(|x| distinct.binary_search_by(|d| d.total_cmp(x)).unwrap() as u32)
                        .collect();
                    CovariateRules::Threshold { distinct, rank }
                }
                CovariateValues::Categorical { levels, codes } => {
                    let mut seen: Vec<usize> = codes.clone();
                    seen.sort_unstable();
                    seen.dedup();
                    if seen.len() > MAX_CATEGORIES {
                        return Err(Error::InvalidData(format!(
                            "covariate {:?} has {} observed levels, at most {MAX_CATEGORIES} supported",
                            c.name,
                            seen.len()
                        )));
                    }
                    let local = codes.iter().map(|k| seen.binary_search(k).unwrap() as u32).collect();
                    CovariateRules::Subset {
                        levels: seen.iter().map(|&k| levels[k].clone()).collect(),
                        local,
                    }
                }
            });
        }
        let active = (0..rules.len()).filter(|&k| rules[k].count() > 0).collect();
        Ok(Self {
            rules,
            names: data.covariates().iter().map(|c| c.name.clone()).collect(),
            active,
        })
    }

    pub fn n_covariates(&self) -> usize {
        self.rules.len()
    }

    pub fn count(&self, covariate: usize) -> usize {
        self.rules[covariate].count()
    }

    pub fn total(&self) -> usize {
        self.rules.iter().map(CovariateRules::count).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    pub fn contains(&self, rule: &Rule) -> bool {
        rule.covariate < self.rules.len() && (rule.index as usize) < self.count(rule.covariate)
    }

    /// Every rule, covariate by covariate.
    pub fn all(&self) -> Vec<Rule> {
        (0..self.rules.len())
            .flat_map(|c| (0..self.count(c) as u32).map(move |index| Rule { covariate: c, index }))
            .collect()
    }

    pub fn goes_left(&self, rule: &Rule, obs: usize) -> bool {
        match &self.rules[rule.covariate] {
            CovariateRules::Threshold { rank, .. } => rank[obs] <= rule.index,
            CovariateRules::Subset { local, .. } => {
                let mask = 1u64 | (rule.index as u64) << 1;
                mask >> local[obs] & 1 == 1
            }
        }
    }

    pub fn sample(&self, rng: &mut RngStream) -> Rule {
        assert!(!self.is_empty(), "no splitting rules available");
        let covariate = self.active[rng.random_range(0..self.active.len())];
        let index = rng.random_range(0..self.count(covariate)) as u32;
        Rule { covariate, index }
    }

    /// Log probability of `rule` under [`Self::sample`].
    pub fn log_prob(&self, rule: &Rule) -> f64 {
        if !self.contains(rule) {
            return f64::NEG_INFINITY;
        }
        -(self.active.len() as f64).ln() - (self.count(rule.covariate) as f64).ln()
    }

    /// Inverse of [`Self::describe`]. Thresholds match to a relative 1e-9;
    /// a level subset matches itself or its complement.
    pub fn resolve(&self, desc: &RuleDescription) -> Option<Rule> {
        let name = match desc {
            RuleDescription::Threshold { covariate, .. } | RuleDescription::Subset { covariate, .. } => covariate,
        };
        let covariate = self.names.iter().position(|n| n == name)?;
        (0..self.count(covariate) as u32)
            .map(|index| Rule { covariate, index })
            .find(|r| match (desc, self.describe(r)) {
                (RuleDescription::Threshold { threshold: a, .. }, RuleDescription::Threshold { threshold: b, .. }) => {
                    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
                }
                (RuleDescription::Subset { left_levels: want, .. }, RuleDescription::Subset { left_levels: have, .. }) => {
                    let CovariateRules::Subset { levels, .. } = &self.rules[covariate] else {
                        return false;
                    };
                    let mut want = want.clone();
                    want.sort();
                    let mut have = have.clone();
                    have.sort();
                    let mut complement: Vec<String> = levels.iter().filter(|l| !have.contains(l)).cloned().collect();
                    complement.sort();
                    want == have || want == complement
                }
                _ => false,
            })
    }

    pub fn describe(&self, rule: &Rule) -> RuleDescription {
        let covariate = self.names[rule.covariate].clone();
        match &self.rules[rule.covariate] {
            CovariateRules::Threshold { distinct, .. } => {
                let i = rule.index as usize;
                RuleDescription::Threshold {
                    covariate,
                    threshold: 0.5 * (distinct[i] + distinct[i + 1]),
                }
            }
            CovariateRules::Subset { levels, .. } => {
                let mask = 1u64 | (rule.index as u64) << 1;
                RuleDescription::Subset {
                    covariate,
                    left_levels: (0..levels.len())
                        .filter(|&k| mask >> k & 1 == 1)
                        .map(|k| levels[k].clone())
                        .collect(),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cart::Covariate;

    fn data() -> SurvivalDataset {
        SurvivalDataset::new(
            vec![1.0, 2.0, 3.0, 4.0, 5.0],
            vec![true; 5],
            vec![
                Covariate::continuous("x", vec![0.5, 0.1, 0.5, 0.9, 0.3]),
                Covariate::categorical("g", vec!["a".into(), "b".into(), "c".into(), "d".into()], vec![0, 1, 2, 1, 0]),
                Covariate::ordinal("k", vec![2.0; 5]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn counts() {
        let rs = RuleSpace::new(&data()).unwrap();
        // 4 distinct x values, 3 observed levels of g, constant k
        assert_eq!(rs.count(0), 3);
        assert_eq!(rs.count(1), 3);
        assert_eq!(rs.count(2), 0);
        assert_eq!(rs.total(), 6);
        assert_eq!(rs.all().len(), 6);
        assert!((rs.log_prob(&Rule { covariate: 1, index: 2 }) - (1.0f64 / 6.0).ln()).abs() < 1e-12);
        assert_eq!(rs.log_prob(&Rule { covariate: 2, index: 0 }), f64::NEG_INFINITY);
    }

    #[test]
    fn thresholds_route_by_rank() {
        let rs = RuleSpace::new(&data()).unwrap();
        let r = Rule { covariate: 0, index: 1 };
        let left: Vec<bool> = (0..5).map(|j| rs.goes_left(&r, j)).collect();
        assert_eq!(left, vec![false, true, false, false, true]);
        match rs.describe(&r) {
            RuleDescription::Threshold { covariate, threshold } => {
                assert_eq!(covariate, "x");
                assert!((threshold - 0.4).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn resolve_inverts_describe() {
        let rs = RuleSpace::new(&data()).unwrap();
        for r in rs.all() {
            assert_eq!(rs.resolve(&rs.describe(&r)), Some(r));
        }
        let complement = RuleDescription::Subset { covariate: "g".into(), left_levels: vec!["b".into()] };
        assert_eq!(rs.resolve(&complement), Some(Rule { covariate: 1, index: 2 }));
        let unknown = RuleDescription::Threshold { covariate: "x".into(), threshold: 0.45 };
        assert_eq!(rs.resolve(&unknown), None);
    }

    #[test]
    fn subsets_are_proper_and_distinct() {
        let rs = RuleSpace::new(&data()).unwrap();
        let mut parts = std::collections::HashSet::new();
        for index in 0..3 {
            let r = Rule { covariate: 1, index };
            let left: Vec<bool> = (0..5).map(|j| rs.goes_left(&r, j)).collect();
            assert!(left.iter().any(|&b| b) && left.iter().any(|&b| !b));
            assert!(left[0]);
            parts.insert(left);
        }
        assert_eq!(parts.len(), 3);
        assert_eq!(
            rs.describe(&Rule { covariate: 1, index: 2 }),
            RuleDescription::Subset { covariate: "g".into(), left_levels: vec!["a".into(), "c".into()] }
        );
    }

    #[test]
    fn sampling_frequencies() {
        let rs = RuleSpace::new(&data()).unwrap();
        let mut rng = RngStream::new(4, 0);
        let n = 60_000;
        let mut counts = std::collections::HashMap::new();
        for _ in 0..n {
            *counts.entry(rs.sample(&mut rng)).or_insert(0u32) += 1;
        }
        assert_eq!(counts.len(), 6);
        let p = 1.0 / 6.0;
        let sd = (n as f64 * p * (1.0 - p)).sqrt();
        for c in counts.values() {
            assert!((*c as f64 - n as f64 * p).abs() < 4.0 * sd);
        }
    }
}
