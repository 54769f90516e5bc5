use serde::{Deserialize, Serialize};

use super::{Rule, RuleSpace};

/// Root-to-node path; `false` is the left child.
pub type NodePath = Vec<bool>;

/// Binary tree whose internal nodes carry splitting rules. Observations
/// satisfying a rule go to the left child.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tree {
    #[default]
    Leaf,
    Split {
        rule: Rule,
        left: Box<Tree>,
        right: Box<Tree>,
    },
}

impl Tree {
    pub fn split(rule: Rule, left: Tree, right: Tree) -> Self {
        Tree::Split {
            rule,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn stump(rule: Rule) -> Self {
        Self::split(rule, Tree::Leaf, Tree::Leaf)
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Tree::Leaf)
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            Tree::Leaf => 1,
            Tree::Split { left, right, .. } => left.n_leaves() + right.n_leaves(),
        }
    }

    pub fn n_internal(&self) -> usize {
        self.n_leaves() - 1
    }

    pub fn rule(&self) -> Option<Rule> {
        match self {
            Tree::Leaf => None,
            Tree::Split { rule, .. } => Some(*rule),
        }
    }

    fn walk(&self, path: &mut NodePath, visit: &mut impl FnMut(&Tree, &NodePath)) {
        visit(self, path);
        if let Tree::Split { left, right, .. } = self {
            path.push(false);
            left.walk(path, visit);
            path.pop();
            path.push(true);
            right.walk(path, visit);
            path.pop();
        }
    }

    fn collect_paths(&self, keep: impl Fn(&Tree) -> bool) -> Vec<NodePath> {
        let mut out = Vec::new();
        self.walk(&mut Vec::new(), &mut |t, p| {
            if keep(t) {
                out.push(p.clone());
            }
        });
        out
    }

    /// Leaf paths, left to right. This is the leaf numbering used everywhere.
    pub fn leaf_paths(&self) -> Vec<NodePath> {
        self.collect_paths(Tree::is_leaf)
    }

    /// Internal node paths in preorder.
    pub fn internal_paths(&self) -> Vec<NodePath> {
        self.collect_paths(|t| !t.is_leaf())
    }

    /// Internal nodes whose children are both leaves.
    pub fn cherry_paths(&self) -> Vec<NodePath> {
        self.collect_paths(|t| match t {
            Tree::Split { left, right, .. } => left.is_leaf() && right.is_leaf(),
            Tree::Leaf => false,
        })
    }

    pub fn get(&self, path: &[bool]) -> Option<&Tree> {
        let mut t = self;
        for &go_right in path {
            match t {
                Tree::Leaf => return None,
                Tree::Split { left, right, .. } => t = if go_right { right } else { left },
            }
        }
        Some(t)
    }

    pub fn get_mut(&mut self, path: &[bool]) -> Option<&mut Tree> {
        let mut t = self;
        for &go_right in path {
            match t {
                Tree::Leaf => return None,
                Tree::Split { left, right, .. } => t = if go_right { right } else { left },
            }
        }
        Some(t)
    }

    /// Puts `subtree` at `path` and returns what was there.
    pub fn replace(&mut self, path: &[bool], subtree: Tree) -> Tree {
        let node = self.get_mut(path).expect("path does not exist");
        std::mem::replace(node, subtree)
    }

    pub fn set_rule(&mut self, path: &[bool], new_rule: Rule) -> Rule {
        match self.get_mut(path) {
            Some(Tree::Split { rule, .. }) => std::mem::replace(rule, new_rule),
            _ => panic!("no internal node at {path:?}"),
        }
    }

    /// Rules in preorder.
    pub fn rules(&self) -> Vec<Rule> {
        let mut out = Vec::new();
        self.walk(&mut Vec::new(), &mut |t, _| out.extend(t.rule()));
        out
    }

    pub fn uses_covariate(&self, covariate: usize) -> bool {
        self.rules().iter().any(|r| r.covariate == covariate)
    }

    /// Observation indices reaching each leaf, in leaf order.
    pub fn partition(&self, rules: &RuleSpace, members: Vec<usize>) -> Vec<Vec<usize>> {
        let mut out = Vec::with_capacity(self.n_leaves());
        self.route(rules, members, &mut out);
        out
    }

    fn route(&self, rules: &RuleSpace, members: Vec<usize>, out: &mut Vec<Vec<usize>>) {
        match self {
            Tree::Leaf => out.push(members),
            Tree::Split { rule, left, right } => {
                let (l, r): (Vec<usize>, Vec<usize>) = members.into_iter().partition(|&j| rules.goes_left(rule, j));
                left.route(rules, l, out);
                right.route(rules, r, out);
            }
        }
    }
}

/// True if `a` is `b` or one of its ancestors.
pub fn is_prefix(a: &[bool], b: &[bool]) -> bool {
    a.len() <= b.len() && a == &b[..a.len()]
}
