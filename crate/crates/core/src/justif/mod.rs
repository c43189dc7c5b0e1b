//! Graph-like and tree-like justifications and their values.

mod analysis;
pub(crate) mod scc;

pub use analysis::{value_facts, LabelledGraph};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::braneval::BranchEvaluation;
use crate::error::{Error, Result};
use crate::frame::{Frame, Rule, RuleId};
use crate::logic::{truth_glb, Fact, Interpretation, SignMap, TruthValue};

/// A graph-like justification, stored as the rule chosen at each internal
/// node. Node identity is the fact, so labels are injective by construction.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JustificationGraph {
    choice: BTreeMap<Fact, Rule>,
}

impl JustificationGraph {
    pub fn new() -> JustificationGraph {
        JustificationGraph::default()
    }

    pub fn from_rules<I: IntoIterator<Item = Rule>>(rules: I) -> JustificationGraph {
        JustificationGraph { choice: rules.into_iter().map(|r| (r.head.clone(), r)).collect() }
    }

    /// Chooses `rule` at its head, replacing any earlier choice.
    pub fn insert(&mut self, rule: Rule) {
        self.choice.insert(rule.head.clone(), rule);
    }

    pub fn remove(&mut self, x: &Fact) -> Option<Rule> {
        self.choice.remove(x)
    }

    pub fn rule_at(&self, x: &Fact) -> Option<&Rule> {
        self.choice.get(x)
    }

    pub fn choices(&self) -> impl Iterator<Item = (&Fact, &Rule)> {
        self.choice.iter()
    }

    pub fn rule_ids(&self) -> BTreeMap<Fact, RuleId> {
        self.choice.iter().map(|(x, r)| (x.clone(), r.id)).collect()
    }

    pub fn nodes(&self) -> BTreeSet<Fact> {
        self.choice.iter().flat_map(|(x, r)| std::iter::once(x).chain(r.body.iter())).cloned().collect()
    }

    pub fn contains(&self, x: &Fact) -> bool {
        self.choice.contains_key(x) || self.choice.values().any(|r| r.body.contains(x))
    }

    pub fn leaves(&self) -> BTreeSet<Fact> {
        self.nodes().into_iter().filter(|x| !self.choice.contains_key(x)).collect()
    }

    fn defined_leaf(&self, fr: &Frame) -> Option<Fact> {
        self.leaves().into_iter().find(|x| fr.is_defined(x))
    }

    /// No leaf carries a defined fact.
    pub fn is_locally_complete(&self, fr: &Frame) -> bool {
        self.defined_leaf(fr).is_none()
    }

    pub fn reachable_from(&self, x: &Fact) -> BTreeSet<Fact> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![x.clone()];
        while let Some(y) = stack.pop() {
            if !seen.insert(y.clone()) {
                continue;
            }
            if let Some(r) = self.choice.get(&y) {
                stack.extend(r.body.iter().filter(|z| !seen.contains(*z)).cloned());
            }
        }
        seen
    }

    /// `x` labels a node from which every node is reachable.
    pub fn has_root(&self, x: &Fact) -> bool {
        self.contains(x) && self.reachable_from(x).len() == self.nodes().len()
    }

    /// The part of the justification reachable from `x`.
    pub fn restrict_to(&self, x: &Fact) -> JustificationGraph {
        let keep = self.reachable_from(x);
        JustificationGraph {
            choice: self.choice.iter().filter(|(y, _)| keep.contains(*y)).map(|(y, r)| (y.clone(), r.clone())).collect(),
        }
    }

    /// Node list in fact order with successor indices; returns the index of `x`.
    pub fn to_labelled(&self, x: &Fact) -> Option<(LabelledGraph, usize)> {
        let labels: Vec<Fact> = self.nodes().into_iter().collect();
        let index: BTreeMap<&Fact, usize> = labels.iter().enumerate().map(|(i, f)| (f, i)).collect();
        let root = *index.get(x)?;
        let succ = labels
            .iter()
            .map(|y| self.choice.get(y).map_or(Vec::new(), |r| r.body.iter().map(|z| index[z]).collect()))
            .collect();
        Some((LabelledGraph { labels: labels.clone(), succ }, root))
    }

    /// DOT export: nodes in fact order, the root drawn with a double border.
    pub fn to_dot(&self, root: &Fact) -> String {
        let labels: Vec<Fact> = self.nodes().into_iter().collect();
        let index: BTreeMap<&Fact, usize> = labels.iter().enumerate().map(|(i, f)| (f, i)).collect();
        let mut out = String::from("digraph justification {\n");
        for (i, x) in labels.iter().enumerate() {
            let extra = if x == root { ", peripheries=2" } else { "" };
            let _ = writeln!(out, "  n{i} [label=\"{x}\"{extra}];");
        }
        for (x, r) in &self.choice {
            for y in &r.body {
                let _ = writeln!(out, "  n{} -> n{};", index[x], index[y]);
            }
        }
        out.push_str("}\n");
        out
    }
}

/// `{B(b) : b ∈ B_J(x)}`, computed without enumerating branches.
pub fn branch_value_facts(
    j: &JustificationGraph,
    fr: &Frame,
    x: &Fact,
    eval: &BranchEvaluation,
    sgn: &SignMap,
) -> Result<BTreeSet<Fact>> {
    let (g, root) = j.to_labelled(x).ok_or_else(|| Error::FactAbsent(x.clone()))?;
    if let Some(leaf) = j.defined_leaf(fr) {
        return Err(Error::NotLocallyComplete(leaf));
    }
    value_facts(&g, root, eval, sgn)
}

/// `glb { I(y) : y ∈ facts }`.
pub fn glb_under<'a, I: IntoIterator<Item = &'a Fact>>(facts: I, interp: &Interpretation) -> Result<TruthValue> {
    let vals: Vec<TruthValue> = facts.into_iter().map(|y| interp.value(y)).collect::<Result<_>>()?;
    Ok(truth_glb(vals))
}

/// `val(J, x, I)`.
pub fn jval(
    j: &JustificationGraph,
    fr: &Frame,
    x: &Fact,
    eval: &BranchEvaluation,
    sgn: &SignMap,
    interp: &Interpretation,
) -> Result<TruthValue> {
    glb_under(&branch_value_facts(j, fr, x, eval, sgn)?, interp)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeNode {
    pub label: Fact,
    pub rule: Option<RuleId>,
    pub children: Vec<usize>,
}

/// A finite tree-like justification; node 0 is the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JustificationTree {
    pub nodes: Vec<TreeNode>,
    /// First leaf whose label still has a rule in the source graph, if any.
    pub truncated_at: Option<Fact>,
}

impl JustificationTree {
    pub fn is_complete(&self) -> bool {
        self.truncated_at.is_none()
    }

    pub fn to_labelled(&self) -> LabelledGraph {
        LabelledGraph {
            labels: self.nodes.iter().map(|n| n.label.clone()).collect(),
            succ: self.nodes.iter().map(|n| n.children.clone()).collect(),
        }
    }

    /// Values of the tree's branches; only for complete trees.
    pub fn branch_value_facts(&self, eval: &BranchEvaluation, sgn: &SignMap) -> Result<BTreeSet<Fact>> {
        if let Some(x) = &self.truncated_at {
            return Err(Error::NotLocallyComplete(x.clone()));
        }
        value_facts(&self.to_labelled(), 0, eval, sgn)
    }

    pub fn jval(&self, eval: &BranchEvaluation, sgn: &SignMap, interp: &Interpretation) -> Result<TruthValue> {
        glb_under(&self.branch_value_facts(eval, sgn)?, interp)
    }

    pub fn depth(&self) -> usize {
        fn go(t: &JustificationTree, v: usize) -> usize {
            t.nodes[v].children.iter().map(|&c| 1 + go(t, c)).max().unwrap_or(0)
        }
        go(self, 0)
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph justification_tree {\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let extra = if i == 0 { ", peripheries=2" } else { "" };
            let _ = writeln!(out, "  n{i} [label=\"{}\"{extra}];", n.label);
        }
        for (i, n) in self.nodes.iter().enumerate() {
            for c in &n.children {
                let _ = writeln!(out, "  n{i} -> n{c};");
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Unfolds `j` from `x` down to `depth` edges.
pub fn unroll(j: &JustificationGraph, x: &Fact, depth: usize) -> JustificationTree {
    let mut tree = JustificationTree { nodes: Vec::new(), truncated_at: None };
    fn go(j: &JustificationGraph, x: &Fact, depth: usize, t: &mut JustificationTree) -> usize {
        let id = t.nodes.len();
        let rule = j.rule_at(x);
        t.nodes.push(TreeNode { label: x.clone(), rule: rule.map(|r| r.id), children: Vec::new() });
        match rule {
            Some(r) if depth > 0 => {
                let children: Vec<usize> = r.body.iter().map(|y| go(j, y, depth - 1, t)).collect();
                t.nodes[id].children = children;
            }
            Some(_) => {
                t.nodes[id].rule = None;
                if t.truncated_at.is_none() {
                    t.truncated_at = Some(x.clone());
                }
            }
            None => {}
        }
        id
    }
    go(j, x, depth, &mut tree);
    tree
}
