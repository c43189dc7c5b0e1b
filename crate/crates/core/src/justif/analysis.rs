//! Exact branch-value sets of labelled graphs.
//!
//! A labelled graph stands for the tree obtained by unfolding it from a root:
//! its branches are the label sequences of maximal walks. Nodes with
//! successors are defined, nodes without successors are open leaves. When the
//! labelling is injective the graph is a graph-like justification; repeated
//! labels describe regular tree-like justifications.

use std::collections::{BTreeMap, BTreeSet};

use super::scc::{reachable, tarjan};
use crate::braneval::{eval_branch, Branch, BranchEvaluation};
use crate::error::{Error, Result};
use crate::logic::{Fact, Sign, SignMap};

/// Walk budget for evaluating plugin evaluations by enumeration.
const PLUGIN_WALK_BUDGET: u128 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LabelledGraph {
    pub labels: Vec<Fact>,
    pub succ: Vec<Vec<usize>>,
}

impl LabelledGraph {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn is_label_injective(&self) -> bool {
        let set: BTreeSet<&Fact> = self.labels.iter().collect();
        set.len() == self.labels.len()
    }
}

struct Ctx<'a> {
    g: &'a LabelledGraph,
    reach: Vec<bool>,
    internal: Vec<bool>,
    sign: Vec<Option<Sign>>,
}

impl<'a> Ctx<'a> {
    fn new(g: &'a LabelledGraph, root: usize, sgn: &SignMap) -> Result<Ctx<'a>> {
        let n = g.len();
        let reach = reachable(&g.succ, root, &vec![true; n]);
        let internal: Vec<bool> = g.succ.iter().map(|s| !s.is_empty()).collect();
        let mut sign = vec![None; n];
        for v in 0..n {
            if internal[v] && reach[v] {
                sign[v] = Some(
                    sgn.sign(&g.labels[v])
                        .ok_or_else(|| Error::MalformedBranch(format!("logical fact `{}` has successors", g.labels[v])))?,
                );
            }
        }
        Ok(Ctx { g, reach, internal, sign })
    }

    fn mask(&self, pred: impl Fn(usize) -> bool) -> Vec<bool> {
        (0..self.g.len()).map(|v| self.reach[v] && self.internal[v] && pred(v)).collect()
    }

    fn insert_leaves(&self, out: &mut BTreeSet<Fact>) {
        for v in 0..self.g.len() {
            if self.reach[v] && !self.internal[v] {
                out.insert(self.g.labels[v].clone());
            }
        }
    }

    fn any_cycle(&self, mask: &[bool]) -> bool {
        let s = tarjan(&self.g.succ, mask);
        (0..self.g.len()).any(|v| s.on_cycle(v))
    }

    /// Cyclic components of the reachable defined part, as node lists.
    fn cyclic_components(&self, mask: &[bool]) -> Vec<Vec<usize>> {
        let s = tarjan(&self.g.succ, mask);
        let mut comps: Vec<Vec<usize>> = vec![Vec::new(); s.count()];
        for v in 0..self.g.len() {
            if s.on_cycle(v) {
                comps[s.comp[v]].push(v);
            }
        }
        comps.into_iter().filter(|c| !c.is_empty()).collect()
    }

    /// Edges inside the node set `comp`, grouped by label pairs.
    fn label_successors(&self, comp: &[usize]) -> BTreeMap<&'a Fact, BTreeSet<&'a Fact>> {
        let inside: BTreeSet<usize> = comp.iter().copied().collect();
        let mut out: BTreeMap<&Fact, BTreeSet<&Fact>> = BTreeMap::new();
        for &v in comp {
            for &w in &self.g.succ[v] {
                if inside.contains(&w) {
                    out.entry(&self.g.labels[v]).or_default().insert(&self.g.labels[w]);
                }
            }
        }
        out
    }

    fn is_functional(&self, comp: &[usize]) -> bool {
        self.label_successors(comp).values().all(|s| s.len() <= 1)
    }

    fn is_mixed(&self, comp: &[usize]) -> bool {
        let signs: BTreeSet<Sign> = comp.iter().filter_map(|&v| self.sign[v]).collect();
        signs.len() > 1
    }

    /// Whether some infinite walk inside the reachable `sign`-only subgraph has
    /// an eventually functional label sequence.
    fn functional_pure_walk(&self, sign: Sign, injective: bool) -> bool {
        let mask = self.mask(|v| self.sign[v] == Some(sign));
        if injective {
            return self.any_cycle(&mask);
        }
        self.cyclic_components(&mask).iter().any(|comp| self.is_functional(comp) || self.realizes_simple_label_cycle(comp))
    }

    /// Whether the walk-graph on `comp` contains a closed walk that follows a
    /// simple label cycle, checked cycle by cycle on the product with the
    /// cycle's positions.
    fn realizes_simple_label_cycle(&self, comp: &[usize]) -> bool {
        let lsucc = self.label_successors(comp);
        let labels: Vec<&Fact> = lsucc.keys().copied().collect();
        let index: BTreeMap<&Fact, usize> = labels.iter().enumerate().map(|(i, l)| (*l, i)).collect();
        let ladj: Vec<Vec<usize>> = labels
            .iter()
            .map(|l| lsucc[l].iter().filter_map(|m| index.get(m).copied()).collect())
            .collect();
        let mut found = false;
        for start in 0..labels.len() {
            let mut path = vec![start];
            simple_cycles_from(&ladj, start, &mut path, &mut |cycle| {
                let lc: Vec<&Fact> = cycle.iter().map(|&i| labels[i]).collect();
                if self.product_has_cycle(comp, &lc) {
                    found = true;
                }
                found
            });
            if found {
                return true;
            }
        }
        false
    }

    fn product_has_cycle(&self, comp: &[usize], cycle: &[&Fact]) -> bool {
        let k = cycle.len();
        let inside: BTreeSet<usize> = comp.iter().copied().collect();
        let mut ids: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for &v in comp {
            for (i, l) in cycle.iter().enumerate() {
                if &&self.g.labels[v] == l {
                    let id = ids.len();
                    ids.insert((v, i), id);
                }
            }
        }
        let mut succ = vec![Vec::new(); ids.len()];
        for (&(v, i), &id) in &ids {
            for &w in &self.g.succ[v] {
                if inside.contains(&w) {
                    if let Some(&to) = ids.get(&(w, (i + 1) % k)) {
                        succ[id].push(to);
                    }
                }
            }
        }
        let all = vec![true; succ.len()];
        let s = tarjan(&succ, &all);
        (0..succ.len()).any(|v| s.on_cycle(v))
    }
}

/// Calls `visit` with every simple cycle whose smallest vertex is `start`.
/// Stops early once `visit` returns true.
fn simple_cycles_from(adj: &[Vec<usize>], start: usize, path: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    let v = *path.last().unwrap();
    for &w in &adj[v] {
        if w == start {
            if visit(path) {
                return true;
            }
        } else if w > start && !path.contains(&w) {
            path.push(w);
            let stop = simple_cycles_from(adj, start, path, visit);
            path.pop();
            if stop {
                return true;
            }
        }
    }
    false
}

/// `{B(b) : b a branch of the unfolding of g from root}`.
pub fn value_facts(g: &LabelledGraph, root: usize, eval: &BranchEvaluation, sgn: &SignMap) -> Result<BTreeSet<Fact>> {
    let mut out = BTreeSet::new();
    if g.succ[root].is_empty() {
        return Ok(out);
    }
    let cx = Ctx::new(g, root, sgn)?;
    let defined = cx.mask(|_| true);
    match eval {
        BranchEvaluation::Sp => {
            out.extend(g.succ[root].iter().map(|&c| g.labels[c].clone()));
        }
        BranchEvaluation::Kk => {
            cx.insert_leaves(&mut out);
            if cx.any_cycle(&defined) {
                out.insert(Fact::UNKNOWN);
            }
        }
        BranchEvaluation::Wf => {
            cx.insert_leaves(&mut out);
            if cx.any_cycle(&cx.mask(|v| cx.sign[v] == Some(Sign::Plus))) {
                out.insert(Fact::FALSE);
            }
            if cx.any_cycle(&cx.mask(|v| cx.sign[v] == Some(Sign::Minus))) {
                out.insert(Fact::TRUE);
            }
            if cx.cyclic_components(&defined).iter().any(|c| cx.is_mixed(c)) {
                out.insert(Fact::UNKNOWN);
            }
        }
        BranchEvaluation::St => {
            let s0 = cx.sign[root];
            let mut region = vec![false; g.len()];
            region[root] = true;
            let mut stack = vec![root];
            while let Some(v) = stack.pop() {
                for &c in &g.succ[v] {
                    if !cx.internal[c] || cx.sign[c] != s0 {
                        out.insert(g.labels[c].clone());
                    } else if !region[c] {
                        region[c] = true;
                        stack.push(c);
                    }
                }
            }
            if cx.any_cycle(&region) {
                out.insert(if s0 == Some(Sign::Plus) { Fact::FALSE } else { Fact::TRUE });
            }
        }
        BranchEvaluation::Ex => {
            cx.insert_leaves(&mut out);
            let injective = g.is_label_injective();
            if cx.functional_pure_walk(Sign::Plus, injective) {
                out.insert(Fact::FALSE);
            }
            if cx.functional_pure_walk(Sign::Minus, injective) {
                out.insert(Fact::TRUE);
            }
            if cx.cyclic_components(&defined).iter().any(|c| cx.is_mixed(c) || !cx.is_functional(c)) {
                out.insert(Fact::UNKNOWN);
            }
        }
        BranchEvaluation::Plugin(_) => {
            eval.require_monotone_selective()?;
            let mut walks = 0u128;
            let mut path = vec![root];
            positional_walks(g, &mut path, &mut walks, &mut |b| {
                out.insert(eval_branch(eval, &b, sgn)?);
                Ok(())
            })?;
        }
    }
    Ok(out)
}

/// Every walk from `path[0]` that makes one choice per node: finite walks to
/// a leaf, and lassos closed at the first repeated node.
fn positional_walks(
    g: &LabelledGraph,
    path: &mut Vec<usize>,
    walks: &mut u128,
    emit: &mut dyn FnMut(Branch) -> Result<()>,
) -> Result<()> {
    let v = *path.last().unwrap();
    let labels = |nodes: &[usize]| nodes.iter().map(|&n| g.labels[n].clone()).collect::<Vec<_>>();
    for &c in &g.succ[v] {
        *walks += 1;
        if *walks > PLUGIN_WALK_BUDGET {
            return Err(Error::Budget { what: "plugin branch walks", needed: *walks, budget: PLUGIN_WALK_BUDGET });
        }
        if let Some(i) = path.iter().position(|&n| n == c) {
            emit(Branch::lasso(labels(&path[..i]), labels(&path[i..])))?;
        } else if g.succ[c].is_empty() {
            emit(Branch::finite(labels(path), g.labels[c].clone()))?;
        } else {
            path.push(c);
            positional_walks(g, path, walks, emit)?;
            path.pop();
        }
    }
    Ok(())
}
