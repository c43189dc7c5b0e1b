//! Interpretation-free summaries of what each player can force.
//!
//! For a defined `x`, `pos` holds the ⊆-minimal branch-value sets of the
//! rooted justifications `J_σ(x)`; `neg` holds those of the inverted graphs
//! `J_τ(x)` rooted at `~x`. Values under a given interpretation then reduce
//! to lattice operations over these sets.

use std::collections::{BTreeMap, BTreeSet};

use super::GameGraph;
use crate::braneval::BranchEvaluation;
use crate::error::{Error, Result};
use crate::frame::{selection_images, Frame};
use crate::justif::{glb_under, value_facts, JustificationGraph, LabelledGraph};
use crate::logic::{Fact, Interpretation, SignMap, TruthValue};

/// Default cap on the number of justifications enumerated per table.
pub const DEFAULT_SUPPORT_BUDGET: u64 = 1_000_000;

/// Builds a labelled graph from a node → children map; nodes absent from
/// the map are leaves.
pub(crate) fn labelled(map: &BTreeMap<Fact, BTreeSet<Fact>>, root: &Fact) -> (LabelledGraph, usize) {
    let mut nodes: BTreeSet<&Fact> = map.keys().collect();
    nodes.extend(map.values().flatten());
    nodes.insert(root);
    let labels: Vec<Fact> = nodes.into_iter().cloned().collect();
    let index: BTreeMap<&Fact, usize> = labels.iter().enumerate().map(|(i, f)| (f, i)).collect();
    let succ = labels.iter().map(|y| map.get(y).map_or(Vec::new(), |b| b.iter().map(|z| index[z]).collect())).collect();
    let root = index[root];
    (LabelledGraph { labels, succ }, root)
}

fn insert_minimal(family: &mut Vec<BTreeSet<Fact>>, set: BTreeSet<Fact>) {
    if family.iter().any(|s| s.is_subset(&set)) {
        return;
    }
    family.retain(|s| !set.is_subset(s));
    family.push(set);
}

struct Counter {
    used: u64,
    budget: u64,
}

impl Counter {
    fn tick(&mut self) -> Result<()> {
        self.used += 1;
        if self.used > self.budget {
            return Err(Error::Budget { what: "justification enumeration", needed: self.used as u128, budget: self.budget as u128 });
        }
        Ok(())
    }
}

/// Visits every rooted `J_σ(x)` once, choosing rules for reached facts in
/// fact order and rules in id order. The visitor returns `false` to stop.
pub(crate) fn for_each_rooted_justification(
    fr: &Frame,
    x: &Fact,
    budget: u64,
    visit: &mut dyn FnMut(&JustificationGraph) -> Result<bool>,
) -> Result<()> {
    rooted(fr, x, &mut Counter { used: 0, budget }, visit)
}

fn rooted(
    fr: &Frame,
    x: &Fact,
    counter: &mut Counter,
    visit: &mut dyn FnMut(&JustificationGraph) -> Result<bool>,
) -> Result<()> {
    fn go(
        fr: &Frame,
        j: &mut JustificationGraph,
        pending: &BTreeSet<Fact>,
        counter: &mut Counter,
        visit: &mut dyn FnMut(&JustificationGraph) -> Result<bool>,
    ) -> Result<bool> {
        let Some(y) = pending.iter().next().cloned() else {
            counter.tick()?;
            return visit(j);
        };
        for r in fr.rules_for(&y) {
            let mut next = pending.clone();
            next.remove(&y);
            next.extend(r.body.iter().filter(|z| fr.is_defined(z) && j.rule_at(z).is_none() && **z != y).cloned());
            j.insert(r.clone());
            let keep_going = go(fr, j, &next, counter, visit)?;
            j.remove(&y);
            if !keep_going {
                return Ok(false);
            }
        }
        Ok(true)
    }
    if !fr.is_defined(x) {
        return Err(Error::UndefinedFact(x.clone()));
    }
    go(fr, &mut JustificationGraph::new(), &BTreeSet::from([x.clone()]), counter, visit)?;
    Ok(())
}

/// Visits every inverted graph `~y -> ~im(s_y)` reachable from `~x`, one
/// selection image per reached defined `y`.
fn for_each_inverted(
    fr: &Frame,
    images: &BTreeMap<Fact, Vec<BTreeSet<Fact>>>,
    x: &Fact,
    counter: &mut Counter,
    visit: &mut dyn FnMut(&BTreeMap<Fact, BTreeSet<Fact>>) -> Result<()>,
) -> Result<()> {
    fn go(
        fr: &Frame,
        images: &BTreeMap<Fact, Vec<BTreeSet<Fact>>>,
        map: &mut BTreeMap<Fact, BTreeSet<Fact>>,
        pending: &BTreeSet<Fact>,
        counter: &mut Counter,
        visit: &mut dyn FnMut(&BTreeMap<Fact, BTreeSet<Fact>>) -> Result<()>,
    ) -> Result<()> {
        let Some(y) = pending.iter().next().cloned() else {
            counter.tick()?;
            return visit(map);
        };
        let ny = y.complement();
        for img in &images[&y] {
            let mut next = pending.clone();
            next.remove(&y);
            next.extend(img.iter().filter(|z| fr.is_defined(z) && !map.contains_key(&z.complement()) && **z != y).cloned());
            map.insert(ny.clone(), img.iter().map(Fact::complement).collect());
            go(fr, images, map, &next, counter, visit)?;
            map.remove(&ny);
        }
        Ok(())
    }
    go(fr, images, &mut BTreeMap::new(), &BTreeSet::from([x.clone()]), counter, visit)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SupportEntry {
    /// Minimal branch-value sets of T's rooted justifications of `x`.
    pub pos: Vec<BTreeSet<Fact>>,
    /// Minimal branch-value sets of the inverted graphs rooted at `~x`.
    pub neg: Vec<BTreeSet<Fact>>,
}

/// Per-defined-fact summaries for one frame, evaluation and sign map.
#[derive(Clone, Debug)]
pub struct SupportTable {
    evaluation: BranchEvaluation,
    entries: BTreeMap<Fact, SupportEntry>,
}

fn pos_sets(fr: &Frame, x: &Fact, eval: &BranchEvaluation, sgn: &SignMap, counter: &mut Counter) -> Result<Vec<BTreeSet<Fact>>> {
    let mut family = Vec::new();
    rooted(fr, x, counter, &mut |j| {
        let map: BTreeMap<Fact, BTreeSet<Fact>> = j.choices().map(|(y, r)| (y.clone(), r.body.clone())).collect();
        let (g, root) = labelled(&map, x);
        insert_minimal(&mut family, value_facts(&g, root, eval, sgn)?);
        Ok(true)
    })?;
    Ok(family)
}

fn neg_sets(
    fr: &Frame,
    images: &BTreeMap<Fact, Vec<BTreeSet<Fact>>>,
    x: &Fact,
    eval: &BranchEvaluation,
    sgn: &SignMap,
    counter: &mut Counter,
) -> Result<Vec<BTreeSet<Fact>>> {
    let mut family = Vec::new();
    let root = x.complement();
    for_each_inverted(fr, images, x, counter, &mut |map| {
        let (g, r) = labelled(map, &root);
        insert_minimal(&mut family, value_facts(&g, r, eval, sgn)?);
        Ok(())
    })?;
    Ok(family)
}

fn all_images(fr: &Frame) -> Result<BTreeMap<Fact, Vec<BTreeSet<Fact>>>> {
    fr.defined().iter().map(|y| Ok((y.clone(), selection_images(fr, y)?.into_iter().collect()))).collect()
}

impl SupportTable {
    /// Enumerates both families for every defined fact; `budget` caps the
    /// total number of justifications visited.
    pub fn build(fr: &Frame, eval: &BranchEvaluation, sgn: &SignMap, budget: u64) -> Result<SupportTable> {
        let images = all_images(fr)?;
        let mut counter = Counter { used: 0, budget };
        let mut entries = BTreeMap::new();
        for x in fr.defined() {
            let pos = pos_sets(fr, x, eval, sgn, &mut counter)?;
            let neg = neg_sets(fr, &images, x, eval, sgn, &mut counter)?;
            entries.insert(x.clone(), SupportEntry { pos, neg });
        }
        Ok(SupportTable { evaluation: eval.clone(), entries })
    }

    pub fn evaluation(&self) -> &BranchEvaluation {
        &self.evaluation
    }

    pub fn entry(&self, x: &Fact) -> Result<&SupportEntry> {
        self.entries.get(x).ok_or_else(|| Error::UndefinedFact(x.clone()))
    }

    pub fn defined(&self) -> impl Iterator<Item = &Fact> {
        self.entries.keys()
    }

    /// `max_σ jval(J_σ(x), x, I)`.
    pub fn maximin(&self, x: &Fact, interp: &Interpretation) -> Result<TruthValue> {
        let mut best = TruthValue::False;
        for s in &self.entry(x)?.pos {
            best = best.max(glb_under(s, interp)?);
        }
        Ok(best)
    }

    /// `min_τ ~jval(J_τ(x), ~x, I)`; needs a consistent evaluation.
    pub fn minimax(&self, x: &Fact, interp: &Interpretation) -> Result<TruthValue> {
        self.evaluation.require_consistent()?;
        let mut best = TruthValue::True;
        for s in &self.entry(x)?.neg {
            best = best.min(glb_under(s, interp)?.complement());
        }
        Ok(best)
    }
}

/// `max_σ jval(J_σ(x), x, I)`, computed for one fact.
pub fn maximin_graph(g: &GameGraph, x: &Fact, eval: &BranchEvaluation, sgn: &SignMap, interp: &Interpretation) -> Result<TruthValue> {
    let mut best = TruthValue::False;
    let mut counter = Counter { used: 0, budget: DEFAULT_SUPPORT_BUDGET };
    for s in pos_sets(g.frame(), x, eval, sgn, &mut counter)? {
        best = best.max(glb_under(&s, interp)?);
    }
    Ok(best)
}

/// `min_τ ~jval(J_τ(x), ~x, I)`, computed for one fact. `SV_g(~x, I)` is the
/// complement of the result.
pub fn minimax_graph(g: &GameGraph, x: &Fact, eval: &BranchEvaluation, sgn: &SignMap, interp: &Interpretation) -> Result<TruthValue> {
    eval.require_consistent()?;
    let fr = g.frame();
    if !fr.is_defined(x) {
        return Err(Error::UndefinedFact(x.clone()));
    }
    let images = all_images(fr)?;
    let mut counter = Counter { used: 0, budget: DEFAULT_SUPPORT_BUDGET };
    let mut best = TruthValue::True;
    for s in neg_sets(fr, &images, x, eval, sgn, &mut counter)? {
        best = best.min(glb_under(&s, interp)?.complement());
    }
    Ok(best)
}
