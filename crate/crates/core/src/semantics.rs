//! Supported values, consistency reports, models and explanations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::OnceLock;

use crate::braneval::BranchEvaluation;
use crate::error::{Error, Result};
use crate::frame::{validate_frame, Frame};
use crate::game::support::for_each_rooted_justification;
use crate::game::{SupportTable, DEFAULT_SUPPORT_BUDGET};
use crate::justif::{glb_under, jval, value_facts, JustificationGraph, LabelledGraph};
use crate::logic::{all_interpretations, Fact, Interpretation, Name, SignMap, TruthValue};

/// Default cap on the number of interpretations enumerated.
pub const DEFAULT_INTERPRETATION_BUDGET: u128 = 1_000_000;

/// Default cap on candidate tree shapes examined by the tree-value search.
pub const DEFAULT_TREE_BUDGET: u64 = 200_000;

/// A frame with a branch evaluation and a sign map.
#[derive(Debug)]
pub struct JustificationSystem {
    frame: Frame,
    evaluation: BranchEvaluation,
    sign: SignMap,
    support_budget: u64,
    table: OnceLock<SupportTable>,
}

impl Clone for JustificationSystem {
    fn clone(&self) -> JustificationSystem {
        let table = OnceLock::new();
        if let Some(t) = self.table.get() {
            let _ = table.set(t.clone());
        }
        JustificationSystem {
            frame: self.frame.clone(),
            evaluation: self.evaluation.clone(),
            sign: self.sign.clone(),
            support_budget: self.support_budget,
            table,
        }
    }
}

/// Which interpretations a consistency check covers.
#[derive(Clone, Debug)]
pub enum Interpretations {
    /// Every interpretation over the system's names.
    All,
    List(Vec<Interpretation>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConsistencyEntry {
    pub fact: Fact,
    pub interpretation: Interpretation,
    /// `SV_g(x, I)`.
    pub value: TruthValue,
    /// `SV_g(~x, I)`.
    pub negated: TruthValue,
}

impl ConsistencyEntry {
    pub fn consistent(&self) -> bool {
        self.negated == self.value.complement()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConsistencyReport {
    pub evaluation: String,
    pub entries: Vec<ConsistencyEntry>,
}

impl ConsistencyReport {
    pub fn violations(&self) -> impl Iterator<Item = &ConsistencyEntry> {
        self.entries.iter().filter(|e| !e.consistent())
    }

    pub fn passes(&self) -> bool {
        self.violations().next().is_none()
    }
}

/// Result of [`JustificationSystem::supported_value_tree`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TreeValue {
    /// Equal to the graph-like value; the evaluation is consistent and the
    /// consistency property holds at this interpretation.
    Certified { value: TruthValue },
    /// `lower_bound` is the graph-like value; `witnessed` is the best value
    /// found among bounded regular tree shapes (never below the bound).
    Unknown { lower_bound: TruthValue, witnessed: TruthValue },
}

impl TreeValue {
    pub fn certified(&self) -> Option<TruthValue> {
        match self {
            TreeValue::Certified { value } => Some(*value),
            TreeValue::Unknown { .. } => None,
        }
    }
}

impl fmt::Display for TreeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeValue::Certified { value } => write!(f, "{value} (certified: coincides with the graph-like value)"),
            TreeValue::Unknown { lower_bound, witnessed } => {
                write!(f, "unknown (lower bound {lower_bound}, witnessed {witnessed})")
            }
        }
    }
}

/// Models sharing one assignment to the open names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelGroup {
    pub open: Interpretation,
    pub models: Vec<Interpretation>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Explanation {
    pub fact: Fact,
    pub justification: JustificationGraph,
    pub value: TruthValue,
}

fn check_count(what: &'static str, names: usize, budget: u128) -> Result<()> {
    let needed = 3u128.checked_pow(names as u32).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(Error::Budget { what, needed, budget });
    }
    Ok(())
}

impl JustificationSystem {
    /// Fails with the frame's diagnostics if it is not a valid frame.
    pub fn new(frame: Frame, evaluation: BranchEvaluation, sign: SignMap) -> Result<JustificationSystem> {
        let diagnostics = validate_frame(&frame);
        if !diagnostics.is_empty() {
            return Err(Error::Validation(diagnostics));
        }
        Ok(JustificationSystem { frame, evaluation, sign, support_budget: DEFAULT_SUPPORT_BUDGET, table: OnceLock::new() })
    }

    pub fn with_support_budget(mut self, budget: u64) -> JustificationSystem {
        self.support_budget = budget;
        self.table = OnceLock::new();
        self
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn evaluation(&self) -> &BranchEvaluation {
        &self.evaluation
    }

    pub fn sign(&self) -> &SignMap {
        &self.sign
    }

    /// The lazily built support table.
    pub fn table(&self) -> Result<&SupportTable> {
        if let Some(t) = self.table.get() {
            return Ok(t);
        }
        let t = SupportTable::build(&self.frame, &self.evaluation, &self.sign, self.support_budget)?;
        Ok(self.table.get_or_init(|| t))
    }

    /// Names an interpretation must cover.
    pub fn names(&self) -> BTreeSet<Name> {
        self.frame.names()
    }

    pub fn open_names(&self) -> BTreeSet<Name> {
        self.frame.open_names()
    }

    /// `SV_g(x, I)`.
    pub fn supported_value_graph(&self, x: &Fact, interp: &Interpretation) -> Result<TruthValue> {
        if self.frame.is_defined(x) {
            self.table()?.maximin(x, interp)
        } else {
            interp.value(x)
        }
    }

    /// Whether `SV_g(~x, I) = ~SV_g(x, I)` for every defined `x`.
    fn consistent_at(&self, interp: &Interpretation) -> Result<Option<ConsistencyEntry>> {
        for x in self.frame.defined() {
            let e = self.entry(x, interp)?;
            if !e.consistent() {
                return Ok(Some(e));
            }
        }
        Ok(None)
    }

    fn entry(&self, x: &Fact, interp: &Interpretation) -> Result<ConsistencyEntry> {
        Ok(ConsistencyEntry {
            fact: x.clone(),
            interpretation: interp.clone(),
            value: self.supported_value_graph(x, interp)?,
            negated: self.supported_value_graph(&x.complement(), interp)?,
        })
    }

    /// The tree-like supported value when it is certified to coincide with
    /// the graph-like one; otherwise bounds on it.
    pub fn supported_value_tree(&self, x: &Fact, interp: &Interpretation) -> Result<TreeValue> {
        let graph = self.supported_value_graph(x, interp)?;
        if !self.frame.is_defined(x) {
            return Ok(TreeValue::Certified { value: graph });
        }
        if self.evaluation.flags().consistent && self.consistent_at(interp)?.is_none() {
            return Ok(TreeValue::Certified { value: graph });
        }
        let witnessed = self.tree_search(x, interp, 2, DEFAULT_TREE_BUDGET)?.max(graph);
        Ok(TreeValue::Unknown { lower_bound: graph, witnessed })
    }

    /// Best value over regular tree justifications presented as graphs with
    /// at most `copies` nodes per fact. Stops early at `t` or when the
    /// budget runs out.
    fn tree_search(&self, x: &Fact, interp: &Interpretation, copies: usize, budget: u64) -> Result<TruthValue> {
        type Node = (Fact, usize);
        struct Search<'a> {
            sys: &'a JustificationSystem,
            interp: &'a Interpretation,
            copies: usize,
            budget: u64,
            best: TruthValue,
        }
        impl Search<'_> {
            fn go(&mut self, chosen: &mut BTreeMap<Node, Vec<Node>>, pending: &BTreeSet<Node>, root: &Node) -> Result<()> {
                if self.budget == 0 || self.best == TruthValue::True {
                    return Ok(());
                }
                let Some(node) = pending.iter().next().cloned() else {
                    self.budget -= 1;
                    let v = self.value(chosen, root)?;
                    self.best = self.best.max(v);
                    return Ok(());
                };
                let fr = &self.sys.frame;
                for r in fr.rules_for(&node.0) {
                    let body: Vec<&Fact> = r.body.iter().collect();
                    let defined: Vec<usize> = (0..body.len()).filter(|&i| fr.is_defined(body[i])).collect();
                    let combos = self.copies.pow(defined.len() as u32);
                    for mut code in 0..combos {
                        let mut children = Vec::with_capacity(body.len());
                        let mut next = pending.clone();
                        next.remove(&node);
                        for (i, y) in body.iter().enumerate() {
                            let copy = if defined.contains(&i) {
                                let c = code % self.copies;
                                code /= self.copies;
                                c
                            } else {
                                0
                            };
                            let child = ((*y).clone(), copy);
                            if fr.is_defined(y) && !chosen.contains_key(&child) && child != node {
                                next.insert(child.clone());
                            }
                            children.push(child);
                        }
                        chosen.insert(node.clone(), children);
                        self.go(chosen, &next, root)?;
                        chosen.remove(&node);
                        if self.budget == 0 || self.best == TruthValue::True {
                            return Ok(());
                        }
                    }
                }
                Ok(())
            }

            fn value(&self, chosen: &BTreeMap<Node, Vec<Node>>, root: &Node) -> Result<TruthValue> {
                let mut nodes: BTreeSet<&Node> = chosen.keys().collect();
                nodes.extend(chosen.values().flatten());
                let order: Vec<&Node> = nodes.into_iter().collect();
                let index: BTreeMap<&Node, usize> = order.iter().enumerate().map(|(i, n)| (*n, i)).collect();
                let g = LabelledGraph {
                    labels: order.iter().map(|n| n.0.clone()).collect(),
                    succ: order.iter().map(|n| chosen.get(*n).map_or(Vec::new(), |cs| cs.iter().map(|c| index[c]).collect())).collect(),
                };
                let vals = value_facts(&g, index[root], &self.sys.evaluation, &self.sys.sign)?;
                glb_under(&vals, self.interp)
            }
        }
        let root = (x.clone(), 0);
        let mut s = Search { sys: self, interp, copies, budget, best: TruthValue::False };
        s.go(&mut BTreeMap::new(), &BTreeSet::from([root.clone()]), &root)?;
        Ok(s.best)
    }

    /// Records `SV_g(x, I)` and `SV_g(~x, I)` for every defined `x` and every
    /// requested interpretation.
    pub fn check_consistency(&self, which: &Interpretations, budget: u128) -> Result<ConsistencyReport> {
        let list: Box<dyn Iterator<Item = Interpretation>> = match which {
            Interpretations::All => {
                let names = self.names();
                check_count("interpretations", names.len(), budget)?;
                Box::new(all_interpretations(&names).collect::<Vec<_>>().into_iter())
            }
            Interpretations::List(v) => Box::new(v.clone().into_iter()),
        };
        let mut report = ConsistencyReport { evaluation: self.evaluation.name().to_string(), entries: Vec::new() };
        for interp in list {
            for x in self.frame.defined() {
                report.entries.push(self.entry(x, &interp)?);
            }
        }
        Ok(report)
    }

    /// `SV_g(·, I)` on every name; fails at the first inconsistent fact.
    pub fn support_operator(&self, interp: &Interpretation) -> Result<Interpretation> {
        let mut out = Interpretation::new();
        for n in self.names() {
            let x = Fact::literal(n.clone(), crate::logic::Polarity::Pos);
            let v = self.supported_value_graph(&x, interp)?;
            if self.frame.is_defined(&x) {
                let negated = self.supported_value_graph(&x.complement(), interp)?;
                if negated != v.complement() {
                    return Err(Error::ConsistencyViolation { fact: x, value: v, negated });
                }
            }
            out.set(n, v);
        }
        Ok(out)
    }

    /// Interpretations `I` with `SV_g(x, I) = I(x)` for every defined `x`,
    /// grouped by their restriction to the open names.
    pub fn enumerate_models(&self, budget: u128) -> Result<Vec<ModelGroup>> {
        let names = self.names();
        check_count("interpretations", names.len(), budget)?;
        let open = self.open_names();
        let defined: BTreeSet<Name> = names.difference(&open).cloned().collect();
        let mut groups = Vec::new();
        for oa in all_interpretations(&open) {
            let models = self.models_extending(&oa, &defined)?;
            groups.push(ModelGroup { open: oa, models });
        }
        Ok(groups)
    }

    /// Models whose open part is `oa`.
    pub fn models_for_open(&self, oa: &Interpretation) -> Result<Vec<Interpretation>> {
        let open = self.open_names();
        let defined: BTreeSet<Name> = self.names().difference(&open).cloned().collect();
        self.models_extending(&oa.restrict(&open), &defined)
    }

    fn models_extending(&self, oa: &Interpretation, defined: &BTreeSet<Name>) -> Result<Vec<Interpretation>> {
        let mut models = Vec::new();
        'candidates: for d in all_interpretations(defined) {
            let mut i = oa.clone();
            i.extend(&d);
            for x in self.frame.defined() {
                if self.supported_value_graph(x, &i)? != i.value(x)? {
                    continue 'candidates;
                }
            }
            models.push(i);
        }
        Ok(models)
    }

    pub fn is_model(&self, interp: &Interpretation) -> Result<bool> {
        for x in self.frame.defined() {
            if self.supported_value_graph(x, interp)? != interp.value(x)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The first rooted justification of `x` (in rule-choice order) whose
    /// value is `SV_g(x, I)`.
    pub fn explain(&self, x: &Fact, interp: &Interpretation) -> Result<Explanation> {
        let target = self.supported_value_graph(x, interp)?;
        let mut found = None;
        for_each_rooted_justification(&self.frame, x, self.support_budget, &mut |j| {
            if jval(j, &self.frame, x, &self.evaluation, &self.sign, interp)? == target {
                found = Some(j.clone());
                return Ok(false);
            }
            Ok(true)
        })?;
        let justification = found.ok_or_else(|| Error::UndefinedFact(x.clone()))?;
        Ok(Explanation { fact: x.clone(), justification, value: target })
    }
}
