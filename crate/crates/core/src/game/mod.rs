//! The justification game: T (the justifier) picks rules at fact states, F
//! (the challenger) picks body facts at rule states.

mod solve;
pub(crate) mod support;

pub use solve::{
    check_saddle, find_optimal_pair_bruteforce, find_optimal_pair_with_table, solve_by_splitting, OptimalPair, SaddleReport, SaddleViolation,
    SearchOutcome, SplittingStats,
};
pub use support::{maximin_graph, minimax_graph, SupportTable, DEFAULT_SUPPORT_BUDGET};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use crate::braneval::{eval_branch, Branch, BranchEvaluation};
use crate::error::{Error, Result};
use crate::frame::{Frame, Rule, RuleId};
use crate::justif::JustificationGraph;
use crate::logic::{Fact, Interpretation, SignMap, TruthValue};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Player {
    /// Owns fact states; prefers larger values.
    T,
    /// Owns rule states; prefers smaller values.
    F,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum State {
    Fact(Fact),
    Rule(RuleId),
}

/// States are numbered facts first (in fact order, covering the whole
/// universe), then rules (in id order).
#[derive(Clone, Debug)]
pub struct GameGraph {
    frame: Frame,
    facts: Vec<Fact>,
    fact_index: BTreeMap<Fact, usize>,
    succ: Vec<Vec<usize>>,
}

impl GameGraph {
    pub fn new(fr: &Frame) -> GameGraph {
        let facts: Vec<Fact> = fr.universe().into_iter().collect();
        let fact_index: BTreeMap<Fact, usize> = facts.iter().enumerate().map(|(i, f)| (f.clone(), i)).collect();
        let nf = facts.len();
        let mut succ = vec![Vec::new(); nf + fr.rules().len()];
        for r in fr.rules() {
            succ[fact_index[&r.head]].push(nf + r.id.0);
            succ[nf + r.id.0] = r.body.iter().map(|y| fact_index[y]).collect();
        }
        GameGraph { frame: fr.clone(), facts, fact_index, succ }
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn state_count(&self) -> usize {
        self.succ.len()
    }

    pub fn fact_state_count(&self) -> usize {
        self.facts.len()
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn successors(&self, s: usize) -> &[usize] {
        &self.succ[s]
    }

    pub fn owner(&self, s: usize) -> Player {
        if s < self.facts.len() {
            Player::T
        } else {
            Player::F
        }
    }

    pub fn state(&self, s: usize) -> State {
        if s < self.facts.len() {
            State::Fact(self.facts[s].clone())
        } else {
            State::Rule(RuleId(s - self.facts.len()))
        }
    }

    pub fn fact_state(&self, x: &Fact) -> Option<usize> {
        self.fact_index.get(x).copied()
    }

    pub fn rule_state(&self, id: RuleId) -> usize {
        self.facts.len() + id.0
    }

    pub fn index_of(&self, st: &State) -> Option<usize> {
        match st {
            State::Fact(x) => self.fact_state(x),
            State::Rule(id) if id.0 < self.frame.rules().len() => Some(self.rule_state(*id)),
            State::Rule(_) => None,
        }
    }

    /// The fact at a fact state, or the head of the rule at a rule state.
    pub fn fact_of(&self, s: usize) -> &Fact {
        if s < self.facts.len() {
            &self.facts[s]
        } else {
            &self.rule_at(s).head
        }
    }

    fn rule_at(&self, s: usize) -> &Rule {
        self.frame.rule(RuleId(s - self.facts.len()))
    }

    /// Fact text for fact states, `r_{head<-b1,b2}` for rule states.
    pub fn label(&self, s: usize) -> String {
        if s < self.facts.len() {
            self.facts[s].to_string()
        } else {
            format!("r_{{{}}}", self.rule_at(s).compact())
        }
    }

    /// States with at least one incident edge.
    pub fn non_isolated_states(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for (s, out_edges) in self.succ.iter().enumerate() {
            if !out_edges.is_empty() {
                out.insert(s);
                out.extend(out_edges.iter().copied());
            }
        }
        out
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.succ.iter().enumerate().flat_map(|(s, ws)| ws.iter().map(move |&w| (s, w))).collect()
    }

    /// Defined facts in state order.
    pub fn defined_facts(&self) -> impl Iterator<Item = &Fact> {
        self.facts.iter().filter(|x| self.frame.is_defined(x))
    }

    /// DOT export: T states as ellipses, F states as boxes; isolated states
    /// are omitted.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph game {\n");
        for s in self.non_isolated_states() {
            let shape = match self.owner(s) {
                Player::T => "ellipse",
                Player::F => "box",
            };
            let _ = writeln!(out, "  s{s} [label=\"{}\", shape={shape}];", self.label(s));
        }
        for (s, w) in self.edges() {
            let _ = writeln!(out, "  s{s} -> s{w};");
        }
        out.push_str("}\n");
        out
    }
}

pub fn build_game_graph(fr: &Frame) -> GameGraph {
    GameGraph::new(fr)
}

/// A positional strategy for T: one rule per defined fact.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StrategyT(pub BTreeMap<Fact, RuleId>);

/// A positional strategy for F: one body fact per rule.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StrategyF(pub BTreeMap<RuleId, Fact>);

impl StrategyT {
    /// Checks totality on defined facts that have rules and that every
    /// chosen rule belongs to its fact.
    pub fn validate(&self, g: &GameGraph) -> Result<()> {
        for x in g.defined_facts() {
            if g.frame.rule_count_for(x) == 0 {
                continue;
            }
            match self.0.get(x) {
                Some(id) if id.0 < g.frame.rules().len() && &g.frame.rule(*id).head == x => {}
                Some(id) => return Err(Error::Format(format!("strategy picks rule {} for `{x}`", id.0))),
                None => return Err(Error::Format(format!("strategy has no rule for `{x}`"))),
            }
        }
        Ok(())
    }
}

impl StrategyF {
    pub fn validate(&self, g: &GameGraph) -> Result<()> {
        for r in g.frame.rules() {
            match self.0.get(&r.id) {
                Some(y) if r.body.contains(y) => {}
                Some(y) => return Err(Error::Format(format!("strategy picks `{y}` outside the body of `{r}`"))),
                None => return Err(Error::Format(format!("strategy has no choice for `{r}`"))),
            }
        }
        Ok(())
    }
}

impl fmt::Display for StrategyT {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(x, id)| format!("{x}: r{}", id.0)).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

impl fmt::Display for StrategyF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(id, y)| format!("r{}: {y}", id.0)).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Odometer over choice lists; the last position varies fastest.
pub(crate) struct Odometer {
    sizes: Vec<usize>,
    digits: Vec<usize>,
    done: bool,
}

impl Odometer {
    pub fn new(sizes: Vec<usize>) -> Odometer {
        let done = sizes.contains(&0);
        Odometer { digits: vec![0; sizes.len()], sizes, done }
    }

}

impl Iterator for Odometer {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.digits.clone();
        let mut i = self.sizes.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            self.digits[i] += 1;
            if self.digits[i] < self.sizes[i] {
                break;
            }
            self.digits[i] = 0;
        }
        Some(out)
    }
}

/// All positional T strategies in odometer order (defined facts in order,
/// rules in id order).
pub fn strategies_t(g: &GameGraph) -> impl Iterator<Item = StrategyT> + '_ {
    let slots: Vec<(&Fact, Vec<RuleId>)> = g
        .defined_facts()
        .map(|x| (x, g.frame.rules_for(x).map(|r| r.id).collect::<Vec<_>>()))
        .filter(|(_, rs)| !rs.is_empty())
        .collect();
    let odo = Odometer::new(slots.iter().map(|(_, rs)| rs.len()).collect());
    odo.map(move |d| StrategyT(slots.iter().zip(d).map(|((x, rs), i)| ((*x).clone(), rs[i])).collect()))
}

/// All positional F strategies in odometer order (rules in id order, body
/// facts in fact order).
pub fn strategies_f(g: &GameGraph) -> impl Iterator<Item = StrategyF> + '_ {
    let slots: Vec<(RuleId, Vec<&Fact>)> = g.frame.rules().iter().map(|r| (r.id, r.body.iter().collect())).collect();
    let odo = Odometer::new(slots.iter().map(|(_, b)| b.len()).collect());
    odo.map(move |d| StrategyF(slots.iter().zip(d).map(|((id, b), i)| (*id, b[i].clone())).collect()))
}

pub fn strategy_t_count(g: &GameGraph) -> u128 {
    g.defined_facts().map(|x| g.frame.rule_count_for(x).max(1) as u128).product()
}

pub fn strategy_f_count(g: &GameGraph) -> u128 {
    g.frame.rules().iter().map(|r| r.body.len() as u128).product()
}

/// A play: the state sequence up to and excluding the first repetition.
/// For lassos, `cycle_start` indexes the state the play returns to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Play {
    pub states: Vec<usize>,
    pub cycle_start: Option<usize>,
}

impl Play {
    pub fn is_finite(&self) -> bool {
        self.cycle_start.is_none()
    }

    pub fn start(&self) -> usize {
        self.states[0]
    }

    pub fn render(&self, g: &GameGraph) -> String {
        let labels: Vec<String> = self.states.iter().map(|&s| g.label(s)).collect();
        match self.cycle_start {
            None => labels.join(" -> "),
            Some(c) => format!("{} -> ({})^w", labels[..c].join(" -> "), labels[c..].join(" -> "))
                .trim_start_matches(" -> ")
                .to_string(),
        }
    }
}

/// Per-state chosen successor; `usize::MAX` where there is none.
pub(crate) type Profile = Vec<usize>;

pub(crate) const NO_MOVE: usize = usize::MAX;

pub(crate) fn profile(g: &GameGraph, sigma: &StrategyT, tau: &StrategyF) -> Result<Profile> {
    sigma.validate(g)?;
    tau.validate(g)?;
    let mut p = vec![NO_MOVE; g.state_count()];
    for (x, id) in &sigma.0 {
        if let Some(s) = g.fact_state(x) {
            p[s] = g.rule_state(*id);
        }
    }
    for (id, y) in &tau.0 {
        p[g.rule_state(*id)] = g.fact_index[y];
    }
    Ok(p)
}

pub(crate) fn play_profile(p: &[usize], s: usize) -> Play {
    let mut states = Vec::new();
    let mut pos: BTreeMap<usize, usize> = BTreeMap::new();
    let mut cur = s;
    loop {
        if let Some(&i) = pos.get(&cur) {
            return Play { states, cycle_start: Some(i) };
        }
        pos.insert(cur, states.len());
        states.push(cur);
        if p[cur] == NO_MOVE {
            return Play { states, cycle_start: None };
        }
        cur = p[cur];
    }
}

/// The unique play from `s` consistent with `sigma` and `tau`.
pub fn play(g: &GameGraph, s: &State, sigma: &StrategyT, tau: &StrategyF) -> Result<Play> {
    let start = g.index_of(s).ok_or_else(|| Error::PlayStart(format!("{s:?}")))?;
    Ok(play_profile(&profile(g, sigma, tau)?, start))
}

/// Drops rule states; a play starting at a rule state gets the rule's head
/// in front. Errors on plays starting at open fact states.
pub fn play_to_branch(g: &GameGraph, p: &Play) -> Result<Branch> {
    let start = p.start();
    if g.owner(start) == Player::T && !g.frame.is_defined(g.fact_of(start)) {
        return Err(Error::PlayStart(g.label(start)));
    }
    let head: Option<Fact> = (g.owner(start) == Player::F).then(|| g.fact_of(start).clone());
    let facts = |range: &[usize]| -> Vec<Fact> {
        range.iter().filter(|&&s| g.owner(s) == Player::T).map(|&s| g.facts[s].clone()).collect()
    };
    let b = match p.cycle_start {
        None => {
            let mut seq: Vec<Fact> = head.into_iter().chain(facts(&p.states)).collect();
            let terminal = seq.pop().expect("finite plays end at a fact state");
            Branch::finite(seq, terminal)
        }
        Some(c) => {
            let prefix = head.into_iter().chain(facts(&p.states[..c])).collect();
            Branch::lasso(prefix, facts(&p.states[c..]))
        }
    };
    b.validate()?;
    Ok(b)
}

/// `u(s, σ, τ)`: the value of the play; plays at open states are worth `I(s)`.
pub(crate) fn play_value(
    g: &GameGraph,
    p: &Play,
    eval: &BranchEvaluation,
    sgn: &SignMap,
    interp: &Interpretation,
) -> Result<TruthValue> {
    let start = p.start();
    if g.owner(start) == Player::T && !g.frame.is_defined(g.fact_of(start)) {
        return interp.value(g.fact_of(start));
    }
    interp.value(&eval_branch(eval, &play_to_branch(g, p)?, sgn)?)
}

/// `u(s, σ, τ)`.
pub fn outcome(
    g: &GameGraph,
    s: &State,
    sigma: &StrategyT,
    tau: &StrategyF,
    eval: &BranchEvaluation,
    sgn: &SignMap,
    interp: &Interpretation,
) -> Result<TruthValue> {
    play_value(g, &play(g, s, sigma, tau)?, eval, sgn, interp)
}

/// `J_σ(x)`: σ restricted to the facts reachable from `x`.
pub fn strategy_to_justification_t(g: &GameGraph, sigma: &StrategyT, x: &Fact) -> Result<JustificationGraph> {
    if !g.frame.is_defined(x) {
        return Err(Error::UndefinedFact(x.clone()));
    }
    sigma.validate(g)?;
    let mut j = JustificationGraph::new();
    let mut stack = vec![x.clone()];
    while let Some(y) = stack.pop() {
        if j.rule_at(&y).is_some() {
            continue;
        }
        let Some(id) = sigma.0.get(&y) else { continue };
        let r = g.frame.rule(*id).clone();
        stack.extend(r.body.iter().filter(|z| g.frame.is_defined(z)).cloned());
        j.insert(r);
    }
    Ok(j)
}

/// The positional strategy that agrees with `j` where it chooses and with
/// `fallback` elsewhere.
pub fn justification_to_strategy_t(g: &GameGraph, j: &JustificationGraph, fallback: &StrategyT) -> StrategyT {
    let mut out = fallback.clone();
    for (x, r) in j.choices() {
        if g.frame.is_defined(x) {
            out.0.insert(x.clone(), r.id);
        }
    }
    out
}

/// Facts reachable from `x` when F follows `tau` and T may pick any rule.
fn reach_under_tau(g: &GameGraph, tau: &StrategyF, x: &Fact) -> BTreeSet<Fact> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![x.clone()];
    while let Some(y) = stack.pop() {
        if !g.frame.is_defined(&y) || !seen.insert(y.clone()) {
            continue;
        }
        for r in g.frame.rules_for(&y) {
            if let Some(z) = tau.0.get(&r.id) {
                stack.push(z.clone());
            }
        }
    }
    seen
}

/// `J_τ(x)`: rooted at `~x`, with `~y <- ~im(s_{τ,y})` at every defined `y`
/// reachable from `x` under τ. The rules must exist in the frame.
pub fn strategy_to_justification_f(g: &GameGraph, tau: &StrategyF, x: &Fact) -> Result<JustificationGraph> {
    if !g.frame.is_defined(x) {
        return Err(Error::UndefinedFact(x.clone()));
    }
    tau.validate(g)?;
    let mut j = JustificationGraph::new();
    for y in reach_under_tau(g, tau, x) {
        let image: BTreeSet<Fact> = g.frame.rules_for(&y).map(|r| tau.0[&r.id].complement()).collect();
        let head = y.complement();
        match g.frame.find_rule(&head, &image) {
            Some(r) => j.insert(r.clone()),
            None => {
                let body = image.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(", ");
                return Err(Error::MissingComplementRule { head, body });
            }
        }
    }
    Ok(j)
}

/// A τ whose `J_τ(x)` is `j`, where `j` is rooted at `~x`: at every `~y`
/// of `j` the rules of `y` get a selection whose image is exactly the
/// complement of `j`'s body there. Elsewhere `fallback` is kept.
pub fn justification_to_strategy_f(g: &GameGraph, j: &JustificationGraph, fallback: &StrategyF) -> Result<StrategyF> {
    fn cover(rules: &[&Rule], wanted: &BTreeSet<Fact>, i: usize, picked: &mut Vec<Fact>) -> bool {
        if i == rules.len() {
            return picked.iter().collect::<BTreeSet<_>>().len() == wanted.len();
        }
        for z in rules[i].body.iter().filter(|z| wanted.contains(*z)) {
            picked.push(z.clone());
            if cover(rules, wanted, i + 1, picked) {
                return true;
            }
            picked.pop();
        }
        false
    }
    let mut out = fallback.clone();
    for (ny, r) in j.choices() {
        let y = ny.complement();
        let wanted: BTreeSet<Fact> = r.body.iter().map(Fact::complement).collect();
        let rules: Vec<&Rule> = g.frame.rules_for(&y).collect();
        let mut picked = Vec::new();
        if !cover(&rules, &wanted, 0, &mut picked) {
            return Err(Error::Format(format!("no selection for the rules of `{y}` has image {{{}}}", crate::frame::join(&wanted, ", "))));
        }
        for (yr, z) in rules.iter().zip(picked) {
            out.0.insert(yr.id, z);
        }
    }
    Ok(out)
}
