//! Optimal positional pairs: exhaustive search, saddle verification, and the
//! edge-splitting construction for monotone and selective evaluations.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::support::{labelled, SupportTable, DEFAULT_SUPPORT_BUDGET};
use super::{
    play_profile, play_value, profile, strategies_f, strategies_t, strategy_to_justification_t, GameGraph, Play,
    Player, StrategyF, StrategyT, NO_MOVE,
};
use crate::braneval::BranchEvaluation;
use crate::error::{Error, Result};
use crate::frame::RuleId;
use crate::justif::{glb_under, value_facts};
use crate::logic::{Fact, Interpretation, SignMap, TruthValue};

/// A positional pair with the value of its play from every state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OptimalPair {
    pub sigma: StrategyT,
    pub tau: StrategyF,
    /// `u(s, σ, τ)` indexed by state.
    pub values: Vec<TruthValue>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchOutcome {
    Found(OptimalPair),
    /// `maximin(fact) ≠ minimax(fact)`, so no optimal pair exists.
    NoSaddle { fact: Fact, maximin: TruthValue, minimax: TruthValue },
    /// Values agree, but no positional pair passed the saddle check.
    NoPositionalPair,
}

impl SearchOutcome {
    pub fn found(&self) -> Option<&OptimalPair> {
        match self {
            SearchOutcome::Found(p) => Some(p),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SaddleViolation {
    pub state: usize,
    /// The player whose positional deviation improves on the pair.
    pub player: Player,
    pub value: TruthValue,
    pub deviation_value: TruthValue,
    pub play: Play,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SaddleReport {
    pub violations: Vec<SaddleViolation>,
    pub plays_checked: u64,
}

impl SaddleReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

fn state_values(
    g: &GameGraph,
    p: &[usize],
    eval: &BranchEvaluation,
    sgn: &SignMap,
    interp: &Interpretation,
) -> Result<Vec<TruthValue>> {
    (0..g.state_count()).map(|s| play_value(g, &play_profile(p, s), eval, sgn, interp)).collect()
}

/// Every play from `s` in which `free` moves positionally and the other
/// player follows `fixed`.
fn for_each_deviation(
    g: &GameGraph,
    s: usize,
    fixed: &[usize],
    free: Player,
    budget: &mut u64,
    visit: &mut dyn FnMut(&Play) -> Result<()>,
) -> Result<()> {
    fn go(
        g: &GameGraph,
        v: usize,
        fixed: &[usize],
        free: Player,
        path: &mut Vec<usize>,
        on_path: &mut Vec<Option<usize>>,
        budget: &mut u64,
        visit: &mut dyn FnMut(&Play) -> Result<()>,
    ) -> Result<()> {
        if let Some(i) = on_path[v] {
            return emit(Play { states: path.clone(), cycle_start: Some(i) }, budget, visit);
        }
        on_path[v] = Some(path.len());
        path.push(v);
        let r = if g.successors(v).is_empty() {
            emit(Play { states: path.clone(), cycle_start: None }, budget, visit)
        } else if g.owner(v) == free {
            g.successors(v).iter().try_for_each(|&w| go(g, w, fixed, free, path, on_path, budget, visit))
        } else {
            go(g, fixed[v], fixed, free, path, on_path, budget, visit)
        };
        path.pop();
        on_path[v] = None;
        r
    }
    fn emit(p: Play, budget: &mut u64, visit: &mut dyn FnMut(&Play) -> Result<()>) -> Result<()> {
        if *budget == 0 {
            return Err(Error::Budget { what: "deviation plays", needed: u128::MAX, budget: 0 });
        }
        *budget -= 1;
        visit(&p)
    }
    let mut on_path = vec![None; g.state_count()];
    go(g, s, fixed, free, &mut Vec::new(), &mut on_path, budget, visit)
}

/// Checks that no positional deviation of either player improves on the
/// pair's play value at any state.
pub fn check_saddle(
    g: &GameGraph,
    sigma: &StrategyT,
    tau: &StrategyF,
    eval: &BranchEvaluation,
    sgn: &SignMap,
    interp: &Interpretation,
) -> Result<SaddleReport> {
    let p = profile(g, sigma, tau)?;
    let values = state_values(g, &p, eval, sgn, interp)?;
    let mut report = SaddleReport::default();
    let mut budget = DEFAULT_SUPPORT_BUDGET;
    for s in 0..g.state_count() {
        for free in [Player::T, Player::F] {
            let mut found: Option<SaddleViolation> = None;
            for_each_deviation(g, s, &p, free, &mut budget, &mut |play| {
                report.plays_checked += 1;
                let v = play_value(g, play, eval, sgn, interp)?;
                let better = match free {
                    Player::T => v > values[s],
                    Player::F => v < values[s],
                };
                if better && found.is_none() {
                    found = Some(SaddleViolation { state: s, player: free, value: values[s], deviation_value: v, play: play.clone() });
                }
                Ok(())
            })?;
            report.violations.extend(found);
        }
    }
    Ok(report)
}

fn jval_sigma(g: &GameGraph, sigma: &StrategyT, x: &Fact, eval: &BranchEvaluation, sgn: &SignMap, interp: &Interpretation) -> Result<TruthValue> {
    let j = strategy_to_justification_t(g, sigma, x)?;
    let map: BTreeMap<Fact, BTreeSet<Fact>> = j.choices().map(|(y, r)| (y.clone(), r.body.clone())).collect();
    let (lg, root) = labelled(&map, x);
    glb_under(&value_facts(&lg, root, eval, sgn)?, interp)
}

/// `~jval(J_τ(x), ~x)` on the inverted graph, without looking up rules.
fn co_jval_tau(g: &GameGraph, tau: &StrategyF, x: &Fact, eval: &BranchEvaluation, sgn: &SignMap, interp: &Interpretation) -> Result<TruthValue> {
    let fr = g.frame();
    let mut map: BTreeMap<Fact, BTreeSet<Fact>> = BTreeMap::new();
    let mut stack = vec![x.clone()];
    while let Some(y) = stack.pop() {
        if !fr.is_defined(&y) || map.contains_key(&y.complement()) {
            continue;
        }
        let image: BTreeSet<Fact> = fr.rules_for(&y).map(|r| tau.0[&r.id].clone()).collect();
        stack.extend(image.iter().cloned());
        map.insert(y.complement(), image.iter().map(Fact::complement).collect());
    }
    let (lg, root) = labelled(&map, &x.complement());
    Ok(glb_under(&value_facts(&lg, root, eval, sgn)?, interp)?.complement())
}

/// Exhaustive search for an optimal positional pair.
pub fn find_optimal_pair_bruteforce(
    g: &GameGraph,
    eval: &BranchEvaluation,
    sgn: &SignMap,
    interp: &Interpretation,
) -> Result<SearchOutcome> {
    let table = SupportTable::build(g.frame(), eval, sgn, DEFAULT_SUPPORT_BUDGET)?;
    find_optimal_pair_with_table(g, &table, sgn, interp, DEFAULT_SUPPORT_BUDGET)
}

/// As [`find_optimal_pair_bruteforce`] with a prebuilt table. `budget` caps
/// the number of candidate strategies examined.
pub fn find_optimal_pair_with_table(
    g: &GameGraph,
    table: &SupportTable,
    sgn: &SignMap,
    interp: &Interpretation,
    budget: u64,
) -> Result<SearchOutcome> {
    let eval = table.evaluation();
    let defined: Vec<Fact> = g.defined_facts().filter(|x| g.frame().rule_count_for(x) > 0).cloned().collect();
    let mut target = BTreeMap::new();
    for x in &defined {
        let (lo, hi) = (table.maximin(x, interp)?, table.minimax(x, interp)?);
        if lo != hi {
            return Ok(SearchOutcome::NoSaddle { fact: x.clone(), maximin: lo, minimax: hi });
        }
        target.insert(x.clone(), lo);
    }
    let mut examined = 0u64;
    let mut tick = || -> Result<()> {
        examined += 1;
        if examined > budget {
            return Err(Error::Budget { what: "candidate strategies", needed: examined as u128, budget: budget as u128 });
        }
        Ok(())
    };
    let mut taus: Option<Vec<StrategyF>> = None;
    for sigma in strategies_t(g) {
        tick()?;
        let mut ok = true;
        for x in &defined {
            if jval_sigma(g, &sigma, x, eval, sgn, interp)? != target[x] {
                ok = false;
                break;
            }
        }
        if !ok {
            continue;
        }
        if taus.is_none() {
            let mut found = Vec::new();
            for tau in strategies_f(g) {
                tick()?;
                let mut ok = true;
                for x in &defined {
                    if co_jval_tau(g, &tau, x, eval, sgn, interp)? != target[x] {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    found.push(tau);
                }
            }
            taus = Some(found);
        }
        for tau in taus.as_deref().unwrap_or_default() {
            let p = profile(g, &sigma, tau)?;
            let values = state_values(g, &p, eval, sgn, interp)?;
            if defined.iter().any(|x| values[g.fact_state(x).expect("defined facts are states")] != target[x]) {
                continue;
            }
            if check_saddle(g, &sigma, tau, eval, sgn, interp)?.holds() {
                return Ok(SearchOutcome::Found(OptimalPair { sigma, tau: tau.clone(), values }));
            }
        }
    }
    Ok(SearchOutcome::NoPositionalPair)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SplittingStats {
    pub splits: u64,
    pub memo_entries: usize,
}

/// Remaining outgoing edges per state: `succ[s][lo..hi]`.
type Mask = Vec<(u32, u32)>;

struct Splitter<'a> {
    g: &'a GameGraph,
    eval: &'a BranchEvaluation,
    sgn: &'a SignMap,
    interp: &'a Interpretation,
    memo: HashMap<(usize, Vec<(u32, u32, u32)>), TruthValue>,
    budget: usize,
    splits: u64,
}

impl Splitter<'_> {
    fn reach(&self, mask: &Mask, s: usize) -> Vec<usize> {
        let mut seen = vec![false; mask.len()];
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(v) = stack.pop() {
            let (lo, hi) = mask[v];
            for &w in &self.g.successors(v)[lo as usize..hi as usize] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        (0..mask.len()).filter(|&v| seen[v]).collect()
    }

    fn split(mask: &Mask, x: usize) -> (Mask, Mask) {
        let (lo, hi) = mask[x];
        let mut m1 = mask.clone();
        let mut m2 = mask.clone();
        m1[x] = (lo, lo + 1);
        m2[x] = (lo + 1, hi);
        (m1, m2)
    }

    fn first_multi(&self, mask: &Mask, states: &[usize], owner: Player) -> Option<usize> {
        states.iter().copied().find(|&v| self.g.owner(v) == owner && mask[v].1 - mask[v].0 >= 2)
    }

    /// Keeps the half that is better for the owner of `x`.
    fn keep(&mut self, mask: &Mask, x: usize) -> Result<Mask> {
        self.splits += 1;
        let (m1, m2) = Self::split(mask, x);
        let v1 = self.value(&m1, x)?;
        let v2 = self.value(&m2, x)?;
        let first = match self.g.owner(x) {
            Player::T => v2 <= v1,
            Player::F => v1 <= v2,
        };
        Ok(if first { m1 } else { m2 })
    }

    fn value(&mut self, mask: &Mask, s: usize) -> Result<TruthValue> {
        let reach = self.reach(mask, s);
        let key = (s, reach.iter().map(|&v| (v as u32, mask[v].0, mask[v].1)).collect::<Vec<_>>());
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let x = self.first_multi(mask, &reach, Player::T).or_else(|| self.first_multi(mask, &reach, Player::F));
        let v = match x {
            Some(x) => {
                let kept = self.keep(mask, x)?;
                self.value(&kept, s)?
            }
            None => {
                let p = self.profile(mask);
                play_value(self.g, &play_profile(&p, s), self.eval, self.sgn, self.interp)?
            }
        };
        if self.memo.len() >= self.budget {
            return Err(Error::Budget { what: "splitting memo entries", needed: self.memo.len() as u128 + 1, budget: self.budget as u128 });
        }
        self.memo.insert(key, v);
        Ok(v)
    }

    fn profile(&self, mask: &Mask) -> Vec<usize> {
        (0..mask.len())
            .map(|v| if mask[v].1 > mask[v].0 { self.g.successors(v)[mask[v].0 as usize] } else { NO_MOVE })
            .collect()
    }

    /// Splits `owner`'s states from the full game until each keeps one edge.
    fn chain(&mut self, owner: Player) -> Result<Mask> {
        let all: Vec<usize> = (0..self.g.state_count()).collect();
        let mut mask: Mask = all.iter().map(|&v| (0, self.g.successors(v).len() as u32)).collect();
        while let Some(x) = self.first_multi(&mask, &all, owner) {
            mask = self.keep(&mask, x)?;
        }
        Ok(mask)
    }
}

/// Optimal positional pair by repeated edge splitting. `budget` caps the
/// number of memoized subgame values.
pub fn solve_by_splitting(
    g: &GameGraph,
    eval: &BranchEvaluation,
    sgn: &SignMap,
    interp: &Interpretation,
    budget: usize,
) -> Result<(OptimalPair, SplittingStats)> {
    eval.require_monotone_selective()?;
    let mut sp = Splitter { g, eval, sgn, interp, memo: HashMap::new(), budget, splits: 0 };
    let t_mask = sp.chain(Player::T)?;
    let f_mask = sp.chain(Player::F)?;
    let t_moves = sp.profile(&t_mask);
    let f_moves = sp.profile(&f_mask);
    let nf = g.fact_state_count();
    let sigma = StrategyT(
        (0..nf).filter(|&v| t_moves[v] != NO_MOVE).map(|v| (g.fact_of(v).clone(), RuleId(t_moves[v] - nf))).collect(),
    );
    let tau = StrategyF((nf..g.state_count()).map(|v| (RuleId(v - nf), g.fact_of(f_moves[v]).clone())).collect());
    let p = profile(g, &sigma, &tau)?;
    let values = state_values(g, &p, eval, sgn, interp)?;
    let stats = SplittingStats { splits: sp.splits, memo_entries: sp.memo.len() };
    Ok((OptimalPair { sigma, tau, values }, stats))
}
