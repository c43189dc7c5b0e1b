//! Bounded searches for violations of monotonicity and selectivity.
//!
//! Both properties quantify over infinite families of branches; the searches
//! here enumerate finite, deterministic slices of those families. `None`
//! means "no counterexample within the bounds".

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{eval_branch, Branch, BranchEvaluation};
use crate::error::Result;
use crate::frame::{join, Frame};
use crate::logic::{all_interpretations, Fact, Interpretation, Name, SignMap, TruthValue};

/// The facts and edges branches may use.
#[derive(Clone, Debug)]
pub struct PathUniverse {
    defined: Vec<Fact>,
    succ: BTreeMap<Fact, Vec<Fact>>,
}

impl PathUniverse {
    /// `pairs` defined atoms (`a`, `b`, ...) with every edge present; finite
    /// branches may end in any of `opens`.
    pub fn complete(pairs: usize, opens: &[Fact]) -> PathUniverse {
        let defined: Vec<Fact> = (0..pairs)
            .flat_map(|i| {
                let n = atom_name(i);
                [Fact::pos(&n), Fact::neg(&n)]
            })
            .collect();
        let targets: Vec<Fact> = defined.iter().chain(opens).cloned().collect();
        let succ = defined.iter().map(|x| (x.clone(), targets.clone())).collect();
        PathUniverse { defined, succ }
    }

    /// Edges `x → y` for every rule `x <- A` with `y ∈ A`.
    pub fn from_frame(fr: &Frame) -> PathUniverse {
        let defined: Vec<Fact> = fr.defined().iter().cloned().collect();
        let succ = defined
            .iter()
            .map(|x| {
                let targets: BTreeSet<Fact> = fr.rules_for(x).flat_map(|r| r.body.iter().cloned()).collect();
                (x.clone(), targets.into_iter().collect())
            })
            .collect();
        PathUniverse { defined, succ }
    }

    fn is_defined(&self, x: &Fact) -> bool {
        self.succ.contains_key(x)
    }

    fn successors(&self, x: &Fact) -> &[Fact] {
        self.succ.get(x).map_or(&[], Vec::as_slice)
    }

    fn has_edge(&self, x: &Fact, y: &Fact) -> bool {
        self.successors(x).contains(y)
    }

    fn names(&self) -> BTreeSet<Name> {
        self.succ
            .iter()
            .flat_map(|(x, ys)| std::iter::once(x).chain(ys))
            .filter_map(|x| x.name().cloned())
            .collect()
    }

    /// Paths of defined facts with at most `max_len` elements, shortest first.
    fn paths(&self, max_len: usize) -> Vec<Vec<Fact>> {
        let mut out = vec![Vec::new()];
        let mut frontier: Vec<Vec<Fact>> = vec![Vec::new()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for p in &frontier {
                let options: Vec<&Fact> = match p.last() {
                    None => self.defined.iter().collect(),
                    Some(y) => self.successors(y).iter().filter(|z| self.is_defined(z)).collect(),
                };
                for z in options {
                    let mut q = p.clone();
                    q.push(z.clone());
                    next.push(q);
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }

    /// Walks from `x` through defined facts with at most `max_len` elements.
    fn walks_from(&self, x: &Fact, max_len: usize) -> Vec<Vec<Fact>> {
        self.paths(max_len).into_iter().filter(|p| p.first() == Some(x)).collect()
    }

    /// Branches starting in `x` within the given prefix and cycle bounds.
    fn branches_from(&self, x: &Fact, max_prefix: usize, max_cycle: usize) -> Vec<Branch> {
        let mut out = Vec::new();
        for w in self.walks_from(x, max_prefix.max(1)) {
            for t in self.successors(w.last().unwrap()).iter().filter(|t| !self.is_defined(t)) {
                out.push(Branch::finite(w.clone(), t.clone()));
            }
        }
        for w in self.walks_from(x, max_prefix + max_cycle) {
            let last = w.last().unwrap();
            for i in 0..=max_prefix.min(w.len() - 1) {
                if w.len() - i <= max_cycle && self.has_edge(last, &w[i]) {
                    out.push(Branch::lasso(w[..i].to_vec(), w[i..].to_vec()));
                }
            }
        }
        out
    }

    /// Finite loops `x → ... → y` with `y → x` an edge.
    fn loops_from(&self, x: &Fact, max_len: usize) -> Vec<Vec<Fact>> {
        self.walks_from(x, max_len).into_iter().filter(|w| self.has_edge(w.last().unwrap(), x)).collect()
    }
}

fn atom_name(i: usize) -> String {
    let letters = "abcdefghijklmnopqrstuvwxyz".as_bytes();
    if i < letters.len() {
        (letters[i] as char).to_string()
    } else {
        format!("v{i}")
    }
}

/// Search bounds shared by both falsifiers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FalsifierBounds {
    /// Maximum length of the common prefix path `p`.
    pub max_path: usize,
    /// Maximum prefix length of enumerated branches.
    pub max_prefix: usize,
    /// Maximum cycle length of lassos and maximum loop length.
    pub max_cycle: usize,
    /// Maximum size of the loop sets `M` and `N`.
    pub max_set: usize,
    /// Maximum number of loops concatenated in an interleaving.
    pub max_word: usize,
}

impl Default for FalsifierBounds {
    fn default() -> FalsifierBounds {
        FalsifierBounds { max_path: 2, max_prefix: 2, max_cycle: 2, max_set: 1, max_word: 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonotonicityCounterexample {
    pub interpretation: Interpretation,
    pub path: Vec<Fact>,
    pub b1: Branch,
    pub b2: Branch,
    /// `B(b1)`, `B(b2)`, `B(p → b1)`, `B(p → b2)`.
    pub values: [Fact; 4],
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonotonicityReport {
    pub counterexample: Option<MonotonicityCounterexample>,
    /// Whether `B(x0 → x1 → ...) = B(x1 → ...)` held on every sampled branch
    /// with at least three elements.
    pub transitive_on_sample: bool,
    pub branches_checked: usize,
}

fn drop_first(b: &Branch) -> Option<Branch> {
    match b {
        Branch::Finite { prefix, terminal } if prefix.len() >= 2 => {
            Some(Branch::finite(prefix[1..].to_vec(), terminal.clone()))
        }
        Branch::Finite { .. } => None,
        Branch::Lasso { prefix, cycle } if !prefix.is_empty() => Some(Branch::lasso(prefix[1..].to_vec(), cycle.clone())),
        Branch::Lasso { cycle, .. } => {
            let mut c = cycle.clone();
            c.rotate_left(1);
            Some(Branch::lasso(Vec::new(), c))
        }
    }
}

/// Looks for `I, p, b1, b2` with `I(B(b1)) ≤ I(B(b2))` but
/// `I(B(p → b1)) > I(B(p → b2))`.
pub fn falsify_monotonicity(
    eval: &BranchEvaluation,
    sgn: &SignMap,
    universe: &PathUniverse,
    bounds: FalsifierBounds,
) -> Result<MonotonicityReport> {
    let interps: Vec<Interpretation> = all_interpretations(&universe.names()).collect();
    let mut by_start: BTreeMap<Fact, Vec<(Branch, Fact)>> = BTreeMap::new();
    let mut transitive = true;
    let mut checked = 0;
    for x in &universe.defined {
        let mut list = Vec::new();
        for b in universe.branches_from(x, bounds.max_prefix, bounds.max_cycle) {
            let v = eval_branch(eval, &b, sgn)?;
            if let Some(tail) = drop_first(&b) {
                if eval_branch(eval, &tail, sgn)? != v {
                    transitive = false;
                }
            }
            list.push((b, v));
        }
        checked += list.len();
        by_start.insert(x.clone(), list);
    }

    for p in universe.paths(bounds.max_path).into_iter().filter(|p| !p.is_empty()) {
        let last = p.last().unwrap();
        for x in universe.successors(last).iter().filter(|x| universe.is_defined(x)) {
            // (B(b), B(p → b)) pairs with their first witness.
            let mut pairs: BTreeMap<(Fact, Fact), usize> = BTreeMap::new();
            let list = &by_start[x];
            for (i, (b, v)) in list.iter().enumerate() {
                let w = eval_branch(eval, &b.prepend(&p), sgn)?;
                pairs.entry((v.clone(), w)).or_insert(i);
            }
            let mut ordered: Vec<(&(Fact, Fact), &usize)> = pairs.iter().collect();
            ordered.sort_by_key(|(_, i)| **i);
            for interp in &interps {
                let val = |f: &Fact| interp.value(f);
                for ((v1, w1), k1) in &ordered {
                    for ((v2, w2), k2) in &ordered {
                        if val(v1)? <= val(v2)? && val(w1)? > val(w2)? {
                            return Ok(MonotonicityReport {
                                counterexample: Some(MonotonicityCounterexample {
                                    interpretation: interp.clone(),
                                    path: p.clone(),
                                    b1: list[**k1].0.clone(),
                                    b2: list[**k2].0.clone(),
                                    values: [v1.clone(), v2.clone(), w1.clone(), w2.clone()],
                                }),
                                transitive_on_sample: transitive,
                                branches_checked: checked,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(MonotonicityReport { counterexample: None, transitive_on_sample: transitive, branches_checked: checked })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelectivityCounterexample {
    pub interpretation: Interpretation,
    pub path: Vec<Fact>,
    pub start: Fact,
    pub m: Vec<Vec<Fact>>,
    pub n: Vec<Vec<Fact>>,
    pub k: Vec<Branch>,
    /// The interleaved branch lying outside the candidates' value range.
    pub branch: Branch,
    pub value: Fact,
    /// Candidate branches from `pM^ω ∪ pN^ω ∪ pK` and their values.
    pub candidates: Vec<(Branch, Fact)>,
}

fn nonempty_subsets(items: usize, max_size: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut layer: Vec<Vec<usize>> = (0..items).map(|i| vec![i]).collect();
    for _ in 0..max_size {
        out.extend(layer.iter().cloned());
        layer = layer
            .iter()
            .flat_map(|s| (s.last().unwrap() + 1..items).map(move |j| {
                let mut t = s.clone();
                t.push(j);
                t
            }))
            .collect();
    }
    out
}

/// Words over `alphabet` with `min..=max` letters, shortest first.
fn words<T: Clone>(alphabet: &[T], min: usize, max: usize) -> Vec<Vec<T>> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<T>> = vec![Vec::new()];
    for len in 0..=max {
        if len >= min {
            out.extend(layer.iter().cloned());
        }
        layer = layer
            .iter()
            .flat_map(|w| alphabet.iter().map(move |a| {
                let mut v = w.clone();
                v.push(a.clone());
                v
            }))
            .collect();
    }
    out
}

/// `p · u · w^ω` for loop words `u` and nonempty `w`, within bounds.
fn interleavings(p: &[Fact], loops: &[&Vec<Fact>], max_word: usize) -> Vec<Branch> {
    let prefixes = words(loops, 0, max_word);
    let cycles = words(loops, 1, max_word);
    let mut out = Vec::new();
    for u in &prefixes {
        for w in &cycles {
            let prefix: Vec<Fact> = p.iter().cloned().chain(u.iter().flat_map(|l| l.iter().cloned())).collect();
            let cycle: Vec<Fact> = w.iter().flat_map(|l| l.iter().cloned()).collect();
            out.push(Branch::lasso(prefix, cycle));
        }
    }
    out
}

/// `p · u · k` for loop words `u`.
fn prefixed(p: &[Fact], loops: &[&Vec<Fact>], k: &Branch, max_word: usize) -> Vec<Branch> {
    words(loops, 0, max_word)
        .into_iter()
        .map(|u| {
            let lead: Vec<Fact> = p.iter().cloned().chain(u.iter().flat_map(|l| l.iter().cloned())).collect();
            k.prepend(&lead)
        })
        .collect()
}

/// Looks for `I, p, x, M, N, K` and a branch `b ∈ p(M∪N)*K ∪ p(M∪N)^ω` whose
/// value lies outside the range of values on `pM^ω ∪ pN^ω ∪ pK`.
///
/// `K` ranges over the empty set and singletons: any violation with a larger
/// `K` is already a violation for one of its members, because the candidate
/// range only grows with `K`.
pub fn falsify_selectivity(
    eval: &BranchEvaluation,
    sgn: &SignMap,
    universe: &PathUniverse,
    bounds: FalsifierBounds,
) -> Result<Option<SelectivityCounterexample>> {
    let interps: Vec<Interpretation> = all_interpretations(&universe.names()).collect();
    let all_paths = universe.paths(bounds.max_path);
    for x in &universe.defined {
        let loops = universe.loops_from(x, bounds.max_cycle);
        if loops.is_empty() {
            continue;
        }
        let subsets = nonempty_subsets(loops.len(), bounds.max_set);
        let mut ks: Vec<Option<Branch>> = vec![None];
        ks.extend(universe.branches_from(x, bounds.max_prefix, bounds.max_cycle).into_iter().map(Some));
        let paths = all_paths.iter().filter(|p| p.last().is_none_or(|y| universe.has_edge(y, x)));
        for p in paths {
            for (i, ms) in subsets.iter().enumerate() {
                for ns in &subsets[i..] {
                    let m: Vec<&Vec<Fact>> = ms.iter().map(|&j| &loops[j]).collect();
                    let n: Vec<&Vec<Fact>> = ns.iter().map(|&j| &loops[j]).collect();
                    let mut union: Vec<&Vec<Fact>> = m.clone();
                    for l in &n {
                        if !union.contains(l) {
                            union.push(l);
                        }
                    }
                    let mut base_candidates = interleavings(p, &m, bounds.max_word);
                    base_candidates.extend(interleavings(p, &n, bounds.max_word));
                    let base_interleaved = interleavings(p, &union, bounds.max_word);
                    for k in &ks {
                        let mut candidates = base_candidates.clone();
                        let mut interleaved = base_interleaved.clone();
                        if let Some(k) = k {
                            candidates.push(k.prepend(p));
                            interleaved.extend(prefixed(p, &union, k, bounds.max_word));
                        }
                        if let Some(cx) = check_selective(eval, sgn, &interps, &candidates, &interleaved)? {
                            let (interpretation, branch, value, candidates) = cx;
                            return Ok(Some(SelectivityCounterexample {
                                interpretation,
                                path: p.clone(),
                                start: x.clone(),
                                m: m.into_iter().cloned().collect(),
                                n: n.into_iter().cloned().collect(),
                                k: k.iter().cloned().collect(),
                                branch,
                                value,
                                candidates,
                            }));
                        }
                    }
                }
            }
        }
    }
    Ok(None)
}

type SelectivityWitness = (Interpretation, Branch, Fact, Vec<(Branch, Fact)>);

fn check_selective(
    eval: &BranchEvaluation,
    sgn: &SignMap,
    interps: &[Interpretation],
    candidates: &[Branch],
    interleaved: &[Branch],
) -> Result<Option<SelectivityWitness>> {
    let cand_vals: Vec<Fact> = candidates.iter().map(|b| eval_branch(eval, b, sgn)).collect::<Result<_>>()?;
    let mut first_by_value: BTreeMap<Fact, usize> = BTreeMap::new();
    for (i, b) in interleaved.iter().enumerate() {
        first_by_value.entry(eval_branch(eval, b, sgn)?).or_insert(i);
    }
    let cand_facts: BTreeSet<&Fact> = cand_vals.iter().collect();
    let mut ordered: Vec<(&Fact, &usize)> = first_by_value.iter().collect();
    ordered.sort_by_key(|(_, i)| **i);
    for interp in interps {
        let vals: Vec<TruthValue> = cand_facts.iter().map(|f| interp.value(f)).collect::<Result<_>>()?;
        let lo = vals.iter().min().copied();
        let hi = vals.iter().max().copied();
        for (fact, &i) in &ordered {
            let v = interp.value(fact)?;
            let inside = matches!((lo, hi), (Some(lo), Some(hi)) if lo <= v && v <= hi);
            if !inside {
                let listed = candidates.iter().cloned().zip(cand_vals.iter().cloned()).collect();
                return Ok(Some((interp.clone(), interleaved[i].clone(), (*fact).clone(), listed)));
            }
        }
    }
    Ok(None)
}

fn loops_text(ls: &[Vec<Fact>]) -> String {
    join(ls.iter().map(|l| join(l, " -> ")), " | ")
}

/// Structured text, one `key: value` line per component.
impl fmt::Display for SelectivityCounterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "selectivity counterexample")?;
        writeln!(f, "interpretation: {}", self.interpretation)?;
        writeln!(f, "p: {}", join(&self.path, " -> "))?;
        writeln!(f, "x: {}", self.start)?;
        writeln!(f, "M: {}", loops_text(&self.m))?;
        writeln!(f, "N: {}", loops_text(&self.n))?;
        writeln!(f, "K: {}", join(&self.k, " | "))?;
        writeln!(f, "branch: {} => {}", self.branch, self.value)?;
        for (b, v) in &self.candidates {
            writeln!(f, "candidate: {b} => {v}")?;
        }
        Ok(())
    }
}

impl fmt::Display for MonotonicityCounterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [v1, v2, w1, w2] = &self.values;
        writeln!(f, "monotonicity counterexample")?;
        writeln!(f, "interpretation: {}", self.interpretation)?;
        writeln!(f, "p: {}", join(&self.path, " -> "))?;
        writeln!(f, "b1: {} => {v1}", self.b1)?;
        writeln!(f, "b2: {} => {v2}", self.b2)?;
        writeln!(f, "p.b1: {} => {w1}", self.b1.prepend(&self.path))?;
        writeln!(f, "p.b2: {} => {w2}", self.b2.prepend(&self.path))
    }
}
