//! Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails.
//!
//! The exhaustive corpus is the union of the two exhaustive tiers in
//! `common`; the oracle corpus is the hand-written set plus seeded random
//! four-atom programs.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{fact, Entry};
use jgame_core::braneval::{falsify_monotonicity, falsify_selectivity, FalsifierBounds, PathUniverse};
use jgame_core::frame::complementary_closure;
use jgame_core::game::{
    build_game_graph, find_optimal_pair_bruteforce, justification_to_strategy_f, justification_to_strategy_t,
    maximin_graph, minimax_graph, solve_by_splitting, strategies_f, strategies_t, strategy_to_justification_f,
    strategy_to_justification_t, StrategyF, SupportTable, DEFAULT_SUPPORT_BUDGET,
};
use jgame_core::justif::branch_value_facts;
use jgame_core::logic::all_interpretations;
use jgame_core::lp::{fitting_lfp, stable_models_total, supported_models, well_founded_model};
use jgame_core::semantics::{Interpretations, TreeValue, DEFAULT_INTERPRETATION_BUDGET};
use jgame_core::{
    eval_branch, Branch, BranchEvaluation, Fact, Frame, RuleId, Interpretation, JustificationGraph, JustificationSystem,
    SignMap, TruthValue,
};

const CONSISTENT: [BranchEvaluation; 4] =
    [BranchEvaluation::Sp, BranchEvaluation::Kk, BranchEvaluation::Wf, BranchEvaluation::St];
const RANDOM_SEED: u64 = 0x5eed_2024;
const RANDOM_PROGRAMS: usize = 12;
const SPLIT_BUDGET: usize = 10_000_000;
const CLOSURE_RULE_BUDGET: usize = 10_000;

type Verdict = Result<String, String>;

fn fail<E: std::fmt::Display>(context: &str) -> impl FnOnce(E) -> String + '_ {
    move |e| format!("{context}: {e}")
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn system(fr: &Frame, eval: &BranchEvaluation) -> Result<JustificationSystem, String> {
    JustificationSystem::new(fr.clone(), eval.clone(), SignMap::new()).map_err(fail("system"))
}

fn interpretations(fr: &Frame) -> Vec<Interpretation> {
    all_interpretations(&fr.names()).collect()
}

fn niko_reproduction() -> Verdict {
    let js = system(&common::niko(), &BranchEvaluation::Ex)?;
    for i in interpretations(js.frame()) {
        let a = js.supported_value_graph(&fact("a"), &i).map_err(fail("SV(a)"))?;
        let na = js.supported_value_graph(&fact("~a"), &i).map_err(fail("SV(~a)"))?;
        ensure(a == TruthValue::False && na == TruthValue::Unknown, || format!("at {i}: SV(a)={a}, SV(~a)={na}"))?;
    }
    Ok("SV(a)=f, SV(~a)=u under ex".into())
}

fn leading_game_graph() -> Verdict {
    let g = build_game_graph(&common::leading());
    let states = g.non_isolated_states();
    let facts = states.iter().filter(|&&s| s < g.fact_state_count()).count();
    let rules = states.len() - facts;
    ensure(facts == 6 && rules == 5, || format!("{facts} fact states, {rules} rule states"))?;
    let edges: BTreeSet<(String, String)> = g.edges().into_iter().map(|(s, w)| (g.label(s), g.label(w))).collect();
    let expected: BTreeSet<(String, String)> = [
        ("p", "r_{p<-~q}"),
        ("p", "r_{p<-r}"),
        ("r_{p<-~q}", "~q"),
        ("r_{p<-r}", "r"),
        ("q", "r_{q<-~p}"),
        ("r_{q<-~p}", "~p"),
        ("~p", "r_{~p<-q,~r}"),
        ("r_{~p<-q,~r}", "q"),
        ("r_{~p<-q,~r}", "~r"),
        ("~q", "r_{~q<-p}"),
        ("r_{~q<-p}", "p"),
    ]
    .iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect();
    ensure(edges == expected, || format!("edges differ: {edges:?}"))?;
    Ok("6 fact states, 5 rule states, 11 edges".into())
}

fn consistency_corollary(corpus: &[Entry]) -> Verdict {
    let mut checked = 0usize;
    for e in corpus {
        for eval in &CONSISTENT {
            let report = system(&e.frame, eval)?
                .check_consistency(&Interpretations::All, DEFAULT_INTERPRETATION_BUDGET)
                .map_err(fail(&e.name))?;
            if let Some(v) = report.violations().next() {
                return Err(format!("{eval} on `{}`: SV({})={} but SV(~)={} at {}", e.name, v.fact, v.value, v.negated, v.interpretation));
            }
            checked += report.entries.len();
        }
    }
    let ex = system(&common::niko(), &BranchEvaluation::Ex)?
        .check_consistency(&Interpretations::All, DEFAULT_INTERPRETATION_BUDGET)
        .map_err(fail("niko"))?;
    ensure(ex.violations().any(|v| v.fact == fact("a")), || "ex passes on niko".into())?;
    Ok(format!("{} frames, {checked} entries consistent; ex fails on niko", corpus.len()))
}

fn saddle_property(corpus: &[Entry]) -> Verdict {
    let mut strict = 0usize;
    for e in corpus {
        let interps = interpretations(&e.frame);
        for eval in &BranchEvaluation::BUILTINS {
            let table = SupportTable::build(&e.frame, eval, &SignMap::new(), DEFAULT_SUPPORT_BUDGET).map_err(fail(&e.name))?;
            for i in &interps {
                for x in e.frame.defined() {
                    let lo = table.maximin(x, i).map_err(fail(&e.name))?;
                    let hi = table.minimax(x, i).map_err(fail(&e.name))?;
                    ensure(lo <= hi, || format!("{eval} on `{}` at {x}, {i}: maximin {lo} > minimax {hi}", e.name))?;
                    if lo != hi {
                        ensure(matches!(eval, BranchEvaluation::Ex), || {
                            format!("{eval} on `{}` at {x}, {i}: maximin {lo} < minimax {hi}", e.name)
                        })?;
                        strict += 1;
                    }
                }
            }
        }
    }
    let g = build_game_graph(&common::niko());
    let i = Interpretation::new();
    let lo = maximin_graph(&g, &fact("a"), &BranchEvaluation::Ex, &SignMap::new(), &i).map_err(fail("niko"))?;
    let hi = minimax_graph(&g, &fact("a"), &BranchEvaluation::Ex, &SignMap::new(), &i).map_err(fail("niko"))?;
    ensure(lo < hi, || format!("niko ex: maximin {lo}, minimax {hi}"))?;
    Ok(format!("{} frames; equality under sp/kk/wf/st; {strict} strict gaps under ex; niko a: {lo} < {hi}", corpus.len()))
}

fn oracle_coincidence(corpus: &[Entry]) -> Verdict {
    ensure(corpus.len() >= 20, || format!("only {} programs", corpus.len()))?;
    let mut groups = 0usize;
    for e in corpus {
        let p = &e.program;
        let per_eval = |eval: BranchEvaluation| {
            system(&e.frame, &eval)?.enumerate_models(DEFAULT_INTERPRETATION_BUDGET).map_err(fail(&e.name))
        };
        for g in per_eval(BranchEvaluation::Sp)? {
            let ours: BTreeSet<Interpretation> = g.models.into_iter().collect();
            let oracle = supported_models(p, &g.open).map_err(fail(&e.name))?;
            ensure(ours == oracle, || format!("sp on `{}` at {}: {ours:?} vs {oracle:?}", e.name, g.open))?;
            groups += 1;
        }
        for g in per_eval(BranchEvaluation::St)? {
            if !g.open.is_total() {
                continue;
            }
            let ours: BTreeSet<Interpretation> = g.models.into_iter().filter(Interpretation::is_total).collect();
            let oracle = stable_models_total(p, &g.open).map_err(fail(&e.name))?;
            ensure(ours == oracle, || format!("st on `{}` at {}: {ours:?} vs {oracle:?}", e.name, g.open))?;
        }
        for g in per_eval(BranchEvaluation::Wf)? {
            let wfm = well_founded_model(p, &g.open).map_err(fail(&e.name))?;
            ensure(g.models.contains(&wfm), || format!("wf on `{}`: {wfm} is not a model", e.name))?;
        }
        for g in per_eval(BranchEvaluation::Kk)? {
            let lfp = fitting_lfp(p, &g.open).map_err(fail(&e.name))?;
            ensure(g.models.contains(&lfp), || format!("kk on `{}`: {lfp} is not a model", e.name))?;
        }
    }
    Ok(format!("{} programs, {groups} open assignments", corpus.len()))
}

fn selectivity_falsifier() -> Verdict {
    let universe = PathUniverse::from_frame(&common::niko());
    let bounds = FalsifierBounds { max_path: 1, max_prefix: 1, max_cycle: 2, max_set: 1, max_word: 2 };
    let cx = falsify_selectivity(&BranchEvaluation::Ex, &SignMap::new(), &universe, bounds)
        .map_err(fail("ex"))?
        .ok_or("no counterexample for ex")?;
    ensure(cx.m == vec![vec![fact("a"), fact("b")]], || format!("M = {:?}", cx.m))?;
    ensure(cx.n == vec![vec![fact("a"), fact("c")]], || format!("N = {:?}", cx.n))?;
    ensure(cx.k.is_empty(), || format!("K = {:?}", cx.k))?;
    let lasso = Branch::lasso(vec![], vec![fact("a"), fact("b"), fact("a"), fact("c")]);
    ensure(cx.branch == lasso, || format!("witness {:?}", cx.branch))?;
    for eval in &CONSISTENT {
        if let Some(c) = falsify_selectivity(eval, &SignMap::new(), &universe, bounds).map_err(fail("selectivity"))? {
            return Err(format!("{eval}: {c}"));
        }
        let report = falsify_monotonicity(eval, &SignMap::new(), &universe, bounds).map_err(fail("monotonicity"))?;
        if let Some(c) = report.counterexample {
            return Err(format!("{eval}: {c}"));
        }
    }
    Ok("ex: M={a→b}, N={a→c}, K=∅, lasso (a b a c)^ω; none for sp/kk/wf/st".into())
}

fn check_sigma_side(fr: &Frame) -> Result<usize, String> {
    let g = build_game_graph(fr);
    let fallback = strategies_t(&g).next().ok_or("no strategy for T")?;
    let mut n = 0;
    for sigma in strategies_t(&g) {
        for x in fr.defined() {
            let j = strategy_to_justification_t(&g, &sigma, x).map_err(fail("J_σ"))?;
            ensure(j.has_root(x) && j.is_locally_complete(fr), || format!("J_σ({x}) not rooted or not locally complete"))?;
            ensure(j.choices().all(|(y, r)| sigma.0[y] == r.id), || format!("J_σ({x}) disagrees with σ"))?;
            let back = justification_to_strategy_t(&g, &j, &fallback);
            let rebuilt = strategy_to_justification_t(&g, &back, x).map_err(fail("J_σ"))?;
            ensure(rebuilt == j, || format!("round trip changes J_σ({x})"))?;
            n += 1;
        }
    }
    Ok(n)
}

/// One selection per distinct image for the rules of `y`, in odometer order.
fn representative_selections(fr: &Frame, y: &Fact) -> Vec<Vec<(RuleId, Fact)>> {
    let rules: Vec<_> = fr.rules_for(y).collect();
    let mut seen: BTreeSet<BTreeSet<Fact>> = BTreeSet::new();
    let mut out = Vec::new();
    let mut digits = vec![0usize; rules.len()];
    loop {
        let pick: Vec<(RuleId, Fact)> =
            rules.iter().zip(&digits).map(|(r, &d)| (r.id, r.body.iter().nth(d).expect("digit within body").clone())).collect();
        if seen.insert(pick.iter().map(|(_, z)| z.clone()).collect()) {
            out.push(pick);
        }
        let Some(i) = (0..rules.len()).find(|&i| digits[i] + 1 < rules[i].body.len()) else { break };
        digits[i] += 1;
        digits[..i].iter_mut().for_each(|d| *d = 0);
    }
    out
}

/// Calls `visit` with one positional τ per class of τs that agree, at every
/// fact reachable from `x` under them, on the image of their selection.
/// `J_τ(x)` reads τ only through those images, so every τ is covered.
fn for_each_tau_class(
    fr: &Frame,
    base: &StrategyF,
    x: &Fact,
    visit: &mut dyn FnMut(&StrategyF) -> Result<(), String>,
) -> Result<(), String> {
    struct Search<'a> {
        choices: BTreeMap<Fact, Vec<Vec<(RuleId, Fact)>>>,
        base: &'a StrategyF,
        tau: StrategyF,
        done: BTreeSet<Fact>,
        pending: Vec<Fact>,
    }
    fn go(s: &mut Search, visit: &mut dyn FnMut(&StrategyF) -> Result<(), String>) -> Result<(), String> {
        let Some(y) = s.pending.pop() else { return visit(&s.tau) };
        let Some(options) = s.choices.get(&y).filter(|_| !s.done.contains(&y)).cloned() else {
            go(s, visit)?;
            s.pending.push(y);
            return Ok(());
        };
        s.done.insert(y.clone());
        for pick in &options {
            let depth = s.pending.len();
            for (id, z) in pick {
                s.tau.0.insert(*id, z.clone());
                s.pending.push(z.clone());
            }
            go(s, visit)?;
            s.pending.truncate(depth);
        }
        for (id, _) in &options[0] {
            s.tau.0.insert(*id, s.base.0[id].clone());
        }
        s.done.remove(&y);
        s.pending.push(y);
        Ok(())
    }
    let choices = fr.defined().iter().map(|y| (y.clone(), representative_selections(fr, y))).collect();
    let mut s = Search { choices, base, tau: base.clone(), done: BTreeSet::new(), pending: vec![x.clone()] };
    go(&mut s, visit)
}

fn check_tau_side(fr: &Frame) -> Result<usize, String> {
    let g = build_game_graph(fr);
    let fallback = strategies_f(&g).next().ok_or("no strategy for F")?;
    let mut n = 0;
    for x in fr.defined() {
        for_each_tau_class(fr, &fallback, x, &mut |tau| {
            let j = strategy_to_justification_f(&g, tau, x).map_err(fail("J_τ"))?;
            let root = x.complement();
            ensure(j.has_root(&root) && j.is_locally_complete(fr), || format!("J_τ({x}) not rooted or not locally complete"))?;
            let back = justification_to_strategy_f(&g, &j, &fallback).map_err(fail("J_τ"))?;
            let rebuilt = strategy_to_justification_f(&g, &back, x).map_err(fail("J_τ"))?;
            ensure(rebuilt == j, || format!("round trip changes J_τ({x})"))?;
            n += 1;
            Ok(())
        })?;
    }
    Ok(n)
}

fn strategy_round_trip(corpus: &[Entry]) -> Verdict {
    let (mut sigmas, mut taus) = (0, 0);
    for e in corpus {
        sigmas += check_sigma_side(&e.frame).map_err(|m| format!("`{}`: {m}", e.name))?;
        let closed = complementary_closure(&e.frame, CLOSURE_RULE_BUDGET).map_err(fail(&e.name))?;
        taus += check_tau_side(&closed).map_err(|m| format!("`{}` (closed): {m}", e.name))?;
    }
    Ok(format!("{} frames, {sigmas} (σ, x) and {taus} (τ, x) round trips", corpus.len()))
}

/// Values of every finite branch of at most `2n` facts and every lasso with
/// prefix at most `n` and cycle at most `2n`, `n` the number of internal
/// nodes of `j`.
fn enumerated_values(j: &JustificationGraph, x: &Fact, eval: &BranchEvaluation) -> Result<BTreeSet<Fact>, String> {
    fn walk(
        j: &JustificationGraph,
        n: usize,
        path: &mut Vec<Fact>,
        eval: &BranchEvaluation,
        out: &mut BTreeSet<Fact>,
    ) -> Result<(), String> {
        let y = path.last().expect("nonempty walk").clone();
        let rule = j.rule_at(&y).expect("walks stay on internal nodes");
        for z in &rule.body {
            if j.rule_at(z).is_none() {
                if path.len() <= 2 * n {
                    out.insert(eval_branch(eval, &Branch::finite(path.clone(), z.clone()), &SignMap::new()).map_err(fail("branch"))?);
                }
                continue;
            }
            for k in path.iter().enumerate().filter(|(_, w)| *w == z).map(|(k, _)| k) {
                if k <= n && path.len() - k <= 2 * n {
                    let b = Branch::lasso(path[..k].to_vec(), path[k..].to_vec());
                    out.insert(eval_branch(eval, &b, &SignMap::new()).map_err(fail("branch"))?);
                }
            }
            if path.len() < 3 * n {
                path.push(z.clone());
                walk(j, n, path, eval, out)?;
                path.pop();
            }
        }
        Ok(())
    }
    let mut out = BTreeSet::new();
    let n = j.choices().count();
    walk(j, n, &mut vec![x.clone()], eval, &mut out)?;
    Ok(out)
}

fn branch_oracle(corpus: &[Entry]) -> Verdict {
    let mut checked = 0usize;
    for e in corpus {
        let g = build_game_graph(&e.frame);
        let mut rooted: BTreeSet<(Fact, JustificationGraph)> = BTreeSet::new();
        for sigma in strategies_t(&g) {
            for x in e.frame.defined() {
                rooted.insert((x.clone(), strategy_to_justification_t(&g, &sigma, x).map_err(fail(&e.name))?));
            }
        }
        for eval in &BranchEvaluation::BUILTINS {
            for (x, j) in &rooted {
                let ours = branch_value_facts(j, &e.frame, x, eval, &SignMap::new()).map_err(fail(&e.name))?;
                let brute = enumerated_values(j, x, eval)?;
                ensure(ours == brute, || format!("{eval} on `{}` at {x}: {ours:?} vs {brute:?}", e.name))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{} frames, {checked} (evaluation, justification) pairs; equal value sets agree under every interpretation", corpus.len()))
}

fn splitting_equivalence(corpus: &[Entry]) -> Verdict {
    let mut solved = 0usize;
    for e in corpus {
        let g = build_game_graph(&e.frame);
        for i in interpretations(&e.frame) {
            for eval in &CONSISTENT {
                let brute = find_optimal_pair_bruteforce(&g, eval, &SignMap::new(), &i).map_err(fail(&e.name))?;
                let brute = brute.found().ok_or_else(|| format!("{eval} on `{}` at {i}: {brute:?}", e.name))?;
                let (split, _) = solve_by_splitting(&g, eval, &SignMap::new(), &i, SPLIT_BUDGET).map_err(fail(&e.name))?;
                ensure(brute.values == split.values, || format!("{eval} on `{}` at {i}", e.name))?;
                solved += 1;
            }
        }
    }
    Ok(format!("{} frames, {solved} games", corpus.len()))
}

fn tree_certificate(corpus: &[Entry]) -> Verdict {
    let mut certified = 0usize;
    for e in corpus {
        let interps = interpretations(&e.frame);
        for eval in &CONSISTENT {
            let js = system(&e.frame, eval)?;
            for i in &interps {
                for x in e.frame.defined() {
                    let graph = js.supported_value_graph(x, i).map_err(fail(&e.name))?;
                    let tree = js.supported_value_tree(x, i).map_err(fail(&e.name))?;
                    ensure(tree == TreeValue::Certified { value: graph }, || {
                        format!("{eval} on `{}` at {x}, {i}: {tree:?} vs {graph}", e.name)
                    })?;
                    certified += 1;
                }
            }
        }
    }
    let ex = system(&common::niko(), &BranchEvaluation::Ex)?;
    let tree = ex.supported_value_tree(&fact("a"), &Interpretation::new()).map_err(fail("niko"))?;
    ensure(
        matches!(tree, TreeValue::Unknown { lower_bound: TruthValue::False, .. }),
        || format!("niko ex: {tree:?}"),
    )?;
    Ok(format!("{certified} certified values; niko ex: {tree:?}"))
}

fn report(n: usize, title: &str, limit: Option<Duration>, run: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let verdict = run();
    let elapsed = start.elapsed();
    let verdict = match (verdict, limit) {
        (Ok(_), Some(l)) if elapsed > l => Err(format!("took {elapsed:.2?}, limit {l:?}")),
        (v, _) => v,
    };
    let (status, detail) = match &verdict {
        Ok(d) => ("PASS", d),
        Err(d) => ("FAIL", d),
    };
    println!("criterion {n:>2} {status} {title} [{elapsed:.2?}]: {detail}");
    verdict.is_ok()
}

type Criterion<'a> = (&'a str, Option<Duration>, Box<dyn Fn() -> Verdict + 'a>);

/// Numeric arguments select criteria; without any, all run.
fn main() -> ExitCode {
    let selected: BTreeSet<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let exhaustive = common::exhaustive_corpus();
    let mut oracle = common::hand_written();
    oracle.extend(common::random_programs(RANDOM_SEED, RANDOM_PROGRAMS));
    let secs = |s| Some(Duration::from_secs(s));
    let criteria: Vec<Criterion> = vec![
        ("niko reproduction", secs(1), Box::new(niko_reproduction)),
        ("leading game graph", None, Box::new(leading_game_graph)),
        ("consistency corollary", secs(300), Box::new(|| consistency_corollary(&exhaustive))),
        ("saddle property", None, Box::new(|| saddle_property(&exhaustive))),
        ("oracle coincidence", secs(600), Box::new(|| oracle_coincidence(&oracle))),
        ("selectivity falsifier", None, Box::new(selectivity_falsifier)),
        ("strategy/justification round trip", None, Box::new(|| strategy_round_trip(&exhaustive))),
        ("branch-analysis oracle", None, Box::new(|| branch_oracle(&exhaustive))),
        ("splitting solver equivalence", None, Box::new(|| splitting_equivalence(&exhaustive))),
        ("tree coincidence certificate", None, Box::new(|| tree_certificate(&exhaustive))),
    ];
    println!("exhaustive corpus: {} frames; oracle corpus: {} programs", exhaustive.len(), oracle.len());
    let mut results = Vec::new();
    for (i, (title, limit, run)) in criteria.iter().enumerate() {
        if selected.is_empty() || selected.contains(&(i + 1)) {
            results.push(report(i + 1, title, *limit, run));
        }
    }
    let passed = results.iter().filter(|&&ok| ok).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
