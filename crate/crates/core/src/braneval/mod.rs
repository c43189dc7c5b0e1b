//! Branches and branch evaluations.

mod falsify;

pub use falsify::{
    falsify_monotonicity, falsify_selectivity, FalsifierBounds, MonotonicityCounterexample, MonotonicityReport,
    PathUniverse, SelectivityCounterexample,
};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::frame::join;
use crate::logic::{Fact, Sign, SignMap, TruthValue};

/// A branch of a justification: either a finite run of defined facts ending
/// in an open fact, or an ultimately periodic infinite run.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Branch {
    /// `prefix` is nonempty; `terminal` is open.
    Finite { prefix: Vec<Fact>, terminal: Fact },
    /// `prefix · cycle^ω`; `cycle` is nonempty.
    Lasso { prefix: Vec<Fact>, cycle: Vec<Fact> },
}

impl Branch {
    pub fn finite(prefix: Vec<Fact>, terminal: Fact) -> Branch {
        Branch::Finite { prefix, terminal }
    }

    pub fn lasso(prefix: Vec<Fact>, cycle: Vec<Fact>) -> Branch {
        Branch::Lasso { prefix, cycle }
    }

    /// Checks the shape invariants that do not depend on a frame.
    pub fn validate(&self) -> Result<()> {
        let (body, what): (Box<dyn Iterator<Item = &Fact>>, &str) = match self {
            Branch::Finite { prefix, .. } if prefix.is_empty() => {
                return Err(Error::MalformedBranch("finite branch with empty prefix".into()))
            }
            Branch::Lasso { cycle, .. } if cycle.is_empty() => {
                return Err(Error::MalformedBranch("lasso with empty cycle".into()))
            }
            Branch::Finite { prefix, .. } => (Box::new(prefix.iter()), "prefix"),
            Branch::Lasso { prefix, cycle } => (Box::new(prefix.iter().chain(cycle)), "prefix or cycle"),
        };
        for x in body {
            if x.is_logical() {
                return Err(Error::MalformedBranch(format!("logical fact `{x}` in {what}")));
            }
        }
        Ok(())
    }

    pub fn first(&self) -> &Fact {
        match self {
            Branch::Finite { prefix, .. } => &prefix[0],
            Branch::Lasso { prefix, cycle } => prefix.first().unwrap_or(&cycle[0]),
        }
    }

    /// Element at position `i` of the (possibly infinite) sequence.
    pub fn at(&self, i: usize) -> Option<&Fact> {
        match self {
            Branch::Finite { prefix, terminal } => match i.cmp(&prefix.len()) {
                std::cmp::Ordering::Less => Some(&prefix[i]),
                std::cmp::Ordering::Equal => Some(terminal),
                std::cmp::Ordering::Greater => None,
            },
            Branch::Lasso { prefix, cycle } => {
                Some(if i < prefix.len() { &prefix[i] } else { &cycle[(i - prefix.len()) % cycle.len()] })
            }
        }
    }

    /// `p → b`.
    pub fn prepend(&self, p: &[Fact]) -> Branch {
        match self {
            Branch::Finite { prefix, terminal } => {
                Branch::Finite { prefix: p.iter().chain(prefix).cloned().collect(), terminal: terminal.clone() }
            }
            Branch::Lasso { prefix, cycle } => {
                Branch::Lasso { prefix: p.iter().chain(prefix).cloned().collect(), cycle: cycle.clone() }
            }
        }
    }

    /// Number of explicitly stored elements.
    pub fn stored_len(&self) -> usize {
        match self {
            Branch::Finite { prefix, .. } => prefix.len() + 1,
            Branch::Lasso { prefix, cycle } => prefix.len() + cycle.len(),
        }
    }
}

/// `a -> b -> r` for finite branches, `a -> (b -> c)^w` for lassos.
impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Branch::Finite { prefix, terminal } => {
                write!(f, "{} -> {terminal}", join(prefix, " -> "))
            }
            Branch::Lasso { prefix, cycle } => {
                for x in prefix {
                    write!(f, "{x} -> ")?;
                }
                write!(f, "({})^w", join(cycle, " -> "))
            }
        }
    }
}

impl FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Branch> {
        let bad = || Error::Format(format!("not a branch: `{s}`"));
        let parse_seq = |t: &str| -> Result<Vec<Fact>> {
            let t = t.trim();
            if t.is_empty() {
                return Ok(Vec::new());
            }
            t.split("->").map(str::parse).collect()
        };
        let b = if let Some(open) = s.find('(') {
            let close = s.rfind(")^w").ok_or_else(bad)?;
            let head = s[..open].trim().strip_suffix("->").unwrap_or(s[..open].trim());
            Branch::Lasso { prefix: parse_seq(head)?, cycle: parse_seq(&s[open + 1..close])? }
        } else {
            let mut seq = parse_seq(s)?;
            let terminal = seq.pop().ok_or_else(bad)?;
            Branch::Finite { prefix: seq, terminal }
        };
        b.validate()?;
        Ok(b)
    }
}

/// `~b`: elementwise complement, same shape.
pub fn negate_branch(b: &Branch) -> Branch {
    let neg = |xs: &[Fact]| xs.iter().map(Fact::complement).collect();
    match b {
        Branch::Finite { prefix, terminal } => Branch::Finite { prefix: neg(prefix), terminal: terminal.complement() },
        Branch::Lasso { prefix, cycle } => Branch::Lasso { prefix: neg(prefix), cycle: neg(cycle) },
    }
}

/// Capabilities an evaluation declares.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct EvaluationFlags {
    pub consistent: bool,
    pub monotone_selective: bool,
    pub transitive: bool,
}

pub type PluginFn = dyn Fn(&Branch, &SignMap) -> Fact + Send + Sync;

/// A user-supplied evaluation on finite branches and lassos.
#[derive(Clone)]
pub struct PluginEvaluation {
    pub name: String,
    pub eval: Arc<PluginFn>,
    pub flags: EvaluationFlags,
}

impl PluginEvaluation {
    pub fn new<F>(name: &str, flags: EvaluationFlags, eval: F) -> PluginEvaluation
    where
        F: Fn(&Branch, &SignMap) -> Fact + Send + Sync + 'static,
    {
        PluginEvaluation { name: name.to_string(), eval: Arc::new(eval), flags }
    }
}

impl fmt::Debug for PluginEvaluation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PluginEvaluation").field("name", &self.name).field("flags", &self.flags).finish()
    }
}

#[derive(Clone, Debug)]
pub enum BranchEvaluation {
    /// Supported: the second element.
    Sp,
    /// Kripke-Kleene: the terminal, or `u` for infinite branches.
    Kk,
    /// Well-founded: infinite branches by the sign of their tail.
    Wf,
    /// Stable: the first element whose sign differs from the start.
    St,
    /// Like `Wf`, but infinite branches whose tail is not functional map to `u`.
    Ex,
    Plugin(PluginEvaluation),
}

impl BranchEvaluation {
    pub const BUILTINS: [BranchEvaluation; 5] =
        [BranchEvaluation::Sp, BranchEvaluation::Kk, BranchEvaluation::Wf, BranchEvaluation::St, BranchEvaluation::Ex];

    pub fn name(&self) -> &str {
        match self {
            BranchEvaluation::Sp => "sp",
            BranchEvaluation::Kk => "kk",
            BranchEvaluation::Wf => "wf",
            BranchEvaluation::St => "st",
            BranchEvaluation::Ex => "ex",
            BranchEvaluation::Plugin(p) => &p.name,
        }
    }

    pub fn flags(&self) -> EvaluationFlags {
        let f = |monotone_selective, transitive| EvaluationFlags { consistent: true, monotone_selective, transitive };
        match self {
            BranchEvaluation::Sp | BranchEvaluation::St => f(true, false),
            BranchEvaluation::Kk | BranchEvaluation::Wf => f(true, true),
            BranchEvaluation::Ex => f(false, true),
            BranchEvaluation::Plugin(p) => p.flags,
        }
    }

    pub fn require_monotone_selective(&self) -> Result<()> {
        if self.flags().monotone_selective {
            Ok(())
        } else {
            Err(Error::Capability { evaluation: self.name().to_string(), capability: "monotone+selective" })
        }
    }

    pub fn require_consistent(&self) -> Result<()> {
        if self.flags().consistent {
            Ok(())
        } else {
            Err(Error::Capability { evaluation: self.name().to_string(), capability: "consistency" })
        }
    }
}

impl fmt::Display for BranchEvaluation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BranchEvaluation {
    type Err = Error;

    fn from_str(s: &str) -> Result<BranchEvaluation> {
        match s.to_ascii_lowercase().as_str() {
            "sp" => Ok(BranchEvaluation::Sp),
            "kk" => Ok(BranchEvaluation::Kk),
            "wf" => Ok(BranchEvaluation::Wf),
            "st" => Ok(BranchEvaluation::St),
            "ex" => Ok(BranchEvaluation::Ex),
            _ => Err(Error::Format(format!("unknown branch evaluation `{s}` (expected sp, kk, wf, st or ex)"))),
        }
    }
}

fn sign_of(sgn: &SignMap, x: &Fact) -> Result<Sign> {
    sgn.sign(x).ok_or_else(|| Error::MalformedBranch(format!("fact `{x}` has no sign")))
}

/// `t` for an all-negative cycle, `f` for an all-positive one, `u` otherwise.
fn tail_value(cycle: &[Fact], sgn: &SignMap) -> Result<Fact> {
    let mut signs = BTreeSet::new();
    for x in cycle {
        signs.insert(sign_of(sgn, x)?);
    }
    Ok(match (signs.contains(&Sign::Plus), signs.contains(&Sign::Minus)) {
        (true, false) => Fact::FALSE,
        (false, true) => Fact::TRUE,
        _ => Fact::UNKNOWN,
    })
}

/// True iff in the cyclic sequence every label has a single successor label.
pub(crate) fn cycle_is_functional(cycle: &[Fact]) -> bool {
    let mut next: BTreeMap<&Fact, &Fact> = BTreeMap::new();
    for (i, x) in cycle.iter().enumerate() {
        let y = &cycle[(i + 1) % cycle.len()];
        if *next.entry(x).or_insert(y) != y {
            return false;
        }
    }
    true
}

fn wf_value(b: &Branch, sgn: &SignMap) -> Result<Fact> {
    match b {
        Branch::Finite { terminal, .. } => Ok(terminal.clone()),
        Branch::Lasso { cycle, .. } => tail_value(cycle, sgn),
    }
}

/// Applies a branch evaluation to a branch.
pub fn eval_branch(eval: &BranchEvaluation, b: &Branch, sgn: &SignMap) -> Result<Fact> {
    b.validate()?;
    match eval {
        BranchEvaluation::Sp => Ok(b.at(1).cloned().expect("validated branches have two elements")),
        BranchEvaluation::Kk => Ok(match b {
            Branch::Finite { terminal, .. } => terminal.clone(),
            Branch::Lasso { .. } => Fact::UNKNOWN,
        }),
        BranchEvaluation::Wf => wf_value(b, sgn),
        BranchEvaluation::St => {
            let start = sign_of(sgn, b.first())?;
            let defined: Box<dyn Iterator<Item = &Fact>> = match b {
                Branch::Finite { prefix, .. } => Box::new(prefix.iter()),
                Branch::Lasso { prefix, cycle } => Box::new(prefix.iter().chain(cycle)),
            };
            for x in defined {
                if sign_of(sgn, x)? != start {
                    return Ok(x.clone());
                }
            }
            wf_value(b, sgn)
        }
        BranchEvaluation::Ex => match b {
            Branch::Finite { terminal, .. } => Ok(terminal.clone()),
            Branch::Lasso { cycle, .. } if !cycle_is_functional(cycle) => Ok(Fact::UNKNOWN),
            Branch::Lasso { cycle, .. } => tail_value(cycle, sgn),
        },
        BranchEvaluation::Plugin(p) => Ok((p.eval)(b, sgn)),
    }
}

/// `I(B(b))`.
pub fn branch_value(
    eval: &BranchEvaluation,
    b: &Branch,
    sgn: &SignMap,
    interp: &crate::logic::Interpretation,
) -> Result<TruthValue> {
    interp.value(&eval_branch(eval, b, sgn)?)
}

/// One failure of `B(~b) = ~B(b)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConsistencyFailure {
    pub branch: Branch,
    pub value: Fact,
    pub negated_value: Fact,
}

/// Lists every sampled branch on which the evaluation is not consistent.
pub fn check_consistent_evaluation<'a, I>(eval: &BranchEvaluation, sgn: &SignMap, sample: I) -> Result<Vec<ConsistencyFailure>>
where
    I: IntoIterator<Item = &'a Branch>,
{
    let mut out = Vec::new();
    for b in sample {
        let value = eval_branch(eval, b, sgn)?;
        let negated_value = eval_branch(eval, &negate_branch(b), sgn)?;
        if negated_value != value.complement() {
            out.push(ConsistencyFailure { branch: b.clone(), value, negated_value });
        }
    }
    Ok(out)
}

/// All finite branches and lassos over the given defined facts with at most
/// `max_prefix` prefix elements and `max_cycle` cycle elements. Finite
/// branches end in one of `terminals`.
pub fn enumerate_branches(defined: &[Fact], terminals: &[Fact], max_prefix: usize, max_cycle: usize) -> Vec<Branch> {
    let mut words: Vec<Vec<Vec<Fact>>> = vec![vec![Vec::new()]];
    for len in 1..=max_prefix.max(max_cycle) {
        let next = words[len - 1]
            .iter()
            .flat_map(|w| {
                defined.iter().map(move |x| {
                    let mut w = w.clone();
                    w.push(x.clone());
                    w
                })
            })
            .collect();
        words.push(next);
    }
    let mut out = Vec::new();
    for plen in 1..=max_prefix {
        for p in &words[plen] {
            for t in terminals {
                out.push(Branch::finite(p.clone(), t.clone()));
            }
        }
    }
    for plen in 0..=max_prefix {
        for clen in 1..=max_cycle {
            for p in &words[plen] {
                for c in &words[clen] {
                    out.push(Branch::lasso(p.clone(), c.clone()));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::Interpretation;
    use proptest::prelude::*;

    fn f(s: &str) -> Fact {
        s.parse().unwrap()
    }

    fn seq(items: &[&str]) -> Vec<Fact> {
        items.iter().map(|s| f(s)).collect()
    }

    fn ev(e: BranchEvaluation, b: &Branch) -> Fact {
        eval_branch(&e, b, &SignMap::new()).unwrap()
    }

    #[test]
    fn documented_examples() {
        assert_eq!(ev(BranchEvaluation::Sp, &Branch::finite(seq(&["p"]), f("r"))), f("r"));
        assert_eq!(ev(BranchEvaluation::Wf, &Branch::lasso(vec![], seq(&["a", "b"]))), Fact::FALSE);
        assert_eq!(ev(BranchEvaluation::Ex, &Branch::lasso(vec![], seq(&["a", "b", "a", "c"]))), Fact::UNKNOWN);
    }

    #[test]
    fn per_evaluation_cases() {
        let mixed = Branch::lasso(seq(&["p"]), seq(&["~q", "p"]));
        assert_eq!(ev(BranchEvaluation::Sp, &mixed), f("~q"));
        assert_eq!(ev(BranchEvaluation::Kk, &mixed), Fact::UNKNOWN);
        assert_eq!(ev(BranchEvaluation::Wf, &mixed), Fact::UNKNOWN);
        assert_eq!(ev(BranchEvaluation::St, &mixed), f("~q"));
        assert_eq!(ev(BranchEvaluation::Ex, &mixed), Fact::UNKNOWN);

        let neg = Branch::lasso(vec![], seq(&["~a", "~b"]));
        assert_eq!(ev(BranchEvaluation::Wf, &neg), Fact::TRUE);
        assert_eq!(ev(BranchEvaluation::St, &neg), Fact::TRUE);
        assert_eq!(ev(BranchEvaluation::Ex, &neg), Fact::TRUE);
        assert_eq!(ev(BranchEvaluation::Sp, &neg), f("~b"));

        // Open terminals carry no sign for the stable evaluation.
        let fin = Branch::finite(seq(&["p", "q"]), f("~r"));
        assert_eq!(ev(BranchEvaluation::St, &fin), f("~r"));
        assert_eq!(ev(BranchEvaluation::Kk, &fin), f("~r"));
        assert_eq!(ev(BranchEvaluation::Sp, &fin), f("q"));

        let custom = SignMap::new().with("q", Sign::Minus);
        assert_eq!(eval_branch(&BranchEvaluation::St, &fin, &custom).unwrap(), f("q"));
    }

    #[test]
    fn malformed_branches_are_rejected() {
        let e = BranchEvaluation::Wf;
        let sgn = SignMap::new();
        assert!(matches!(eval_branch(&e, &Branch::lasso(seq(&["a"]), vec![]), &sgn), Err(Error::MalformedBranch(_))));
        assert!(matches!(eval_branch(&e, &Branch::finite(vec![], f("r")), &sgn), Err(Error::MalformedBranch(_))));
        assert!(matches!(
            eval_branch(&e, &Branch::finite(vec![Fact::TRUE], f("r")), &sgn),
            Err(Error::MalformedBranch(_))
        ));
    }

    #[test]
    fn negation_examples() {
        let b = Branch::finite(seq(&["p"]), f("r"));
        assert_eq!(negate_branch(&b), Branch::finite(seq(&["~p"]), f("~r")));
        let l = Branch::lasso(vec![], seq(&["a", "b"]));
        assert_eq!(negate_branch(&l), Branch::lasso(vec![], seq(&["~a", "~b"])));
        assert_eq!(negate_branch(&negate_branch(&l)), l);
    }

    fn three_pair_sample() -> Vec<Branch> {
        let defined = seq(&["a", "~a", "b", "~b", "c", "~c"]);
        let terminals = vec![f("r"), f("~r"), Fact::TRUE, Fact::FALSE, Fact::UNKNOWN];
        enumerate_branches(&defined, &terminals, 2, 3)
    }

    #[test]
    fn builtins_are_consistent_on_generated_branches() {
        let sample = three_pair_sample();
        for e in BranchEvaluation::BUILTINS {
            let report = check_consistent_evaluation(&e, &SignMap::new(), &sample).unwrap();
            assert!(report.is_empty(), "{e}: {:?}", report.first());
        }
        let flipped = SignMap::new().with("b", Sign::Minus);
        for e in BranchEvaluation::BUILTINS {
            assert!(check_consistent_evaluation(&e, &flipped, &sample).unwrap().is_empty(), "{e}");
        }
    }

    #[test]
    fn constant_plugin_is_inconsistent() {
        let plugin = BranchEvaluation::Plugin(PluginEvaluation::new("const-t", EvaluationFlags::default(), |_, _| Fact::TRUE));
        let sample = [Branch::finite(seq(&["a"]), f("r"))];
        let report = check_consistent_evaluation(&plugin, &SignMap::new(), &sample).unwrap();
        assert_eq!(report.len(), 1);
    }

    #[test]
    fn sp_depends_on_second_element_only() {
        let sample = three_pair_sample();
        let mut seen: BTreeMap<(Fact, Fact), Fact> = BTreeMap::new();
        for b in &sample {
            let key = (b.at(0).unwrap().clone(), b.at(1).unwrap().clone());
            let v = ev(BranchEvaluation::Sp, b);
            assert_eq!(seen.entry(key).or_insert_with(|| v.clone()), &v);
        }
    }

    #[test]
    fn st_prefix_cases() {
        let sample = three_pair_sample();
        let sgn = SignMap::new();
        let sign = |x: &Fact| sgn.sign(x).unwrap();
        for b in &sample {
            let tail = ev(BranchEvaluation::St, b);
            let x0 = b.first().clone();
            // Same-signed path in front keeps the value.
            let same: Vec<Fact> = seq(&["a", "b", "~a", "~b"]).into_iter().filter(|y| sign(y) == sign(&x0)).take(2).collect();
            assert_eq!(ev(BranchEvaluation::St, &b.prepend(&same)), tail, "{b}");
            // A sign switch inside the path fixes the value.
            let switching = vec![f("a"), f("~c")];
            assert_eq!(ev(BranchEvaluation::St, &b.prepend(&switching)), f("~c"));
        }
    }

    #[test]
    fn branch_text_round_trip() {
        for b in three_pair_sample().iter().step_by(97) {
            assert_eq!(&b.to_string().parse::<Branch>().unwrap(), b);
        }
    }

    fn arb_fact() -> impl Strategy<Value = Fact> {
        (0..3usize, any::<bool>()).prop_map(|(i, pos)| {
            let n = ["a", "b", "c"][i];
            if pos { Fact::pos(n) } else { Fact::neg(n) }
        })
    }

    fn arb_branch() -> impl Strategy<Value = Branch> {
        prop_oneof![
            (prop::collection::vec(arb_fact(), 1..4), prop::sample::select(vec![f("r"), f("~r"), Fact::TRUE, Fact::UNKNOWN]))
                .prop_map(|(p, t)| Branch::finite(p, t)),
            (prop::collection::vec(arb_fact(), 0..3), prop::collection::vec(arb_fact(), 1..5))
                .prop_map(|(p, c)| Branch::lasso(p, c)),
        ]
    }

    proptest! {
        #[test]
        fn negation_is_an_involution(b in arb_branch()) {
            prop_assert_eq!(negate_branch(&negate_branch(&b)), b);
        }

        #[test]
        fn builtins_commute_with_negation(b in arb_branch()) {
            for e in BranchEvaluation::BUILTINS {
                let v = ev(e.clone(), &b);
                prop_assert_eq!(ev(e, &negate_branch(&b)), v.complement());
            }
        }

        #[test]
        fn lasso_rotation_is_invisible_to_tail_evaluations(p in prop::collection::vec(arb_fact(), 0..3),
                                                           c in prop::collection::vec(arb_fact(), 1..5)) {
            // p · c^ω = (p · c0) · (c1 .. cn c0)^ω
            let mut rotated = c.clone();
            rotated.rotate_left(1);
            let mut longer = p.clone();
            longer.push(c[0].clone());
            let a = Branch::lasso(p, c);
            let b = Branch::lasso(longer, rotated);
            let interp = Interpretation::from_pairs([("a", TruthValue::True), ("b", TruthValue::Unknown), ("c", TruthValue::False)]);
            for e in BranchEvaluation::BUILTINS {
                prop_assert_eq!(
                    branch_value(&e, &a, &SignMap::new(), &interp).unwrap(),
                    branch_value(&e, &b, &SignMap::new(), &interp).unwrap()
                );
            }
        }
    }
}
