//! Justification frames: defined facts, rules `head <- body`, selection
//! functions and complementation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::logic::{is_identifier, Fact, Polarity, TruthValue};

/// Index of a rule in its frame. Ids follow the sorted `(head, body)` order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RuleId(pub usize);

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rule {
    pub id: RuleId,
    pub head: Fact,
    pub body: BTreeSet<Fact>,
}

impl Rule {
    /// `head <- b1,b2` with no spaces, the form used for rule-state labels.
    pub fn compact(&self) -> String {
        format!("{}<-{}", self.head, join(self.body.iter(), ","))
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <- {}.", self.head, join(self.body.iter(), ", "))
    }
}

pub(crate) fn join<T: fmt::Display>(items: impl IntoIterator<Item = T>, sep: &str) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}

/// A justification frame.
///
/// `defined` is the set of defined facts; every fact not in it is open.
/// `open` lists open facts that should be part of the fact universe even when
/// no rule mentions them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    defined: BTreeSet<Fact>,
    open: BTreeSet<Fact>,
    rules: Vec<Rule>,
    by_head: BTreeMap<Fact, Vec<RuleId>>,
}

impl Frame {
    /// Builds a frame. Rules are deduplicated on `(head, body)` and numbered
    /// in sorted order; nothing is validated here (see [`validate_frame`]).
    pub fn new<D, O, R>(defined: D, open: O, rules: R) -> Frame
    where
        D: IntoIterator<Item = Fact>,
        O: IntoIterator<Item = Fact>,
        R: IntoIterator<Item = (Fact, BTreeSet<Fact>)>,
    {
        let pairs: BTreeSet<(Fact, BTreeSet<Fact>)> = rules.into_iter().collect();
        let rules: Vec<Rule> =
            pairs.into_iter().enumerate().map(|(i, (head, body))| Rule { id: RuleId(i), head, body }).collect();
        let mut by_head: BTreeMap<Fact, Vec<RuleId>> = BTreeMap::new();
        for r in &rules {
            by_head.entry(r.head.clone()).or_default().push(r.id);
        }
        Frame { defined: defined.into_iter().collect(), open: open.into_iter().collect(), rules, by_head }
    }

    pub fn defined(&self) -> &BTreeSet<Fact> {
        &self.defined
    }

    pub fn declared_open(&self) -> &BTreeSet<Fact> {
        &self.open
    }

    pub fn is_defined(&self, x: &Fact) -> bool {
        self.defined.contains(x)
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, id: RuleId) -> &Rule {
        &self.rules[id.0]
    }

    pub fn rules_for<'a>(&'a self, x: &Fact) -> impl Iterator<Item = &'a Rule> + 'a {
        self.by_head.get(x).into_iter().flatten().map(move |id| &self.rules[id.0])
    }

    pub fn rule_count_for(&self, x: &Fact) -> usize {
        self.by_head.get(x).map_or(0, Vec::len)
    }

    /// Looks up the rule with this head and body.
    pub fn find_rule(&self, head: &Fact, body: &BTreeSet<Fact>) -> Option<&Rule> {
        self.rules_for(head).find(|r| &r.body == body)
    }

    /// All facts the frame talks about, closed under `~`, plus the three
    /// logical constants.
    pub fn universe(&self) -> BTreeSet<Fact> {
        let mut out: BTreeSet<Fact> = TruthValue::ALL.iter().map(|v| Fact::Logical(*v)).collect();
        let mentioned = self
            .defined
            .iter()
            .chain(self.open.iter())
            .chain(self.rules.iter().flat_map(|r| std::iter::once(&r.head).chain(r.body.iter())));
        for x in mentioned {
            out.insert(x.clone());
            out.insert(x.complement());
        }
        out
    }

    /// Atom names of all literals in the universe.
    pub fn names(&self) -> BTreeSet<crate::logic::Name> {
        self.universe().iter().filter_map(|x| x.name().cloned()).collect()
    }

    /// Names whose literals are open.
    pub fn open_names(&self) -> BTreeSet<crate::logic::Name> {
        self.universe().iter().filter(|x| !self.is_defined(x)).filter_map(|x| x.name().cloned()).collect()
    }

    pub fn defined_names(&self) -> BTreeSet<crate::logic::Name> {
        self.defined.iter().filter_map(|x| x.name().cloned()).collect()
    }

    fn rule_set(&self) -> BTreeSet<(&Fact, &BTreeSet<Fact>)> {
        self.rules.iter().map(|r| (&r.head, &r.body)).collect()
    }

    /// Same defined/open sets with additional rules.
    pub fn with_rules<R: IntoIterator<Item = (Fact, BTreeSet<Fact>)>>(&self, extra: R) -> Frame {
        let all = self.rules.iter().map(|r| (r.head.clone(), r.body.clone())).chain(extra);
        Frame::new(self.defined.iter().cloned(), self.open.iter().cloned(), all)
    }
}

/// One structural problem found by [`validate_frame`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Diagnostic {
    NotComplementClosed(Fact),
    LogicalDefined(Fact),
    NoRules(Fact),
    EmptyBody(Fact),
    HeadNotDefined(Fact),
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::NotComplementClosed(x) => write!(f, "defined set not ~-closed: `{x}` defined but `{}` is not", x.complement()),
            Diagnostic::LogicalDefined(x) => write!(f, "logical fact `{x}` is defined"),
            Diagnostic::NoRules(x) => write!(f, "defined fact `{x}` has no rule"),
            Diagnostic::EmptyBody(x) => write!(f, "rule for `{x}` has an empty body"),
            Diagnostic::HeadNotDefined(x) => write!(f, "rule head `{x}` is not defined"),
        }
    }
}

/// Checks the frame invariants. An empty result means the frame is valid.
pub fn validate_frame(fr: &Frame) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for x in &fr.defined {
        if x.is_logical() {
            out.push(Diagnostic::LogicalDefined(x.clone()));
            continue;
        }
        if !fr.defined.contains(&x.complement()) {
            out.push(Diagnostic::NotComplementClosed(x.clone()));
        }
        if fr.rule_count_for(x) == 0 {
            out.push(Diagnostic::NoRules(x.clone()));
        }
    }
    for r in &fr.rules {
        if r.body.is_empty() {
            out.push(Diagnostic::EmptyBody(r.head.clone()));
        }
        if !fr.defined.contains(&r.head) {
            out.push(Diagnostic::HeadNotDefined(r.head.clone()));
        }
    }
    out
}

/// Chooses one body element from every rule of `head`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelectionFunction {
    pub head: Fact,
    pub choices: Vec<(RuleId, Fact)>,
}

impl SelectionFunction {
    pub fn image(&self) -> BTreeSet<Fact> {
        self.choices.iter().map(|(_, f)| f.clone()).collect()
    }
}

/// Enumerates the selection functions of `x` in odometer order: rules in id
/// order, body elements in fact order, last rule varying fastest.
pub fn selection_functions(fr: &Frame, x: &Fact) -> Result<Vec<SelectionFunction>> {
    if !fr.is_defined(x) {
        return Err(Error::UndefinedFact(x.clone()));
    }
    let rules: Vec<(RuleId, Vec<&Fact>)> = fr.rules_for(x).map(|r| (r.id, r.body.iter().collect())).collect();
    let mut out = Vec::new();
    if rules.iter().any(|(_, b)| b.is_empty()) {
        return Ok(out);
    }
    let mut digits = vec![0usize; rules.len()];
    loop {
        out.push(SelectionFunction {
            head: x.clone(),
            choices: rules.iter().zip(&digits).map(|((id, body), d)| (*id, body[*d].clone())).collect(),
        });
        // Advance the odometer.
        let mut i = rules.len();
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < rules[i].1.len() {
                break;
            }
            digits[i] = 0;
        }
    }
}

/// The distinct images of the selection functions of `x`, built rule by
/// rule with deduplication, so the cost is bounded by the number of images
/// rather than the number of selection functions.
pub fn selection_images(fr: &Frame, x: &Fact) -> Result<BTreeSet<BTreeSet<Fact>>> {
    if !fr.is_defined(x) {
        return Err(Error::UndefinedFact(x.clone()));
    }
    let mut images: BTreeSet<BTreeSet<Fact>> = BTreeSet::from([BTreeSet::new()]);
    for r in fr.rules_for(x) {
        let mut next = BTreeSet::new();
        for img in &images {
            for y in &r.body {
                let mut grown = img.clone();
                grown.insert(y.clone());
                next.insert(grown);
            }
        }
        images = next;
    }
    if fr.rule_count_for(x) == 0 {
        images.clear();
    }
    Ok(images)
}

/// The complement rules `~x <- ~im(s)` for every defined `x` that has rules.
fn complement_rules(fr: &Frame) -> Result<BTreeSet<(Fact, BTreeSet<Fact>)>> {
    let mut out = BTreeSet::new();
    for x in fr.defined.iter().filter(|x| fr.rule_count_for(x) > 0) {
        for img in selection_images(fr, x)? {
            out.insert((x.complement(), img.iter().map(Fact::complement).collect()));
        }
    }
    Ok(out)
}

/// `R ∪ R*`: adds `~x <- ~im(s)` for every selection function `s` of every
/// defined fact with rules.
///
/// Missing rules for some defined facts are tolerated (they are what this
/// operation adds); every other diagnostic is an error.
pub fn complementation(fr: &Frame) -> Result<Frame> {
    let hard: Vec<Diagnostic> =
        validate_frame(fr).into_iter().filter(|d| !matches!(d, Diagnostic::NoRules(_))).collect();
    if !hard.is_empty() {
        return Err(Error::Validation(hard));
    }
    Ok(fr.with_rules(complement_rules(fr)?))
}

/// True iff complementation adds no new rule.
pub fn is_complementary(fr: &Frame) -> bool {
    match complement_rules(fr) {
        Ok(extra) => {
            let have = fr.rule_set();
            extra.iter().all(|(h, b)| have.contains(&(h, b)))
        }
        Err(_) => false,
    }
}

/// Repeats complementation until the frame is complementary.
pub fn complementary_closure(fr: &Frame, rule_budget: usize) -> Result<Frame> {
    let mut cur = complementation(fr)?;
    loop {
        let next = complementation(&cur)?;
        if next.rules.len() > rule_budget {
            return Err(Error::Budget { what: "complementary closure rules", needed: next.rules.len() as u128, budget: rule_budget as u128 });
        }
        if next.rules.len() == cur.rules.len() {
            return Ok(cur);
        }
        cur = next;
    }
}

/// Adds every rule `x <- A'` with `A ⊆ A' ⊆ universe` for each rule `x <- A`.
pub fn superset_close(fr: &Frame, universe: &BTreeSet<Fact>, rule_budget: usize) -> Result<Frame> {
    let mut extra: BTreeSet<(Fact, BTreeSet<Fact>)> = BTreeSet::new();
    for r in &fr.rules {
        let free: Vec<&Fact> = universe.iter().filter(|f| !r.body.contains(*f)).collect();
        if free.len() >= 63 {
            return Err(Error::Budget { what: "superset closure rules", needed: u128::MAX, budget: rule_budget as u128 });
        }
        let count = 1u64 << free.len();
        if extra.len() as u64 + count > rule_budget as u64 {
            return Err(Error::Budget {
                what: "superset closure rules",
                needed: extra.len() as u128 + count as u128,
                budget: rule_budget as u128,
            });
        }
        for mask in 0..count {
            let mut body = r.body.clone();
            for (i, f) in free.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    body.insert((*f).clone());
                }
            }
            extra.insert((r.head.clone(), body));
        }
    }
    Ok(fr.with_rules(extra))
}

/// Frame text format:
///
/// ```text
/// #defined a b
/// #open r
/// a <- b, ~r.
/// ~a <- ~b.
/// ```
///
/// `#defined` lists positive names; their complements are implied.
impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let defined: BTreeSet<_> = self.defined.iter().filter_map(|x| x.name()).collect();
        if !defined.is_empty() {
            writeln!(f, "#defined {}", join(defined, " "))?;
        }
        let open: BTreeSet<_> = self.open.iter().filter_map(|x| x.name()).collect();
        if !open.is_empty() {
            writeln!(f, "#open {}", join(open, " "))?;
        }
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

pub fn parse_frame(text: &str) -> Result<Frame> {
    let mut defined = BTreeSet::new();
    let mut open = BTreeSet::new();
    let mut rules = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('%').next().unwrap_or("").trim();
        let syntax = |column: usize, message: String| Error::Syntax { line: lineno + 1, column, message };
        if line.is_empty() {
            continue;
        }
        let col_of = |s: &str| raw.find(s).map_or(1, |c| c + 1);
        if let Some(rest) = line.strip_prefix('#').filter(|r| r.starts_with("defined") || r.starts_with("open")) {
            let (kind, names) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
            for n in names.split_whitespace() {
                if !is_identifier(n) {
                    return Err(syntax(col_of(n), format!("expected an atom name, found `{n}`")));
                }
                let set = if kind == "defined" { &mut defined } else { &mut open };
                set.insert(Fact::pos(n));
                set.insert(Fact::neg(n));
            }
            if kind != "defined" && kind != "open" {
                return Err(syntax(1, format!("unknown directive `#{kind}`")));
            }
            continue;
        }
        let Some(stmt) = line.strip_suffix('.') else {
            return Err(syntax(raw.len().max(1), "expected `.` at end of rule".into()));
        };
        let Some((head, body)) = stmt.split_once("<-") else {
            return Err(syntax(1, "expected `<-`".into()));
        };
        let head: Fact = head.parse().map_err(|_| syntax(1, format!("bad rule head `{}`", head.trim())))?;
        let mut body_set = BTreeSet::new();
        if !body.trim().is_empty() {
            for part in body.split(',') {
                let f: Fact = part.parse().map_err(|_| syntax(col_of(part.trim()), format!("bad body fact `{}`", part.trim())))?;
                body_set.insert(f);
            }
        }
        rules.push((head, body_set));
    }
    Ok(Frame::new(defined, open, rules))
}

/// Convenience for tests and examples: positive names become defined facts
/// together with their complements.
pub fn defined_pairs<'a, I: IntoIterator<Item = &'a str>>(names: I) -> BTreeSet<Fact> {
    names.into_iter().flat_map(|n| [Fact::literal(n.into(), Polarity::Pos), Fact::literal(n.into(), Polarity::Neg)]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> Fact {
        s.parse().unwrap()
    }

    fn body(items: &[&str]) -> BTreeSet<Fact> {
        items.iter().map(|s| f(s)).collect()
    }

    fn niko() -> Frame {
        Frame::new(
            defined_pairs(["a", "b", "c"]),
            [],
            [(f("a"), body(&["b"])), (f("a"), body(&["c"])), (f("b"), body(&["a"])), (f("c"), body(&["a"]))],
        )
    }

    fn leading() -> Frame {
        Frame::new(
            defined_pairs(["p", "q"]),
            [f("r"), f("~r")],
            [(f("p"), body(&["~q"])), (f("p"), body(&["r"])), (f("q"), body(&["~p"]))],
        )
    }

    fn rule_strings(fr: &Frame) -> BTreeSet<String> {
        fr.rules().iter().map(|r| r.to_string()).collect()
    }

    #[test]
    fn validator_reports_each_violation() {
        let fr = Frame::new([f("a")], [], [(f("a"), body(&["b"]))]);
        assert!(validate_frame(&fr).contains(&Diagnostic::NotComplementClosed(f("a"))));

        let fr = Frame::new(defined_pairs(["a"]), [], [(f("a"), BTreeSet::new()), (f("~a"), body(&["#t"]))]);
        assert_eq!(validate_frame(&fr), vec![Diagnostic::EmptyBody(f("a"))]);

        let fr = Frame::new([Fact::TRUE], [], []);
        assert_eq!(validate_frame(&fr), vec![Diagnostic::LogicalDefined(Fact::TRUE)]);

        let fr = Frame::new(defined_pairs(["a"]), [], [(f("a"), body(&["#t"])), (f("b"), body(&["#t"]))]);
        let ds = validate_frame(&fr);
        assert!(ds.contains(&Diagnostic::NoRules(f("~a"))));
        assert!(ds.contains(&Diagnostic::HeadNotDefined(f("b"))));
    }

    #[test]
    fn leading_after_complementation_is_valid() {
        let fr = complementation(&leading()).unwrap();
        assert!(validate_frame(&fr).is_empty(), "{:?}", validate_frame(&fr));
    }

    #[test]
    fn selection_examples() {
        let fr = leading();
        let sel = selection_functions(&fr, &f("p")).unwrap();
        assert_eq!(sel.len(), 1);
        assert_eq!(sel[0].image(), body(&["~q", "r"]));

        let fr = Frame::new(defined_pairs(["x"]), [], [(f("x"), body(&["a", "b"]))]);
        let images: Vec<_> = selection_functions(&fr, &f("x")).unwrap().iter().map(|s| s.image()).collect();
        assert_eq!(images, vec![body(&["a"]), body(&["b"])]);

        assert!(matches!(selection_functions(&fr, &f("zz")), Err(Error::UndefinedFact(_))));
    }

    #[test]
    fn selection_images_match_selection_functions() {
        for fr in [complementation(&niko()).unwrap(), complementation(&leading()).unwrap()] {
            for x in fr.defined().iter().filter(|x| fr.rule_count_for(x) > 0) {
                let direct: BTreeSet<_> = selection_functions(&fr, x).unwrap().iter().map(|s| s.image()).collect();
                assert_eq!(selection_images(&fr, x).unwrap(), direct, "{x}");
            }
        }
    }

    #[test]
    fn selection_count_is_product_of_bodies() {
        let fr = complementation(&niko()).unwrap();
        for x in fr.defined() {
            let expected: usize = fr.rules_for(x).map(|r| r.body.len()).product();
            assert_eq!(selection_functions(&fr, x).unwrap().len(), expected, "{x}");
        }
        let na = selection_functions(&fr, &f("~a")).unwrap();
        assert_eq!(na.len(), 2);
        assert_eq!(na[0].image(), body(&["~b"]));
        assert_eq!(na[1].image(), body(&["~c"]));
    }

    #[test]
    fn complementation_examples() {
        let fr = complementation(&niko()).unwrap();
        let added: BTreeSet<String> = rule_strings(&fr).difference(&rule_strings(&niko())).cloned().collect();
        let expected: BTreeSet<String> =
            ["~a <- ~b, ~c.", "~b <- ~a.", "~c <- ~a."].iter().map(|s| s.to_string()).collect();
        assert_eq!(added, expected);

        let fr = complementation(&leading()).unwrap();
        let added: BTreeSet<String> = rule_strings(&fr).difference(&rule_strings(&leading())).cloned().collect();
        let expected: BTreeSet<String> = ["~p <- q, ~r.", "~q <- p."].iter().map(|s| s.to_string()).collect();
        assert_eq!(added, expected);

        let again = complementation(&fr).unwrap();
        assert_eq!(rule_strings(&again), rule_strings(&fr));
    }

    #[test]
    fn complementation_rejects_invalid_frames() {
        let fr = Frame::new([f("a")], [], [(f("a"), body(&["b"]))]);
        assert!(matches!(complementation(&fr), Err(Error::Validation(_))));
    }

    #[test]
    fn complementarity_checks() {
        let fr = Frame::new(defined_pairs(["a"]), [], [(f("a"), body(&["b"]))]);
        assert!(!is_complementary(&fr));

        // Independent re-derivation of R* for niko: ~x gets one rule per
        // element of the product of x's bodies.
        let fr = complementation(&niko()).unwrap();
        let mut expected = true;
        for x in fr.defined() {
            let bodies: Vec<Vec<Fact>> = fr.rules_for(x).map(|r| r.body.iter().cloned().collect()).collect();
            let mut images: Vec<BTreeSet<Fact>> = vec![BTreeSet::new()];
            for b in &bodies {
                images = images
                    .iter()
                    .flat_map(|acc| b.iter().map(move |e| {
                        let mut n = acc.clone();
                        n.insert(e.complement());
                        n
                    }))
                    .collect();
            }
            for img in images {
                if fr.find_rule(&x.complement(), &img).is_none() {
                    expected = false;
                }
            }
        }
        assert_eq!(is_complementary(&fr), expected);
        assert!(expected);
    }

    #[test]
    fn superset_closure_examples() {
        let fr = Frame::new(defined_pairs(["a"]), [], [(f("a"), body(&["b"]))]);
        let closed = superset_close(&fr, &body(&["b", "c"]), 100).unwrap();
        assert!(closed.find_rule(&f("a"), &body(&["b", "c"])).is_some());
        assert_eq!(closed.rules().len(), 2);

        let unchanged = superset_close(&fr, &body(&["b"]), 100).unwrap();
        assert_eq!(unchanged, fr);

        let wide: BTreeSet<Fact> = (0..12).map(|i| Fact::pos(&format!("v{i}"))).collect();
        assert!(matches!(superset_close(&fr, &wide, 100), Err(Error::Budget { .. })));
    }

    #[test]
    fn superset_closure_of_complemented_program_is_complementary() {
        // Two-atom program a <- b, ~c. c <- a. with b open.
        let base = Frame::new(
            defined_pairs(["a", "c"]),
            [],
            [(f("a"), body(&["b", "~c"])), (f("c"), body(&["a"]))],
        );
        let fr = complementation(&base).unwrap();
        let universe: BTreeSet<Fact> = fr.universe().into_iter().filter(|x| !x.is_logical()).collect();
        let closed = superset_close(&fr, &universe, 100_000).unwrap();
        assert!(is_complementary(&closed));
    }

    #[test]
    fn frame_text_round_trip() {
        let fr = complementation(&leading()).unwrap();
        let text = fr.to_string();
        assert!(text.contains("~p <- q, ~r."));
        assert_eq!(parse_frame(&text).unwrap(), fr);
        assert!(matches!(parse_frame("a <- b"), Err(Error::Syntax { line: 1, .. })));
        assert!(matches!(parse_frame("#defined a\nA <- b."), Err(Error::Syntax { line: 2, .. })));
    }
}
