//! Ground normal logic programs: parsing, translation to frames, and
//! classical semantics used as independent oracles.

pub mod oracle;
mod parse;

pub use oracle::{fitting_lfp, stable_models_total, supported_models, well_founded_model, OpenAssignment};
pub use parse::parse_program;

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::frame::{complementation, validate_frame, Frame};
use crate::logic::{Fact, Name, Polarity};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BodyLiteral {
    pub atom: Name,
    pub positive: bool,
}

impl BodyLiteral {
    pub fn pos(atom: &str) -> BodyLiteral {
        BodyLiteral { atom: atom.into(), positive: true }
    }

    pub fn neg(atom: &str) -> BodyLiteral {
        BodyLiteral { atom: atom.into(), positive: false }
    }

    pub fn to_fact(&self) -> Fact {
        Fact::literal(self.atom.clone(), if self.positive { Polarity::Pos } else { Polarity::Neg })
    }
}

impl fmt::Display for BodyLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.atom)
        } else {
            write!(f, "not {}", self.atom)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LpRule {
    pub head: Name,
    pub body: Vec<BodyLiteral>,
}

impl LpRule {
    pub fn new(head: &str, body: Vec<BodyLiteral>) -> LpRule {
        LpRule { head: head.into(), body }
    }
}

impl fmt::Display for LpRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.body.is_empty() {
            return write!(f, "{}.", self.head);
        }
        let body: Vec<String> = self.body.iter().map(|l| l.to_string()).collect();
        write!(f, "{} :- {}.", self.head, body.join(", "))
    }
}

/// A ground normal program.
///
/// Atoms occurring only in bodies and not `#defined` are open.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    rules: Vec<LpRule>,
    open_decls: BTreeSet<Name>,
    defined_decls: BTreeSet<Name>,
}

impl Program {
    /// Fails if a name is both declared open and defined (by a rule or a
    /// directive).
    pub fn new(rules: Vec<LpRule>, open_decls: BTreeSet<Name>, defined_decls: BTreeSet<Name>) -> Result<Program> {
        let p = Program { rules, open_decls, defined_decls };
        if let Some(n) = p.open_decls.iter().find(|n| p.defined_decls.contains(*n) || p.rules.iter().any(|r| &r.head == *n)) {
            return Err(Error::Program(format!("`{n}` is declared open but is defined")));
        }
        Ok(p)
    }

    pub fn rules(&self) -> &[LpRule] {
        &self.rules
    }

    pub fn open_decls(&self) -> &BTreeSet<Name> {
        &self.open_decls
    }

    pub fn defined_decls(&self) -> &BTreeSet<Name> {
        &self.defined_decls
    }

    /// Rule heads and `#defined` atoms.
    pub fn defined_atoms(&self) -> BTreeSet<Name> {
        self.rules.iter().map(|r| r.head.clone()).chain(self.defined_decls.iter().cloned()).collect()
    }

    /// Declared open atoms and atoms that occur only in bodies.
    pub fn open_atoms(&self) -> BTreeSet<Name> {
        let defined = self.defined_atoms();
        self.rules
            .iter()
            .flat_map(|r| r.body.iter().map(|l| l.atom.clone()))
            .chain(self.open_decls.iter().cloned())
            .filter(|n| !defined.contains(n))
            .collect()
    }

    pub fn atoms(&self) -> BTreeSet<Name> {
        let mut all = self.defined_atoms();
        all.extend(self.open_atoms());
        all
    }

    pub fn rules_for<'a>(&'a self, head: &'a str) -> impl Iterator<Item = &'a LpRule> + 'a {
        self.rules.iter().filter(move |r| &*r.head == head)
    }
}

/// Directives first (`#open`, then `#defined`), then rules in order.
impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for n in &self.open_decls {
            writeln!(f, "#open {n}.")?;
        }
        for n in &self.defined_decls {
            writeln!(f, "#defined {n}.")?;
        }
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

/// The complementation of the program's frame. Facts `a.` get the body
/// `{#t}`; defined atoms without rules get `a <- #f`.
pub fn program_to_frame(p: &Program) -> Result<Frame> {
    let defined = p.defined_atoms();
    let mut rules: Vec<(Fact, BTreeSet<Fact>)> = p
        .rules
        .iter()
        .map(|r| {
            let body: BTreeSet<Fact> =
                if r.body.is_empty() { BTreeSet::from([Fact::TRUE]) } else { r.body.iter().map(BodyLiteral::to_fact).collect() };
            (Fact::pos(&r.head), body)
        })
        .collect();
    for n in &defined {
        if p.rules_for(n).next().is_none() {
            rules.push((Fact::pos(n), BTreeSet::from([Fact::FALSE])));
        }
    }
    let both = |names: &BTreeSet<Name>| -> Vec<Fact> {
        names.iter().flat_map(|n| [Fact::literal(n.clone(), Polarity::Pos), Fact::literal(n.clone(), Polarity::Neg)]).collect()
    };
    let base = Frame::new(both(&defined), both(&p.open_atoms()), rules);
    let fr = complementation(&base)?;
    let diagnostics = validate_frame(&fr);
    if !diagnostics.is_empty() {
        return Err(Error::Validation(diagnostics));
    }
    Ok(fr)
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

    fn rule_set(fr: &Frame) -> BTreeSet<(Fact, BTreeSet<Fact>)> {
        fr.rules().iter().map(|r| (r.head.clone(), r.body.clone())).collect()
    }

    #[test]
    fn open_defaults() {
        let p = parse_program("p :- not q.\nq :- not p.\np :- r.\n").unwrap();
        assert_eq!(p.open_atoms(), BTreeSet::from([Name::from("r")]));
        assert_eq!(p.defined_atoms().len(), 2);
        assert!(Program::new(vec![LpRule::new("a", vec![])], BTreeSet::from([Name::from("a")]), BTreeSet::new()).is_err());
    }

    #[test]
    fn fact_and_ruleless_translations() {
        let fr = program_to_frame(&parse_program("a.").unwrap()).unwrap();
        assert_eq!(rule_set(&fr), BTreeSet::from([(f("a"), body(&["#t"])), (f("~a"), body(&["#f"]))]));
        let fr = program_to_frame(&parse_program("#defined a.").unwrap()).unwrap();
        assert_eq!(rule_set(&fr), BTreeSet::from([(f("a"), body(&["#f"])), (f("~a"), body(&["#t"]))]));
    }

    #[test]
    fn leading_frame() {
        let p = parse_program("p :- not q.\nq :- not p.\np :- r.\n#open r.").unwrap();
        let fr = program_to_frame(&p).unwrap();
        let expected = BTreeSet::from([
            (f("p"), body(&["~q"])),
            (f("p"), body(&["r"])),
            (f("q"), body(&["~p"])),
            (f("~p"), body(&["q", "~r"])),
            (f("~q"), body(&["p"])),
        ]);
        assert_eq!(rule_set(&fr), expected);
        assert!(fr.declared_open().contains(&f("~r")));
    }
}
