//! Program corpora and small fixed frames shared by the integration tests.
//!
//! Two exhaustive tiers of ground programs (deduplicated under renaming of
//! atoms), a hand-written set and seeded random programs. Atoms without rules
//! that occur in a body become open.

#![allow(dead_code)]

use std::collections::BTreeSet;

use jgame_core::frame::defined_pairs;
use jgame_core::lp::{parse_program, program_to_frame, BodyLiteral, LpRule, Program};
use jgame_core::{complementation, Fact, Frame};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub const ATOMS: [&str; 4] = ["a", "b", "c", "d"];

/// A body literal as (atom index, positive).
type Lit = (usize, bool);
/// A program as (head, body) pairs over atom indices.
type Shape = Vec<(usize, Vec<Lit>)>;

#[derive(Clone, Debug)]
pub struct Entry {
    pub name: String,
    pub program: Program,
    pub frame: Frame,
}

impl Entry {
    pub fn from_program(program: Program) -> Entry {
        let frame = program_to_frame(&program).expect("corpus programs translate");
        let name = program.rules().iter().map(|r| r.to_string()).collect::<Vec<_>>().join(" ");
        let name = if name.is_empty() { "<empty>".to_string() } else { name };
        Entry { name, program, frame }
    }

    pub fn from_text(text: &str) -> Entry {
        Entry::from_program(parse_program(text).expect("corpus text parses"))
    }
}

fn to_program(shape: &Shape) -> Program {
    let rules = shape
        .iter()
        .map(|(h, body)| {
            let body = body.iter().map(|&(a, pos)| if pos { BodyLiteral::pos(ATOMS[a]) } else { BodyLiteral::neg(ATOMS[a]) }).collect();
            LpRule::new(ATOMS[*h], body)
        })
        .collect();
    Program::new(rules, BTreeSet::new(), BTreeSet::new()).expect("no declarations")
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Smallest image of the shape under renaming of atoms.
fn canonical(shape: &Shape, perms: &[Vec<usize>]) -> Shape {
    perms
        .iter()
        .map(|p| {
            let mut s: Shape = shape
                .iter()
                .map(|(h, body)| {
                    let mut b: Vec<Lit> = body.iter().map(|&(a, pos)| (p[a], pos)).collect();
                    b.sort();
                    (p[*h], b)
                })
                .collect();
            s.sort();
            s
        })
        .min()
        .expect("at least one permutation")
}

/// Every set of at most `max_rules` distinct bodies, bodies drawn from `bodies`.
fn rule_sets(bodies: &[Vec<Lit>], max_rules: usize) -> Vec<Vec<Vec<Lit>>> {
    let mut out: Vec<Vec<Vec<Lit>>> = vec![Vec::new()];
    let mut layer: Vec<(usize, Vec<Vec<Lit>>)> = vec![(0, Vec::new())];
    for _ in 0..max_rules {
        let mut next = Vec::new();
        for (start, set) in &layer {
            for (i, b) in bodies.iter().enumerate().skip(*start) {
                let mut s = set.clone();
                s.push(b.clone());
                next.push((i + 1, s));
            }
        }
        out.extend(next.iter().map(|(_, s)| s.clone()));
        layer = next;
    }
    out
}

fn exhaustive(atoms: usize, bodies: &[Vec<Lit>], max_rules: usize) -> Vec<Entry> {
    let sets = rule_sets(bodies, max_rules);
    let perms = permutations(atoms);
    let mut seen: BTreeSet<Shape> = BTreeSet::new();
    let mut choice = vec![0usize; atoms];
    loop {
        let shape: Shape = choice
            .iter()
            .enumerate()
            .flat_map(|(h, &c)| sets[c].iter().map(move |b| (h, b.clone())))
            .collect();
        seen.insert(canonical(&shape, &perms));
        let Some(i) = (0..atoms).find(|&i| choice[i] + 1 < sets.len()) else { break };
        choice[i] += 1;
        choice[..i].iter_mut().for_each(|c| *c = 0);
    }
    seen.iter().map(|s| Entry::from_program(to_program(s))).collect()
}

/// Two atoms, every body with at most one literal per atom, up to two rules
/// per atom.
pub fn tier_two_atoms() -> Vec<Entry> {
    let mut bodies = Vec::new();
    for x in [None, Some(true), Some(false)] {
        for y in [None, Some(true), Some(false)] {
            let b: Vec<Lit> = [x.map(|p| (0, p)), y.map(|p| (1, p))].into_iter().flatten().collect();
            bodies.push(b);
        }
    }
    exhaustive(2, &bodies, 2)
}

/// Three atoms, bodies with at most one literal, up to two rules per atom.
pub fn tier_three_atoms() -> Vec<Entry> {
    let mut bodies = vec![Vec::new()];
    for a in 0..3 {
        bodies.push(vec![(a, true)]);
        bodies.push(vec![(a, false)]);
    }
    exhaustive(3, &bodies, 2)
}

/// Both exhaustive tiers.
pub fn exhaustive_corpus() -> Vec<Entry> {
    let mut out = tier_two_atoms();
    out.extend(tier_three_atoms());
    out
}

pub const HAND_WRITTEN: &[&str] = &[
    "p :- not q.\nq :- not p.\np :- r.\n#open r.",
    "a :- b.\na :- c.\nb :- a.\nc :- a.",
    "p :- not p.",
    "p :- p.",
    "p :- not q.\nq :- not p.",
    "a.\nb :- a.\nc :- not b.",
    "a :- not b.\nb :- not c.\nc :- not a.",
    "a :- b, not c.\nb.\nc :- not a.",
    "p :- q.\nq :- p.\np :- not r.\nr :- not p.",
    "a :- r.\nb :- not r.\n#open r.",
    "a :- not b, r.\nb :- not a, s.\n#open r, s.",
    "a :- a, not b.\nb :- not a.",
    "a :- not a, b.\nb.",
    "#defined a.\nb :- not a.",
    "a :- b.\nb :- c.\nc :- d.\nd :- not a.",
    "a :- not b.\nb :- not c.\nc :- not d.\nd :- not a.",
    "a :- b, c.\nb :- not c.\nc :- not b.",
    "a :- not a.\na :- b.\nb :- not c.\nc :- not b.",
    "p :- q, r.\nq :- p.\n#open r.",
    "a :- b.\na :- not b.\nb :- a.",
    "a :- x.\na :- not x.\n#open x.",
    "a.\na :- not a.",
    "a :- b.\nb :- c.\nc :- a.\nc :- not d.\nd.",
    "win :- move, not lose.\nlose :- not win.\n#open move.",
    "a :- not b.\nb :- not a.\nc :- a.\nc :- b.",
    "a :- not b, not c.\nb :- not a, not c.\nc :- not a, not b.",
    "p :- not q, r.\nq :- not p, r.\n#open r.",
    "a :- not b.\nb :- a.",
];

pub fn hand_written() -> Vec<Entry> {
    HAND_WRITTEN.iter().map(|t| Entry::from_text(t)).collect()
}

/// `count` programs over four atoms: up to two rules per atom, bodies of up
/// to two literals.
pub fn random_programs(seed: u64, count: usize) -> Vec<Entry> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut shape: Shape = Vec::new();
            for h in 0..ATOMS.len() {
                for _ in 0..rng.gen_range(0..=2) {
                    let body = (0..rng.gen_range(0..=2)).map(|_| (rng.gen_range(0..ATOMS.len()), rng.gen_bool(0.5))).collect();
                    shape.push((h, body));
                }
            }
            Entry::from_program(to_program(&shape))
        })
        .collect()
}

/// Programs over the first `atoms` atoms with at most `max_rules` rules in
/// total and bodies of at most two literals.
pub fn arb_program(atoms: usize, max_rules: usize) -> impl Strategy<Value = Entry> {
    let lit = (0..atoms, any::<bool>());
    let rule = (0..atoms, prop::collection::vec(lit, 0..=2));
    prop::collection::vec(rule, 0..=max_rules).prop_map(|shape| Entry::from_program(to_program(&shape)))
}

pub fn fact(s: &str) -> Fact {
    s.parse().expect("fact literal")
}

pub fn body(items: &[&str]) -> BTreeSet<Fact> {
    items.iter().map(|s| fact(s)).collect()
}

/// The four-rule cycle through `a` with its complement rules.
pub fn niko() -> Frame {
    complementation(&Frame::new(
        defined_pairs(["a", "b", "c"]),
        [],
        [(fact("a"), body(&["b"])), (fact("a"), body(&["c"])), (fact("b"), body(&["a"])), (fact("c"), body(&["a"]))],
    ))
    .expect("complementation")
}

/// Two mutually negated atoms, one of them also supported by the open `r`.
pub fn leading() -> Frame {
    complementation(&Frame::new(
        defined_pairs(["p", "q"]),
        [fact("r"), fact("~r")],
        [(fact("p"), body(&["~q"])), (fact("p"), body(&["r"])), (fact("q"), body(&["~p"]))],
    ))
    .expect("complementation")
}
