//! Text serializations for interpretations, model lists and consistency
//! reports.
//!
//! Interpretations are written `{a: t, b: f}`; the parser also accepts
//! `a=t,b=f`. Model lists:
//!
//! ```text
//! models st
//! open {r: t}
//! model {p: t, q: f, r: t}
//! ```
//!
//! Every `model` line belongs to the closest preceding `open` line.
//! Consistency reports carry one entry per line, the interpretation last:
//!
//! ```text
//! consistency ex
//! violation a f u {a: f, b: f, c: f}
//! ok ~a u f {a: f, b: f, c: f}
//! ```
//!
//! Lines starting with `#` are comments.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::logic::{is_identifier, Fact, Interpretation, Name, TruthValue};
use crate::semantics::{ConsistencyEntry, ConsistencyReport, ModelGroup};

fn format_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

pub fn parse_interpretation(text: &str) -> Result<Interpretation> {
    let t = text.trim();
    let inner = match (t.strip_prefix('{'), t.ends_with('}')) {
        (Some(rest), true) => &rest[..rest.len() - 1],
        (None, false) => t,
        _ => return Err(format_err(format!("unbalanced braces in `{t}`"))),
    };
    let mut out = Interpretation::new();
    let mut seen: BTreeSet<Name> = BTreeSet::new();
    for part in inner.split([',', '\n']).map(str::trim).filter(|p| !p.is_empty()) {
        let (name, value) =
            part.split_once(['=', ':']).ok_or_else(|| format_err(format!("expected `name=value`, found `{part}`")))?;
        let (name, value) = (name.trim(), value.trim());
        if !is_identifier(name) {
            return Err(format_err(format!("not an atom name: `{name}`")));
        }
        let v: TruthValue = value.parse()?;
        if !seen.insert(name.into()) {
            return Err(format_err(format!("`{name}` assigned twice")));
        }
        out.set(name.into(), v);
    }
    Ok(out)
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn header<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>, kind: &str) -> Result<String> {
    match lines.next() {
        Some((_, l)) => match l.split_once(' ') {
            Some((k, eval)) if k == kind => Ok(eval.trim().to_string()),
            _ => Err(format_err(format!("expected `{kind} <evaluation>` header, found `{l}`"))),
        },
        None => Err(format_err(format!("missing `{kind}` header"))),
    }
}

pub fn write_models(evaluation: &str, groups: &[ModelGroup]) -> String {
    let mut out = format!("models {evaluation}\n");
    for g in groups {
        let _ = writeln!(out, "open {}", g.open);
        for m in &g.models {
            let _ = writeln!(out, "model {m}");
        }
    }
    out
}

pub fn parse_models(text: &str) -> Result<(String, Vec<ModelGroup>)> {
    let mut lines = content_lines(text);
    let evaluation = header(&mut lines, "models")?;
    let mut groups: Vec<ModelGroup> = Vec::new();
    for (n, l) in lines {
        let (kind, rest) = l.split_once(' ').ok_or_else(|| format_err(format!("line {n}: malformed `{l}`")))?;
        let i = parse_interpretation(rest)?;
        match kind {
            "open" => groups.push(ModelGroup { open: i, models: Vec::new() }),
            "model" => groups
                .last_mut()
                .ok_or_else(|| format_err(format!("line {n}: model before any `open` line")))?
                .models
                .push(i),
            _ => return Err(format_err(format!("line {n}: unknown record `{kind}`"))),
        }
    }
    Ok((evaluation, groups))
}

pub fn write_consistency_report(r: &ConsistencyReport) -> String {
    let mut out = format!("consistency {}\n", r.evaluation);
    for e in &r.entries {
        let status = if e.consistent() { "ok" } else { "violation" };
        let _ = writeln!(out, "{status} {} {} {} {}", e.fact, e.value, e.negated, e.interpretation);
    }
    let _ = writeln!(out, "# {} entries, {} violations", r.entries.len(), r.violations().count());
    out
}

pub fn parse_consistency_report(text: &str) -> Result<ConsistencyReport> {
    let mut lines = content_lines(text);
    let evaluation = header(&mut lines, "consistency")?;
    let mut entries = Vec::new();
    for (n, l) in lines {
        let parts: Vec<&str> = l.splitn(5, ' ').collect();
        let [status, fact, value, negated, interp] = parts[..] else {
            return Err(format_err(format!("line {n}: expected 5 fields")));
        };
        let e = ConsistencyEntry {
            fact: fact.parse::<Fact>()?,
            value: value.parse()?,
            negated: negated.parse()?,
            interpretation: parse_interpretation(interp)?,
        };
        let expected = if e.consistent() { "ok" } else { "violation" };
        if status != expected {
            return Err(format_err(format!("line {n}: status `{status}` does not match the recorded values")));
        }
        entries.push(e);
    }
    Ok(ConsistencyReport { evaluation, entries })
}
