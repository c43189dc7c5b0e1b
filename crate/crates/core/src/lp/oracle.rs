//! Classical semantics of normal programs, computed directly on the program.
//! Nothing here goes through frames, justifications or games.

use std::collections::{BTreeMap, BTreeSet};

use super::{BodyLiteral, Program};
use crate::error::{Error, Result};
use crate::logic::{Interpretation, Name, TruthValue};

/// Values for the program's open atoms. Extra names are ignored.
pub type OpenAssignment = Interpretation;

/// Largest number of defined atoms the enumerating oracles accept.
pub const MAX_ENUMERATED_ATOMS: usize = 14;

type Valuation = BTreeMap<Name, TruthValue>;

fn pinned(p: &Program, oa: &OpenAssignment) -> Result<Valuation> {
    p.open_atoms()
        .into_iter()
        .map(|n| match oa.get(&n) {
            Some(v) => Ok((n, v)),
            None => Err(Error::UnknownName(n.to_string())),
        })
        .collect()
}

fn literal_value(l: &BodyLiteral, val: &Valuation) -> TruthValue {
    let v = val[&l.atom];
    if l.positive {
        v
    } else {
        match v {
            TruthValue::True => TruthValue::False,
            TruthValue::False => TruthValue::True,
            TruthValue::Unknown => TruthValue::Unknown,
        }
    }
}

/// One application of the three-valued immediate-consequence operator to
/// the defined atoms; opens keep their values.
fn consequence(p: &Program, defined: &BTreeSet<Name>, val: &Valuation) -> Valuation {
    let mut next = val.clone();
    for a in defined {
        let mut best = TruthValue::False;
        for r in p.rules_for(a) {
            let body = r.body.iter().map(|l| literal_value(l, val)).min().unwrap_or(TruthValue::True);
            best = best.max(body);
        }
        next.insert(a.clone(), best);
    }
    next
}

fn to_interpretation(val: Valuation) -> Interpretation {
    let mut i = Interpretation::new();
    for (n, v) in val {
        i.set(n, v);
    }
    i
}

/// Least fixpoint of the operator in the knowledge order, from all-`u`.
pub fn fitting_lfp(p: &Program, oa: &OpenAssignment) -> Result<Interpretation> {
    let defined = p.defined_atoms();
    let mut val = pinned(p, oa)?;
    for a in &defined {
        val.insert(a.clone(), TruthValue::Unknown);
    }
    loop {
        let next = consequence(p, &defined, &val);
        if next == val {
            return Ok(to_interpretation(val));
        }
        val = next;
    }
}

/// Least model of the positive program obtained by deciding every negative
/// literal and every open atom up front.
fn least_model(p: &Program, defined: &BTreeSet<Name>, holds: impl Fn(&BodyLiteral) -> Option<bool>) -> BTreeSet<Name> {
    let mut model = BTreeSet::new();
    loop {
        let mut changed = false;
        for r in p.rules() {
            if model.contains(&r.head) {
                continue;
            }
            let fires = r.body.iter().all(|l| match holds(l) {
                Some(b) => b,
                None => defined.contains(&l.atom) && model.contains(&l.atom),
            });
            if fires {
                model.insert(r.head.clone());
                changed = true;
            }
        }
        if !changed {
            return model;
        }
    }
}

/// Alternating fixpoint. The lower pass reads `not a` as `a ∉ upper` and
/// open literals as certainly true; the upper pass reads `not a` as
/// `a ∉ lower` and open literals as possibly true.
pub fn well_founded_model(p: &Program, oa: &OpenAssignment) -> Result<Interpretation> {
    let defined = p.defined_atoms();
    let opens = pinned(p, oa)?;
    let gamma = |other: &BTreeSet<Name>, optimistic: bool| {
        least_model(p, &defined, |l| {
            if let Some(&v) = opens.get(&l.atom) {
                let wanted = if l.positive { TruthValue::True } else { TruthValue::False };
                let avoided = if l.positive { TruthValue::False } else { TruthValue::True };
                return Some(if optimistic { v != avoided } else { v == wanted });
            }
            if l.positive {
                None
            } else {
                Some(!other.contains(&l.atom))
            }
        })
    };
    let mut upper: BTreeSet<Name> = defined.clone();
    loop {
        let lower = gamma(&upper, false);
        let next_upper = gamma(&lower, true);
        if next_upper == upper {
            let mut val = opens;
            for a in &defined {
                let v = if lower.contains(a) {
                    TruthValue::True
                } else if upper.contains(a) {
                    TruthValue::Unknown
                } else {
                    TruthValue::False
                };
                val.insert(a.clone(), v);
            }
            return Ok(to_interpretation(val));
        }
        upper = next_upper;
    }
}

fn check_size(defined: &BTreeSet<Name>) -> Result<()> {
    if defined.len() > MAX_ENUMERATED_ATOMS {
        return Err(Error::Budget {
            what: "defined atoms for model enumeration",
            needed: defined.len() as u128,
            budget: MAX_ENUMERATED_ATOMS as u128,
        });
    }
    Ok(())
}

/// Total stable models by reduct check over all total assignments. Empty
/// when some open atom is `u`.
pub fn stable_models_total(p: &Program, oa: &OpenAssignment) -> Result<BTreeSet<Interpretation>> {
    let defined = p.defined_atoms();
    check_size(&defined)?;
    let opens = pinned(p, oa)?;
    let mut out = BTreeSet::new();
    if opens.values().any(|v| *v == TruthValue::Unknown) {
        return Ok(out);
    }
    let atoms: Vec<&Name> = defined.iter().collect();
    for bits in 0u32..(1 << atoms.len()) {
        let guess: BTreeSet<Name> = atoms.iter().enumerate().filter(|(i, _)| bits & (1 << i) != 0).map(|(_, a)| (*a).clone()).collect();
        let reduct_model = least_model(p, &defined, |l| {
            if let Some(&v) = opens.get(&l.atom) {
                return Some((v == TruthValue::True) == l.positive);
            }
            if l.positive {
                None
            } else {
                Some(!guess.contains(&l.atom))
            }
        });
        if reduct_model == guess {
            let mut val = opens.clone();
            for a in &defined {
                val.insert(a.clone(), if guess.contains(a) { TruthValue::True } else { TruthValue::False });
            }
            out.insert(to_interpretation(val));
        }
    }
    Ok(out)
}

/// All three-valued fixpoints of the immediate-consequence operator.
pub fn supported_models(p: &Program, oa: &OpenAssignment) -> Result<BTreeSet<Interpretation>> {
    let defined = p.defined_atoms();
    check_size(&defined)?;
    let opens = pinned(p, oa)?;
    let atoms: Vec<&Name> = defined.iter().collect();
    let mut out = BTreeSet::new();
    let mut digits = vec![0usize; atoms.len()];
    loop {
        let mut val = opens.clone();
        for (a, d) in atoms.iter().zip(&digits) {
            val.insert((*a).clone(), TruthValue::ALL[*d]);
        }
        if consequence(p, &defined, &val) == val {
            out.insert(to_interpretation(val));
        }
        let mut i = atoms.len();
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < 3 {
                break;
            }
            digits[i] = 0;
        }
    }
}
