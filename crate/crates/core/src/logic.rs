//! Truth values, facts with their complement involution, sign maps and
//! three-valued interpretations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::Error;

/// Shared atom name. Cheap to clone.
pub type Name = Arc<str>;

/// Three-valued truth. The derived ordering is the truth order `f < u < t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TruthValue {
    False,
    Unknown,
    True,
}

impl TruthValue {
    pub const ALL: [TruthValue; 3] = [TruthValue::False, TruthValue::Unknown, TruthValue::True];

    /// `~t = f`, `~f = t`, `~u = u`.
    pub fn complement(self) -> TruthValue {
        match self {
            TruthValue::True => TruthValue::False,
            TruthValue::False => TruthValue::True,
            TruthValue::Unknown => TruthValue::Unknown,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            TruthValue::True => 't',
            TruthValue::False => 'f',
            TruthValue::Unknown => 'u',
        }
    }

    pub fn from_symbol(c: char) -> Option<TruthValue> {
        match c {
            't' => Some(TruthValue::True),
            'f' => Some(TruthValue::False),
            'u' => Some(TruthValue::Unknown),
            _ => None,
        }
    }

    /// Knowledge order: `u` below both `t` and `f`, which are incomparable.
    pub fn knowledge_le(self, other: TruthValue) -> bool {
        self == TruthValue::Unknown || self == other
    }

    pub fn is_total(self) -> bool {
        self != TruthValue::Unknown
    }
}

impl std::ops::Not for TruthValue {
    type Output = TruthValue;

    fn not(self) -> TruthValue {
        self.complement()
    }
}

impl fmt::Display for TruthValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

impl FromStr for TruthValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut chars = s.trim().chars();
        match (chars.next().and_then(TruthValue::from_symbol), chars.next()) {
            (Some(v), None) => Ok(v),
            _ => Err(Error::Format(format!("not a truth value: `{s}`"))),
        }
    }
}

/// Greatest lower bound in the truth order. The empty meet is `t`.
pub fn truth_glb<I: IntoIterator<Item = TruthValue>>(values: I) -> TruthValue {
    let mut acc = TruthValue::True;
    for v in values {
        acc = acc.min(v);
        if acc == TruthValue::False {
            break;
        }
    }
    acc
}

/// Least upper bound in the truth order. The empty join is `f`.
pub fn truth_lub<I: IntoIterator<Item = TruthValue>>(values: I) -> TruthValue {
    let mut acc = TruthValue::False;
    for v in values {
        acc = acc.max(v);
        if acc == TruthValue::True {
            break;
        }
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarity {
    Pos,
    Neg,
}

impl Polarity {
    pub fn flip(self) -> Polarity {
        match self {
            Polarity::Pos => Polarity::Neg,
            Polarity::Neg => Polarity::Pos,
        }
    }
}

/// A fact: either a logical constant or a signed literal.
///
/// Ordering puts the logical constants first, then literals by name with the
/// positive literal before its complement.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Fact {
    Logical(TruthValue),
    Literal { name: Name, polarity: Polarity },
}

impl Fact {
    pub const TRUE: Fact = Fact::Logical(TruthValue::True);
    pub const FALSE: Fact = Fact::Logical(TruthValue::False);
    pub const UNKNOWN: Fact = Fact::Logical(TruthValue::Unknown);

    pub fn pos(name: &str) -> Fact {
        Fact::Literal { name: Name::from(name), polarity: Polarity::Pos }
    }

    pub fn neg(name: &str) -> Fact {
        Fact::Literal { name: Name::from(name), polarity: Polarity::Neg }
    }

    pub fn literal(name: Name, polarity: Polarity) -> Fact {
        Fact::Literal { name, polarity }
    }

    /// The involution `~`.
    pub fn complement(&self) -> Fact {
        match self {
            Fact::Logical(v) => Fact::Logical(v.complement()),
            Fact::Literal { name, polarity } => Fact::Literal { name: name.clone(), polarity: polarity.flip() },
        }
    }

    pub fn is_logical(&self) -> bool {
        matches!(self, Fact::Logical(_))
    }

    pub fn name(&self) -> Option<&Name> {
        match self {
            Fact::Literal { name, .. } => Some(name),
            Fact::Logical(_) => None,
        }
    }

    pub fn polarity(&self) -> Option<Polarity> {
        match self {
            Fact::Literal { polarity, .. } => Some(*polarity),
            Fact::Logical(_) => None,
        }
    }
}

/// `a`, `~a`, `#t`, `#f`, `#u`.
impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fact::Logical(v) => write!(f, "#{v}"),
            Fact::Literal { name, polarity: Polarity::Pos } => write!(f, "{name}"),
            Fact::Literal { name, polarity: Polarity::Neg } => write!(f, "~{name}"),
        }
    }
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl FromStr for Fact {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix('#') {
            let mut chars = rest.chars();
            if let (Some(v), None) = (chars.next().and_then(TruthValue::from_symbol), chars.next()) {
                return Ok(Fact::Logical(v));
            }
        } else if let Some(rest) = s.strip_prefix('~') {
            if is_identifier(rest) {
                return Ok(Fact::neg(rest));
            }
        } else if is_identifier(s) {
            return Ok(Fact::pos(s));
        }
        Err(Error::Format(format!("not a fact: `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// Sign function on literals.
///
/// Stores the sign of the positive literal of each overridden name; the
/// negative literal always gets the opposite sign, so `sgn(x) != sgn(~x)`
/// cannot be violated. Names without an override follow the default: `+`
/// for positive literals and `-` for negative ones.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SignMap {
    positive_sign: BTreeMap<Name, Sign>,
}

impl SignMap {
    pub fn new() -> SignMap {
        SignMap::default()
    }

    /// Sets the sign of the positive literal `name` (and thereby the opposite
    /// sign of `~name`).
    pub fn with(mut self, name: &str, positive: Sign) -> SignMap {
        self.positive_sign.insert(Name::from(name), positive);
        self
    }

    /// Sign of a literal; logical constants carry no sign.
    pub fn sign(&self, fact: &Fact) -> Option<Sign> {
        match fact {
            Fact::Logical(_) => None,
            Fact::Literal { name, polarity } => {
                let base = self.positive_sign.get(name).copied().unwrap_or(Sign::Plus);
                Some(match polarity {
                    Polarity::Pos => base,
                    Polarity::Neg => base.flip(),
                })
            }
        }
    }

    pub fn overrides(&self) -> impl Iterator<Item = (&Name, Sign)> {
        self.positive_sign.iter().map(|(n, s)| (n, *s))
    }
}

/// Three-valued interpretation: one value per atom name.
///
/// Only the positive literal's value is stored; `I(~x) = ~I(x)` and
/// `I(ℓ) = ℓ` for logical constants follow from the lookup.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interpretation {
    values: BTreeMap<Name, TruthValue>,
}

impl Interpretation {
    pub fn new() -> Interpretation {
        Interpretation::default()
    }

    pub fn from_pairs<'a, I: IntoIterator<Item = (&'a str, TruthValue)>>(pairs: I) -> Interpretation {
        Interpretation { values: pairs.into_iter().map(|(n, v)| (Name::from(n), v)).collect() }
    }

    pub fn set(&mut self, name: Name, value: TruthValue) {
        self.values.insert(name, value);
    }

    pub fn with(mut self, name: &str, value: TruthValue) -> Interpretation {
        self.set(Name::from(name), value);
        self
    }

    pub fn get(&self, name: &str) -> Option<TruthValue> {
        self.values.get(name).copied()
    }

    pub fn value(&self, fact: &Fact) -> Result<TruthValue, Error> {
        match fact {
            Fact::Logical(v) => Ok(*v),
            Fact::Literal { name, polarity } => {
                let v = self.values.get(name).copied().ok_or_else(|| Error::UnknownName(name.to_string()))?;
                Ok(match polarity {
                    Polarity::Pos => v,
                    Polarity::Neg => v.complement(),
                })
            }
        }
    }

    pub fn names(&self) -> impl Iterator<Item = &Name> {
        self.values.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, TruthValue)> {
        self.values.iter().map(|(n, v)| (n, *v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_total(&self) -> bool {
        self.values.values().all(|v| v.is_total())
    }

    /// Restriction to the given names (names absent from `self` are skipped).
    pub fn restrict<'a, I: IntoIterator<Item = &'a Name>>(&self, names: I) -> Interpretation {
        let values = names.into_iter().filter_map(|n| self.values.get(n).map(|v| (n.clone(), *v))).collect();
        Interpretation { values }
    }

    /// Overlays `other` on top of `self`.
    pub fn extend(&mut self, other: &Interpretation) {
        for (n, v) in other.iter() {
            self.values.insert(n.clone(), v);
        }
    }
}

/// All interpretations over `names`, in lexicographic order of
/// `(f, u, t)`-valued tuples.
pub fn all_interpretations(names: &BTreeSet<Name>) -> impl Iterator<Item = Interpretation> + '_ {
    let n = names.len();
    let total = 3usize.checked_pow(n as u32).unwrap_or(usize::MAX);
    (0..total).map(move |mut code| {
        let mut values = BTreeMap::new();
        // Last name varies fastest.
        let mut digits = vec![0usize; n];
        for d in digits.iter_mut().rev() {
            *d = code % 3;
            code /= 3;
        }
        for (name, d) in names.iter().zip(digits) {
            values.insert(name.clone(), TruthValue::ALL[d]);
        }
        Interpretation { values }
    })
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (n, v)) in self.values.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{n}: {v}")?;
        }
        f.write_str("}")
    }
}
