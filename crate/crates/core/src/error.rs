use thiserror::Error;

use crate::frame::Diagnostic;
use crate::logic::Fact;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown name `{0}`: not covered by the interpretation")]
    UnknownName(String),

    #[error("{0}")]
    Format(String),

    #[error("syntax error at {line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },

    #[error("duplicate directive for `{name}` at {line}:{column}")]
    DuplicateDirective { name: String, line: usize, column: usize },

    #[error("invalid program: {0}")]
    Program(String),

    #[error("invalid frame: {}", render_diagnostics(.0))]
    Validation(Vec<Diagnostic>),

    #[error("fact `{0}` is not defined in the frame")]
    UndefinedFact(Fact),

    #[error("budget exceeded: {what} needs {needed}, budget is {budget}")]
    Budget { what: &'static str, needed: u128, budget: u128 },

    #[error("malformed branch: {0}")]
    MalformedBranch(String),

    #[error("justification is not locally complete: defined leaf `{0}`")]
    NotLocallyComplete(Fact),

    #[error("fact `{0}` does not label a node of the justification")]
    FactAbsent(Fact),

    #[error("branch evaluation `{evaluation}` lacks the {capability} capability")]
    Capability { evaluation: String, capability: &'static str },

    #[error("frame has no rule `{head} <- {body}` needed by the strategy's complement justification")]
    MissingComplementRule { head: Fact, body: String },

    #[error("play starts at `{0}`, which is not a defined fact state")]
    PlayStart(String),

    #[error("supported values are inconsistent at `{fact}`: SV({fact}) = {value} but the complement has {negated}")]
    ConsistencyViolation { fact: Fact, value: crate::logic::TruthValue, negated: crate::logic::TruthValue },
}

fn render_diagnostics(ds: &[Diagnostic]) -> String {
    ds.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
