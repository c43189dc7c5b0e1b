//! `jgame`: command-line front end for the justification engine.
//!
//! Input files are ground programs (`head :- body.`) or frames
//! (`head <- body.`); the format is detected from the rule arrow. Results go
//! to stdout, diagnostics to stderr. Exit codes: 0 ok, 1 parse, 2 validation,
//! 3 budget, 4 property violation found.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use jgame_core::braneval::{falsify_monotonicity, falsify_selectivity, FalsifierBounds, PathUniverse};
use jgame_core::format::{parse_interpretation, write_consistency_report, write_models};
use jgame_core::frame::{parse_frame, Diagnostic};
use jgame_core::game::{build_game_graph, Player};
use jgame_core::lp::{fitting_lfp, parse_program, program_to_frame, stable_models_total, supported_models, well_founded_model, Program};
use jgame_core::semantics::{Interpretations, DEFAULT_INTERPRETATION_BUDGET};
use jgame_core::{complementation, validate_frame, BranchEvaluation, Error, Fact, Frame, Interpretation, JustificationSystem, SignMap};

#[derive(Parser, Debug)]
#[command(name = "jgame", version, about = "Justification semantics of ground programs via graph games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Echo the normalized program or frame.
    Parse { file: PathBuf },
    /// Print the complementation frame.
    Frame { file: PathBuf },
    /// Export the game graph.
    Game {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = GraphFormat::Graph)]
        format: GraphFormat,
    },
    /// List models, grouped by open assignment.
    Models {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Fix the open atoms instead of enumerating all open assignments.
        #[arg(long)]
        open: Option<String>,
    },
    /// Show a justification realizing the supported value of a fact.
    Explain {
        file: PathBuf,
        fact: String,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        interp: InterpArgs,
        #[arg(long, value_enum, default_value_t = ExplainFormat::Text)]
        format: ExplainFormat,
    },
    /// Compare SV(x) with SV(~x) for every defined x.
    CheckConsistency {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        interp: InterpArgs,
        /// Check every interpretation over all names.
        #[arg(long)]
        all_interpretations: bool,
    },
    /// Bounded search for a monotonicity or selectivity counterexample.
    Falsify {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        property: Property,
        /// Comma-separated `key=n` with keys path, prefix, cycle, set, word.
        #[arg(long)]
        bounds: Option<String>,
    },
    /// Compare models with the classical semantics of the program.
    OracleCompare {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Branch evaluation: sp, kk, wf, st or ex.
    #[arg(long, value_parser = parse_semantics)]
    semantics: BranchEvaluation,
    /// Cap on enumeration sizes (interpretations and support search).
    #[arg(long)]
    budget: Option<u128>,
}

#[derive(Args, Debug)]
struct InterpArgs {
    /// File holding an interpretation (`{a: t, b: f}` or `a=t,b=f`).
    #[arg(long)]
    interpretation: Option<PathBuf>,
    /// Inline interpretation pairs `name=value,...`.
    #[arg(long)]
    open: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GraphFormat {
    Graph,
    Dot,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ExplainFormat {
    Text,
    Dot,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Property {
    Monotone,
    Selective,
}

fn parse_semantics(s: &str) -> Result<BranchEvaluation, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// A failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Failure {
        Failure { code, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match &e {
            Error::Syntax { .. } | Error::DuplicateDirective { .. } | Error::Format(_) => 1,
            Error::Budget { .. } => 3,
            Error::ConsistencyViolation { .. } => 4,
            _ => 2,
        };
        Failure::new(code, e.to_string())
    }
}

type Outcome = Result<String, Failure>;

enum Input {
    Program(Program),
    Frame(Frame),
}

impl Input {
    fn read(path: &Path) -> Result<Input, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::new(1, format!("{}: {e}", path.display())))?;
        let is_frame = text.lines().any(|l| l.split('%').next().unwrap_or("").contains("<-"));
        let parsed = if is_frame { parse_frame(&text).map(Input::Frame) } else { parse_program(&text).map(Input::Program) };
        parsed.map_err(|e| {
            let f = Failure::from(e);
            Failure::new(f.code, format!("{}: {}", path.display(), f.message))
        })
    }

    /// The complementation frame. Frames whose only defect is missing
    /// complement rules are complemented; complete frames are taken as given.
    fn frame(&self) -> Result<Frame, Failure> {
        match self {
            Input::Program(p) => Ok(program_to_frame(p)?),
            Input::Frame(fr) => {
                let diagnostics = validate_frame(fr);
                let fr = if diagnostics.is_empty() {
                    fr.clone()
                } else if diagnostics.iter().all(|d| matches!(d, Diagnostic::NoRules(_))) {
                    complementation(fr)?
                } else {
                    return Err(Error::Validation(diagnostics).into());
                };
                let remaining = validate_frame(&fr);
                if remaining.is_empty() {
                    Ok(fr)
                } else {
                    Err(Error::Validation(remaining).into())
                }
            }
        }
    }
}

fn system(file: &Path, common: &Common) -> Result<(Input, JustificationSystem), Failure> {
    let input = Input::read(file)?;
    let mut js = JustificationSystem::new(input.frame()?, common.semantics.clone(), SignMap::new())?;
    if let Some(b) = common.budget {
        js = js.with_support_budget(u64::try_from(b).unwrap_or(u64::MAX));
    }
    Ok((input, js))
}

fn budget(common: &Common) -> u128 {
    common.budget.unwrap_or(DEFAULT_INTERPRETATION_BUDGET)
}

/// Reads the supplied values and sets every uncovered name to `u`, with a
/// warning on stderr.
fn interpretation(args: &InterpArgs, names: &BTreeSet<jgame_core::Name>) -> Result<Interpretation, Failure> {
    let mut i = Interpretation::new();
    if let Some(path) = &args.interpretation {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::new(1, format!("{}: {e}", path.display())))?;
        i.extend(&parse_interpretation(&text)?);
    }
    if let Some(inline) = &args.open {
        i.extend(&parse_interpretation(inline)?);
    }
    complete_with_unknown(i, names)
}

fn complete_with_unknown(mut i: Interpretation, names: &BTreeSet<jgame_core::Name>) -> Result<Interpretation, Failure> {
    if let Some(extra) = i.names().find(|n| !names.contains(*n)) {
        return Err(Failure::new(2, format!("`{extra}` does not occur in the input")));
    }
    let missing: Vec<&jgame_core::Name> = names.iter().filter(|n| i.get(n).is_none()).collect();
    if !missing.is_empty() {
        let list = missing.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(", ");
        eprintln!("warning: no value given for {list}; using u");
        for n in missing {
            i.set(n.clone(), jgame_core::TruthValue::Unknown);
        }
    }
    Ok(i)
}

fn cmd_parse(file: &Path) -> Outcome {
    Ok(match Input::read(file)? {
        Input::Program(p) => p.to_string(),
        Input::Frame(fr) => fr.to_string(),
    })
}

fn cmd_frame(file: &Path) -> Outcome {
    Ok(Input::read(file)?.frame()?.to_string())
}

fn cmd_game(file: &Path, format: GraphFormat) -> Outcome {
    let g = build_game_graph(&Input::read(file)?.frame()?);
    Ok(match format {
        GraphFormat::Dot => g.to_dot(),
        GraphFormat::Graph => {
            let mut out = String::new();
            for s in g.non_isolated_states() {
                let owner = match g.owner(s) {
                    Player::T => "T",
                    Player::F => "F",
                };
                let _ = writeln!(out, "state {owner} {}", g.label(s));
            }
            for (s, w) in g.edges() {
                let _ = writeln!(out, "edge {} {}", g.label(s), g.label(w));
            }
            out
        }
    })
}

fn cmd_models(file: &Path, common: &Common, open: Option<&str>) -> Outcome {
    let (_, js) = system(file, common)?;
    let groups = match open {
        None => js.enumerate_models(budget(common))?,
        Some(text) => {
            let oa = complete_with_unknown(parse_interpretation(text)?, &js.open_names())?;
            let models = js.models_for_open(&oa)?;
            vec![jgame_core::semantics::ModelGroup { open: oa, models }]
        }
    };
    Ok(write_models(js.evaluation().name(), &groups))
}

fn cmd_explain(file: &Path, fact: &str, common: &Common, args: &InterpArgs, format: ExplainFormat) -> Outcome {
    let (_, js) = system(file, common)?;
    let x: Fact = fact.parse().map_err(|e: Error| Failure::new(1, e.to_string()))?;
    let i = interpretation(args, &js.names())?;
    let ex = js.explain(&x, &i)?;
    Ok(match format {
        ExplainFormat::Dot => ex.justification.to_dot(&x),
        ExplainFormat::Text => {
            let mut out = format!("explain {x} {}\nvalue {}\ninterpretation {i}\n", js.evaluation(), ex.value);
            for (_, r) in ex.justification.choices() {
                let _ = writeln!(out, "{r}");
            }
            out
        }
    })
}

fn cmd_check(file: &Path, common: &Common, args: &InterpArgs, all: bool) -> Outcome {
    let (_, js) = system(file, common)?;
    let which = if all {
        Interpretations::All
    } else {
        Interpretations::List(vec![interpretation(args, &js.names())?])
    };
    let report = js.check_consistency(&which, budget(common))?;
    let text = write_consistency_report(&report);
    let first = report.violations().next().cloned();
    match first {
        None => Ok(text),
        Some(v) => {
            print!("{text}");
            let facts: BTreeSet<String> = report.violations().map(|v| v.fact.to_string()).collect();
            let list = facts.into_iter().collect::<Vec<_>>().join(", ");
            Err(Failure::new(
                4,
                format!("inconsistent under {}: {list} (first: SV({}) = {}, SV({}) = {})", report.evaluation, v.fact, v.value, v.fact.complement(), v.negated),
            ))
        }
    }
}

fn parse_bounds(text: Option<&str>) -> Result<FalsifierBounds, Failure> {
    let mut b = FalsifierBounds::default();
    let Some(text) = text else { return Ok(b) };
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| Failure::new(1, format!("expected `key=n`, found `{part}`")))?;
        let n: usize = v.trim().parse().map_err(|_| Failure::new(1, format!("not a number: `{v}`")))?;
        let slot = match k.trim() {
            "path" => &mut b.max_path,
            "prefix" => &mut b.max_prefix,
            "cycle" => &mut b.max_cycle,
            "set" => &mut b.max_set,
            "word" => &mut b.max_word,
            other => return Err(Failure::new(1, format!("unknown bound `{other}`"))),
        };
        *slot = n;
    }
    Ok(b)
}

fn cmd_falsify(file: &Path, common: &Common, property: Property, bounds: Option<&str>) -> Outcome {
    let bounds = parse_bounds(bounds)?;
    let (_, js) = system(file, common)?;
    let universe = PathUniverse::from_frame(js.frame());
    let found = match property {
        Property::Monotone => falsify_monotonicity(js.evaluation(), js.sign(), &universe, bounds)?.counterexample.map(|c| c.to_string()),
        Property::Selective => falsify_selectivity(js.evaluation(), js.sign(), &universe, bounds)?.map(|c| c.to_string()),
    };
    match found {
        None => Ok(format!("no counterexample within {bounds:?}\n")),
        Some(c) => {
            println!("{c}");
            Err(Failure::new(4, format!("{} is not {}", js.evaluation(), property_name(property))))
        }
    }
}

fn property_name(p: Property) -> &'static str {
    match p {
        Property::Monotone => "monotone",
        Property::Selective => "selective",
    }
}

fn cmd_oracle(file: &Path, common: &Common) -> Outcome {
    let (input, js) = system(file, common)?;
    let Input::Program(p) = &input else {
        return Err(Failure::new(2, "oracle-compare needs a program, not a frame"));
    };
    let groups = js.enumerate_models(budget(common))?;
    let mut compared = 0usize;
    let mut mismatches = Vec::new();
    for g in &groups {
        let ours: BTreeSet<Interpretation> = g.models.iter().cloned().collect();
        match js.evaluation() {
            BranchEvaluation::Sp => {
                let oracle = supported_models(p, &g.open)?;
                compared += ours.len();
                if ours != oracle {
                    mismatches.push(format!("open {}: models {ours:?}, supported models {oracle:?}", g.open));
                }
            }
            BranchEvaluation::St if g.open.is_total() => {
                let total: BTreeSet<Interpretation> = ours.into_iter().filter(Interpretation::is_total).collect();
                let oracle = stable_models_total(p, &g.open)?;
                compared += total.len();
                if total != oracle {
                    mismatches.push(format!("open {}: total models {total:?}, stable models {oracle:?}", g.open));
                }
            }
            BranchEvaluation::St => {}
            BranchEvaluation::Wf | BranchEvaluation::Kk => {
                let (name, m) = match js.evaluation() {
                    BranchEvaluation::Wf => ("well-founded model", well_founded_model(p, &g.open)?),
                    _ => ("Fitting model", fitting_lfp(p, &g.open)?),
                };
                compared += ours.len();
                if !ours.contains(&m) {
                    mismatches.push(format!("open {}: {name} {m} is not a model", g.open));
                }
            }
            other => return Err(Failure::new(2, format!("no oracle for `{other}`"))),
        }
    }
    if mismatches.is_empty() {
        Ok(format!("{compared} models, oracle match\n"))
    } else {
        for m in &mismatches {
            println!("{m}");
        }
        Err(Failure::new(4, format!("{} open assignments disagree with the oracle", mismatches.len())))
    }
}

fn run(cli: Cli) -> Outcome {
    match &cli.command {
        Command::Parse { file } => cmd_parse(file),
        Command::Frame { file } => cmd_frame(file),
        Command::Game { file, format } => cmd_game(file, *format),
        Command::Models { file, common, open } => cmd_models(file, common, open.as_deref()),
        Command::Explain { file, fact, common, interp, format } => cmd_explain(file, fact, common, interp, *format),
        Command::CheckConsistency { file, common, interp, all_interpretations } => cmd_check(file, common, interp, *all_interpretations),
        Command::Falsify { file, common, property, bounds } => cmd_falsify(file, common, *property, bounds.as_deref()),
        Command::OracleCompare { file, common } => cmd_oracle(file, common),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
