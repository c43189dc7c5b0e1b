//! Justification theory over finite fact spaces.
//!
//! Frames are built from ground logic programs ([`lp`]), supported values are
//! computed through the justification game ([`game`]) under pluggable branch
//! evaluations ([`braneval`]), and [`semantics`] ties these together into
//! model enumeration, consistency checks and explanations.

pub mod braneval;
pub mod error;
pub mod format;
pub mod frame;
pub mod game;
pub mod justif;
pub mod logic;
pub mod lp;
pub mod semantics;

pub use braneval::{eval_branch, negate_branch, Branch, BranchEvaluation, EvaluationFlags};
pub use error::{Error, Result};
pub use frame::{complementation, validate_frame, Frame, Rule, RuleId};
pub use game::GameGraph;
pub use justif::JustificationGraph;
pub use logic::{Fact, Interpretation, Name, Polarity, Sign, SignMap, TruthValue};
pub use semantics::JustificationSystem;
