//! Team-semantics logic workbench.
//!
//! The library implements a logic of teams (sets of assignments evaluated
//! jointly) whose connectives include the split disjunction `|`, the
//! intuitionistic disjunction `||` and implication `->`, the linear
//! implication `-*`, and dependence atoms `dep(...)`, together with:
//!
//! * brute-force evaluation over finite models ([`team_eval`]),
//! * Tarskian evaluation of second-order sentences by exhaustive function
//!   enumeration ([`so_eval`]),
//! * formula-to-formula translations between the fragments, up to a
//!   compilation of arbitrary second-order sentences into the
//!   `->`-based fragment and the `-*`-based fragment ([`translate`]),
//! * an exhaustive small-model equivalence checker and law suites that
//!   machine-check the claimed equivalences ([`equiv`]).

pub mod ast;
pub mod equiv;
pub mod generate;
pub mod model;
pub mod parse;
pub mod so_eval;
pub mod team_eval;
pub mod translate;

pub use ast::{Atom, Formula, Fragment, FragmentInfo, SOFormula, Signature, Term};
pub use equiv::{
    check_equiv, check_sentence_translation, run_law_suite, CheckBudget, EquivStatus,
    EquivVerdict, EvalTeam, LawConfig, LawReport, LawSuite,
};
pub use generate::Generator;
pub use model::{Assignment, Model, SupplementFunction, Team};
pub use parse::{parse_formula, parse_so, render, render_so};
pub use team_eval::{satisfies, sentence_true, truth_value, EvalBudget, TruthValue, STEP_BUDGET};
