//! Command-line front end: parsing, evaluation, translation, verification,
//! law suites, and model enumeration as reproducible commands.
//!
//! Exit status is scriptable on its own: 0 means success / true / PASS,
//! 1 means false / FAIL, 2 means a usage or parse error, and 3 means a
//! resource budget (or the wall clock) ran out.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Duration;

use tlk_core::equiv::{
    check_equiv, check_sentence_translation, run_law_suite, CheckBudget, EquivError, EquivStatus,
    EquivVerdict, EvalTeam, LawConfig, LawSuite,
};
use tlk_core::model::{enumerate_models, load_model, load_team, Team};
use tlk_core::parse::{parse_formula, parse_so, render, render_so};
use tlk_core::team_eval::{
    satisfies, sentence_true, truth_value, EvalBudget, EvalError, TruthValue,
};
use tlk_core::translate::{
    d_sentence_to_id, eliminate_all_ivee, fo_to_id, pi11_to_id, sigma11_to_d, so_to_bid, so_to_id,
    so_to_ld, TranslationTrace,
};
use tlk_core::{Formula, Fragment, Signature};

const EXIT_TRUE: u8 = 0;
const EXIT_FALSE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_BUDGET: u8 = 3;

#[derive(Parser)]
#[command(
    name = "tlk",
    version,
    about = "Team-semantics logic workbench: evaluate, translate, verify."
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Logic {
    Bid,
    D,
    Id,
    Ld,
    So,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Route {
    /// First-order formula to the implication fragment.
    Fo2id,
    /// Existential second-order sentence to a dependence-atom sentence.
    S112d,
    /// Dependence-atom normal-form sentence to the implication fragment.
    D2id,
    /// Universal-prefixed second-order sentence to the implication fragment.
    Pi112id,
    /// Any second-order sentence to the full team logic.
    So2bid,
    /// Any second-order sentence to the implication fragment.
    So2id,
    /// One-alternation second-order sentence to the linear fragment.
    So2ld,
    /// Eliminate every intuitionistic disjunction.
    Novee,
}

#[derive(Args, Clone, Copy)]
struct Limits {
    /// Largest team the exponential clauses and team enumerations may
    /// power-set.
    #[arg(long)]
    max_team_rows: Option<usize>,
    /// Cap on the number of models of one domain size.
    #[arg(long)]
    max_models: Option<u128>,
    /// Wall-clock limit in seconds; exceeding it exits with status 3.
    #[arg(long)]
    timeout_s: Option<u64>,
    /// Worker threads for the model scans in verify and laws.
    #[arg(long)]
    jobs: Option<usize>,
}

impl Limits {
    fn eval_budget(&self) -> EvalBudget {
        let mut b = EvalBudget::default();
        if let Some(rows) = self.max_team_rows {
            b.max_subteam_rows = rows;
            b.max_team_space_rows = rows;
        }
        b
    }

    fn check_budget(&self) -> CheckBudget {
        let mut b = CheckBudget {
            eval: self.eval_budget(),
            ..CheckBudget::default()
        };
        if let Some(rows) = self.max_team_rows {
            b.max_team_rows = rows;
        }
        if let Some(mm) = self.max_models {
            b.max_models_per_size = mm;
        }
        if let Some(jobs) = self.jobs {
            b.jobs = jobs;
        }
        b
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a formula, enforce a fragment, and print its canonical form.
    Parse {
        /// Input language: a team-logic fragment, or `so` for second order.
        #[arg(long, value_enum)]
        logic: Logic,
        /// The formula text.
        #[arg(short = 'e', long = "expr")]
        expr: Option<String>,
        /// Read the formula from this file instead of -e.
        file: Option<PathBuf>,
        /// Signature file (JSON); defaults to the empty signature.
        #[arg(long)]
        sig: Option<PathBuf>,
    },
    /// Evaluate a formula on a model: at a team with -t, else as a sentence.
    Eval {
        /// Model file (JSON).
        #[arg(short = 'm', long = "model")]
        model: PathBuf,
        /// Team file (JSON); without it the formula must be a sentence.
        #[arg(short = 't', long = "team")]
        team: Option<PathBuf>,
        #[arg(short = 'e', long = "expr")]
        expr: String,
        /// Evaluate the sentence at the empty team instead of at {∅}.
        #[arg(long)]
        at_empty_team: bool,
        #[command(flatten)]
        limits: Limits,
    },
    /// Print the three-valued verdict on a sentence.
    Truthvalue {
        #[arg(short = 'm', long = "model")]
        model: PathBuf,
        #[arg(short = 'e', long = "expr")]
        expr: String,
        #[command(flatten)]
        limits: Limits,
    },
    /// Apply a translation route and print the resulting formula.
    Translate {
        #[arg(long, value_enum)]
        route: Route,
        #[arg(short = 'e', long = "expr")]
        expr: String,
        /// Print one line per rewrite step (rule, citation, before, after).
        #[arg(long)]
        trace: bool,
        /// Signature file (JSON); defaults to the empty signature.
        #[arg(long)]
        sig: Option<PathBuf>,
    },
    /// Translate, then check the output against the input on every model up
    /// to a size.
    Verify {
        #[arg(long, value_enum)]
        route: Route,
        #[arg(short = 'e', long = "expr")]
        expr: String,
        /// Largest domain size to enumerate.
        #[arg(long)]
        max_size: usize,
        /// Compare sentences at the empty team (the linear-fragment
        /// contract) instead of at {∅}.
        #[arg(long)]
        at_empty_team: bool,
        /// Signature file (JSON); defaults to the empty signature.
        #[arg(long)]
        sig: Option<PathBuf>,
        #[command(flatten)]
        limits: Limits,
    },
    /// Run a semantics law suite and print its report: text, then JSON.
    Laws {
        /// One of: downward, flat, empty, eqbid, adjoint, negation, locality.
        #[arg(long)]
        suite: String,
        /// Signature file (JSON); defaults to the empty signature.
        #[arg(long)]
        sig: Option<PathBuf>,
        /// Largest domain size to enumerate.
        #[arg(long)]
        max_size: usize,
        /// Seed for the formula generators.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of generated cases (fixed cases come on top).
        #[arg(long, default_value_t = 100)]
        cases: usize,
        #[command(flatten)]
        limits: Limits,
    },
    /// Print every model of a signature at one domain size, one JSON object
    /// per line, in enumeration order.
    Models {
        /// Signature file (JSON).
        #[arg(long)]
        sig: PathBuf,
        /// Domain size.
        #[arg(long)]
        size: usize,
        #[command(flatten)]
        limits: Limits,
    },
}

enum CliError {
    Usage(String),
    Budget(String),
}

impl CliError {
    fn report(self) -> u8 {
        match self {
            CliError::Usage(msg) => {
                eprintln!("error: {msg}");
                EXIT_USAGE
            }
            CliError::Budget(msg) => {
                eprintln!("budget exceeded: {msg}");
                EXIT_BUDGET
            }
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn from_eval(e: EvalError) -> CliError {
    match e {
        EvalError::Budget(b) => CliError::Budget(b.to_string()),
        EvalError::DepthExceeded => CliError::Budget(e.to_string()),
        other => CliError::Usage(other.to_string()),
    }
}

fn from_equiv(e: EquivError) -> CliError {
    match e {
        EquivError::Eval(inner) => from_eval(inner),
        other => CliError::Usage(other.to_string()),
    }
}

fn read_sig(path: Option<&PathBuf>) -> Result<Signature, CliError> {
    match path {
        None => Ok(Signature::empty()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", p.display())))?;
            Signature::from_json(&text).map_err(CliError::Usage)
        }
    }
}

fn read_file(p: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(p)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", p.display())))
}

/// Runs `work` under an optional wall-clock limit. The worker thread is
/// abandoned on timeout; the process exits right after.
fn with_timeout<T: Send + 'static>(
    timeout_s: Option<u64>,
    work: impl FnOnce() -> T + Send + 'static,
) -> Option<T> {
    match timeout_s {
        None => Some(work()),
        Some(secs) => {
            let (tx, rx) = std::sync::mpsc::channel();
            std::thread::spawn(move || {
                let _ = tx.send(work());
            });
            rx.recv_timeout(Duration::from_secs(secs)).ok()
        }
    }
}

fn finish_timed(
    timeout_s: Option<u64>,
    work: impl FnOnce() -> Result<(String, u8), CliError> + Send + 'static,
) -> u8 {
    match with_timeout(timeout_s, work) {
        None => {
            eprintln!("budget exceeded: wall-clock timeout");
            EXIT_BUDGET
        }
        Some(Err(e)) => e.report(),
        Some(Ok((out, code))) => {
            print!("{out}");
            code
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    ExitCode::from(run(cli.command))
}

fn run(cmd: Cmd) -> u8 {
    match cmd {
        Cmd::Parse {
            logic,
            expr,
            file,
            sig,
        } => match cmd_parse(logic, expr, file, sig) {
            Ok((out, code)) => {
                print!("{out}");
                code
            }
            Err(e) => e.report(),
        },
        Cmd::Eval {
            model,
            team,
            expr,
            at_empty_team,
            limits,
        } => finish_timed(limits.timeout_s, move || {
            cmd_eval(model, team, expr, at_empty_team, limits)
        }),
        Cmd::Truthvalue {
            model,
            expr,
            limits,
        } => finish_timed(limits.timeout_s, move || cmd_truthvalue(model, expr, limits)),
        Cmd::Translate {
            route,
            expr,
            trace,
            sig,
        } => match cmd_translate(route, expr, trace, sig) {
            Ok((out, code)) => {
                print!("{out}");
                code
            }
            Err(e) => e.report(),
        },
        Cmd::Verify {
            route,
            expr,
            max_size,
            at_empty_team,
            sig,
            limits,
        } => finish_timed(limits.timeout_s, move || {
            cmd_verify(route, expr, max_size, at_empty_team, sig, limits)
        }),
        Cmd::Laws {
            suite,
            sig,
            max_size,
            seed,
            cases,
            limits,
        } => finish_timed(limits.timeout_s, move || {
            cmd_laws(suite, sig, max_size, seed, cases, limits)
        }),
        Cmd::Models { sig, size, limits } => {
            finish_timed(limits.timeout_s, move || cmd_models(sig, size, limits))
        }
    }
}

fn cmd_parse(
    logic: Logic,
    expr: Option<String>,
    file: Option<PathBuf>,
    sig: Option<PathBuf>,
) -> Result<(String, u8), CliError> {
    let sig = read_sig(sig.as_ref())?;
    let text = match (expr, file) {
        (Some(e), None) => e,
        (None, Some(f)) => read_file(&f)?,
        _ => {
            return Err(CliError::Usage(
                "provide exactly one of -e EXPR or FILE".to_owned(),
            ))
        }
    };
    if logic == Logic::So {
        let f = parse_so(&text, &sig).map_err(usage)?;
        return Ok((format!("{}\n", render_so(&f)), EXIT_TRUE));
    }
    let f = parse_formula(&text, &sig).map_err(usage)?;
    let want = match logic {
        Logic::Bid => Fragment::Bid,
        Logic::D => Fragment::D,
        Logic::Id => Fragment::Id,
        Logic::Ld => Fragment::Ld,
        Logic::So => unreachable!(),
    };
    let info = f.fragment();
    if !info.admits.contains(&want) {
        return Err(CliError::Usage(format!(
            "formula lies outside the requested fragment (least fragment: {})",
            info.least
        )));
    }
    Ok((format!("{}\n", render(&f)), EXIT_TRUE))
}

fn cmd_eval(
    model: PathBuf,
    team: Option<PathBuf>,
    expr: String,
    at_empty_team: bool,
    limits: Limits,
) -> Result<(String, u8), CliError> {
    let m = load_model(&read_file(&model)?).map_err(usage)?;
    let f = parse_formula(&expr, &m.signature()).map_err(usage)?;
    let budget = limits.eval_budget();
    let value = match team {
        Some(tp) => {
            let t = load_team(&read_file(&tp)?).map_err(usage)?;
            satisfies(&m, &t, &f, budget).map_err(from_eval)?
        }
        None if at_empty_team => {
            let fv: Vec<String> = f.free_vars().into_iter().collect();
            let empty = Team::empty(fv).map_err(usage)?;
            satisfies(&m, &empty, &f, budget).map_err(from_eval)?
        }
        None => sentence_true(&m, &f, budget).map_err(from_eval)?,
    };
    Ok((
        format!("{value}\n"),
        if value { EXIT_TRUE } else { EXIT_FALSE },
    ))
}

fn cmd_truthvalue(
    model: PathBuf,
    expr: String,
    limits: Limits,
) -> Result<(String, u8), CliError> {
    let m = load_model(&read_file(&model)?).map_err(usage)?;
    let f = parse_formula(&expr, &m.signature()).map_err(usage)?;
    let v = truth_value(&m, &f, limits.eval_budget()).map_err(from_eval)?;
    let code = if v == TruthValue::True {
        EXIT_TRUE
    } else {
        EXIT_FALSE
    };
    Ok((format!("{v}\n"), code))
}

/// Applies a route to its input text; returns the rendered output and the
/// rewrite trace.
fn apply_route(
    route: Route,
    expr: &str,
    sig: &Signature,
) -> Result<(String, TranslationTrace), CliError> {
    let formula_route = |parse_check: &dyn Fn(&Formula) -> Result<(), CliError>,
                         run: &dyn Fn(&Formula)
        -> Result<(Formula, TranslationTrace), tlk_core::translate::TranslateError>|
     -> Result<(String, TranslationTrace), CliError> {
        let f = parse_formula(expr, sig).map_err(usage)?;
        parse_check(&f)?;
        let (g, tr) = run(&f).map_err(usage)?;
        Ok((render(&g), tr))
    };
    match route {
        Route::Fo2id => formula_route(
            &|f| {
                if f.in_fo() {
                    Ok(())
                } else {
                    Err(CliError::Usage(
                        "route fo2id expects a first-order formula".to_owned(),
                    ))
                }
            },
            &fo_to_id,
        ),
        Route::Novee => formula_route(&|_| Ok(()), &|f| Ok(eliminate_all_ivee(f))),
        Route::D2id => formula_route(&|_| Ok(()), &d_sentence_to_id),
        Route::S112d | Route::Pi112id | Route::So2bid | Route::So2id | Route::So2ld => {
            let f = parse_so(expr, sig).map_err(usage)?;
            let run = match route {
                Route::S112d => sigma11_to_d,
                Route::Pi112id => pi11_to_id,
                Route::So2bid => so_to_bid,
                Route::So2id => so_to_id,
                Route::So2ld => so_to_ld,
                _ => unreachable!(),
            };
            let (g, tr) = run(&f).map_err(usage)?;
            Ok((render(&g), tr))
        }
    }
}

fn cmd_translate(
    route: Route,
    expr: String,
    trace: bool,
    sig: Option<PathBuf>,
) -> Result<(String, u8), CliError> {
    let sig = read_sig(sig.as_ref())?;
    let (rendered, tr) = apply_route(route, &expr, &sig)?;
    for w in &tr.warnings {
        eprintln!("warning: {w}");
    }
    let mut out = String::new();
    if trace {
        for line in tr.render_lines() {
            out.push_str(&line);
            out.push('\n');
        }
    }
    out.push_str(&rendered);
    out.push('\n');
    Ok((out, EXIT_TRUE))
}

fn cmd_verify(
    route: Route,
    expr: String,
    max_size: usize,
    at_empty_team: bool,
    sig: Option<PathBuf>,
    limits: Limits,
) -> Result<(String, u8), CliError> {
    let sig = read_sig(sig.as_ref())?;
    let budget = limits.check_budget();
    let verdict: EquivVerdict = match route {
        Route::Fo2id | Route::Novee | Route::D2id => {
            let f = parse_formula(&expr, &sig).map_err(usage)?;
            let (rendered, _) = apply_route(route, &expr, &sig)?;
            let g = parse_formula(&rendered, &sig).map_err(usage)?;
            check_equiv(&f, &g, &sig, max_size, &budget).map_err(from_equiv)?
        }
        _ => {
            let f = parse_so(&expr, &sig).map_err(usage)?;
            let (rendered, _) = apply_route(route, &expr, &sig)?;
            let g = parse_formula(&rendered, &sig).map_err(usage)?;
            let at = if at_empty_team {
                EvalTeam::Empty
            } else {
                EvalTeam::SingletonEmpty
            };
            check_sentence_translation(&f, &g, at, &sig, max_size, &budget).map_err(from_equiv)?
        }
    };
    let code = match verdict.status {
        EquivStatus::Pass => EXIT_TRUE,
        EquivStatus::Fail => EXIT_FALSE,
        EquivStatus::Budget => EXIT_BUDGET,
    };
    Ok((format!("{}\n", verdict.render_line()), code))
}

fn cmd_laws(
    suite: String,
    sig: Option<PathBuf>,
    max_size: usize,
    seed: u64,
    cases: usize,
    limits: Limits,
) -> Result<(String, u8), CliError> {
    let suite = LawSuite::from_str(&suite).map_err(from_equiv)?;
    let sig = read_sig(sig.as_ref())?;
    let mut config = LawConfig::new(sig, max_size, seed);
    config.cases = cases;
    config.budget = limits.check_budget();
    config.jobs = limits.jobs.unwrap_or(1);
    let report = run_law_suite(suite, &config).map_err(from_equiv)?;
    let mut out = report.render_text();
    out.push_str(&report.to_json());
    out.push('\n');
    let (_, failed, over) = report.counts();
    let code = if failed > 0 {
        EXIT_FALSE
    } else if over > 0 {
        EXIT_BUDGET
    } else {
        EXIT_TRUE
    };
    Ok((out, code))
}

fn cmd_models(sig: PathBuf, size: usize, limits: Limits) -> Result<(String, u8), CliError> {
    let sig = read_sig(Some(&sig))?;
    let iter = enumerate_models(&sig, size, limits.max_models.unwrap_or(1 << 20))
        .map_err(|b| CliError::Budget(b.to_string()))?;
    let mut out = String::new();
    for m in iter {
        out.push_str(&m.to_json());
        out.push('\n');
    }
    Ok((out, EXIT_TRUE))
}
