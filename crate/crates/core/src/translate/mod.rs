//! Translations between the fragments: dependence-atom expansion, the
//! first-order-to-ID compiler, second-order normal forms, and the compilers
//! from second-order sentences into team formulas.
//!
//! Every multi-step operation returns a [`TranslationTrace`] alongside its
//! output. Trace steps chain: each step's `after` text equals the next
//! step's `before` text, the first `before` renders the input and the last
//! `after` renders the output, so replaying the steps reproduces the run.

mod nice;
mod rewrites;
mod so_team;

pub use nice::{
    flatten_fn_args, so_nice_normal_form, unify_fn_occurrences, FnBlock, NiceNormalForm,
};
pub use rewrites::{
    eliminate_all_ivee, eliminate_ivee, expand_dep_atom, fo_to_id, literal_to_id,
};
pub use so_team::{
    d_sentence_to_id, pi11_to_id, replace_fns_with_vars, sigma11_to_d, so_to_bid, so_to_id,
    so_to_ld,
};

use crate::ast::{Atom, Formula, NnfError, SOFormula, Term};
use std::collections::BTreeSet;
use thiserror::Error;

/// One rewrite event. `before` and `after` are rendered formulas; the
/// `citation` is the algebraic schema that justifies the step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub rule: String,
    pub citation: String,
    pub before: String,
    pub after: String,
}

impl TraceStep {
    /// The fixed one-line form used by the command-line tool.
    pub fn render_line(&self) -> String {
        format!(
            "RULE {} [{}] : {} ==> {}",
            self.rule, self.citation, self.before, self.after
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TranslationTrace {
    pub steps: Vec<TraceStep>,
    pub warnings: Vec<String>,
}

impl TranslationTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub(crate) fn push(&mut self, rule: &str, citation: &str, before: String, after: String) {
        self.steps.push(TraceStep {
            rule: rule.to_owned(),
            citation: citation.to_owned(),
            before,
            after,
        });
    }

    pub(crate) fn warn(&mut self, text: impl Into<String>) {
        self.warnings.push(text.into());
    }

    pub(crate) fn absorb(&mut self, other: TranslationTrace) {
        self.steps.extend(other.steps);
        self.warnings.extend(other.warnings);
    }

    pub fn render_lines(&self) -> Vec<String> {
        self.steps.iter().map(TraceStep::render_line).collect()
    }

    /// Adjacent steps agree: step k's `after` is step k+1's `before`.
    pub fn chains(&self) -> bool {
        self.steps.windows(2).all(|w| w[0].after == w[1].before)
    }
}

#[derive(Debug, Error)]
pub enum TranslateError {
    #[error("expected a negated atom or a negated dependence atom")]
    NotNegated,
    #[error("input is not first-order: {0}")]
    NotFirstOrder(String),
    #[error("input must be a sentence; free variables: {0}")]
    NotASentence(String),
    #[error("function-quantifier prefix is not purely existential: found a universal `{0}`")]
    NotExistentialPrefix(String),
    #[error("function-quantifier prefix is not purely universal: found an existential `{0}`")]
    NotUniversalPrefix(String),
    #[error("the linear translation needs exactly one universal/existential block pair, found {0} blocks")]
    NotOneAlternation(usize),
    #[error("input does not match the expected normal form: {0}")]
    NotNormalForm(String),
    #[error("function variable `{name}` occurs with argument tuple ({found}) but its fixed tuple is ({expected})")]
    NonUniform {
        name: String,
        expected: String,
        found: String,
    },
    #[error("conjunctive normal form would exceed {max} clauses")]
    CnfTooLarge { max: usize },
    #[error(transparent)]
    Nnf(#[from] NnfError),
    #[error("internal translation error: {0}")]
    Internal(String),
}

/// Right-associated conjunction of a nonempty list.
pub(crate) fn rchain(mut items: Vec<Formula>) -> Formula {
    let tail = items.pop().expect("nonempty conjunction");
    Formula::and_chain(items, tail)
}

pub(crate) fn so_rchain(items: Vec<SOFormula>) -> SOFormula {
    let mut it = items.into_iter().rev();
    let tail = it.next().expect("nonempty conjunction");
    it.fold(tail, |acc, f| SOFormula::and(f, acc))
}

fn term_idents(t: &Term, out: &mut BTreeSet<String>) {
    match t {
        Term::Var(v) => {
            out.insert(v.clone());
        }
        Term::Const(c) => {
            out.insert(c.clone());
        }
        Term::App(h, args) => {
            out.insert(h.clone());
            for a in args {
                term_idents(a, out);
            }
        }
    }
}

fn atom_idents(a: &Atom, out: &mut BTreeSet<String>) {
    match a {
        Atom::Rel(r, args) => {
            out.insert(r.clone());
            for t in args {
                term_idents(t, out);
            }
        }
        Atom::Eq(l, r) => {
            term_idents(l, out);
            term_idents(r, out);
        }
    }
}

/// Every identifier occurring anywhere in the formula: variables, binders,
/// function and relation names, constants. Used to build avoid-sets for
/// fresh-name generation so that generated names collide with nothing the
/// formula (or its signature symbols, as far as they are mentioned) uses.
pub(crate) fn formula_idents(f: &Formula, out: &mut BTreeSet<String>) {
    match f {
        Formula::Atom(a) | Formula::NegAtom(a) => atom_idents(a, out),
        Formula::Dep(ts) | Formula::NegDep(ts) => {
            for t in ts {
                term_idents(t, out);
            }
        }
        Formula::Bottom => {}
        Formula::And(l, r)
        | Formula::Tensor(l, r)
        | Formula::Ivee(l, r)
        | Formula::Impl(l, r)
        | Formula::Limpl(l, r) => {
            formula_idents(l, out);
            formula_idents(r, out);
        }
        Formula::Forall(x, b) | Formula::Exists(x, b) => {
            out.insert(x.clone());
            formula_idents(b, out);
        }
    }
}

pub(crate) fn so_idents(f: &SOFormula, out: &mut BTreeSet<String>) {
    match f {
        SOFormula::Atom(a) => atom_idents(a, out),
        SOFormula::Not(b) => so_idents(b, out),
        SOFormula::And(l, r) | SOFormula::Or(l, r) | SOFormula::Implies(l, r) => {
            so_idents(l, out);
            so_idents(r, out);
        }
        SOFormula::Forall(x, b) | SOFormula::Exists(x, b) => {
            out.insert(x.clone());
            so_idents(b, out);
        }
        SOFormula::ForallFn(g, _, b) | SOFormula::ExistsFn(g, _, b) => {
            out.insert(g.clone());
            so_idents(b, out);
        }
    }
}
