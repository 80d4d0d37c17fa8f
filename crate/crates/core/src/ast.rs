//! Syntax: signatures, terms, team-logic formulas, second-order formulas,
//! fragment classification, and fresh-variable generation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Vocabulary of relation, function and constant symbols.
///
/// Equality is built in and never part of a signature. Names are unique
/// across all three kinds; relation and function arities are at least 1.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Signature {
    relations: BTreeMap<String, usize>,
    functions: BTreeMap<String, usize>,
    constants: BTreeSet<String>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SignatureError {
    #[error("symbol `{0}` declared more than once")]
    DuplicateSymbol(String),
    #[error("symbol `{0}` must have arity >= 1, got 0")]
    ZeroArity(String),
    #[error("symbol name `{0}` is reserved")]
    ReservedName(String),
    #[error("symbol name `{0}` is not a valid identifier")]
    BadName(String),
}

/// Names the surface syntax claims for itself; they can never be symbols.
pub const RESERVED_WORDS: &[&str] = &["A", "E", "Af", "Ef", "dep", "ndep", "bot"];

pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Serialize, Deserialize)]
struct SignatureJson {
    #[serde(default)]
    relations: BTreeMap<String, usize>,
    #[serde(default)]
    functions: BTreeMap<String, usize>,
    #[serde(default)]
    constants: BTreeSet<String>,
}

impl Signature {
    pub fn empty() -> Self {
        Signature::default()
    }

    pub fn new(
        relations: impl IntoIterator<Item = (String, usize)>,
        functions: impl IntoIterator<Item = (String, usize)>,
        constants: impl IntoIterator<Item = String>,
    ) -> Result<Self, SignatureError> {
        let mut sig = Signature::default();
        for (name, arity) in relations {
            sig.check_name(&name)?;
            if arity == 0 {
                return Err(SignatureError::ZeroArity(name));
            }
            sig.relations.insert(name, arity);
        }
        for (name, arity) in functions {
            sig.check_name(&name)?;
            if arity == 0 {
                return Err(SignatureError::ZeroArity(name));
            }
            sig.functions.insert(name, arity);
        }
        for name in constants {
            sig.check_name(&name)?;
            sig.constants.insert(name);
        }
        Ok(sig)
    }

    fn check_name(&self, name: &str) -> Result<(), SignatureError> {
        if !is_identifier(name) {
            return Err(SignatureError::BadName(name.to_owned()));
        }
        if RESERVED_WORDS.contains(&name) {
            return Err(SignatureError::ReservedName(name.to_owned()));
        }
        if self.has_symbol(name) {
            return Err(SignatureError::DuplicateSymbol(name.to_owned()));
        }
        Ok(())
    }

    pub fn relation_arity(&self, name: &str) -> Option<usize> {
        self.relations.get(name).copied()
    }

    pub fn function_arity(&self, name: &str) -> Option<usize> {
        self.functions.get(name).copied()
    }

    pub fn has_constant(&self, name: &str) -> bool {
        self.constants.contains(name)
    }

    pub fn has_symbol(&self, name: &str) -> bool {
        self.relations.contains_key(name)
            || self.functions.contains_key(name)
            || self.constants.contains(name)
    }

    pub fn relations(&self) -> impl Iterator<Item = (&str, usize)> {
        self.relations.iter().map(|(n, a)| (n.as_str(), *a))
    }

    pub fn functions(&self) -> impl Iterator<Item = (&str, usize)> {
        self.functions.iter().map(|(n, a)| (n.as_str(), *a))
    }

    pub fn constants(&self) -> impl Iterator<Item = &str> {
        self.constants.iter().map(|s| s.as_str())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&SignatureJson {
            relations: self.relations.clone(),
            functions: self.functions.clone(),
            constants: self.constants.clone(),
        })
        .expect("signature serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let raw: SignatureJson = serde_json::from_str(text).map_err(|e| e.to_string())?;
        Signature::new(raw.relations, raw.functions, raw.constants).map_err(|e| e.to_string())
    }
}

/// First-order term: variable, constant, or function application.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(String),
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn app(name: impl Into<String>, args: Vec<Term>) -> Term {
        Term::App(name.into(), args)
    }

    /// Collects the variables occurring in the term.
    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Const(_) => {}
            Term::App(_, args) => {
                for t in args {
                    t.collect_vars(out);
                }
            }
        }
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }
}

/// Atomic formula: relation application or equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Atom {
    Rel(String, Vec<Term>),
    Eq(Term, Term),
}

impl Atom {
    pub fn eq(l: Term, r: Term) -> Atom {
        Atom::Eq(l, r)
    }

    pub fn terms(&self) -> Vec<&Term> {
        match self {
            Atom::Rel(_, ts) => ts.iter().collect(),
            Atom::Eq(l, r) => vec![l, r],
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        for t in self.terms() {
            t.collect_vars(out);
        }
    }
}

/// Team-logic formula in negation normal form.
///
/// `~` exists only on atoms (`NegAtom`) and dependence atoms (`NegDep`);
/// the grammar has no unrestricted negation. `Dep(ts)` asserts that the
/// last term is determined by the preceding ones; `Dep` of a single term
/// asserts constancy.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(Atom),
    NegAtom(Atom),
    Dep(Vec<Term>),
    NegDep(Vec<Term>),
    Bottom,
    And(Box<Formula>, Box<Formula>),
    /// Split disjunction: the team divides into two covering subteams.
    Tensor(Box<Formula>, Box<Formula>),
    /// Intuitionistic disjunction: one disjunct holds of the whole team.
    Ivee(Box<Formula>, Box<Formula>),
    /// Intuitionistic implication: quantifies over all subteams.
    Impl(Box<Formula>, Box<Formula>),
    /// Linear implication: quantifies over all teams on the same domain.
    Limpl(Box<Formula>, Box<Formula>),
    Forall(String, Box<Formula>),
    Exists(String, Box<Formula>),
}

impl Formula {
    pub fn and(l: Formula, r: Formula) -> Formula {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn tensor(l: Formula, r: Formula) -> Formula {
        Formula::Tensor(Box::new(l), Box::new(r))
    }

    pub fn ivee(l: Formula, r: Formula) -> Formula {
        Formula::Ivee(Box::new(l), Box::new(r))
    }

    pub fn impl_(l: Formula, r: Formula) -> Formula {
        Formula::Impl(Box::new(l), Box::new(r))
    }

    pub fn limpl(l: Formula, r: Formula) -> Formula {
        Formula::Limpl(Box::new(l), Box::new(r))
    }

    pub fn forall(x: impl Into<String>, body: Formula) -> Formula {
        Formula::Forall(x.into(), Box::new(body))
    }

    pub fn exists(x: impl Into<String>, body: Formula) -> Formula {
        Formula::Exists(x.into(), Box::new(body))
    }

    /// Right-associated conjunction of `items` ending in `tail`.
    pub fn and_chain(items: Vec<Formula>, tail: Formula) -> Formula {
        items
            .into_iter()
            .rev()
            .fold(tail, |acc, f| Formula::and(f, acc))
    }

    /// Free variables. A dependence atom frees every variable of its terms.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free_vars(&mut out);
        out
    }

    fn collect_free_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(a) | Formula::NegAtom(a) => a.collect_vars(out),
            Formula::Dep(ts) | Formula::NegDep(ts) => {
                for t in ts {
                    t.collect_vars(out);
                }
            }
            Formula::Bottom => {}
            Formula::And(l, r)
            | Formula::Tensor(l, r)
            | Formula::Ivee(l, r)
            | Formula::Impl(l, r)
            | Formula::Limpl(l, r) => {
                l.collect_free_vars(out);
                r.collect_free_vars(out);
            }
            Formula::Forall(x, body) | Formula::Exists(x, body) => {
                let mut inner = BTreeSet::new();
                body.collect_free_vars(&mut inner);
                inner.remove(x);
                out.extend(inner);
            }
        }
    }

    /// Every variable occurring anywhere, free or bound.
    pub fn all_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_all_vars(&mut out);
        out
    }

    fn collect_all_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(a) | Formula::NegAtom(a) => a.collect_vars(out),
            Formula::Dep(ts) | Formula::NegDep(ts) => {
                for t in ts {
                    t.collect_vars(out);
                }
            }
            Formula::Bottom => {}
            Formula::And(l, r)
            | Formula::Tensor(l, r)
            | Formula::Ivee(l, r)
            | Formula::Impl(l, r)
            | Formula::Limpl(l, r) => {
                l.collect_all_vars(out);
                r.collect_all_vars(out);
            }
            Formula::Forall(x, body) | Formula::Exists(x, body) => {
                out.insert(x.clone());
                body.collect_all_vars(out);
            }
        }
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Fragment classification; see [`Fragment`].
    pub fn fragment(&self) -> FragmentInfo {
        let mut admits = BTreeSet::new();
        admits.insert(Fragment::Bid);
        if self.in_fo() {
            admits.insert(Fragment::Fo);
        }
        if self.in_d() {
            admits.insert(Fragment::D);
        }
        if self.in_id() {
            admits.insert(Fragment::Id);
        }
        if self.in_ld() {
            admits.insert(Fragment::Ld);
        }
        let least = *admits.iter().min().expect("bid always admits");
        FragmentInfo { least, admits }
    }

    /// Literals, `&`, `|`, and quantifiers only.
    pub fn in_fo(&self) -> bool {
        match self {
            Formula::Atom(_) | Formula::NegAtom(_) => true,
            Formula::Dep(_) | Formula::NegDep(_) | Formula::Bottom => false,
            Formula::And(l, r) | Formula::Tensor(l, r) => l.in_fo() && r.in_fo(),
            Formula::Ivee(..) | Formula::Impl(..) | Formula::Limpl(..) => false,
            Formula::Forall(_, b) | Formula::Exists(_, b) => b.in_fo(),
        }
    }

    /// Syntactic flatness: a team satisfies the formula iff each of its
    /// rows does on its own. First-order formulas are flat, and flatness is
    /// closed under `->` as well: when both sides are flat, the maximal
    /// antecedent subteam is the set of antecedent rows, so the implication
    /// reduces to a row-by-row classical one. `bot` is flat with the empty
    /// team as the only satisfier. A `false` answer just means flatness is
    /// not syntactically evident, not that it fails.
    pub fn flat(&self) -> bool {
        match self {
            Formula::Atom(_) | Formula::NegAtom(_) | Formula::Bottom => true,
            Formula::Dep(_) | Formula::NegDep(_) => false,
            Formula::And(l, r) | Formula::Tensor(l, r) | Formula::Impl(l, r) => {
                l.flat() && r.flat()
            }
            Formula::Ivee(..) | Formula::Limpl(..) => false,
            Formula::Forall(_, b) | Formula::Exists(_, b) => b.flat(),
        }
    }

    /// Literals, dependence atoms of any arity, `&`, `|`, and quantifiers.
    pub fn in_d(&self) -> bool {
        match self {
            Formula::Atom(_) | Formula::NegAtom(_) | Formula::Dep(_) | Formula::NegDep(_) => true,
            Formula::Bottom => false,
            Formula::And(l, r) | Formula::Tensor(l, r) => l.in_d() && r.in_d(),
            Formula::Ivee(..) | Formula::Impl(..) | Formula::Limpl(..) => false,
            Formula::Forall(_, b) | Formula::Exists(_, b) => b.in_d(),
        }
    }

    /// Non-negated atoms, single-term dependence atoms, `bot`, `&`, `||`,
    /// `->`, and quantifiers.
    pub fn in_id(&self) -> bool {
        match self {
            Formula::Atom(_) | Formula::Bottom => true,
            Formula::Dep(ts) => ts.len() == 1,
            Formula::NegAtom(_) | Formula::NegDep(_) => false,
            Formula::And(l, r) | Formula::Ivee(l, r) | Formula::Impl(l, r) => {
                l.in_id() && r.in_id()
            }
            Formula::Tensor(..) | Formula::Limpl(..) => false,
            Formula::Forall(_, b) | Formula::Exists(_, b) => b.in_id(),
        }
    }

    /// The `D` grammar extended with `-*`.
    pub fn in_ld(&self) -> bool {
        match self {
            Formula::Atom(_) | Formula::NegAtom(_) | Formula::Dep(_) | Formula::NegDep(_) => true,
            Formula::Bottom => false,
            Formula::And(l, r) | Formula::Tensor(l, r) | Formula::Limpl(l, r) => {
                l.in_ld() && r.in_ld()
            }
            Formula::Ivee(..) | Formula::Impl(..) => false,
            Formula::Forall(_, b) | Formula::Exists(_, b) => b.in_ld(),
        }
    }
}

/// Sublanguages, ordered so that `min` over the admitting set picks the
/// canonical least tag. `Fo` and `Id` are incomparable as grammars; the
/// order below only fixes which one reports first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Fragment {
    Fo,
    D,
    Id,
    Ld,
    Bid,
}

impl fmt::Display for Fragment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Fragment::Fo => "fo",
            Fragment::D => "d",
            Fragment::Id => "id",
            Fragment::Ld => "ld",
            Fragment::Bid => "bid",
        };
        f.write_str(s)
    }
}

/// Which grammars generate a formula, and the least of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FragmentInfo {
    pub least: Fragment,
    pub admits: BTreeSet<Fragment>,
}

/// Second-order formula with unrestricted negation and implication, plus
/// function quantifiers. Relation quantifiers are not part of the language.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SOFormula {
    Atom(Atom),
    Not(Box<SOFormula>),
    And(Box<SOFormula>, Box<SOFormula>),
    Or(Box<SOFormula>, Box<SOFormula>),
    Implies(Box<SOFormula>, Box<SOFormula>),
    Forall(String, Box<SOFormula>),
    Exists(String, Box<SOFormula>),
    /// Universal quantifier over functions of the given arity.
    ForallFn(String, usize, Box<SOFormula>),
    /// Existential quantifier over functions of the given arity.
    ExistsFn(String, usize, Box<SOFormula>),
}

impl SOFormula {
    pub fn not(f: SOFormula) -> SOFormula {
        SOFormula::Not(Box::new(f))
    }

    pub fn and(l: SOFormula, r: SOFormula) -> SOFormula {
        SOFormula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: SOFormula, r: SOFormula) -> SOFormula {
        SOFormula::Or(Box::new(l), Box::new(r))
    }

    pub fn implies(l: SOFormula, r: SOFormula) -> SOFormula {
        SOFormula::Implies(Box::new(l), Box::new(r))
    }

    pub fn forall(x: impl Into<String>, body: SOFormula) -> SOFormula {
        SOFormula::Forall(x.into(), Box::new(body))
    }

    pub fn exists(x: impl Into<String>, body: SOFormula) -> SOFormula {
        SOFormula::Exists(x.into(), Box::new(body))
    }

    pub fn forall_fn(f: impl Into<String>, arity: usize, body: SOFormula) -> SOFormula {
        SOFormula::ForallFn(f.into(), arity, Box::new(body))
    }

    pub fn exists_fn(f: impl Into<String>, arity: usize, body: SOFormula) -> SOFormula {
        SOFormula::ExistsFn(f.into(), arity, Box::new(body))
    }

    /// Free individual variables. A function application `f(t...)` frees
    /// only the variables of its arguments, never `f` itself.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free_vars(&mut out);
        out
    }

    fn collect_free_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            SOFormula::Atom(a) => a.collect_vars(out),
            SOFormula::Not(b) => b.collect_free_vars(out),
            SOFormula::And(l, r) | SOFormula::Or(l, r) | SOFormula::Implies(l, r) => {
                l.collect_free_vars(out);
                r.collect_free_vars(out);
            }
            SOFormula::Forall(x, b) | SOFormula::Exists(x, b) => {
                let mut inner = BTreeSet::new();
                b.collect_free_vars(&mut inner);
                inner.remove(x);
                out.extend(inner);
            }
            SOFormula::ForallFn(f, _, b) | SOFormula::ExistsFn(f, _, b) => {
                // A function binder removes `f` from the *term-head*
                // namespace; individual variables pass through untouched,
                // but a variable spelled like `f` cannot occur under the
                // binder (the parser rejects it), so plain removal is safe.
                let mut inner = BTreeSet::new();
                b.collect_free_vars(&mut inner);
                inner.remove(f);
                out.extend(inner);
            }
        }
    }

    /// Free function variables: heads of applications that are neither
    /// bound by a function quantifier nor signature functions.
    pub fn free_fn_vars(&self, sig: &Signature) -> BTreeSet<String> {
        fn walk_term(t: &Term, sig: &Signature, bound: &BTreeSet<String>, out: &mut BTreeSet<String>) {
            if let Term::App(f, args) = t {
                if !bound.contains(f) && sig.function_arity(f).is_none() {
                    out.insert(f.clone());
                }
                for a in args {
                    walk_term(a, sig, bound, out);
                }
            }
        }
        fn walk(
            phi: &SOFormula,
            sig: &Signature,
            bound: &mut BTreeSet<String>,
            out: &mut BTreeSet<String>,
        ) {
            match phi {
                SOFormula::Atom(a) => {
                    for t in a.terms() {
                        walk_term(t, sig, bound, out);
                    }
                }
                SOFormula::Not(b) => walk(b, sig, bound, out),
                SOFormula::And(l, r) | SOFormula::Or(l, r) | SOFormula::Implies(l, r) => {
                    walk(l, sig, bound, out);
                    walk(r, sig, bound, out);
                }
                SOFormula::Forall(_, b) | SOFormula::Exists(_, b) => walk(b, sig, bound, out),
                SOFormula::ForallFn(f, _, b) | SOFormula::ExistsFn(f, _, b) => {
                    let fresh = bound.insert(f.clone());
                    walk(b, sig, bound, out);
                    if fresh {
                        bound.remove(f);
                    }
                }
            }
        }
        let mut out = BTreeSet::new();
        walk(self, sig, &mut BTreeSet::new(), &mut out);
        out
    }

    /// True when the formula contains no function quantifiers.
    pub fn is_first_order(&self) -> bool {
        match self {
            SOFormula::Atom(_) => true,
            SOFormula::Not(b) => b.is_first_order(),
            SOFormula::And(l, r) | SOFormula::Or(l, r) | SOFormula::Implies(l, r) => {
                l.is_first_order() && r.is_first_order()
            }
            SOFormula::Forall(_, b) | SOFormula::Exists(_, b) => b.is_first_order(),
            SOFormula::ForallFn(..) | SOFormula::ExistsFn(..) => false,
        }
    }

    /// Every individual variable occurring anywhere, free or bound.
    pub fn all_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        fn walk(phi: &SOFormula, out: &mut BTreeSet<String>) {
            match phi {
                SOFormula::Atom(a) => a.collect_vars(out),
                SOFormula::Not(b) => walk(b, out),
                SOFormula::And(l, r) | SOFormula::Or(l, r) | SOFormula::Implies(l, r) => {
                    walk(l, out);
                    walk(r, out);
                }
                SOFormula::Forall(x, b) | SOFormula::Exists(x, b) => {
                    out.insert(x.clone());
                    walk(b, out);
                }
                SOFormula::ForallFn(_, _, b) | SOFormula::ExistsFn(_, _, b) => walk(b, out),
            }
        }
        walk(self, &mut out);
        out
    }

    /// Every function-variable name bound anywhere in the formula.
    pub fn all_fn_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        fn walk(phi: &SOFormula, out: &mut BTreeSet<String>) {
            match phi {
                SOFormula::Atom(_) => {}
                SOFormula::Not(b) => walk(b, out),
                SOFormula::And(l, r) | SOFormula::Or(l, r) | SOFormula::Implies(l, r) => {
                    walk(l, out);
                    walk(r, out);
                }
                SOFormula::Forall(_, b) | SOFormula::Exists(_, b) => walk(b, out),
                SOFormula::ForallFn(f, _, b) | SOFormula::ExistsFn(f, _, b) => {
                    out.insert(f.clone());
                    walk(b, out);
                }
            }
        }
        walk(self, &mut out);
        out
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NnfError {
    #[error("negation normal form is defined for first-order input; found function quantifier `{0}`")]
    FnQuantifier(String),
}

/// Rewrites a classical first-order formula (unrestricted `~`, `->`) into
/// the negation-normal-form team language, with `|` read as the split
/// disjunction. On first-order formulas the two readings agree row-wise.
pub fn to_nnf(phi: &SOFormula) -> Result<Formula, NnfError> {
    fn pos(phi: &SOFormula) -> Result<Formula, NnfError> {
        match phi {
            SOFormula::Atom(a) => Ok(Formula::Atom(a.clone())),
            SOFormula::Not(b) => neg(b),
            SOFormula::And(l, r) => Ok(Formula::and(pos(l)?, pos(r)?)),
            SOFormula::Or(l, r) => Ok(Formula::tensor(pos(l)?, pos(r)?)),
            SOFormula::Implies(l, r) => Ok(Formula::tensor(neg(l)?, pos(r)?)),
            SOFormula::Forall(x, b) => Ok(Formula::forall(x.clone(), pos(b)?)),
            SOFormula::Exists(x, b) => Ok(Formula::exists(x.clone(), pos(b)?)),
            SOFormula::ForallFn(f, _, _) | SOFormula::ExistsFn(f, _, _) => {
                Err(NnfError::FnQuantifier(f.clone()))
            }
        }
    }
    fn neg(phi: &SOFormula) -> Result<Formula, NnfError> {
        match phi {
            SOFormula::Atom(a) => Ok(Formula::NegAtom(a.clone())),
            SOFormula::Not(b) => pos(b),
            SOFormula::And(l, r) => Ok(Formula::tensor(neg(l)?, neg(r)?)),
            SOFormula::Or(l, r) => Ok(Formula::and(neg(l)?, neg(r)?)),
            SOFormula::Implies(l, r) => Ok(Formula::and(pos(l)?, neg(r)?)),
            SOFormula::Forall(x, b) => Ok(Formula::exists(x.clone(), neg(b)?)),
            SOFormula::Exists(x, b) => Ok(Formula::forall(x.clone(), neg(b)?)),
            SOFormula::ForallFn(f, _, _) | SOFormula::ExistsFn(f, _, _) => {
                Err(NnfError::FnQuantifier(f.clone()))
            }
        }
    }
    pos(phi)
}

/// Returns `count` names not in `avoid`, drawn from the candidate sequence
/// `base, base_1, base_2, ...` in order.
pub fn fresh_vars(base: &str, count: usize, avoid: &BTreeSet<String>) -> Vec<String> {
    let mut out = Vec::with_capacity(count);
    let mut k = 0usize;
    while out.len() < count {
        let candidate = if k == 0 {
            base.to_owned()
        } else {
            format!("{base}_{k}")
        };
        k += 1;
        if !avoid.contains(&candidate) && !out.contains(&candidate) {
            out.push(candidate);
        }
    }
    out
}

/// Single fresh name; see [`fresh_vars`].
pub fn fresh_var(base: &str, avoid: &BTreeSet<String>) -> String {
    fresh_vars(base, 1, avoid).pop().expect("one name")
}
