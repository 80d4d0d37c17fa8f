//! Second-order normal forms. The pipeline turns a sentence into the shape
//! `Qf-blocks ∀x̄ matrix`: negation normal form, quantifier-prefix
//! extraction (with Skolem function variables for first-order existentials
//! and arity raising where a function existential crosses a universal),
//! argument flattening, occurrence unification, and dummy padding into
//! alternating equal-length blocks of equal arity.

use super::{so_idents, so_rchain, TranslateError, TranslationTrace};
use crate::ast::{fresh_var, fresh_vars, Atom, SOFormula, Term};
use crate::parse::render_so;
use std::collections::{BTreeMap, BTreeSet};

/// Safety cap on rewrite loops that are proven to converge.
const MAX_ROUNDS: usize = 10_000;

// ---------------------------------------------------------------------------
// Term and formula walkers
// ---------------------------------------------------------------------------

/// Rebuilds every term bottom-up, applying `rw` to each rebuilt node.
pub(crate) fn map_terms(f: &SOFormula, rw: &dyn Fn(&Term) -> Option<Term>) -> SOFormula {
    fn term(t: &Term, rw: &dyn Fn(&Term) -> Option<Term>) -> Term {
        let rebuilt = match t {
            Term::App(h, args) => {
                Term::app(h.clone(), args.iter().map(|a| term(a, rw)).collect())
            }
            other => other.clone(),
        };
        rw(&rebuilt).unwrap_or(rebuilt)
    }
    let atom = |a: &Atom| match a {
        Atom::Rel(r, args) => Atom::Rel(r.clone(), args.iter().map(|t| term(t, rw)).collect()),
        Atom::Eq(l, r) => Atom::eq(term(l, rw), term(r, rw)),
    };
    match f {
        SOFormula::Atom(a) => SOFormula::Atom(atom(a)),
        SOFormula::Not(b) => SOFormula::not(map_terms(b, rw)),
        SOFormula::And(l, r) => SOFormula::and(map_terms(l, rw), map_terms(r, rw)),
        SOFormula::Or(l, r) => SOFormula::or(map_terms(l, rw), map_terms(r, rw)),
        SOFormula::Implies(l, r) => SOFormula::implies(map_terms(l, rw), map_terms(r, rw)),
        SOFormula::Forall(x, b) => SOFormula::forall(x.clone(), map_terms(b, rw)),
        SOFormula::Exists(x, b) => SOFormula::exists(x.clone(), map_terms(b, rw)),
        SOFormula::ForallFn(g, q, b) => SOFormula::forall_fn(g.clone(), *q, map_terms(b, rw)),
        SOFormula::ExistsFn(g, q, b) => SOFormula::exists_fn(g.clone(), *q, map_terms(b, rw)),
    }
}

/// Visits every term node (including nested arguments), formula-first,
/// term-preorder. Visit order is the textual order of the formula.
pub(crate) fn visit_terms(f: &SOFormula, visit: &mut dyn FnMut(&Term)) {
    fn term(t: &Term, visit: &mut dyn FnMut(&Term)) {
        visit(t);
        if let Term::App(_, args) = t {
            for a in args {
                term(a, visit);
            }
        }
    }
    match f {
        SOFormula::Atom(a) => match a {
            Atom::Rel(_, args) => {
                for t in args {
                    term(t, visit);
                }
            }
            Atom::Eq(l, r) => {
                term(l, visit);
                term(r, visit);
            }
        },
        SOFormula::Not(b) => visit_terms(b, visit),
        SOFormula::And(l, r) | SOFormula::Or(l, r) | SOFormula::Implies(l, r) => {
            visit_terms(l, visit);
            visit_terms(r, visit);
        }
        SOFormula::Forall(_, b)
        | SOFormula::Exists(_, b)
        | SOFormula::ForallFn(_, _, b)
        | SOFormula::ExistsFn(_, _, b) => visit_terms(b, visit),
    }
}

fn term_contains(t: &Term, pred: &dyn Fn(&Term) -> bool) -> bool {
    if pred(t) {
        return true;
    }
    match t {
        Term::App(_, args) => args.iter().any(|a| term_contains(a, pred)),
        _ => false,
    }
}

// ---------------------------------------------------------------------------
// Negation normal form and renaming apart
// ---------------------------------------------------------------------------

/// Pushes negation to the atoms and eliminates classical implication,
/// dualizing quantifiers (including function quantifiers) along the way.
fn so_nnf(phi: &SOFormula) -> SOFormula {
    fn pos(f: &SOFormula) -> SOFormula {
        match f {
            SOFormula::Atom(_) => f.clone(),
            SOFormula::Not(b) => neg(b),
            SOFormula::And(l, r) => SOFormula::and(pos(l), pos(r)),
            SOFormula::Or(l, r) => SOFormula::or(pos(l), pos(r)),
            SOFormula::Implies(l, r) => SOFormula::or(neg(l), pos(r)),
            SOFormula::Forall(x, b) => SOFormula::forall(x.clone(), pos(b)),
            SOFormula::Exists(x, b) => SOFormula::exists(x.clone(), pos(b)),
            SOFormula::ForallFn(g, q, b) => SOFormula::forall_fn(g.clone(), *q, pos(b)),
            SOFormula::ExistsFn(g, q, b) => SOFormula::exists_fn(g.clone(), *q, pos(b)),
        }
    }
    fn neg(f: &SOFormula) -> SOFormula {
        match f {
            SOFormula::Atom(_) => SOFormula::not(f.clone()),
            SOFormula::Not(b) => pos(b),
            SOFormula::And(l, r) => SOFormula::or(neg(l), neg(r)),
            SOFormula::Or(l, r) => SOFormula::and(neg(l), neg(r)),
            SOFormula::Implies(l, r) => SOFormula::and(pos(l), neg(r)),
            SOFormula::Forall(x, b) => SOFormula::exists(x.clone(), neg(b)),
            SOFormula::Exists(x, b) => SOFormula::forall(x.clone(), neg(b)),
            SOFormula::ForallFn(g, q, b) => SOFormula::exists_fn(g.clone(), *q, neg(b)),
            SOFormula::ExistsFn(g, q, b) => SOFormula::forall_fn(g.clone(), *q, neg(b)),
        }
    }
    pos(phi)
}

/// Renames binders so that every quantifier (individual and function alike)
/// introduces a globally unique name. A binder keeps its name when nothing
/// collides with it. `used` accumulates every identifier in play.
fn rename_apart_so(phi: &SOFormula, used: &mut BTreeSet<String>) -> SOFormula {
    type Env = BTreeMap<String, String>;
    fn sub_term(t: &Term, ind: &Env, fns: &Env) -> Term {
        match t {
            Term::Var(v) => match ind.get(v) {
                Some(n) => Term::var(n.clone()),
                None => t.clone(),
            },
            Term::Const(_) => t.clone(),
            Term::App(h, args) => {
                let h2 = fns.get(h).cloned().unwrap_or_else(|| h.clone());
                Term::app(h2, args.iter().map(|a| sub_term(a, ind, fns)).collect())
            }
        }
    }
    fn sub_atom(a: &Atom, ind: &Env, fns: &Env) -> Atom {
        match a {
            Atom::Rel(r, args) => Atom::Rel(
                r.clone(),
                args.iter().map(|t| sub_term(t, ind, fns)).collect(),
            ),
            Atom::Eq(l, r) => Atom::eq(sub_term(l, ind, fns), sub_term(r, ind, fns)),
        }
    }
    fn pick(x: &str, taken: &mut BTreeSet<String>, used: &mut BTreeSet<String>) -> String {
        if taken.insert(x.to_owned()) {
            x.to_owned()
        } else {
            let n = fresh_var(x, used);
            used.insert(n.clone());
            taken.insert(n.clone());
            n
        }
    }
    fn walk(
        f: &SOFormula,
        ind: &Env,
        fns: &Env,
        taken: &mut BTreeSet<String>,
        used: &mut BTreeSet<String>,
    ) -> SOFormula {
        match f {
            SOFormula::Atom(a) => SOFormula::Atom(sub_atom(a, ind, fns)),
            SOFormula::Not(b) => SOFormula::not(walk(b, ind, fns, taken, used)),
            SOFormula::And(l, r) => SOFormula::and(
                walk(l, ind, fns, taken, used),
                walk(r, ind, fns, taken, used),
            ),
            SOFormula::Or(l, r) => SOFormula::or(
                walk(l, ind, fns, taken, used),
                walk(r, ind, fns, taken, used),
            ),
            SOFormula::Implies(l, r) => SOFormula::implies(
                walk(l, ind, fns, taken, used),
                walk(r, ind, fns, taken, used),
            ),
            SOFormula::Forall(x, b) | SOFormula::Exists(x, b) => {
                let n = pick(x, taken, used);
                let mut ind2 = ind.clone();
                ind2.insert(x.clone(), n.clone());
                let body = walk(b, &ind2, fns, taken, used);
                match f {
                    SOFormula::Forall(..) => SOFormula::forall(n, body),
                    _ => SOFormula::exists(n, body),
                }
            }
            SOFormula::ForallFn(g, q, b) | SOFormula::ExistsFn(g, q, b) => {
                let n = pick(g, taken, used);
                let mut fns2 = fns.clone();
                fns2.insert(g.clone(), n.clone());
                let body = walk(b, ind, &fns2, taken, used);
                match f {
                    SOFormula::ForallFn(..) => SOFormula::forall_fn(n, *q, body),
                    _ => SOFormula::exists_fn(n, *q, body),
                }
            }
        }
    }
    let mut taken = phi.free_vars();
    walk(phi, &Env::new(), &Env::new(), &mut taken, used)
}

// ---------------------------------------------------------------------------
// Prefix extraction
// ---------------------------------------------------------------------------

/// A sentence staged into `prefix ∀x̄ matrix`: a mixed list of function
/// quantifiers, one universal first-order block, and a quantifier-free
/// matrix in negation normal form.
pub(crate) struct StageOutput {
    /// Function quantifiers, outermost first: (universal?, name, arity).
    pub prefix: Vec<(bool, String, usize)>,
    /// Universal first-order variables, outermost first.
    pub fo: Vec<String>,
    pub matrix: SOFormula,
    /// Fixed argument tuple per function variable; empty when the variable
    /// never occurs in the matrix.
    pub tuples: BTreeMap<String, Vec<String>>,
    pub used: BTreeSet<String>,
}

pub(crate) fn rebuild_staged(st: &StageOutput) -> SOFormula {
    let mut out = st.matrix.clone();
    for x in st.fo.iter().rev() {
        out = SOFormula::forall(x.clone(), out);
    }
    for (uni, name, q) in st.prefix.iter().rev() {
        out = if *uni {
            SOFormula::forall_fn(name.clone(), *q, out)
        } else {
            SOFormula::exists_fn(name.clone(), *q, out)
        };
    }
    out
}

/// Recursively hoists quantifiers: function quantifiers move to the front
/// (they commute with the connectives because the function space is
/// nonempty and binders are renamed apart), first-order universals collect
/// into one block, and first-order existentials are Skolemized into
/// existential function variables. A first-order existential with no
/// enclosing universal yet receives the designated fresh universal `w` as
/// its single argument; every universal it later crosses is prepended by
/// the arity-raising rule `∀x∃f χ(f t̄) == ∃f∀x χ(f x t̄)`.
fn hoist(
    f: SOFormula,
    used: &mut BTreeSet<String>,
    w: &mut Option<String>,
) -> Result<(Vec<(bool, String, usize)>, Vec<String>, SOFormula), TranslateError> {
    match f {
        SOFormula::Atom(_) => Ok((Vec::new(), Vec::new(), f)),
        SOFormula::Not(ref b) if matches!(b.as_ref(), SOFormula::Atom(_)) => {
            Ok((Vec::new(), Vec::new(), f))
        }
        SOFormula::And(l, r) => {
            let (mut p, mut xs, ml) = hoist(*l, used, w)?;
            let (pr, xr, mr) = hoist(*r, used, w)?;
            p.extend(pr);
            xs.extend(xr);
            Ok((p, xs, SOFormula::and(ml, mr)))
        }
        SOFormula::Or(l, r) => {
            let (mut p, mut xs, ml) = hoist(*l, used, w)?;
            let (pr, xr, mr) = hoist(*r, used, w)?;
            p.extend(pr);
            xs.extend(xr);
            Ok((p, xs, SOFormula::or(ml, mr)))
        }
        SOFormula::Forall(x, b) => {
            let (p, xs, mut m) = hoist(*b, used, w)?;
            let mut out = Vec::with_capacity(p.len());
            for (uni, name, q) in p {
                if uni {
                    // ∀x ∀f == ∀f ∀x: plain swap.
                    out.push((uni, name, q));
                } else {
                    // ∀x ∃f: raise the arity, prepending x to every
                    // application. The name stays (binders are unique).
                    let xv = x.clone();
                    let fname = name.clone();
                    m = map_terms(&m, &|t| match t {
                        Term::App(h, args) if *h == fname => {
                            let mut a2 = Vec::with_capacity(args.len() + 1);
                            a2.push(Term::var(xv.clone()));
                            a2.extend(args.iter().cloned());
                            Some(Term::app(h.clone(), a2))
                        }
                        _ => None,
                    });
                    out.push((false, name, q + 1));
                }
            }
            let mut xs2 = Vec::with_capacity(xs.len() + 1);
            xs2.push(x);
            xs2.extend(xs);
            Ok((out, xs2, m))
        }
        SOFormula::Exists(y, b) => {
            let (mut p, xs, m) = hoist(*b, used, w)?;
            let wn = w
                .get_or_insert_with(|| {
                    let n = fresh_var("w", used);
                    used.insert(n.clone());
                    n
                })
                .clone();
            let fy = fresh_var(&format!("f_{y}"), used);
            used.insert(fy.clone());
            let m2 = map_terms(&m, &|t| match t {
                Term::Var(v) if *v == y => {
                    Some(Term::app(fy.clone(), vec![Term::var(wn.clone())]))
                }
                _ => None,
            });
            p.insert(0, (false, fy, 1));
            Ok((p, xs, m2))
        }
        SOFormula::ForallFn(g, q, b) => {
            let (mut p, xs, m) = hoist(*b, used, w)?;
            p.insert(0, (true, g, q));
            Ok((p, xs, m))
        }
        SOFormula::ExistsFn(g, q, b) => {
            let (mut p, xs, m) = hoist(*b, used, w)?;
            p.insert(0, (false, g, q));
            Ok((p, xs, m))
        }
        other => Err(TranslateError::Internal(format!(
            "negation normal form should not contain {}",
            render_so(&other)
        ))),
    }
}

// ---------------------------------------------------------------------------
// Occurrence forms
// ---------------------------------------------------------------------------

/// Distinct argument tuples per function variable, each list ordered by
/// first occurrence in the formula.
fn collect_forms(
    f: &SOFormula,
    fn_vars: &BTreeSet<String>,
) -> BTreeMap<String, Vec<Vec<Term>>> {
    let mut out: BTreeMap<String, Vec<Vec<Term>>> = BTreeMap::new();
    visit_terms(f, &mut |t| {
        if let Term::App(h, args) = t {
            if fn_vars.contains(h) {
                let entry = out.entry(h.clone()).or_default();
                if !entry.iter().any(|a| a == args) {
                    entry.push(args.clone());
                }
            }
        }
    });
    out
}

fn tuple_vars(args: &[Term]) -> Option<Vec<String>> {
    args.iter()
        .map(|t| match t {
            Term::Var(v) => Some(v.clone()),
            _ => None,
        })
        .collect()
}

/// A tuple must be rewritten when it contains a non-variable argument or a
/// repeated variable, or when it shares a variable with an earlier tuple of
/// the same function variable (tuples must end up pairwise disjoint so that
/// occurrence unification applies).
fn form_needs_flatten(args: &[Term], earlier: &[Vec<Term>]) -> bool {
    let vars = match tuple_vars(args) {
        None => return true,
        Some(v) => v,
    };
    let set: BTreeSet<&String> = vars.iter().collect();
    if set.len() != vars.len() {
        return true;
    }
    earlier.iter().any(|e| {
        tuple_vars(e).is_some_and(|ev| ev.iter().any(|v| set.contains(v)))
    })
}

fn pending_forms(
    f: &SOFormula,
    fn_vars: &BTreeSet<String>,
) -> Vec<(String, Vec<Term>)> {
    let mut pending = Vec::new();
    for (name, tuples) in collect_forms(f, fn_vars) {
        for (i, args) in tuples.iter().enumerate() {
            if form_needs_flatten(args, &tuples[..i]) {
                pending.push((name.clone(), args.clone()));
            }
        }
    }
    pending
}

/// Picks a pending occurrence whose arguments contain no other pending
/// application — the innermost-first order of the flattening loop. One
/// always exists: a pending form of minimal nesting depth qualifies.
fn innermost_pending(pending: &[(String, Vec<Term>)]) -> Option<(String, Vec<Term>)> {
    let is_pending = |t: &Term| -> bool {
        match t {
            Term::App(h, args) => pending.iter().any(|(f, a)| f == h && a == args),
            _ => false,
        }
    };
    pending
        .iter()
        .find(|(_, args)| !args.iter().any(|a| term_contains(a, &is_pending)))
        .cloned()
}

fn flatten_guard(args: &[Term], zs: &[String]) -> SOFormula {
    so_rchain(
        args.iter()
            .zip(zs)
            .map(|(t, z)| SOFormula::Atom(Atom::eq(t.clone(), Term::var(z.clone()))))
            .collect(),
    )
}

fn replace_form(f: &SOFormula, name: &str, args: &[Term], new_head: &str, new_args: &[Term]) -> SOFormula {
    map_terms(f, &|t| match t {
        Term::App(h, a) if h == name && a.as_slice() == args => {
            Some(Term::app(new_head.to_owned(), new_args.to_vec()))
        }
        _ => None,
    })
}

// ---------------------------------------------------------------------------
// Pipeline flattening and unification (prefix form)
// ---------------------------------------------------------------------------

const FLATTEN_CITE: &str = "p(f(t)) == A z. (t=z -> p(f(z)))";
const UNIFY_CITE: &str = "p(f(x), f(y)) == Ef g. (p(f(x), g(y)) & (x=y -> f(x)=g(y)))";

fn pipeline_flatten(
    st: &mut StageOutput,
    trace: &mut TranslationTrace,
    cur: &mut String,
) -> Result<(), TranslateError> {
    let fn_vars: BTreeSet<String> = st.prefix.iter().map(|(_, n, _)| n.clone()).collect();
    for _ in 0..MAX_ROUNDS {
        let pending = pending_forms(&st.matrix, &fn_vars);
        if pending.is_empty() {
            return Ok(());
        }
        let (name, args) = innermost_pending(&pending).ok_or_else(|| {
            TranslateError::Internal("no innermost flattening candidate".to_owned())
        })?;
        let zs = fresh_vars("z", args.len(), &st.used);
        st.used.extend(zs.iter().cloned());
        let zargs: Vec<Term> = zs.iter().map(|z| Term::var(z.clone())).collect();
        let guard = flatten_guard(&args, &zs);
        let replaced = replace_form(&st.matrix, &name, &args, &name, &zargs);
        st.matrix = SOFormula::implies(guard, replaced);
        st.fo.extend(zs);
        step_so(trace, "flatten-args", FLATTEN_CITE, &rebuild_staged(st), cur);
    }
    Err(TranslateError::Internal(
        "argument flattening did not converge".to_owned(),
    ))
}

fn pipeline_unify(
    st: &mut StageOutput,
    trace: &mut TranslationTrace,
    cur: &mut String,
) -> Result<(), TranslateError> {
    for _ in 0..MAX_ROUNDS {
        let fn_vars: BTreeSet<String> = st.prefix.iter().map(|(_, n, _)| n.clone()).collect();
        let forms = collect_forms(&st.matrix, &fn_vars);
        let Some((name, tuples)) = forms
            .into_iter()
            .find(|(_, t)| t.len() > 1)
        else {
            return Ok(());
        };
        let first = tuple_vars(&tuples[0]).ok_or_else(|| {
            TranslateError::Internal("unflattened occurrence during unification".to_owned())
        })?;
        let second = tuple_vars(&tuples[1]).ok_or_else(|| {
            TranslateError::Internal("unflattened occurrence during unification".to_owned())
        })?;
        let g = fresh_var(&name, &st.used);
        st.used.insert(g.clone());
        let pos = st
            .prefix
            .iter()
            .position(|(_, n, _)| *n == name)
            .ok_or_else(|| TranslateError::Internal("unbound function variable".to_owned()))?;
        let q = st.prefix[pos].2;
        st.prefix.insert(pos + 1, (false, g.clone(), q));
        st.matrix = replace_form(
            &st.matrix,
            &name,
            &tuples[1],
            &g,
            &tuples[1].clone(),
        );
        let link = unify_link(&name, &first, &g, &second);
        st.matrix = SOFormula::and(st.matrix.clone(), link);
        step_so(trace, "unify-occurrences", UNIFY_CITE, &rebuild_staged(st), cur);
    }
    Err(TranslateError::Internal(
        "occurrence unification did not converge".to_owned(),
    ))
}

/// The linking constraint `(x1=y1) & ... & (xq=yq) -> f(x̄) = g(ȳ)`. Under
/// the universal block it forces g to agree with f pointwise, which is what
/// makes replacing the second occurrence family sound.
fn unify_link(f: &str, xs: &[String], g: &str, ys: &[String]) -> SOFormula {
    let eqs: Vec<SOFormula> = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| SOFormula::Atom(Atom::eq(Term::var(x.clone()), Term::var(y.clone()))))
        .collect();
    SOFormula::implies(
        so_rchain(eqs),
        SOFormula::Atom(Atom::eq(
            Term::app(f.to_owned(), xs.iter().map(|v| Term::var(v.clone())).collect()),
            Term::app(g.to_owned(), ys.iter().map(|v| Term::var(v.clone())).collect()),
        )),
    )
}

fn step_so(
    trace: &mut TranslationTrace,
    rule: &str,
    cite: &str,
    f: &SOFormula,
    cur: &mut String,
) {
    let next = render_so(f);
    if next != *cur {
        trace.push(rule, cite, cur.clone(), next.clone());
        *cur = next;
    }
}

fn final_tuples(st: &StageOutput) -> Result<BTreeMap<String, Vec<String>>, TranslateError> {
    let fn_vars: BTreeSet<String> = st.prefix.iter().map(|(_, n, _)| n.clone()).collect();
    let forms = collect_forms(&st.matrix, &fn_vars);
    let mut out = BTreeMap::new();
    for (_, name, q) in &st.prefix {
        match forms.get(name) {
            None => {
                out.insert(name.clone(), Vec::new());
            }
            Some(ts) => {
                if ts.len() != 1 {
                    return Err(TranslateError::Internal(format!(
                        "`{name}` still has {} occurrence forms",
                        ts.len()
                    )));
                }
                let vars = tuple_vars(&ts[0]).ok_or_else(|| {
                    TranslateError::Internal(format!("`{name}` has a non-variable argument"))
                })?;
                if vars.len() != *q {
                    return Err(TranslateError::Internal(format!(
                        "`{name}` occurs with {} arguments but is declared with {q}",
                        vars.len()
                    )));
                }
                out.insert(name.clone(), vars);
            }
        }
    }
    Ok(out)
}

/// Stages a sentence into prefix form and normalizes occurrences, without
/// the final padding: steps (i)–(v) of the pipeline.
pub(crate) fn stage_unpadded(
    phi: &SOFormula,
) -> Result<(StageOutput, TranslationTrace), TranslateError> {
    let free = phi.free_vars();
    if !free.is_empty() {
        return Err(TranslateError::NotASentence(
            free.into_iter().collect::<Vec<_>>().join(", "),
        ));
    }
    let mut trace = TranslationTrace::new();
    let mut cur = render_so(phi);
    let mut used = BTreeSet::new();
    so_idents(phi, &mut used);

    let nnf = so_nnf(phi);
    step_so(
        &mut trace,
        "so-nnf",
        "~(f & g) == ~f | ~g; ~(f | g) == ~f & ~g; ~Qv == Q'v ~; f -> g == ~f | g",
        &nnf,
        &mut cur,
    );

    let renamed = rename_apart_so(&nnf, &mut used);
    step_so(
        &mut trace,
        "rename-apart",
        "bound names made pairwise distinct",
        &renamed,
        &mut cur,
    );

    let mut w = None;
    let (prefix, mut fo, matrix) = hoist(renamed, &mut used, &mut w)?;
    if let Some(wn) = w {
        fo.push(wn);
    }
    let mut st = StageOutput {
        prefix,
        fo,
        matrix,
        tuples: BTreeMap::new(),
        used,
    };
    step_so(
        &mut trace,
        "prefix-form",
        "(Qf p) * q == Qf (p * q); A x. Ef f. p(f(t)) == Ef f. A x. p(f(x,t)); E y. p(y) == Ef g. p(g(w))",
        &rebuild_staged(&st),
        &mut cur,
    );

    pipeline_flatten(&mut st, &mut trace, &mut cur)?;
    pipeline_unify(&mut st, &mut trace, &mut cur)?;
    st.tuples = final_tuples(&st)?;
    Ok((st, trace))
}

// ---------------------------------------------------------------------------
// Padding into the alternating block shape
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FnBlock {
    pub universal: bool,
    pub vars: Vec<String>,
}

/// A sentence in the nice normal form: alternating function-quantifier
/// blocks (universal first, 2n of them, each of length p, every variable of
/// arity q), one universal first-order block, and a quantifier-free matrix
/// in which every function variable occurs with one fixed argument tuple.
#[derive(Debug, Clone)]
pub struct NiceNormalForm {
    pub blocks: Vec<FnBlock>,
    /// Universal first-order variables, outermost first; never empty.
    pub fo_universals: Vec<String>,
    pub matrix: SOFormula,
    /// The fixed argument tuple of each function variable.
    pub tuples: BTreeMap<String, Vec<String>>,
    /// q: the shared arity.
    pub arity: usize,
    /// p: the shared block length.
    pub block_len: usize,
}

impl NiceNormalForm {
    /// n, where the prefix has 2n blocks.
    pub fn half_depth(&self) -> usize {
        self.blocks.len() / 2
    }

    /// The normal form as a sentence.
    pub fn to_so(&self) -> SOFormula {
        let mut out = self.matrix.clone();
        for x in self.fo_universals.iter().rev() {
            out = SOFormula::forall(x.clone(), out);
        }
        for b in self.blocks.iter().rev() {
            for v in b.vars.iter().rev() {
                out = if b.universal {
                    SOFormula::forall_fn(v.clone(), self.arity, out)
                } else {
                    SOFormula::exists_fn(v.clone(), self.arity, out)
                };
            }
        }
        out
    }
}

fn validate(nf: &NiceNormalForm) -> Result<(), TranslateError> {
    let fail = |m: String| Err(TranslateError::Internal(m));
    if nf.blocks.len() < 2 || nf.blocks.len() % 2 != 0 {
        return fail(format!("{} blocks after padding", nf.blocks.len()));
    }
    for (i, b) in nf.blocks.iter().enumerate() {
        if b.universal != (i % 2 == 0) {
            return fail("blocks do not alternate".to_owned());
        }
        if b.vars.len() != nf.block_len {
            return fail("blocks have unequal length".to_owned());
        }
    }
    if nf.fo_universals.is_empty() {
        return fail("empty first-order block".to_owned());
    }
    let fo: BTreeSet<&String> = nf.fo_universals.iter().collect();
    for (f, t) in &nf.tuples {
        if t.len() != nf.arity {
            return fail(format!("tuple of `{f}` has length {}", t.len()));
        }
        if !t.iter().all(|v| fo.contains(v)) {
            return fail(format!(
                "tuple of `{f}` uses a variable outside the universal block"
            ));
        }
    }
    check_uniform_matrix(&nf.matrix, &nf.tuples)
}

/// The matrix must be quantifier-free with every function-variable
/// application matching its fixed tuple.
fn check_uniform_matrix(
    m: &SOFormula,
    tuples: &BTreeMap<String, Vec<String>>,
) -> Result<(), TranslateError> {
    let mut quantified = false;
    fn scan(f: &SOFormula, q: &mut bool) {
        match f {
            SOFormula::Forall(..)
            | SOFormula::Exists(..)
            | SOFormula::ForallFn(..)
            | SOFormula::ExistsFn(..) => *q = true,
            SOFormula::Not(b) => scan(b, q),
            SOFormula::And(l, r) | SOFormula::Or(l, r) | SOFormula::Implies(l, r) => {
                scan(l, q);
                scan(r, q);
            }
            SOFormula::Atom(_) => {}
        }
    }
    scan(m, &mut quantified);
    if quantified {
        return Err(TranslateError::Internal(
            "matrix still contains a quantifier".to_owned(),
        ));
    }
    let mut err = None;
    visit_terms(m, &mut |t| {
        if err.is_some() {
            return;
        }
        if let Term::App(h, args) = t {
            if let Some(tuple) = tuples.get(h) {
                let expected: Vec<Term> = tuple.iter().map(|v| Term::var(v.clone())).collect();
                if args != &expected {
                    err = Some(TranslateError::NonUniform {
                        name: h.clone(),
                        expected: tuple.join(","),
                        found: args
                            .iter()
                            .map(crate::parse::render_term)
                            .collect::<Vec<_>>()
                            .join(","),
                    });
                }
            }
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn pad(
    mut st: StageOutput,
    trace: &mut TranslationTrace,
    cur: &mut String,
) -> Result<NiceNormalForm, TranslateError> {
    let q = st.prefix.iter().map(|(_, _, a)| *a).max().unwrap_or(1);

    // Arity padding: every application gains copies of one shared fresh
    // universal until all arities agree. Padding with a fresh variable is
    // sound (section the function at any of its values); padding with an
    // existing bound variable would not be.
    if st.prefix.iter().any(|(_, _, a)| *a < q) {
        let wp = fresh_var("w", &st.used);
        st.used.insert(wp.clone());
        let plan: Vec<(String, usize)> = st
            .prefix
            .iter()
            .filter(|(_, _, a)| *a < q)
            .map(|(_, n, a)| (n.clone(), *a))
            .collect();
        for (name, a) in plan {
            let occurs = st.tuples.get(&name).is_some_and(|t| !t.is_empty());
            if occurs {
                let n2 = name.clone();
                let wp2 = wp.clone();
                st.matrix = map_terms(&st.matrix, &|t| match t {
                    Term::App(h, args) if *h == n2 && args.len() == a => {
                        let mut a2 = args.clone();
                        a2.resize(q, Term::var(wp2.clone()));
                        Some(Term::app(h.clone(), a2))
                    }
                    _ => None,
                });
                st.tuples.get_mut(&name).unwrap().resize(q, wp.clone());
            }
        }
        for e in st.prefix.iter_mut() {
            e.2 = q;
        }
        st.fo.push(wp);
        step_so(
            trace,
            "pad-arity",
            "Ef f. p(f(t)) == Ef f'. A w. p(f'(t,w))",
            &rebuild_staged(&st),
            cur,
        );
    }

    // The universal first-order block must be nonempty.
    if st.fo.is_empty() {
        let x = fresh_var("w", &st.used);
        st.used.insert(x.clone());
        st.fo.push(x);
    }
    let anchor = st.fo.last().expect("nonempty block").clone();

    // Function variables that never occur still need a fixed tuple for the
    // dependence atoms of the downstream translation.
    for (_, name, _) in &st.prefix {
        let t = st.tuples.get_mut(name).expect("tuple entry");
        if t.is_empty() {
            *t = vec![anchor.clone(); q];
        }
    }

    // Group runs of equal quantifiers, then fix the endpoints: the block
    // list must start universal and end existential, giving 2n blocks.
    let mut blocks: Vec<FnBlock> = Vec::new();
    for (uni, name, _) in &st.prefix {
        match blocks.last_mut() {
            Some(b) if b.universal == *uni => b.vars.push(name.clone()),
            _ => blocks.push(FnBlock {
                universal: *uni,
                vars: vec![name.clone()],
            }),
        }
    }
    if blocks.first().is_none_or(|b| !b.universal) {
        blocks.insert(
            0,
            FnBlock {
                universal: true,
                vars: Vec::new(),
            },
        );
    }
    if blocks.last().is_none_or(|b| b.universal) {
        blocks.push(FnBlock {
            universal: false,
            vars: Vec::new(),
        });
    }

    // Pad every block to the shared length with dummy function variables
    // that never occur in the matrix.
    let p = blocks.iter().map(|b| b.vars.len()).max().unwrap_or(0).max(1);
    let mut tuples = st.tuples.clone();
    for b in blocks.iter_mut() {
        while b.vars.len() < p {
            let h = fresh_var("h", &st.used);
            st.used.insert(h.clone());
            tuples.insert(h.clone(), vec![anchor.clone(); q]);
            b.vars.push(h);
        }
    }

    let nf = NiceNormalForm {
        blocks,
        fo_universals: st.fo.clone(),
        matrix: st.matrix.clone(),
        tuples,
        arity: q,
        block_len: p,
    };
    let next = render_so(&nf.to_so());
    if next != *cur {
        trace.push(
            "pad-blocks",
            "p == Qf h. p  (h not in p); blocks padded to equal length",
            cur.clone(),
            next.clone(),
        );
        *cur = next;
    }
    validate(&nf)?;
    Ok(nf)
}

/// Normalizes a second-order sentence into the nice normal form: the full
/// pipeline of negation normal form, prefix extraction, flattening,
/// unification, and padding.
pub fn so_nice_normal_form(
    phi: &SOFormula,
) -> Result<(NiceNormalForm, TranslationTrace), TranslateError> {
    let (st, mut trace) = stage_unpadded(phi)?;
    let mut cur = trace
        .steps
        .last()
        .map(|s| s.after.clone())
        .unwrap_or_else(|| render_so(phi));
    let nf = pad(st, &mut trace, &mut cur)?;
    Ok((nf, trace))
}

// ---------------------------------------------------------------------------
// Standalone flattening and unification on arbitrary formulas
// ---------------------------------------------------------------------------

/// Positions are child paths from the root; each step is the index of the
/// child taken (0 for the only child, 0/1 for binary nodes).
fn node_paths_with_form(
    f: &SOFormula,
    name: &str,
    args: &[Term],
) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    fn walk(
        f: &SOFormula,
        path: &mut Vec<usize>,
        name: &str,
        args: &[Term],
        out: &mut Vec<Vec<usize>>,
    ) {
        if let SOFormula::Atom(_) = f {
            let mut found = false;
            visit_terms(f, &mut |t| {
                if let Term::App(h, a) = t {
                    if h == name && a.as_slice() == args {
                        found = true;
                    }
                }
            });
            if found {
                out.push(path.clone());
            }
            return;
        }
        let children: Vec<&SOFormula> = match f {
            SOFormula::Not(b) => vec![b],
            SOFormula::And(l, r) | SOFormula::Or(l, r) | SOFormula::Implies(l, r) => {
                vec![l, r]
            }
            SOFormula::Forall(_, b)
            | SOFormula::Exists(_, b)
            | SOFormula::ForallFn(_, _, b)
            | SOFormula::ExistsFn(_, _, b) => vec![b],
            SOFormula::Atom(_) => unreachable!(),
        };
        for (i, c) in children.into_iter().enumerate() {
            path.push(i);
            walk(c, path, name, args, out);
            path.pop();
        }
    }
    walk(f, &mut Vec::new(), name, args, &mut out);
    out
}

fn common_prefix(paths: &[Vec<usize>]) -> Vec<usize> {
    let mut out = Vec::new();
    let Some(first) = paths.first() else {
        return out;
    };
    'outer: for (i, step) in first.iter().enumerate() {
        for p in &paths[1..] {
            if p.get(i) != Some(step) {
                break 'outer;
            }
        }
        out.push(*step);
    }
    out
}

/// Replaces the subformula at `path` with `build(subformula)`.
fn rewrite_at(
    f: &SOFormula,
    path: &[usize],
    build: &mut dyn FnMut(&SOFormula) -> SOFormula,
) -> SOFormula {
    if path.is_empty() {
        return build(f);
    }
    let (step, rest) = (path[0], &path[1..]);
    match f {
        SOFormula::Not(b) => SOFormula::not(rewrite_at(b, rest, build)),
        SOFormula::And(l, r) => {
            if step == 0 {
                SOFormula::and(rewrite_at(l, rest, build), r.as_ref().clone())
            } else {
                SOFormula::and(l.as_ref().clone(), rewrite_at(r, rest, build))
            }
        }
        SOFormula::Or(l, r) => {
            if step == 0 {
                SOFormula::or(rewrite_at(l, rest, build), r.as_ref().clone())
            } else {
                SOFormula::or(l.as_ref().clone(), rewrite_at(r, rest, build))
            }
        }
        SOFormula::Implies(l, r) => {
            if step == 0 {
                SOFormula::implies(rewrite_at(l, rest, build), r.as_ref().clone())
            } else {
                SOFormula::implies(l.as_ref().clone(), rewrite_at(r, rest, build))
            }
        }
        SOFormula::Forall(x, b) => SOFormula::forall(x.clone(), rewrite_at(b, rest, build)),
        SOFormula::Exists(x, b) => SOFormula::exists(x.clone(), rewrite_at(b, rest, build)),
        SOFormula::ForallFn(g, q, b) => {
            SOFormula::forall_fn(g.clone(), *q, rewrite_at(b, rest, build))
        }
        SOFormula::ExistsFn(g, q, b) => {
            SOFormula::exists_fn(g.clone(), *q, rewrite_at(b, rest, build))
        }
        SOFormula::Atom(_) => build(f),
    }
}

/// Rewrites every function-variable occurrence whose argument tuple is not
/// a clean tuple of variables (non-variable argument, repeated variable, or
/// a variable shared with another tuple of the same function variable) into
/// the guarded form `∀z̄ (t̄=z̄ -> …f(z̄)…)`, innermost occurrences first,
/// until every function variable occurs only with clean tuples. The guard
/// is placed at the smallest subformula containing all occurrences of the
/// rewritten form.
pub fn flatten_fn_args(phi: &SOFormula) -> (SOFormula, TranslationTrace) {
    let mut trace = TranslationTrace::new();
    let mut used = BTreeSet::new();
    so_idents(phi, &mut used);
    let mut cur_f = rename_apart_so(phi, &mut used);
    let mut cur = render_so(phi);
    step_so(
        &mut trace,
        "rename-apart",
        "bound names made pairwise distinct",
        &cur_f,
        &mut cur,
    );
    let fn_vars = cur_f.all_fn_vars();
    for _ in 0..MAX_ROUNDS {
        let pending = pending_forms(&cur_f, &fn_vars);
        let Some((name, args)) = innermost_pending(&pending) else {
            break;
        };
        let paths = node_paths_with_form(&cur_f, &name, &args);
        let lca = common_prefix(&paths);
        let zs = fresh_vars("z", args.len(), &used);
        used.extend(zs.iter().cloned());
        let zargs: Vec<Term> = zs.iter().map(|z| Term::var(z.clone())).collect();
        cur_f = rewrite_at(&cur_f, &lca, &mut |sub| {
            let guard = flatten_guard(&args, &zs);
            let replaced = replace_form(sub, &name, &args, &name, &zargs);
            zs.iter().rev().fold(
                SOFormula::implies(guard, replaced),
                |acc, z| SOFormula::forall(z.clone(), acc),
            )
        });
        step_so(&mut trace, "flatten-args", FLATTEN_CITE, &cur_f, &mut cur);
    }
    (cur_f, trace)
}

/// Merges the occurrence families of each function variable until every
/// function variable occurs with one fixed argument tuple: the second
/// family moves to a fresh copy `g` quantified immediately after `f`, and
/// the linking constraint is conjoined to the matrix. The input must be in
/// prefix form with flattened occurrences over universally quantified
/// tuples.
pub fn unify_fn_occurrences(
    phi: &SOFormula,
) -> Result<(SOFormula, TranslationTrace), TranslateError> {
    let mut trace = TranslationTrace::new();
    let mut used = BTreeSet::new();
    so_idents(phi, &mut used);
    let mut cur_f = rename_apart_so(phi, &mut used);
    let mut cur = render_so(phi);
    step_so(
        &mut trace,
        "rename-apart",
        "bound names made pairwise distinct",
        &cur_f,
        &mut cur,
    );
    for _ in 0..MAX_ROUNDS {
        // Split the quantifier prefix from the matrix.
        #[derive(Clone)]
        enum Binder {
            Ind(bool, String),
            Fun(bool, String, usize),
        }
        let mut prefix: Vec<Binder> = Vec::new();
        let mut rest = &cur_f;
        loop {
            match rest {
                SOFormula::Forall(x, b) => {
                    prefix.push(Binder::Ind(true, x.clone()));
                    rest = b;
                }
                SOFormula::Exists(x, b) => {
                    prefix.push(Binder::Ind(false, x.clone()));
                    rest = b;
                }
                SOFormula::ForallFn(g, q, b) => {
                    prefix.push(Binder::Fun(true, g.clone(), *q));
                    rest = b;
                }
                SOFormula::ExistsFn(g, q, b) => {
                    prefix.push(Binder::Fun(false, g.clone(), *q));
                    rest = b;
                }
                _ => break,
            }
        }
        let matrix = rest.clone();
        let fn_vars: BTreeSet<String> = prefix
            .iter()
            .filter_map(|b| match b {
                Binder::Fun(_, n, _) => Some(n.clone()),
                Binder::Ind(..) => None,
            })
            .collect();
        let forms = collect_forms(&matrix, &fn_vars);
        let Some((name, tuples)) = forms.into_iter().find(|(_, t)| t.len() > 1) else {
            return Ok((cur_f, trace));
        };
        let first = tuple_vars(&tuples[0]).ok_or_else(|| {
            TranslateError::NotNormalForm(format!(
                "`{name}` has a non-variable argument; flatten the arguments first"
            ))
        })?;
        let second = tuple_vars(&tuples[1]).ok_or_else(|| {
            TranslateError::NotNormalForm(format!(
                "`{name}` has a non-variable argument; flatten the arguments first"
            ))
        })?;
        if first.iter().any(|v| second.contains(v)) {
            return Err(TranslateError::NotNormalForm(format!(
                "occurrence tuples of `{name}` share variables; flatten the arguments first"
            )));
        }
        // Both tuples must be universally quantified in the prefix: the
        // linking constraint forces g = f pointwise only under universals.
        let universals: BTreeSet<&String> = prefix
            .iter()
            .filter_map(|b| match b {
                Binder::Ind(true, n) => Some(n),
                _ => None,
            })
            .collect();
        for v in first.iter().chain(second.iter()) {
            if !universals.contains(v) {
                return Err(TranslateError::NotNormalForm(format!(
                    "tuple variable `{v}` of `{name}` is not universally quantified in the prefix"
                )));
            }
        }
        let g = fresh_var(&name, &used);
        used.insert(g.clone());
        let q = first.len();
        let matrix2 = SOFormula::and(
            replace_form(&matrix, &name, &tuples[1], &g, &tuples[1].clone()),
            unify_link(&name, &first, &g, &second),
        );
        // Rebuild, inserting Ef g immediately after f's own quantifier.
        let mut out = matrix2;
        for b in prefix.iter().rev() {
            out = match b {
                Binder::Ind(true, x) => SOFormula::forall(x.clone(), out),
                Binder::Ind(false, x) => SOFormula::exists(x.clone(), out),
                Binder::Fun(uni, n, a) => {
                    if n == &name {
                        out = SOFormula::exists_fn(g.clone(), q, out);
                    }
                    if *uni {
                        SOFormula::forall_fn(n.clone(), *a, out)
                    } else {
                        SOFormula::exists_fn(n.clone(), *a, out)
                    }
                }
            };
        }
        cur_f = out;
        step_so(&mut trace, "unify-occurrences", UNIFY_CITE, &cur_f, &mut cur);
    }
    Err(TranslateError::Internal(
        "occurrence unification did not converge".to_owned(),
    ))
}
