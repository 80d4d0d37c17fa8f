//! Rewrites inside the team language: dependence-atom expansion, negated
//! literals, the first-order-to-ID compiler, and elimination of the
//! either-disjunction.

use super::{formula_idents, rchain, TranslateError, TranslationTrace};
use crate::ast::{fresh_var, Atom, Formula, Term};
use crate::parse::render;
use std::collections::{BTreeMap, BTreeSet};

/// Emit a clause-count warning once the distributed normal form passes this
/// many clauses.
const CNF_WARN_CLAUSES: usize = 512;
/// Hard cap on the distributed normal form.
const CNF_MAX_CLAUSES: usize = 65_536;

/// Rewrites a multi-term dependence atom into the implication form
/// `(=(t1) & ... & =(t_{n-1})) -> =(tn)`; a constancy atom (n = 1) is
/// returned unchanged.
pub fn expand_dep_atom(terms: &[Term]) -> Formula {
    if terms.len() < 2 {
        return Formula::Dep(terms.to_vec());
    }
    let atoms: Vec<Formula> = terms[..terms.len() - 1]
        .iter()
        .map(|t| Formula::Dep(vec![t.clone()]))
        .collect();
    Formula::impl_(
        rchain(atoms),
        Formula::Dep(vec![terms[terms.len() - 1].clone()]),
    )
}

/// Rewrites a negated atom or negated dependence atom into an implication
/// to falsum. Positive input is rejected.
pub fn literal_to_id(lit: &Formula) -> Result<Formula, TranslateError> {
    match lit {
        Formula::NegAtom(a) => Ok(Formula::impl_(Formula::Atom(a.clone()), Formula::Bottom)),
        Formula::NegDep(ts) => Ok(Formula::impl_(Formula::Dep(ts.clone()), Formula::Bottom)),
        _ => Err(TranslateError::NotNegated),
    }
}

/// Renames bound variables so that every binder introduces a globally
/// unique name, distinct from every identifier mentioned in the formula.
/// A binder keeps its name when nothing collides with it.
fn rename_apart_fo(phi: &Formula) -> Formula {
    let mut used = BTreeSet::new();
    formula_idents(phi, &mut used);
    let mut taken: BTreeSet<String> = phi.free_vars();
    fn walk(
        f: &Formula,
        env: &BTreeMap<String, String>,
        taken: &mut BTreeSet<String>,
        used: &mut BTreeSet<String>,
    ) -> Formula {
        let sub_term = |t: &Term, env: &BTreeMap<String, String>| -> Term {
            fn go(t: &Term, env: &BTreeMap<String, String>) -> Term {
                match t {
                    Term::Var(v) => match env.get(v) {
                        Some(n) => Term::var(n.clone()),
                        None => t.clone(),
                    },
                    Term::Const(_) => t.clone(),
                    Term::App(h, args) => {
                        Term::app(h.clone(), args.iter().map(|a| go(a, env)).collect())
                    }
                }
            }
            go(t, env)
        };
        let sub_atom = |a: &Atom, env: &BTreeMap<String, String>| -> Atom {
            match a {
                Atom::Rel(r, args) => {
                    Atom::Rel(r.clone(), args.iter().map(|t| sub_term(t, env)).collect())
                }
                Atom::Eq(l, r) => Atom::eq(sub_term(l, env), sub_term(r, env)),
            }
        };
        match f {
            Formula::Atom(a) => Formula::Atom(sub_atom(a, env)),
            Formula::NegAtom(a) => Formula::NegAtom(sub_atom(a, env)),
            Formula::Dep(ts) => Formula::Dep(ts.iter().map(|t| sub_term(t, env)).collect()),
            Formula::NegDep(ts) => Formula::NegDep(ts.iter().map(|t| sub_term(t, env)).collect()),
            Formula::Bottom => Formula::Bottom,
            Formula::And(l, r) => Formula::and(walk(l, env, taken, used), walk(r, env, taken, used)),
            Formula::Tensor(l, r) => {
                Formula::tensor(walk(l, env, taken, used), walk(r, env, taken, used))
            }
            Formula::Ivee(l, r) => {
                Formula::ivee(walk(l, env, taken, used), walk(r, env, taken, used))
            }
            Formula::Impl(l, r) => {
                Formula::impl_(walk(l, env, taken, used), walk(r, env, taken, used))
            }
            Formula::Limpl(l, r) => {
                Formula::limpl(walk(l, env, taken, used), walk(r, env, taken, used))
            }
            Formula::Forall(x, b) | Formula::Exists(x, b) => {
                let fresh = if taken.contains(x) {
                    let n = fresh_var(x, used);
                    used.insert(n.clone());
                    n
                } else {
                    taken.insert(x.clone());
                    x.clone()
                };
                let mut env2 = env.clone();
                env2.insert(x.clone(), fresh.clone());
                let body = walk(b, &env2, taken, used);
                match f {
                    Formula::Forall(..) => Formula::forall(fresh, body),
                    _ => Formula::exists(fresh, body),
                }
            }
        }
    }
    walk(phi, &BTreeMap::new(), &mut taken, &mut used)
}

/// Pulls the quantifiers of a first-order formula to the front. Sound for
/// first-order formulas because they are flat, so the classical prenex laws
/// hold; requires binders renamed apart.
fn prenex_fo(phi: &Formula) -> (Vec<(bool, String)>, Formula) {
    match phi {
        Formula::Forall(x, b) => {
            let (mut p, m) = prenex_fo(b);
            p.insert(0, (true, x.clone()));
            (p, m)
        }
        Formula::Exists(x, b) => {
            let (mut p, m) = prenex_fo(b);
            p.insert(0, (false, x.clone()));
            (p, m)
        }
        Formula::And(l, r) => {
            let (mut pl, ml) = prenex_fo(l);
            let (pr, mr) = prenex_fo(r);
            pl.extend(pr);
            (pl, Formula::and(ml, mr))
        }
        Formula::Tensor(l, r) => {
            let (mut pl, ml) = prenex_fo(l);
            let (pr, mr) = prenex_fo(r);
            pl.extend(pr);
            (pl, Formula::tensor(ml, mr))
        }
        leaf => (Vec::new(), leaf.clone()),
    }
}

fn requantify(prefix: &[(bool, String)], matrix: Formula) -> Formula {
    prefix.iter().rev().fold(matrix, |acc, (uni, x)| {
        if *uni {
            Formula::forall(x.clone(), acc)
        } else {
            Formula::exists(x.clone(), acc)
        }
    })
}

/// Clauses of the quantifier-free matrix, by distributing `|` over `&`.
/// Each clause is a list of literals in left-to-right order.
fn cnf_clauses(matrix: &Formula) -> Result<Vec<Vec<Formula>>, TranslateError> {
    match matrix {
        Formula::And(l, r) => {
            let mut cl = cnf_clauses(l)?;
            cl.extend(cnf_clauses(r)?);
            if cl.len() > CNF_MAX_CLAUSES {
                return Err(TranslateError::CnfTooLarge {
                    max: CNF_MAX_CLAUSES,
                });
            }
            Ok(cl)
        }
        Formula::Tensor(l, r) => {
            let cl = cnf_clauses(l)?;
            let cr = cnf_clauses(r)?;
            if cl.len().saturating_mul(cr.len()) > CNF_MAX_CLAUSES {
                return Err(TranslateError::CnfTooLarge {
                    max: CNF_MAX_CLAUSES,
                });
            }
            let mut out = Vec::with_capacity(cl.len() * cr.len());
            for a in &cl {
                for b in &cr {
                    let mut clause = a.clone();
                    clause.extend(b.iter().cloned());
                    out.push(clause);
                }
            }
            Ok(out)
        }
        lit @ (Formula::Atom(_) | Formula::NegAtom(_)) => Ok(vec![vec![lit.clone()]]),
        other => Err(TranslateError::Internal(format!(
            "unexpected connective in a first-order matrix: {}",
            render(other)
        ))),
    }
}

fn clause_matrix(clauses: &[Vec<Formula>]) -> Formula {
    let rebuilt: Vec<Formula> = clauses
        .iter()
        .map(|c| {
            let mut it = c.iter().rev();
            let mut out = it.next().expect("nonempty clause").clone();
            for lit in it {
                out = Formula::tensor(lit.clone(), out);
            }
            out
        })
        .collect();
    rchain(rebuilt)
}

/// Rewrites one clause into the implication form, right to left: the split
/// `f | g` becomes `(f -> bot) -> g` (both sides are flat literals), and a
/// negated atom `~a` becomes `a -> bot`.
fn clause_to_id(clause: &[Formula]) -> Formula {
    let neg = |a: &Atom| Formula::impl_(Formula::Atom(a.clone()), Formula::Bottom);
    let mut it = clause.iter().rev();
    let mut out = match it.next().expect("nonempty clause") {
        Formula::Atom(a) => Formula::Atom(a.clone()),
        Formula::NegAtom(a) => neg(a),
        other => unreachable!("clause literal: {}", render(other)),
    };
    for lit in it {
        let antecedent = match lit {
            Formula::Atom(a) => neg(a),
            Formula::NegAtom(a) => Formula::impl_(neg(a), Formula::Bottom),
            other => unreachable!("clause literal: {}", render(other)),
        };
        out = Formula::impl_(antecedent, out);
    }
    out
}

/// Compiles a first-order formula into the ID fragment: prenex, conjunctive
/// normal form by distribution, then each clause rewritten into nested
/// implications to falsum. The output contains no split disjunction and no
/// negated atoms, and is team-equivalent to the input.
pub fn fo_to_id(phi: &Formula) -> Result<(Formula, TranslationTrace), TranslateError> {
    if !phi.in_fo() {
        return Err(TranslateError::NotFirstOrder(render(phi)));
    }
    let mut trace = TranslationTrace::new();
    let mut cur = render(phi);

    let renamed = rename_apart_fo(phi);
    let step = |trace: &mut TranslationTrace, rule: &str, cite: &str, f: &Formula, cur: &mut String| {
        let next = render(f);
        if next != *cur {
            trace.push(rule, cite, cur.clone(), next.clone());
            *cur = next;
        }
    };
    step(
        &mut trace,
        "rename-apart",
        "bound variables renamed to be pairwise distinct",
        &renamed,
        &mut cur,
    );

    let (prefix, matrix) = prenex_fo(&renamed);
    let prenexed = requantify(&prefix, matrix.clone());
    step(
        &mut trace,
        "prenex",
        "(Q x. f) & g == Q x. (f & g); (Q x. f) | g == Q x. (f | g)  (flat f, g)",
        &prenexed,
        &mut cur,
    );

    let clauses = cnf_clauses(&matrix)?;
    if clauses.len() >= CNF_WARN_CLAUSES {
        trace.warn(format!(
            "conjunctive normal form produced {} clauses",
            clauses.len()
        ));
    }
    let cnf = requantify(&prefix, clause_matrix(&clauses));
    step(
        &mut trace,
        "cnf",
        "f | (g & h) == (f | g) & (f | h)",
        &cnf,
        &mut cur,
    );

    let id_clauses: Vec<Formula> = clauses.iter().map(|c| clause_to_id(c)).collect();
    let out = requantify(&prefix, rchain(id_clauses));
    step(
        &mut trace,
        "clause-impl",
        "f | g == (f -> bot) -> g; ~a == a -> bot  (flat f, g)",
        &out,
        &mut cur,
    );

    Ok((out, trace))
}

/// Rewrites `phi || psi` into the ID fragment. `theta1` covers one-element
/// models, where the two disjunction readings coincide; `theta2` covers
/// models with two or more elements, where a pair of constants `w`, `u`
/// encodes the choice of disjunct. All four quantified variables are fresh
/// for `phi` and `psi`.
pub fn eliminate_ivee(phi: &Formula, psi: &Formula) -> Formula {
    let mut avoid = BTreeSet::new();
    formula_idents(phi, &mut avoid);
    formula_idents(psi, &mut avoid);
    eliminate_ivee_avoiding(phi, psi, &mut avoid)
}

fn eliminate_ivee_avoiding(
    phi: &Formula,
    psi: &Formula,
    avoid: &mut BTreeSet<String>,
) -> Formula {
    let names = ["x", "y", "w", "u"].map(|b| {
        let n = fresh_var(b, avoid);
        avoid.insert(n.clone());
        n
    });
    let [x, y, w, u] = names;
    let vt = |n: &str| Term::var(n.to_owned());

    let theta1 = Formula::impl_(
        Formula::forall(
            x.clone(),
            Formula::forall(y.clone(), Formula::Atom(Atom::eq(vt(&x), vt(&y)))),
        ),
        Formula::impl_(
            Formula::impl_(phi.clone(), Formula::Bottom),
            psi.clone(),
        ),
    );
    let w_eq_u = || Formula::Atom(Atom::eq(vt(&w), vt(&u)));
    let theta2 = Formula::impl_(
        Formula::forall(
            x.clone(),
            Formula::exists(
                y.clone(),
                Formula::impl_(Formula::Atom(Atom::eq(vt(&x), vt(&y))), Formula::Bottom),
            ),
        ),
        Formula::exists(
            w.clone(),
            Formula::exists(
                u.clone(),
                rchain(vec![
                    Formula::Dep(vec![vt(&w)]),
                    Formula::Dep(vec![vt(&u)]),
                    Formula::impl_(w_eq_u(), phi.clone()),
                    Formula::impl_(Formula::impl_(w_eq_u(), Formula::Bottom), psi.clone()),
                ]),
            ),
        ),
    );
    Formula::and(theta1, theta2)
}

/// Eliminates every either-disjunction in the formula, innermost first.
pub fn eliminate_all_ivee(phi: &Formula) -> (Formula, TranslationTrace) {
    let mut trace = TranslationTrace::new();
    let mut avoid = BTreeSet::new();
    formula_idents(phi, &mut avoid);
    let mut cur = phi.clone();
    let mut cur_text = render(&cur);
    loop {
        let mut rewritten = false;
        cur = rewrite_first_ivee(&cur, &mut avoid, &mut rewritten);
        if !rewritten {
            break;
        }
        let next = render(&cur);
        trace.push(
            "ivee-elim",
            "f || g == theta1 & theta2  (case split on model size)",
            cur_text,
            next.clone(),
        );
        cur_text = next;
    }
    (cur, trace)
}

fn rewrite_first_ivee(
    f: &Formula,
    avoid: &mut BTreeSet<String>,
    done: &mut bool,
) -> Formula {
    if *done {
        return f.clone();
    }
    match f {
        Formula::Ivee(l, r) => {
            // Innermost first: rewrite inside the branches before this node.
            let l2 = rewrite_first_ivee(l, avoid, done);
            if *done {
                return Formula::ivee(l2, r.as_ref().clone());
            }
            let r2 = rewrite_first_ivee(r, avoid, done);
            if *done {
                return Formula::ivee(l2, r2);
            }
            *done = true;
            eliminate_ivee_avoiding(&l2, &r2, avoid)
        }
        Formula::And(l, r) => {
            let l2 = rewrite_first_ivee(l, avoid, done);
            let r2 = rewrite_first_ivee(r, avoid, done);
            Formula::and(l2, r2)
        }
        Formula::Tensor(l, r) => {
            let l2 = rewrite_first_ivee(l, avoid, done);
            let r2 = rewrite_first_ivee(r, avoid, done);
            Formula::tensor(l2, r2)
        }
        Formula::Impl(l, r) => {
            let l2 = rewrite_first_ivee(l, avoid, done);
            let r2 = rewrite_first_ivee(r, avoid, done);
            Formula::impl_(l2, r2)
        }
        Formula::Limpl(l, r) => {
            let l2 = rewrite_first_ivee(l, avoid, done);
            let r2 = rewrite_first_ivee(r, avoid, done);
            Formula::limpl(l2, r2)
        }
        Formula::Forall(x, b) => Formula::forall(x.clone(), rewrite_first_ivee(b, avoid, done)),
        Formula::Exists(x, b) => Formula::exists(x.clone(), rewrite_first_ivee(b, avoid, done)),
        leaf => leaf.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Fragment;
    use crate::parse::{parse_formula, render};
    use crate::Signature;

    fn sig() -> Signature {
        Signature::new(
            [
                ("R".to_owned(), 2),
                ("a".to_owned(), 1),
                ("b".to_owned(), 1),
                ("c2".to_owned(), 1),
                ("d".to_owned(), 1),
            ],
            [],
            [],
        )
        .unwrap()
    }

    fn parse(src: &str) -> Formula {
        parse_formula(src, &sig()).unwrap()
    }

    #[test]
    fn dep_atom_expansion() {
        let two = expand_dep_atom(&[Term::var("x"), Term::var("y")]);
        assert_eq!(render(&two), "(dep(x) -> dep(y))");
        let three = expand_dep_atom(&[Term::var("x"), Term::var("y"), Term::var("z")]);
        assert_eq!(render(&three), "((dep(x) & dep(y)) -> dep(z))");
        let one = expand_dep_atom(&[Term::var("x")]);
        assert_eq!(render(&one), "dep(x)");
    }

    #[test]
    fn negated_literals() {
        let f = parse("~a(x)");
        assert_eq!(render(&literal_to_id(&f).unwrap()), "(a(x) -> bot)");
        let nd = parse("ndep(x)");
        assert_eq!(render(&literal_to_id(&nd).unwrap()), "(dep(x) -> bot)");
        assert!(literal_to_id(&parse("a(x)")).is_err());
    }

    #[test]
    fn fo_to_id_worked_chain() {
        let f = parse("(a(x) | (~b(x) | c2(x))) & d(x)");
        let (out, trace) = fo_to_id(&f).unwrap();
        assert_eq!(
            render(&out),
            "(((a(x) -> bot) -> (((b(x) -> bot) -> bot) -> c2(x))) & d(x))"
        );
        assert!(out.in_id());
        assert!(trace.chains());
        assert_eq!(trace.steps.first().unwrap().before, render(&f));
        assert_eq!(trace.steps.last().unwrap().after, render(&out));
    }

    #[test]
    fn fo_to_id_identity_on_single_atom() {
        let f = parse("a(x)");
        let (out, trace) = fo_to_id(&f).unwrap();
        assert_eq!(render(&out), "a(x)");
        assert!(trace.steps.is_empty());
    }

    #[test]
    fn fo_to_id_prenexes_quantifiers() {
        let f = parse("(E x. a(x)) & (E x. b(x))");
        let (out, _) = fo_to_id(&f).unwrap();
        // The two binders are pulled out and renamed apart.
        assert_eq!(render(&out), "(E x. (E x_1. (a(x) & b(x_1))))");
        assert!(out.in_id());
    }

    #[test]
    fn fo_to_id_distributes() {
        let f = parse("a(x) | (b(x) & c2(x))");
        let (out, _) = fo_to_id(&f).unwrap();
        assert_eq!(
            render(&out),
            "(((a(x) -> bot) -> b(x)) & ((a(x) -> bot) -> c2(x)))"
        );
    }

    #[test]
    fn fo_to_id_rejects_non_fo() {
        let f = parse("dep(x) & a(x)");
        assert!(matches!(fo_to_id(&f), Err(TranslateError::NotFirstOrder(_))));
    }

    #[test]
    fn ivee_elimination_shape() {
        let f = parse("dep(x) || dep(y)");
        let (phi, psi) = match &f {
            Formula::Ivee(l, r) => (l.as_ref().clone(), r.as_ref().clone()),
            _ => unreachable!(),
        };
        let out = eliminate_ivee(&phi, &psi);
        // The quantified variables are fresh: the disjuncts mention x and y,
        // so the schema's x, y become x_1, y_1.
        let expected = "(((A x_1. (A y_1. x_1=y_1)) -> ((dep(x) -> bot) -> dep(y))) & \
                        ((A x_1. (E y_1. (x_1=y_1 -> bot))) -> (E w. (E u. (dep(w) & (dep(u) & \
                        ((w=u -> dep(x)) & ((w=u -> bot) -> dep(y)))))))))";
        assert_eq!(render(&out), expected);
        assert_eq!(out.fragment().least, Fragment::Id);
    }

    #[test]
    fn ivee_elimination_walks_all_nodes() {
        let f = parse("(a(x) || b(x)) & (A x. (a(x) || b(x)))");
        let (out, trace) = eliminate_all_ivee(&f);
        assert_eq!(trace.steps.len(), 2);
        assert!(trace.chains());
        assert!(!render(&out).contains("||"));
    }
}
