//! Compilation from second-order sentences into team-semantics formulas:
//! existential function prefixes become dependence-guarded first-order
//! existentials, universal prefixes go through complementation, and the
//! general alternating form becomes the guarded implication/conjunction
//! tower over one realization variable per function variable.

use super::nice::{
    map_terms, rebuild_staged, so_nice_normal_form, stage_unpadded, visit_terms, NiceNormalForm,
    StageOutput,
};
use super::rewrites::{expand_dep_atom, fo_to_id};
use super::{rchain, TranslateError, TranslationTrace};
use crate::ast::{fresh_vars, to_nnf, Formula, SOFormula, Term};
use crate::parse::{render, render_so, render_term};
use std::collections::BTreeMap;
use std::collections::BTreeSet;

const SKOLEM_CITE: &str = "Ef f. A x. p(f(x)) == A x. E y. (dep(x,y) & p(y))";
const THETA_CITE: &str =
    "Af f. Ef g. A x. p(f(x),g(x)) == A u. A x. (dep(x,u) -> (E v. (dep(x,v) & p(u,v))))";
const DEP_CITE: &str = "dep(x,y,z) == (dep(x) & dep(y)) -> dep(z)";
const MATRIX_CITE: &str = "f | g == (f -> bot) -> g  (matrix in clausal form)";

/// Replaces every application of a mapped function variable by its
/// realization variable and converts the result to a team-semantics
/// formula in negation normal form. Each application must use exactly the
/// fixed argument tuple recorded in the map.
pub fn replace_fns_with_vars(
    psi: &SOFormula,
    map: &BTreeMap<String, (Vec<String>, String)>,
) -> Result<Formula, TranslateError> {
    let mut err: Option<TranslateError> = None;
    visit_terms(psi, &mut |t| {
        if err.is_some() {
            return;
        }
        if let Term::App(h, args) = t {
            if let Some((tuple, _)) = map.get(h) {
                let expected: Vec<Term> = tuple.iter().map(|v| Term::var(v.clone())).collect();
                if args != &expected {
                    err = Some(TranslateError::NonUniform {
                        name: h.clone(),
                        expected: tuple.join(","),
                        found: args.iter().map(render_term).collect::<Vec<_>>().join(","),
                    });
                }
            }
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    let replaced = map_terms(psi, &|t| match t {
        Term::App(h, _) => map.get(h).map(|(_, u)| Term::var(u.clone())),
        _ => None,
    });
    Ok(to_nnf(&replaced)?)
}

/// The dependence-guarded sentence for a staged existential prefix: one
/// realization variable per function variable, a dependence atom tying it
/// to the variable's argument tuple, and the replaced matrix.
fn build_sigma_d(st: &StageOutput) -> Result<Formula, TranslateError> {
    for (uni, name, _) in &st.prefix {
        if *uni {
            return Err(TranslateError::NotExistentialPrefix(name.clone()));
        }
    }
    let ys = fresh_vars("y", st.prefix.len(), &st.used);
    let mut map = BTreeMap::new();
    let mut deps = Vec::new();
    for ((_, name, _), y) in st.prefix.iter().zip(&ys) {
        let tuple = st.tuples.get(name).cloned().unwrap_or_default();
        let mut args: Vec<Term> = tuple.iter().map(|v| Term::var(v.clone())).collect();
        args.push(Term::var(y.clone()));
        deps.push(Formula::Dep(args));
        map.insert(name.clone(), (tuple, y.clone()));
    }
    let psi = replace_fns_with_vars(&st.matrix, &map)?;
    let mut items = deps;
    items.push(psi);
    let mut body = rchain(items);
    for y in ys.iter().rev() {
        body = Formula::exists(y.clone(), body);
    }
    for x in st.fo.iter().rev() {
        body = Formula::forall(x.clone(), body);
    }
    Ok(body)
}

/// Translates an existentially function-quantified sentence into the
/// dependence fragment: `Ef f̄. A x̄. ψ` becomes
/// `A x̄. E ȳ. (dep-atoms ∧ ψ[f̄ ↦ ȳ])`.
pub fn sigma11_to_d(phi: &SOFormula) -> Result<(Formula, TranslationTrace), TranslateError> {
    let (st, mut trace) = stage_unpadded(phi)?;
    let out = build_sigma_d(&st)?;
    let staged = render_so(&rebuild_staged(&st));
    let after = render(&out);
    if staged != after {
        trace.push("skolem-to-dep", SKOLEM_CITE, staged, after);
    }
    if !out.in_d() {
        return Err(TranslateError::Internal(
            "translation left the dependence fragment".to_owned(),
        ));
    }
    Ok((out, trace))
}

fn and_leaves(f: &Formula, out: &mut Vec<Formula>) {
    match f {
        Formula::And(l, r) => {
            and_leaves(l, out);
            and_leaves(r, out);
        }
        other => out.push(other.clone()),
    }
}

/// Rewrites a dependence sentence in the normal form
/// `A x̄. E ȳ. (dep-atoms ∧ matrix)` into the implication fragment:
/// dependence atoms lose their argument lists in favor of guarded constancy
/// atoms, and the first-order matrix is put into clausal implication form.
pub fn d_sentence_to_id(phi: &Formula) -> Result<(Formula, TranslationTrace), TranslateError> {
    let fv = phi.free_vars();
    if !fv.is_empty() {
        return Err(TranslateError::NotASentence(
            fv.into_iter().collect::<Vec<_>>().join(", "),
        ));
    }
    let mut xs = Vec::new();
    let mut cur = phi;
    while let Formula::Forall(x, b) = cur {
        xs.push(x.clone());
        cur = b;
    }
    let mut ys = Vec::new();
    while let Formula::Exists(y, b) = cur {
        ys.push(y.clone());
        cur = b;
    }
    let mut leaves = Vec::new();
    and_leaves(cur, &mut leaves);
    let mut dep_args: Vec<Vec<Term>> = Vec::new();
    let mut rest: Vec<Formula> = Vec::new();
    for leaf in leaves {
        match leaf {
            Formula::Dep(ts) if rest.is_empty() => dep_args.push(ts),
            Formula::Dep(_) => {
                return Err(TranslateError::NotNormalForm(
                    "dependence atom after the first-order matrix".to_owned(),
                ));
            }
            other => rest.push(other),
        }
    }
    if rest.is_empty() {
        return Err(TranslateError::NotNormalForm(
            "missing first-order matrix".to_owned(),
        ));
    }
    let matrix = rchain(rest);
    if !matrix.in_fo() {
        return Err(TranslateError::NotFirstOrder(render(&matrix)));
    }

    let requantify = |body: Formula| -> Formula {
        let mut out = body;
        for y in ys.iter().rev() {
            out = Formula::exists(y.clone(), out);
        }
        for x in xs.iter().rev() {
            out = Formula::forall(x.clone(), out);
        }
        out
    };
    let assemble = |deps: &[Formula], matrix: Formula| -> Formula {
        let mut items = deps.to_vec();
        items.push(matrix);
        requantify(rchain(items))
    };

    let mut trace = TranslationTrace::new();
    let expanded: Vec<Formula> = dep_args.iter().map(|ts| expand_dep_atom(ts)).collect();
    let plain: Vec<Formula> = dep_args.iter().map(|ts| Formula::Dep(ts.clone())).collect();
    let mut cur_text = render(&assemble(&plain, matrix.clone()));
    let b = assemble(&expanded, matrix.clone());
    let b_text = render(&b);
    if b_text != cur_text {
        trace.push("dep-expand", DEP_CITE, cur_text.clone(), b_text.clone());
        cur_text = b_text;
    }

    let (matrix_id, sub) = fo_to_id(&matrix)?;
    trace.warnings.extend(sub.warnings);
    let out = assemble(&expanded, matrix_id);
    let out_text = render(&out);
    if out_text != cur_text {
        trace.push("matrix-to-id", MATRIX_CITE, cur_text, out_text);
    }
    if !out.in_id() {
        return Err(TranslateError::Internal(
            "translation left the implication fragment".to_owned(),
        ));
    }
    Ok((out, trace))
}

/// Translates a universally function-quantified sentence into the
/// implication fragment by complementation: the negation is compiled as an
/// existential sentence and the result is sealed with `-> bot`.
pub fn pi11_to_id(phi: &SOFormula) -> Result<(Formula, TranslationTrace), TranslateError> {
    let neg = SOFormula::not(phi.clone());
    let mut trace = TranslationTrace::new();
    trace.push(
        "negate",
        "Af f. p == ~(Ef f. ~p)",
        render_so(phi),
        render_so(&neg),
    );
    let (st, st_trace) = stage_unpadded(&neg)?;
    trace.absorb(st_trace);
    let d = build_sigma_d(&st).map_err(|e| match e {
        TranslateError::NotExistentialPrefix(name) => TranslateError::NotUniversalPrefix(name),
        other => other,
    })?;
    let staged = render_so(&rebuild_staged(&st));
    let d_text = render(&d);
    if staged != d_text {
        trace.push("skolem-to-dep", SKOLEM_CITE, staged, d_text);
    }
    let (core, d_trace) = d_sentence_to_id(&d)?;
    trace.absorb(d_trace);
    let out = Formula::impl_(core.clone(), Formula::Bottom);
    trace.push(
        "complement",
        "Af f. p == ((Ef f. ~p) -> bot)",
        render(&core),
        render(&out),
    );
    if !out.in_id() {
        return Err(TranslateError::Internal(
            "translation left the implication fragment".to_owned(),
        ));
    }
    Ok((out, trace))
}

/// One realization variable `u_<block>_<slot>` per function variable of the
/// normal form, numbered from 1.
fn block_us(nf: &NiceNormalForm, used: &mut BTreeSet<String>) -> Vec<Vec<String>> {
    (0..nf.blocks.len())
        .map(|i| {
            (0..nf.block_len)
                .map(|j| {
                    let n = crate::ast::fresh_var(&format!("u_{}_{}", i + 1, j + 1), used);
                    used.insert(n.clone());
                    n
                })
                .collect()
        })
        .collect()
}

fn fn_map(
    nf: &NiceNormalForm,
    us: &[Vec<String>],
) -> BTreeMap<String, (Vec<String>, String)> {
    let mut map = BTreeMap::new();
    for (i, b) in nf.blocks.iter().enumerate() {
        for (j, v) in b.vars.iter().enumerate() {
            map.insert(v.clone(), (nf.tuples[v].clone(), us[i][j].clone()));
        }
    }
    map
}

/// The guarded tower: for blocks Θ₁ … Θ₂ₙ of dependence guards, builds
/// `A ū(odd) A x̄. (Θ₁ -> E ū₂. (Θ₂ & (Θ₃ -> ... E ū₂ₙ. (Θ₂ₙ & ψ))))`,
/// with `dep_of` choosing how a guard atom is rendered.
fn build_phi_star(
    nf: &NiceNormalForm,
    us: &[Vec<String>],
    dep_of: &dyn Fn(Vec<Term>) -> Formula,
    psi: Formula,
) -> Formula {
    let theta: Vec<Formula> = nf
        .blocks
        .iter()
        .enumerate()
        .map(|(i, b)| {
            rchain(
                b.vars
                    .iter()
                    .enumerate()
                    .map(|(j, v)| {
                        let mut args: Vec<Term> =
                            nf.tuples[v].iter().map(|x| Term::var(x.clone())).collect();
                        args.push(Term::var(us[i][j].clone()));
                        dep_of(args)
                    })
                    .collect(),
            )
        })
        .collect();
    let last = nf.blocks.len() - 1;
    let mut delta = Formula::and(theta[last].clone(), psi);
    for u in us[last].iter().rev() {
        delta = Formula::exists(u.clone(), delta);
    }
    for i in (0..last).rev() {
        if i % 2 == 0 {
            delta = Formula::impl_(theta[i].clone(), delta);
        } else {
            delta = Formula::and(theta[i].clone(), delta);
            for u in us[i].iter().rev() {
                delta = Formula::exists(u.clone(), delta);
            }
        }
    }
    let mut out = delta;
    for x in nf.fo_universals.iter().rev() {
        out = Formula::forall(x.clone(), out);
    }
    for i in (0..nf.blocks.len()).rev().filter(|i| i % 2 == 0) {
        for u in us[i].iter().rev() {
            out = Formula::forall(u.clone(), out);
        }
    }
    out
}

fn nice_parts(
    phi: &SOFormula,
) -> Result<
    (
        NiceNormalForm,
        TranslationTrace,
        Vec<Vec<String>>,
        Formula,
    ),
    TranslateError,
> {
    let (nf, trace) = so_nice_normal_form(phi)?;
    let mut used = BTreeSet::new();
    super::so_idents(&nf.to_so(), &mut used);
    let us = block_us(&nf, &mut used);
    let map = fn_map(&nf, &us);
    let psi = replace_fns_with_vars(&nf.matrix, &map)?;
    Ok((nf, trace, us, psi))
}

/// Translates an arbitrary second-order sentence into the full team logic:
/// the nice normal form's function blocks become alternating guarded
/// quantifier layers over realization variables.
pub fn so_to_bid(phi: &SOFormula) -> Result<(Formula, TranslationTrace), TranslateError> {
    let (nf, mut trace, us, psi) = nice_parts(phi)?;
    let out = build_phi_star(&nf, &us, &Formula::Dep, psi);
    trace.push(
        "theta-delta",
        THETA_CITE,
        render_so(&nf.to_so()),
        render(&out),
    );
    Ok((out, trace))
}

/// Translates an arbitrary second-order sentence into the implication
/// fragment: the guarded tower with every dependence atom expanded into
/// guarded constancy atoms and the matrix in clausal implication form.
pub fn so_to_id(phi: &SOFormula) -> Result<(Formula, TranslationTrace), TranslateError> {
    let (nf, mut trace, us, psi) = nice_parts(phi)?;
    let a = build_phi_star(&nf, &us, &Formula::Dep, psi.clone());
    let b = build_phi_star(&nf, &us, &|args| expand_dep_atom(&args), psi.clone());
    let (psi_id, sub) = fo_to_id(&psi)?;
    trace.warnings.extend(sub.warnings);
    let out = build_phi_star(&nf, &us, &|args| expand_dep_atom(&args), psi_id);
    let a_text = render(&a);
    trace.push(
        "theta-delta",
        THETA_CITE,
        render_so(&nf.to_so()),
        a_text.clone(),
    );
    let b_text = render(&b);
    if b_text != a_text {
        trace.push("dep-expand", DEP_CITE, a_text, b_text.clone());
    }
    let out_text = render(&out);
    if out_text != b_text {
        trace.push("matrix-to-id", MATRIX_CITE, b_text, out_text);
    }
    if !out.in_id() {
        return Err(TranslateError::Internal(
            "translation left the implication fragment".to_owned(),
        ));
    }
    Ok((out, trace))
}

fn impl_to_limpl(f: &Formula) -> Formula {
    match f {
        Formula::Atom(_)
        | Formula::NegAtom(_)
        | Formula::Dep(_)
        | Formula::NegDep(_)
        | Formula::Bottom => f.clone(),
        Formula::And(l, r) => Formula::and(impl_to_limpl(l), impl_to_limpl(r)),
        Formula::Tensor(l, r) => Formula::tensor(impl_to_limpl(l), impl_to_limpl(r)),
        Formula::Ivee(l, r) => Formula::ivee(impl_to_limpl(l), impl_to_limpl(r)),
        Formula::Impl(l, r) | Formula::Limpl(l, r) => {
            Formula::limpl(impl_to_limpl(l), impl_to_limpl(r))
        }
        Formula::Forall(x, b) => Formula::forall(x.clone(), impl_to_limpl(b)),
        Formula::Exists(x, b) => Formula::exists(x.clone(), impl_to_limpl(b)),
    }
}

/// Translates a one-alternation sentence (`Af f̄. Ef ḡ. A x̄. ψ` after
/// normalization) into the linear-implication fragment. The output is
/// stated for evaluation at the empty team: the linear implication ranges
/// over all teams on the same domain, which replays the guarded tower
/// without intuitionistic implication.
pub fn so_to_ld(phi: &SOFormula) -> Result<(Formula, TranslationTrace), TranslateError> {
    let (nf, mut trace, us, psi) = nice_parts(phi)?;
    if nf.blocks.len() != 2 {
        return Err(TranslateError::NotOneAlternation(nf.blocks.len()));
    }
    let d = build_phi_star(&nf, &us, &Formula::Dep, psi);
    let out = impl_to_limpl(&d);
    let d_text = render(&d);
    trace.push(
        "theta-delta",
        THETA_CITE,
        render_so(&nf.to_so()),
        d_text.clone(),
    );
    let out_text = render(&out);
    if out_text != d_text {
        trace.push(
            "limpl-swap",
            "p -> q == p -* q  (one alternation; evaluate at the empty team)",
            d_text,
            out_text,
        );
    }
    if !out.in_ld() {
        return Err(TranslateError::Internal(
            "translation left the linear fragment".to_owned(),
        ));
    }
    Ok((out, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Atom;
    use crate::model::{enumerate_models, Team};
    use crate::parse::{parse_formula, parse_so};
    use crate::so_eval::so_sentence_true;
    use crate::team_eval::{satisfies, sentence_true, EvalBudget};
    use crate::Signature;

    fn sig() -> Signature {
        Signature::new([("R".to_owned(), 2), ("P".to_owned(), 1)], [], []).unwrap()
    }

    fn so(src: &str) -> SOFormula {
        parse_so(src, &sig()).unwrap()
    }

    fn team(src: &str) -> Formula {
        parse_formula(src, &sig()).unwrap()
    }

    /// SO truth of the input must match team-semantics truth (at `{∅}`) of
    /// the output on every model of the tiny signature.
    fn assert_sentence_equivalent(phi: &SOFormula, psi: &Formula, max_n: usize) {
        for n in 1..=max_n {
            for model in enumerate_models(&sig(), n, 1 << 20).unwrap() {
                let a = so_sentence_true(&model, phi, 1 << 24).unwrap();
                let b = sentence_true(&model, psi, EvalBudget::default()).unwrap();
                assert_eq!(
                    a,
                    b,
                    "disagree on a model of size {n}:\n  input:  {}\n  output: {}",
                    render_so(phi),
                    render(psi)
                );
            }
        }
    }

    #[test]
    fn sigma11_graph_example() {
        let (out, trace) = sigma11_to_d(&so("Ef f:1. A x. R(x,f(x))")).unwrap();
        assert_eq!(render(&out), "(A x. (E y. (dep(x,y) & R(x,y))))");
        assert!(trace.chains());
        assert_eq!(trace.steps.last().unwrap().rule, "skolem-to-dep");
        assert_sentence_equivalent(&so("Ef f:1. A x. R(x,f(x))"), &out, 2);
    }

    #[test]
    fn sigma11_identity_example() {
        let (out, _) = sigma11_to_d(&so("Ef f:1. A x. f(x)=x")).unwrap();
        assert_eq!(render(&out), "(A x. (E y. (dep(x,y) & y=x)))");
    }

    #[test]
    fn sigma11_without_function_quantifiers_is_identity() {
        let (out, trace) = sigma11_to_d(&so("A x. R(x,x)")).unwrap();
        assert_eq!(render(&out), "(A x. R(x,x))");
        assert!(trace.steps.is_empty());
    }

    #[test]
    fn sigma11_rejects_universal_function_quantifiers() {
        let err = sigma11_to_d(&so("Af f:1. A x. P(f(x))")).unwrap_err();
        assert!(matches!(err, TranslateError::NotExistentialPrefix(name) if name == "f"));
    }

    #[test]
    fn d_normal_form_expands_dependence_atoms() {
        let (out, trace) = d_sentence_to_id(&team("A x. E y. (dep(x,y) & R(x,y))")).unwrap();
        assert_eq!(
            render(&out),
            "(A x. (E y. ((dep(x) -> dep(y)) & R(x,y))))"
        );
        assert!(out.in_id());
        assert_eq!(trace.steps.len(), 1);
        assert_eq!(trace.steps[0].rule, "dep-expand");
    }

    #[test]
    fn d_normal_form_rewrites_the_matrix() {
        let (out, trace) =
            d_sentence_to_id(&team("A x. E y. (dep(x,y) & (R(x,y) | ~P(x)))")).unwrap();
        assert!(out.in_id());
        assert!(trace.steps.iter().any(|s| s.rule == "matrix-to-id"));
        assert!(trace.chains());
    }

    #[test]
    fn d_normal_form_rejects_a_late_dependence_atom() {
        let err = d_sentence_to_id(&team("A x. E y. (R(x,y) & dep(x,y))")).unwrap_err();
        assert!(matches!(err, TranslateError::NotNormalForm(_)));
    }

    #[test]
    fn d_normal_form_needs_a_matrix() {
        let err = d_sentence_to_id(&team("E y. dep(y)")).unwrap_err();
        assert!(matches!(err, TranslateError::NotNormalForm(_)));
    }

    #[test]
    fn pi11_translates_through_the_complement() {
        let phi = so("Af f:1. A x. P(f(x))");
        let (out, trace) = pi11_to_id(&phi).unwrap();
        assert!(out.in_id());
        assert!(matches!(out, Formula::Impl(_, ref r) if matches!(**r, Formula::Bottom)));
        assert_eq!(trace.steps.first().unwrap().rule, "negate");
        assert_eq!(trace.steps.last().unwrap().rule, "complement");
        assert!(trace.chains());
        assert_sentence_equivalent(&phi, &out, 2);
    }

    #[test]
    fn pi11_rejects_existential_function_quantifiers() {
        let err = pi11_to_id(&so("Ef f:1. A x. P(f(x))")).unwrap_err();
        assert!(matches!(err, TranslateError::NotUniversalPrefix(name) if name == "f"));
    }

    #[test]
    fn guarded_tower_shape_is_fixed() {
        let phi = so("Af f:1. Ef g:1. A x. f(x)=g(x)");
        let (out, trace) = so_to_bid(&phi).unwrap();
        assert_eq!(
            render(&out),
            "(A u_1_1. (A x. (dep(x,u_1_1) -> (E u_2_1. (dep(x,u_2_1) & u_1_1=u_2_1)))))"
        );
        assert!(trace.chains());
        assert_eq!(trace.steps.last().unwrap().rule, "theta-delta");
    }

    #[test]
    fn guarded_tower_matches_standard_semantics() {
        for src in [
            "Af f:1. Ef g:1. A x. f(x)=g(x)",
            "Af f:1. Ef g:1. A x. R(f(x),g(x))",
            "Ef f:1. A x. R(x,f(x))",
            "Af f:1. E x. P(f(x))",
            "A x. E y. R(x,y)",
        ] {
            let phi = so(src);
            let (out, trace) = so_to_bid(&phi).unwrap();
            assert!(trace.chains(), "trace must chain for {src}");
            assert_sentence_equivalent(&phi, &out, 2);
        }
    }

    #[test]
    fn implication_variant_stays_in_fragment_and_is_deterministic() {
        let phi = so("Af f:1. Ef g:1. A x. f(x)=g(x)");
        let (out1, trace) = so_to_id(&phi).unwrap();
        let (out2, _) = so_to_id(&phi).unwrap();
        assert_eq!(render(&out1), render(&out2));
        assert!(out1.in_id());
        assert_eq!(
            render(&out1),
            "(A u_1_1. (A x. ((dep(x) -> dep(u_1_1)) -> \
             (E u_2_1. ((dep(x) -> dep(u_2_1)) & u_1_1=u_2_1)))))"
        );
        let rules: Vec<&str> = trace.steps.iter().map(|s| s.rule.as_str()).collect();
        assert!(rules.contains(&"theta-delta"));
        assert!(rules.contains(&"dep-expand"));
        assert!(trace.chains());
        assert_sentence_equivalent(&phi, &out1, 2);
    }

    #[test]
    fn linear_variant_swaps_the_implication() {
        let phi = so("Af f:1. Ef g:1. A x. f(x)=g(x)");
        let (out, trace) = so_to_ld(&phi).unwrap();
        assert_eq!(
            render(&out),
            "(A u_1_1. (A x. (dep(x,u_1_1) -* (E u_2_1. (dep(x,u_2_1) & u_1_1=u_2_1)))))"
        );
        assert!(out.in_ld());
        assert!(trace.steps.iter().any(|s| s.rule == "limpl-swap"));
        assert!(trace.chains());
    }

    #[test]
    fn linear_variant_needs_one_alternation() {
        let err = so_to_ld(&so("Af f:1. Ef g:1. Af k:1. A x. f(x)=k(x)")).unwrap_err();
        assert!(matches!(err, TranslateError::NotOneAlternation(4)));
    }

    #[test]
    fn linear_variant_holds_at_the_empty_team() {
        for src in [
            "Af f:1. Ef g:1. A x. f(x)=g(x)",
            "Af f:1. Ef g:1. A x. R(f(x),g(x))",
        ] {
            let phi = so(src);
            let (out, _) = so_to_ld(&phi).unwrap();
            for n in 1..=2 {
                for model in enumerate_models(&sig(), n, 1 << 20).unwrap() {
                    let a = so_sentence_true(&model, &phi, 1 << 24).unwrap();
                    let empty = Team::empty(Vec::new()).unwrap();
                    let b = satisfies(&model, &empty, &out, EvalBudget::default()).unwrap();
                    assert_eq!(a, b, "disagree for {src} on a model of size {n}");
                }
            }
        }
    }

    #[test]
    fn replacement_requires_the_fixed_tuple() {
        let psi = SOFormula::Atom(Atom::Rel(
            "P".to_owned(),
            vec![Term::app("f", vec![Term::var("y")])],
        ));
        let mut map = BTreeMap::new();
        map.insert("f".to_owned(), (vec!["x".to_owned()], "u".to_owned()));
        let err = replace_fns_with_vars(&psi, &map).unwrap_err();
        assert!(matches!(err, TranslateError::NonUniform { ref name, .. } if name == "f"));
    }
}
