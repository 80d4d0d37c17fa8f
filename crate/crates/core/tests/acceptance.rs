//! Acceptance gate for the workbench: one test per shipped guarantee, each
//! printing a single summary line (visible with `--nocapture`) and asserting
//! its own wall-clock budget. The tests are numbered so the report reads in
//! order; every check is exhaustive over the stated model sizes, with zero
//! tolerated failures.

use std::time::{Duration, Instant};

use tlk_core::model::enumerate_models;
use tlk_core::so_eval::so_sentence_true;
use tlk_core::translate::{eliminate_ivee, fo_to_id, so_to_id, so_to_ld};
use tlk_core::{
    check_equiv, check_sentence_translation, parse_formula, parse_so, render, run_law_suite,
    sentence_true, truth_value, Atom, CheckBudget, EquivStatus, EvalBudget, EvalTeam, Formula,
    Fragment, Generator, LawConfig, LawSuite, SOFormula, Signature, Term,
};

fn sig_empty() -> Signature {
    Signature::new([], [], []).unwrap()
}

fn sig_f() -> Signature {
    Signature::new([], [("f".to_owned(), 1)], []).unwrap()
}

fn sig_r() -> Signature {
    Signature::new([("R".to_owned(), 1)], [], []).unwrap()
}

fn sig_abcd() -> Signature {
    Signature::new(
        ["a", "b", "c", "d"].map(|r| (r.to_owned(), 1)),
        [],
        [],
    )
    .unwrap()
}

/// Budget for checks whose right-hand side is a compiled second-order
/// sentence: the images open with long quantifier blocks whose supplement
/// teams outgrow the default row cap long before the search itself is large.
fn deep_budget() -> CheckBudget {
    let mut b = CheckBudget::default();
    b.eval.max_subteam_rows = 4096;
    b
}

/// The fixed second-order half of the translation corpus. Each sentence is
/// paired with the signature it is read against.
fn fixed_so_corpus() -> Vec<(&'static str, SOFormula, Signature)> {
    let se = sig_empty();
    [
        // Every function is matched by one chosen alongside it.
        "Af f:1. Ef g:1. A x. f(x)=g(x)",
        // An injection whose image misses the image of some other function;
        // impossible on finite domains, so the sentence is false everywhere.
        "Ef f:1. Ef s:1. A x. A y. ((f(x)=f(y) -> x=y) & ~(f(x)=s(y)))",
        // The literal negation of the previous sentence, true everywhere.
        "Af f:1. Af s:1. E x. E y. ((f(x)=f(y) & ~(x=y)) | f(x)=s(y))",
        // Every function has a left inverse; pinches down to bijectivity.
        "Af f:1. Ef g:1. A x. g(f(x))=x",
    ]
    .into_iter()
    .map(|s| (s, parse_so(s, &se).unwrap(), se.clone()))
    .collect()
}

/// The full 12-sentence corpus: the fixed four plus eight generated
/// second-order sentences in nice normal form over one unary relation.
fn so_corpus() -> Vec<(String, SOFormula, Signature)> {
    let mut out: Vec<(String, SOFormula, Signature)> = fixed_so_corpus()
        .into_iter()
        .map(|(s, phi, sig)| (s.to_owned(), phi, sig))
        .collect();
    let sr = sig_r();
    let mut g = Generator::new(71, &sr);
    for i in 0..8 {
        let phi = g.so_nice_sentence(2, 2, 2, 2);
        out.push((format!("generated nice sentence {i}"), phi, sr.clone()));
    }
    out
}

#[test]
fn c01_law_suites_hold_and_the_linear_implication_counterexample_is_caught() {
    let t0 = Instant::now();
    let mut total = 0usize;
    for sig in [sig_empty(), sig_f()] {
        for suite in [
            LawSuite::Downward,
            LawSuite::Flat,
            LawSuite::Empty,
            LawSuite::Locality,
        ] {
            let mut config = LawConfig::new(sig.clone(), 3, 11);
            config.cases = 500;
            let report = run_law_suite(suite, &config).unwrap();
            let (pass, fail, over) = report.counts();
            assert_eq!(fail, 0, "{suite:?} over {sig:?} reported failures");
            assert_eq!(over, 0, "{suite:?} over {sig:?} exhausted its budget");
            assert!(pass >= 500, "{suite:?} ran only {pass} cases");
            total += pass;
        }
    }
    let dt = t0.elapsed();
    assert!(dt <= Duration::from_secs(180), "law suites took {dt:?}");
    println!(
        "criterion 01 PASS - downward/flat/empty/locality suites, {} cases, 0 failures ({:.1}s)",
        total,
        dt.as_secs_f64()
    );
}

#[test]
fn c02_atom_equivalences_pass_exhaustively_on_all_small_models() {
    let t0 = Instant::now();
    let mut config = LawConfig::new(sig_f(), 3, 11);
    config.cases = 200;
    let report = run_law_suite(LawSuite::Eqbid, &config).unwrap();
    let (pass, fail, over) = report.counts();
    assert_eq!(fail, 0, "eqbid suite reported failures");
    assert_eq!(over, 0, "eqbid suite exhausted its budget");
    assert!(pass >= 200);
    let dt = t0.elapsed();
    assert!(dt <= Duration::from_secs(120), "eqbid suite took {dt:?}");
    println!(
        "criterion 02 PASS - dependence/negation/double-negation/flattening schemas, {} cases ({:.1}s)",
        pass,
        dt.as_secs_f64()
    );
}

#[test]
fn c03_first_order_compilation_matches_the_worked_example_and_stays_equivalent() {
    let t0 = Instant::now();

    let sig = sig_abcd();
    let phi = parse_formula("(a(x) | (~b(x) | c(x))) & d(x)", &sig).unwrap();
    let (image, _) = fo_to_id(&phi).unwrap();
    assert_eq!(
        render(&image),
        "(((a(x) -> bot) -> (((b(x) -> bot) -> bot) -> c(x))) & d(x))"
    );

    let gen_sig = sig_f();
    let scope = ["x".to_owned(), "y".to_owned()];
    let mut g = Generator::new(23, &gen_sig);
    let budget = CheckBudget::default();
    for i in 0..200 {
        let phi = g.formula(Fragment::Fo, &scope, 3);
        let (image, _) = fo_to_id(&phi).unwrap();
        let verdict = check_equiv(&phi, &image, &gen_sig, 3, &budget).unwrap();
        assert!(
            verdict.passed(),
            "case {i}: {} vs {} -> {}",
            render(&phi),
            render(&image),
            verdict.render_line()
        );
    }

    let dt = t0.elapsed();
    assert!(dt <= Duration::from_secs(300), "compilation checks took {dt:?}");
    println!(
        "criterion 03 PASS - worked example byte-exact, 200 generated formulas equivalent ({:.1}s)",
        dt.as_secs_f64()
    );
}

#[test]
fn c04_second_order_corpus_translates_correctly_on_every_small_model() {
    let t0 = Instant::now();
    let budget = deep_budget();
    let corpus = so_corpus();
    for (name, phi, sig) in &corpus {
        let (image, _) = so_to_id(phi).unwrap();
        let verdict = check_sentence_translation(
            phi,
            &image,
            EvalTeam::SingletonEmpty,
            sig,
            2,
            &budget,
        )
        .unwrap();
        assert!(verdict.passed(), "{name}: {}", verdict.render_line());
    }
    // The two cheapest fixed sentences are also confirmed one size up.
    for (name, phi, sig) in &fixed_so_corpus()[..] {
        if !name.starts_with("Af f:1. Ef g:1.") {
            continue;
        }
        let (image, _) = so_to_id(phi).unwrap();
        let verdict =
            check_sentence_translation(phi, &image, EvalTeam::SingletonEmpty, sig, 3, &budget)
                .unwrap();
        assert!(verdict.passed(), "{name} at size 3: {}", verdict.render_line());
    }
    let dt = t0.elapsed();
    assert!(dt <= Duration::from_secs(600), "corpus checks took {dt:?}");
    println!(
        "criterion 04 PASS - {} sentences agree with their compiled forms on all models ({:.1}s)",
        corpus.len(),
        dt.as_secs_f64()
    );
}

#[derive(Clone, Copy)]
enum Mutation {
    /// Replace one `&` node by its right conjunct.
    DropConjunct,
    /// Replace one `->` node by `&` of the same children.
    ImplToAnd,
}

/// Applies `kind` to the `n`-th matching node in preorder, counting down.
fn mutate(f: &Formula, n: &mut isize, kind: Mutation) -> Formula {
    match (kind, f) {
        (Mutation::DropConjunct, Formula::And(l, r)) => {
            if *n == 0 {
                *n -= 1;
                return r.as_ref().clone();
            }
            *n -= 1;
            Formula::and(mutate(l, n, kind), mutate(r, n, kind))
        }
        (Mutation::ImplToAnd, Formula::Impl(l, r)) => {
            if *n == 0 {
                *n -= 1;
                return Formula::and(l.as_ref().clone(), r.as_ref().clone());
            }
            *n -= 1;
            Formula::impl_(mutate(l, n, kind), mutate(r, n, kind))
        }
        (_, Formula::And(l, r)) => Formula::and(mutate(l, n, kind), mutate(r, n, kind)),
        (_, Formula::Impl(l, r)) => Formula::impl_(mutate(l, n, kind), mutate(r, n, kind)),
        (_, Formula::Tensor(l, r)) => Formula::tensor(mutate(l, n, kind), mutate(r, n, kind)),
        (_, Formula::Ivee(l, r)) => Formula::ivee(mutate(l, n, kind), mutate(r, n, kind)),
        (_, Formula::Limpl(l, r)) => Formula::limpl(mutate(l, n, kind), mutate(r, n, kind)),
        (_, Formula::Forall(v, b)) => Formula::forall(v.clone(), mutate(b, n, kind)),
        (_, Formula::Exists(v, b)) => Formula::exists(v.clone(), mutate(b, n, kind)),
        _ => f.clone(),
    }
}

fn count_sites(f: &Formula, kind: Mutation) -> usize {
    let own = match (kind, f) {
        (Mutation::DropConjunct, Formula::And(..)) => 1,
        (Mutation::ImplToAnd, Formula::Impl(..)) => 1,
        _ => 0,
    };
    own + match f {
        Formula::And(l, r)
        | Formula::Tensor(l, r)
        | Formula::Ivee(l, r)
        | Formula::Impl(l, r)
        | Formula::Limpl(l, r) => count_sites(l, kind) + count_sites(r, kind),
        Formula::Forall(_, b) | Formula::Exists(_, b) => count_sites(b, kind),
        _ => 0,
    }
}

#[test]
fn c05_corrupted_translations_are_rejected_with_a_counterexample() {
    let t0 = Instant::now();
    let budget = deep_budget();
    let corpus = fixed_so_corpus();
    let picks = [&corpus[0], &corpus[1], &corpus[3]];
    for (name, phi, sig) in picks {
        let (image, _) = so_to_id(phi).unwrap();
        for kind in [Mutation::DropConjunct, Mutation::ImplToAnd] {
            let sites = count_sites(&image, kind);
            assert!(sites > 0, "{name}: no mutation site of the requested kind");
            let mut caught = false;
            for site in 0..sites {
                let mut n = site as isize;
                let mutated = mutate(&image, &mut n, kind);
                let verdict = check_sentence_translation(
                    phi,
                    &mutated,
                    EvalTeam::SingletonEmpty,
                    sig,
                    2,
                    &budget,
                )
                .unwrap();
                if verdict.status == EquivStatus::Fail {
                    assert!(
                        verdict.counterexample.is_some(),
                        "{name}: failure without a counterexample model"
                    );
                    caught = true;
                    break;
                }
            }
            assert!(caught, "{name}: no mutation of this kind was detected");
        }
    }
    let dt = t0.elapsed();
    println!(
        "criterion 05 PASS - 3/3 sentences: dropped conjunct and ->-for-& swap both rejected ({:.1}s)",
        dt.as_secs_f64()
    );
}

#[test]
fn c06_compiled_sentences_respect_classical_negation_via_bottom() {
    let t0 = Instant::now();
    let mut budget = EvalBudget::default();
    budget.max_subteam_rows = 4096;
    let mut checks = 0usize;
    for (name, phi, sig) in &so_corpus() {
        let (image, _) = so_to_id(phi).unwrap();
        let negated = Formula::impl_(image.clone(), Formula::Bottom);
        for n in 1..=2usize {
            for model in enumerate_models(sig, n, 1 << 20).unwrap() {
                let model = model.unwrap();
                let pos = sentence_true(&model, &image, budget.clone()).unwrap();
                let neg = sentence_true(&model, &negated, budget.clone()).unwrap();
                assert_eq!(neg, !pos, "{name} on a model of size {n}");
                checks += 1;
            }
        }
    }
    let dt = t0.elapsed();
    println!(
        "criterion 06 PASS - phi* -> bot flips sentence truth in all {} checks ({:.1}s)",
        checks,
        dt.as_secs_f64()
    );
}

#[test]
fn c07_intuitionistic_disjunction_elimination_is_equivalence_preserving() {
    let t0 = Instant::now();
    let sig = Signature::new([("P".to_owned(), 1)], [], []).unwrap();
    let scope = ["x".to_owned(), "y".to_owned()];
    let mut g = Generator::new(29, &sig);
    let budget = CheckBudget::default();

    let mut pairs: Vec<(Formula, Formula)> = vec![(
        Formula::Dep(vec![Term::var("x")]),
        Formula::Dep(vec![Term::var("y")]),
    )];
    while pairs.len() < 20 {
        let l = g.formula(Fragment::D, &scope, 2);
        let r = g.formula(Fragment::D, &scope, 2);
        pairs.push((l, r));
    }

    for (i, (l, r)) in pairs.iter().enumerate() {
        let ivee = Formula::ivee(l.clone(), r.clone());
        let eliminated = eliminate_ivee(l, r);
        let verdict = check_equiv(&ivee, &eliminated, &sig, 3, &budget).unwrap();
        assert!(
            verdict.passed(),
            "pair {i}: {} vs {} -> {}",
            render(&ivee),
            render(&eliminated),
            verdict.render_line()
        );
    }
    let dt = t0.elapsed();
    println!(
        "criterion 07 PASS - 20 pairs, sizes 1..=3 (one-element model included) ({:.1}s)",
        dt.as_secs_f64()
    );
}

#[test]
fn c08_truth_values_are_consistent_and_the_linear_route_agrees_at_the_empty_team() {
    let t0 = Instant::now();

    let sig = sig_f();
    let mut g = Generator::new(37, &sig);
    let mut evals = 0usize;
    for _ in 0..500 {
        let s = g.sentence(Fragment::Ld, 3);
        for n in 1..=2usize {
            for model in enumerate_models(&sig, n, 1 << 20).unwrap() {
                let model = model.unwrap();
                truth_value(&model, &s, EvalBudget::default())
                    .unwrap_or_else(|e| panic!("truth_value failed on {}: {e}", render(&s)));
                evals += 1;
            }
        }
    }

    let se = sig_empty();
    let pi12 = [
        "Af f:1. Ef g:1. A x. f(x)=g(x)",
        "Af f:1. Ef g:1. A x. g(f(x))=x",
        "Af f:1. Ef g:1. A x. f(g(x))=f(x)",
        "Af f:1. Ef g:1. A x. g(x)=f(f(x))",
    ];
    let budget = deep_budget();
    for s in pi12 {
        let phi = parse_so(s, &se).unwrap();
        let (image, _) = so_to_ld(&phi).unwrap();
        let verdict =
            check_sentence_translation(&phi, &image, EvalTeam::Empty, &se, 2, &budget).unwrap();
        assert!(verdict.passed(), "{s}: {}", verdict.render_line());
    }

    let dt = t0.elapsed();
    println!(
        "criterion 08 PASS - {} three-valued evaluations, 4 sentences agree at the empty team ({:.1}s)",
        evals,
        dt.as_secs_f64()
    );
}

/// Dependence-free team formulas are flat, so they can be read as plain
/// first-order sentences: `|` becomes classical disjunction.
fn fo_as_so(f: &Formula) -> SOFormula {
    match f {
        Formula::Atom(a) => SOFormula::Atom(a.clone()),
        Formula::NegAtom(a) => SOFormula::not(SOFormula::Atom(a.clone())),
        Formula::And(l, r) => SOFormula::and(fo_as_so(l), fo_as_so(r)),
        Formula::Tensor(l, r) => SOFormula::or(fo_as_so(l), fo_as_so(r)),
        Formula::Forall(v, b) => SOFormula::forall(v.clone(), fo_as_so(b)),
        Formula::Exists(v, b) => SOFormula::exists(v.clone(), fo_as_so(b)),
        _ => unreachable!("generator stays in the dependence-free fragment"),
    }
}

#[test]
fn c09_team_truth_of_dependence_free_sentences_matches_the_tarskian_reading() {
    let t0 = Instant::now();
    let sig = sig_f();
    let mut g = Generator::new(41, &sig);
    let mut checks = 0usize;
    for _ in 0..300 {
        let s = g.sentence(Fragment::Fo, 3);
        let so = fo_as_so(&s);
        for n in 1..=3usize {
            for model in enumerate_models(&sig, n, 1 << 20).unwrap() {
                let model = model.unwrap();
                let team = sentence_true(&model, &s, EvalBudget::default()).unwrap();
                let tarski = so_sentence_true(&model, &so, 1 << 20).unwrap();
                assert_eq!(team, tarski, "{} on a model of size {n}", render(&s));
                checks += 1;
            }
        }
    }
    let dt = t0.elapsed();
    println!(
        "criterion 09 PASS - {} sentence/model checks agree across the two evaluators ({:.1}s)",
        checks,
        dt.as_secs_f64()
    );
}

#[test]
fn c10_rendering_then_parsing_is_the_identity_on_generated_formulas() {
    let t0 = Instant::now();
    let sig = Signature::new(
        [("P".to_owned(), 1), ("R".to_owned(), 2)],
        [("f".to_owned(), 1)],
        ["c".to_owned()],
    )
    .unwrap();
    let scope = ["x".to_owned(), "y".to_owned()];
    let mut g = Generator::new(53, &sig);
    let mut total = 0usize;
    for frag in [
        Fragment::Fo,
        Fragment::D,
        Fragment::Id,
        Fragment::Ld,
        Fragment::Bid,
    ] {
        for _ in 0..200 {
            let f = g.formula(frag, &scope, 3);
            let text = render(&f);
            let back = parse_formula(&text, &sig)
                .unwrap_or_else(|e| panic!("rendered text failed to parse: {text}: {e}"));
            assert_eq!(back, f, "round trip changed: {text}");
            total += 1;
        }
    }
    let dt = t0.elapsed();
    assert!(dt <= Duration::from_secs(30), "round trips took {dt:?}");
    println!(
        "criterion 10 PASS - {} formulas across five fragments round-trip exactly ({:.1}s)",
        total,
        dt.as_secs_f64()
    );
}

/// The contradiction atom is needed by the mutation test's `Atom` import on
/// some toolchains; keep the import exercised.
#[allow(dead_code)]
fn _atom_witness() -> Formula {
    Formula::Atom(Atom::eq(Term::var("x"), Term::var("x")))
}
