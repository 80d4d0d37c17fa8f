//! Seeded random generators for formulas, sentences, and second-order
//! normal-form sentences. All draws go through one ChaCha stream per
//! generator, so a (seed, signature) pair reproduces the same corpus on
//! every platform.

use crate::ast::{Atom, Formula, Fragment, SOFormula, Signature, Term};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Variable pool for quantifiers; free variables only ever come from the
/// scope the caller passes in.
const POOL: [&str; 4] = ["x", "y", "z", "w"];

pub struct Generator {
    rng: ChaCha8Rng,
    sig: Signature,
    relations: Vec<(String, usize)>,
    functions: Vec<(String, usize)>,
    constants: Vec<String>,
}

impl Generator {
    pub fn new(seed: u64, sig: &Signature) -> Generator {
        Generator {
            rng: ChaCha8Rng::seed_from_u64(seed),
            sig: sig.clone(),
            relations: sig.relations().map(|(n, a)| (n.to_owned(), a)).collect(),
            functions: sig.functions().map(|(n, a)| (n.to_owned(), a)).collect(),
            constants: sig.constants().map(|c| c.to_owned()).collect(),
        }
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.rng.gen_range(0..items.len())]
    }

    /// A term over `scope`; `depth` bounds function nesting. The scope must
    /// be nonempty unless the signature has constants.
    pub fn term(&mut self, scope: &[String], depth: usize) -> Term {
        let mut leaves: Vec<u8> = Vec::new();
        if !scope.is_empty() {
            leaves.extend([0, 0, 0]);
        }
        if !self.constants.is_empty() {
            leaves.push(1);
        }
        if !self.functions.is_empty() && depth > 0 && (!scope.is_empty() || !self.constants.is_empty()) {
            leaves.extend([2, 2]);
        }
        match *self.pick(&leaves) {
            0 => Term::var(self.pick(scope).clone()),
            1 => Term::Const(self.pick(&self.constants.clone()).clone()),
            _ => {
                let (name, arity) = self.pick(&self.functions.clone()).clone();
                let args = (0..arity).map(|_| self.term(scope, depth - 1)).collect();
                Term::app(name, args)
            }
        }
    }

    pub fn atom(&mut self, scope: &[String], depth: usize) -> Atom {
        let use_eq = self.relations.is_empty() || self.rng.gen_bool(0.4);
        if use_eq {
            Atom::eq(self.term(scope, depth), self.term(scope, depth))
        } else {
            let (name, arity) = self.pick(&self.relations.clone()).clone();
            let args = (0..arity).map(|_| self.term(scope, depth)).collect();
            Atom::Rel(name, args)
        }
    }

    fn dep_atom(&mut self, scope: &[String], max_width: usize) -> Vec<Term> {
        let width = self.rng.gen_range(1..=max_width.max(1));
        (0..width).map(|_| self.term(scope, 1)).collect()
    }

    fn leaf(&mut self, frag: Fragment, scope: &[String]) -> Formula {
        // Leaf kinds allowed per fragment; positive atoms are weighted up.
        let choices: &[u8] = match frag {
            Fragment::Fo => &[0, 0, 1],
            Fragment::D | Fragment::Ld => &[0, 0, 1, 2, 2, 3],
            Fragment::Id => &[0, 0, 4, 5],
            Fragment::Bid => &[0, 0, 1, 2, 4, 3, 5],
        };
        match *self.pick(choices) {
            0 => Formula::Atom(self.atom(scope, 1)),
            1 => Formula::NegAtom(self.atom(scope, 1)),
            2 => Formula::Dep(self.dep_atom(scope, 3)),
            3 => Formula::NegDep(self.dep_atom(scope, 3)),
            4 => Formula::Dep(self.dep_atom(scope, 1)),
            _ => Formula::Bottom,
        }
    }

    /// A formula of the fragment with free variables drawn from `scope`.
    pub fn formula(&mut self, frag: Fragment, scope: &[String], depth: usize) -> Formula {
        // A leaf needs something to talk about: force a quantifier first
        // when the scope is empty and there are no constants to anchor it.
        let must_quantify = scope.is_empty() && self.constants.is_empty();
        if depth == 0 && !must_quantify {
            return self.leaf(frag, scope);
        }
        if !must_quantify && self.rng.gen_bool(0.25) {
            return self.leaf(frag, scope);
        }
        // Node kinds: 0 and, 1 tensor, 2 ivee, 3 impl, 4 limpl, 5 forall,
        // 6 exists.
        let choices: &[u8] = match frag {
            Fragment::Fo => &[0, 1, 5, 6],
            Fragment::D => &[0, 1, 5, 6],
            Fragment::Id => &[0, 2, 3, 5, 6],
            Fragment::Ld => &[0, 1, 4, 5, 6],
            Fragment::Bid => &[0, 1, 2, 3, 4, 5, 6],
        };
        let kind = if must_quantify {
            *self.pick(&[5u8, 6])
        } else {
            *self.pick(choices)
        };
        let next = depth.saturating_sub(1);
        match kind {
            0 => Formula::and(
                self.formula(frag, scope, next),
                self.formula(frag, scope, next),
            ),
            1 => Formula::tensor(
                self.formula(frag, scope, next),
                self.formula(frag, scope, next),
            ),
            2 => Formula::ivee(
                self.formula(frag, scope, next),
                self.formula(frag, scope, next),
            ),
            3 => Formula::impl_(
                self.formula(frag, scope, next),
                self.formula(frag, scope, next),
            ),
            4 => Formula::limpl(
                self.formula(frag, scope, next),
                self.formula(frag, scope, next),
            ),
            _ => {
                let v = self.pick(&POOL).to_string();
                let mut inner: Vec<String> = scope.to_vec();
                if !inner.contains(&v) {
                    inner.push(v.clone());
                }
                let body = self.formula(frag, &inner, next);
                if kind == 5 {
                    Formula::forall(v, body)
                } else {
                    Formula::exists(v, body)
                }
            }
        }
    }

    /// A sentence of the fragment (no free variables).
    pub fn sentence(&mut self, frag: Fragment, depth: usize) -> Formula {
        let f = self.formula(frag, &[], depth);
        debug_assert!(f.free_vars().is_empty());
        f
    }

    /// A second-order sentence already in the alternating normal form:
    /// `half_blocks` universal/existential block pairs of length ≤ `max_p`
    /// and arity ≤ `max_q`, one universal first-order block, and a
    /// quantifier-free matrix in which every function variable applies to
    /// its fixed tuple.
    pub fn so_nice_sentence(
        &mut self,
        max_half_blocks: usize,
        max_p: usize,
        max_q: usize,
        matrix_depth: usize,
    ) -> SOFormula {
        let half = self.rng.gen_range(1..=max_half_blocks.max(1));
        let p = self.rng.gen_range(1..=max_p.max(1));
        let q = self.rng.gen_range(1..=max_q.max(1));
        let m = self.rng.gen_range(q..=q + 1);
        let fo: Vec<String> = (0..m).map(|i| format!("x{}", i + 1)).collect();

        let mut fn_vars: Vec<(String, Vec<String>)> = Vec::new();
        for b in 0..2 * half {
            for j in 0..p {
                // A fixed tuple: q distinct first-order variables.
                let mut avail = fo.clone();
                let mut tuple = Vec::with_capacity(q);
                for _ in 0..q {
                    let i = self.rng.gen_range(0..avail.len());
                    tuple.push(avail.remove(i));
                }
                fn_vars.push((format!("f{}", b * p + j + 1), tuple));
            }
        }

        // Term pool: plain variables and each function variable applied to
        // its fixed tuple.
        let mut pool: Vec<Term> = fo.iter().map(|v| Term::var(v.clone())).collect();
        for (f, tuple) in &fn_vars {
            pool.push(Term::app(
                f.clone(),
                tuple.iter().map(|v| Term::var(v.clone())).collect(),
            ));
        }
        let unary_rels: Vec<String> = self
            .relations
            .iter()
            .filter(|(_, a)| *a == 1)
            .map(|(n, _)| n.clone())
            .collect();

        let matrix = self.so_matrix(&pool, &unary_rels, matrix_depth);

        let mut out = matrix;
        for x in fo.iter().rev() {
            out = SOFormula::forall(x.clone(), out);
        }
        for (b, (f, _)) in fn_vars.iter().enumerate().rev() {
            let universal = (b / p) % 2 == 0;
            out = if universal {
                SOFormula::forall_fn(f.clone(), q, out)
            } else {
                SOFormula::exists_fn(f.clone(), q, out)
            };
        }
        debug_assert!(out.free_vars().is_empty());
        out
    }

    fn so_matrix(&mut self, pool: &[Term], unary_rels: &[String], depth: usize) -> SOFormula {
        let leaf = depth == 0 || self.rng.gen_bool(0.3);
        if leaf {
            let use_rel = !unary_rels.is_empty() && self.rng.gen_bool(0.5);
            let atom = if use_rel {
                let r = self.pick(&unary_rels.to_vec()).clone();
                Atom::Rel(r, vec![self.pick(pool).clone()])
            } else {
                Atom::eq(self.pick(pool).clone(), self.pick(pool).clone())
            };
            return SOFormula::Atom(atom);
        }
        match self.rng.gen_range(0..4) {
            0 => SOFormula::and(
                self.so_matrix(pool, unary_rels, depth - 1),
                self.so_matrix(pool, unary_rels, depth - 1),
            ),
            1 => SOFormula::or(
                self.so_matrix(pool, unary_rels, depth - 1),
                self.so_matrix(pool, unary_rels, depth - 1),
            ),
            2 => SOFormula::implies(
                self.so_matrix(pool, unary_rels, depth - 1),
                self.so_matrix(pool, unary_rels, depth - 1),
            ),
            _ => SOFormula::not(self.so_matrix(pool, unary_rels, depth - 1)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_formula, parse_so, render, render_so};

    fn sig() -> Signature {
        Signature::new(
            [("P".to_owned(), 1), ("R".to_owned(), 2)],
            [("f".to_owned(), 1)],
            ["c".to_owned()],
        )
        .unwrap()
    }

    #[test]
    fn same_seed_same_corpus() {
        let mut a = Generator::new(7, &sig());
        let mut b = Generator::new(7, &sig());
        for _ in 0..50 {
            assert_eq!(
                render(&a.formula(Fragment::Bid, &["x".to_owned()], 3)),
                render(&b.formula(Fragment::Bid, &["x".to_owned()], 3))
            );
        }
    }

    #[test]
    fn formulas_stay_in_their_fragment_and_scope() {
        let scope = ["x".to_owned(), "y".to_owned()];
        for (frag, seed) in [
            (Fragment::Fo, 1u64),
            (Fragment::D, 2),
            (Fragment::Id, 3),
            (Fragment::Ld, 4),
            (Fragment::Bid, 5),
        ] {
            let mut g = Generator::new(seed, &sig());
            for _ in 0..100 {
                let f = g.formula(frag, &scope, 3);
                assert!(
                    f.fragment().admits.contains(&frag),
                    "{} escapes {frag}",
                    render(&f)
                );
                assert!(f.free_vars().iter().all(|v| scope.contains(v)));
            }
        }
    }

    #[test]
    fn sentences_are_closed_and_parse_back() {
        let mut g = Generator::new(11, &sig());
        for _ in 0..100 {
            let s = g.sentence(Fragment::Bid, 3);
            assert!(s.free_vars().is_empty());
            let text = render(&s);
            assert_eq!(render(&parse_formula(&text, &sig()).unwrap()), text);
        }
    }

    #[test]
    fn sentences_without_constants_are_still_closed() {
        let lean = Signature::new([("P".to_owned(), 1)], [], []).unwrap();
        let mut g = Generator::new(13, &lean);
        for _ in 0..100 {
            assert!(g.sentence(Fragment::Id, 2).free_vars().is_empty());
        }
    }

    #[test]
    fn nice_sentences_normalize_without_new_steps() {
        let lean = Signature::new([("R".to_owned(), 1)], [], []).unwrap();
        let mut g = Generator::new(17, &lean);
        for _ in 0..20 {
            let s = g.so_nice_sentence(2, 2, 2, 2);
            assert!(s.free_vars().is_empty());
            let text = render_so(&s);
            assert_eq!(render_so(&parse_so(&text, &lean).unwrap()), text);
            // The sentence must already be within reach of the normal-form
            // pipeline (it is built blocked, uniform, and quantifier-free).
            let (nf, _) = crate::translate::so_nice_normal_form(&s).unwrap();
            assert_eq!(nf.arity >= 1, true);
        }
    }
}
