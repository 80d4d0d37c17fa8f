//! Brute-force Tarskian evaluation of second-order sentences over finite
//! models: the ground-truth oracle the translation theorems are checked
//! against. Function quantifiers range over explicitly enumerated total
//! function tables.

use std::collections::BTreeMap;

use crate::ast::{Atom, SOFormula, Term};
use crate::model::{Assignment, BudgetExceeded, Model};
use crate::team_eval::EvalError;

/// A total function `M^q -> M`, stored densely: `values[i]` is the image of
/// the `i`-th argument tuple in lexicographic order (first coordinate most
/// significant).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct FnTable {
    arity: usize,
    n: usize,
    values: Vec<usize>,
}

impl FnTable {
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn apply(&self, args: &[usize]) -> Result<usize, EvalError> {
        if args.len() != self.arity {
            return Err(EvalError::Internal(format!(
                "function table of arity {} applied to {} arguments",
                self.arity,
                args.len()
            )));
        }
        let mut idx = 0usize;
        for &a in args {
            if a >= self.n {
                return Err(EvalError::Internal(format!(
                    "argument {a} outside domain of size {}",
                    self.n
                )));
            }
            idx = idx * self.n + a;
        }
        Ok(self.values[idx])
    }

    /// The table at a given position of the enumeration order: base-`n`
    /// digits of `index`, last argument tuple stepping fastest.
    pub fn decode(n: usize, arity: usize, index: u128) -> FnTable {
        let slots = n.pow(arity as u32);
        let mut values = vec![0usize; slots];
        let mut idx = index;
        for v in values.iter_mut().rev() {
            *v = (idx % n as u128) as usize;
            idx /= n as u128;
        }
        FnTable { arity, n, values }
    }

    /// Builds a table from an explicit map on argument tuples; must be total.
    pub fn from_map(
        n: usize,
        arity: usize,
        map: &BTreeMap<Vec<usize>, usize>,
    ) -> Result<FnTable, EvalError> {
        let slots = n.pow(arity as u32);
        let mut table = FnTable {
            arity,
            n,
            values: vec![0; slots],
        };
        if map.len() != slots {
            return Err(EvalError::Internal(format!(
                "function table must be total: expected {slots} entries, got {}",
                map.len()
            )));
        }
        for (args, &v) in map {
            let mut idx = 0usize;
            for &a in args {
                idx = idx * n + a;
            }
            table.values[idx] = v;
        }
        Ok(table)
    }
}

/// Interpretations for the free function variables of a formula.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FunctionEnvironment(pub BTreeMap<String, FnTable>);

impl FunctionEnvironment {
    pub fn empty() -> Self {
        FunctionEnvironment(BTreeMap::new())
    }

    pub fn get(&self, name: &str) -> Option<&FnTable> {
        self.0.get(name)
    }
}

/// All `n^(n^q)` total tables `M^q -> M`, in a deterministic order.
pub fn enumerate_function_tables(
    m: &Model,
    arity: usize,
    max_tables: u128,
) -> Result<FnTableIter, BudgetExceeded> {
    let n = m.domain_size();
    let slots = (n as u128).checked_pow(arity as u32);
    let count = slots
        .and_then(|s| u32::try_from(s).ok())
        .and_then(|s| (n as u128).checked_pow(s))
        .filter(|&c| c <= max_tables)
        .ok_or_else(|| BudgetExceeded {
            what: format!("function-table enumeration at arity {arity}"),
            needed: u128::MAX,
            limit: max_tables,
        })?;
    Ok(FnTableIter {
        n,
        arity,
        next: 0,
        count,
    })
}

pub struct FnTableIter {
    n: usize,
    arity: usize,
    next: u128,
    count: u128,
}

impl FnTableIter {
    pub fn total(&self) -> u128 {
        self.count
    }
}

impl Iterator for FnTableIter {
    type Item = FnTable;

    fn next(&mut self) -> Option<FnTable> {
        if self.next == self.count {
            return None;
        }
        let t = FnTable::decode(self.n, self.arity, self.next);
        self.next += 1;
        Some(t)
    }
}

fn term_value(
    m: &Model,
    env: &FunctionEnvironment,
    t: &Term,
    scope: &[(String, usize)],
) -> Result<usize, EvalError> {
    match t {
        Term::Var(v) => scope
            .iter()
            .rev()
            .find(|(name, _)| name == v)
            .map(|&(_, val)| val)
            .ok_or_else(|| EvalError::Unbound(v.clone())),
        Term::Const(c) => Ok(m.constant(c)?),
        Term::App(f, args) => {
            let mut vals = Vec::with_capacity(args.len());
            for a in args {
                vals.push(term_value(m, env, a, scope)?);
            }
            if let Some(table) = env.get(f) {
                table.apply(&vals)
            } else {
                Ok(m.apply_fn(f, &vals)?)
            }
        }
    }
}

fn atom_holds(
    m: &Model,
    env: &FunctionEnvironment,
    a: &Atom,
    scope: &[(String, usize)],
) -> Result<bool, EvalError> {
    match a {
        Atom::Rel(r, args) => {
            let mut vals = Vec::with_capacity(args.len());
            for t in args {
                vals.push(term_value(m, env, t, scope)?);
            }
            Ok(m.rel_holds(r, &vals)?)
        }
        Atom::Eq(l, r) => Ok(term_value(m, env, l, scope)? == term_value(m, env, r, scope)?),
    }
}

fn eval(
    m: &Model,
    phi: &SOFormula,
    env: &mut FunctionEnvironment,
    scope: &mut Vec<(String, usize)>,
    max_tables: u128,
) -> Result<bool, EvalError> {
    match phi {
        SOFormula::Atom(a) => atom_holds(m, env, a, scope),
        SOFormula::Not(b) => Ok(!eval(m, b, env, scope, max_tables)?),
        SOFormula::And(l, r) => {
            Ok(eval(m, l, env, scope, max_tables)? && eval(m, r, env, scope, max_tables)?)
        }
        SOFormula::Or(l, r) => {
            Ok(eval(m, l, env, scope, max_tables)? || eval(m, r, env, scope, max_tables)?)
        }
        SOFormula::Implies(l, r) => {
            Ok(!eval(m, l, env, scope, max_tables)? || eval(m, r, env, scope, max_tables)?)
        }
        SOFormula::Forall(x, b) => {
            for a in m.elements() {
                scope.push((x.clone(), a));
                let ok = eval(m, b, env, scope, max_tables)?;
                scope.pop();
                if !ok {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        SOFormula::Exists(x, b) => {
            for a in m.elements() {
                scope.push((x.clone(), a));
                let ok = eval(m, b, env, scope, max_tables)?;
                scope.pop();
                if ok {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        SOFormula::ForallFn(f, q, b) => {
            let saved = env.0.get(f).cloned();
            for table in enumerate_function_tables(m, *q, max_tables)? {
                env.0.insert(f.clone(), table);
                let ok = eval(m, b, env, scope, max_tables)?;
                if !ok {
                    restore(env, f, saved);
                    return Ok(false);
                }
            }
            restore(env, f, saved);
            Ok(true)
        }
        SOFormula::ExistsFn(f, q, b) => {
            let saved = env.0.get(f).cloned();
            for table in enumerate_function_tables(m, *q, max_tables)? {
                env.0.insert(f.clone(), table);
                let ok = eval(m, b, env, scope, max_tables)?;
                if ok {
                    restore(env, f, saved);
                    return Ok(true);
                }
            }
            restore(env, f, saved);
            Ok(false)
        }
    }
}

fn restore(env: &mut FunctionEnvironment, f: &str, saved: Option<FnTable>) {
    match saved {
        Some(t) => {
            env.0.insert(f.to_owned(), t);
        }
        None => {
            env.0.remove(f);
        }
    }
}

/// Standard second-order satisfaction `M ⊨ φ[env, s]`; function quantifiers
/// range over all total tables of the bound arity, each block capped at
/// `max_tables`.
pub fn so_satisfies(
    m: &Model,
    phi: &SOFormula,
    env: &FunctionEnvironment,
    s: &Assignment,
    max_tables: u128,
) -> Result<bool, EvalError> {
    let mut env = env.clone();
    let mut scope: Vec<(String, usize)> =
        s.0.iter().map(|(k, v)| (k.clone(), *v)).collect();
    eval(m, phi, &mut env, &mut scope, max_tables)
}

/// Second-order sentence truth with an empty environment and assignment.
pub fn so_sentence_true(m: &Model, phi: &SOFormula, max_tables: u128) -> Result<bool, EvalError> {
    so_satisfies(
        m,
        phi,
        &FunctionEnvironment::empty(),
        &Assignment::empty(),
        max_tables,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Signature;
    use crate::model::enumerate_models;
    use crate::parse::{parse_formula, parse_so};
    use crate::team_eval::{sentence_true, EvalBudget};

    const MAX: u128 = 1 << 24;

    fn msig() -> Signature {
        Signature::new([("R".to_owned(), 2)], [], []).unwrap()
    }

    #[test]
    fn table_enumeration_counts() {
        let m2 = Model::new(2).unwrap();
        assert_eq!(enumerate_function_tables(&m2, 1, MAX).unwrap().count(), 4);
        assert_eq!(enumerate_function_tables(&m2, 2, MAX).unwrap().count(), 16);
        let m3 = Model::new(3).unwrap();
        assert_eq!(enumerate_function_tables(&m3, 1, MAX).unwrap().count(), 27);
        assert!(enumerate_function_tables(&m3, 1, 5).is_err());
    }

    #[test]
    fn table_enumeration_is_deterministic() {
        let m2 = Model::new(2).unwrap();
        let a: Vec<FnTable> = enumerate_function_tables(&m2, 1, MAX).unwrap().collect();
        let b: Vec<FnTable> = enumerate_function_tables(&m2, 1, MAX).unwrap().collect();
        assert_eq!(a, b);
        let distinct: std::collections::BTreeSet<_> = a.into_iter().collect();
        assert_eq!(distinct.len(), 4);
    }

    #[test]
    fn every_function_equals_some_function() {
        let sig = Signature::empty();
        let phi = parse_so("Af f:1. Ef g:1. A x. f(x)=g(x)", &sig).unwrap();
        for n in 1..=3 {
            let m = Model::new(n).unwrap();
            assert!(so_sentence_true(&m, &phi, MAX).unwrap());
        }
    }

    #[test]
    fn injective_not_surjective_is_impossible_on_finite_models() {
        let sig = Signature::empty();
        let inj_not_surj = parse_so(
            "Ef f:1. ((A x. A y. ((f(x)=f(y)) -> (x=y))) & (E w. A z. (~(f(z)=w))))",
            &sig,
        )
        .unwrap();
        let negation = SOFormula::not(inj_not_surj.clone());
        for n in 1..=3 {
            let m = Model::new(n).unwrap();
            assert!(!so_sentence_true(&m, &inj_not_surj, MAX).unwrap());
            assert!(so_sentence_true(&m, &negation, MAX).unwrap());
        }
    }

    #[test]
    fn forall_fn_is_negated_exists_fn() {
        let sig = msig();
        let bodies = [
            "A x. E y. R(x,y)",
            "A x. (R(x,x) -> f(x)=x)",
            "E x. ~(f(f(x))=x)",
        ];
        for body in bodies {
            let all = parse_so(&format!("Af f:1. {body}"), &sig).unwrap();
            let not_some_not = SOFormula::not(parse_so(
                &format!("Ef f:1. ~({body})"),
                &sig,
            )
            .unwrap());
            for m in enumerate_models(&sig, 2, 1 << 10).unwrap() {
                assert_eq!(
                    so_sentence_true(&m, &all, MAX).unwrap(),
                    so_sentence_true(&m, &not_some_not, MAX).unwrap(),
                    "{body}"
                );
            }
        }
    }

    #[test]
    fn first_order_sentences_agree_with_the_team_evaluator() {
        let sig = msig();
        let sentences = [
            "A x. E y. R(x,y)",
            "E x. A y. (R(x,y) & ~R(y,x))",
            "A x. A y. (R(x,y) | R(y,x))",
            "A x. (R(x,x) | E y. (~R(x,y) & ~(x=y)))",
        ];
        for n in 1..=2 {
            for m in enumerate_models(&sig, n, 1 << 10).unwrap() {
                for src in sentences {
                    let so = parse_so(src, &sig).unwrap();
                    let team = parse_formula(src, &sig).unwrap();
                    assert_eq!(
                        so_sentence_true(&m, &so, MAX).unwrap(),
                        sentence_true(&m, &team, EvalBudget::default()).unwrap(),
                        "{src} on {}",
                        m.to_json()
                    );
                }
            }
        }
    }

    #[test]
    fn environment_supplies_free_function_variables() {
        let sig = Signature::empty();
        let m = Model::new(2).unwrap();
        let phi = parse_so("Af g:1. A x. f2(x)=g(x)", &sig);
        // f2 free: parser rejects unknown applications, so build the AST
        // directly.
        assert!(phi.is_err());
        let phi = SOFormula::forall(
            "x",
            SOFormula::Atom(Atom::eq(
                Term::app("f2", vec![Term::var("x")]),
                Term::var("x"),
            )),
        );
        let identity = FnTable::decode(2, 1, 1); // values [0,1]
        let mut env = FunctionEnvironment::empty();
        env.0.insert("f2".to_owned(), identity);
        assert!(so_satisfies(&m, &phi, &env, &Assignment::empty(), MAX).unwrap());
        assert!(matches!(
            so_satisfies(
                &m,
                &phi,
                &FunctionEnvironment::empty(),
                &Assignment::empty(),
                MAX
            ),
            Err(EvalError::Model(_))
        ));
    }

    #[test]
    fn assignment_supplies_free_individual_variables() {
        let sig = Signature::empty();
        let m = Model::new(2).unwrap();
        let phi = parse_so("E y. ~(x=y)", &sig).unwrap();
        let s = Assignment::empty().extend("x", 0);
        assert!(so_satisfies(&m, &phi, &FunctionEnvironment::empty(), &s, MAX).unwrap());
        assert!(matches!(
            so_satisfies(
                &m,
                &phi,
                &FunctionEnvironment::empty(),
                &Assignment::empty(),
                MAX
            ),
            Err(EvalError::Unbound(_))
        ));
    }
}
