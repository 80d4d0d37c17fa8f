//! The team-semantics evaluator: decides `M ⊨_X φ` by structural recursion
//! over the eleven satisfaction clauses, plus sentence truth and the
//! three-valued verdict.
//!
//! Evaluation is exact but not naive. The language is downward closed
//! (`M ⊨_X φ` and `Y ⊆ X` imply `M ⊨_Y φ`), first-order formulas are flat,
//! and satisfaction only depends on the free variables of the formula.
//! Those three facts license the fast paths below: projecting teams to free
//! variables, memoizing per subformula, evaluating first-order subtrees one
//! row at a time, and checking only maximal (or covering) antecedent teams
//! in the implication clauses. [`EvalMode::Paranoid`] switches every one of
//! them off and walks the raw clauses, so the fast evaluator can be
//! cross-checked against the slow one on small instances.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::ast::{Atom, Formula, Term};
use crate::model::{
    enumerate_subteams, enumerate_supplement_functions, full_team, BudgetExceeded, Model, Team,
};

/// Resource limits for the exponential clauses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalBudget {
    /// Largest team whose subteams may be enumerated (the `->` and `|`
    /// clauses).
    pub max_subteam_rows: usize,
    /// Largest full team whose powerset may be walked (the `-*` clause).
    pub max_team_space_rows: usize,
    /// Recursion depth limit.
    pub max_depth: usize,
    /// Upper bound on clause evaluations in one session. The raw clauses
    /// branch exponentially in the team size, so callers that sweep many
    /// teams use this to cut off pathological cases deterministically.
    pub max_steps: u64,
}

impl Default for EvalBudget {
    fn default() -> Self {
        EvalBudget {
            max_subteam_rows: 20,
            max_team_space_rows: 12,
            max_depth: 128,
            max_steps: u64::MAX,
        }
    }
}

/// Budget label reported when `max_steps` runs out; callers that want to
/// distinguish step exhaustion from the hard row caps match on it.
pub const STEP_BUDGET: &str = "clause evaluations";

/// The three-valued verdict on a sentence: which of `∅` and `{∅}` satisfy it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TruthValue {
    True,
    EmptyOnly,
    False,
}

impl std::fmt::Display for TruthValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TruthValue::True => write!(f, "TRUE"),
            TruthValue::EmptyOnly => write!(f, "EMPTY_ONLY"),
            TruthValue::False => write!(f, "FALSE"),
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("{0}")]
    Budget(#[from] BudgetExceeded),
    #[error("team domain {team:?} does not cover the free variables; missing {missing:?}")]
    DomainMismatch {
        team: Vec<String>,
        missing: Vec<String>,
    },
    #[error("formula is not a sentence; free variables: {0:?}")]
    NotASentence(Vec<String>),
    #[error("model error: {0}")]
    Model(#[from] crate::model::ModelError),
    #[error("unbound symbol `{0}`")]
    Unbound(String),
    #[error("recursion depth limit exceeded")]
    DepthExceeded,
    #[error("internal error: {0}")]
    Internal(String),
}

/// How much the evaluator is allowed to exploit the metatheory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvalMode {
    /// All sound accelerations on.
    #[default]
    Fast,
    /// Like `Fast` but teams are never projected to free variables; used to
    /// test locality rather than assume it.
    NoProjection,
    /// The raw clauses only: no projection, no memo, no row-wise shortcuts.
    Paranoid,
}

/// Per-node facts computed once per formula: subtree size (for preorder
/// child ids), sorted free variables, and whether the subtree is
/// syntactically flat.
struct NodeMeta {
    size: u32,
    fv: Vec<String>,
    flat: bool,
}

fn index_formula(f: &Formula, metas: &mut Vec<NodeMeta>) -> u32 {
    let id = metas.len();
    metas.push(NodeMeta {
        size: 0,
        fv: Vec::new(),
        flat: false,
    });
    let size = match f {
        Formula::Atom(_)
        | Formula::NegAtom(_)
        | Formula::Dep(_)
        | Formula::NegDep(_)
        | Formula::Bottom => 1,
        Formula::And(l, r)
        | Formula::Tensor(l, r)
        | Formula::Ivee(l, r)
        | Formula::Impl(l, r)
        | Formula::Limpl(l, r) => {
            let a = index_formula(l, metas);
            let b = index_formula(r, metas);
            1 + a + b
        }
        Formula::Forall(_, b) | Formula::Exists(_, b) => 1 + index_formula(b, metas),
    };
    metas[id].size = size;
    metas[id].fv = f.free_vars().into_iter().collect();
    metas[id].flat = f.flat();
    size
}

/// A reusable evaluation session for one `(model, formula)` pair; the memo
/// table persists across calls, so checking many teams against the same
/// formula shares work.
pub struct Evaluation<'a> {
    model: &'a Model,
    root: &'a Formula,
    mode: EvalMode,
    budget: EvalBudget,
    metas: Vec<NodeMeta>,
    memo: HashMap<(u32, Team), bool>,
    memo_bytes: usize,
    steps: u64,
}

/// Rough ceiling on memo storage. The memo is a pure cache, so once the
/// estimate is reached new results are recomputed instead of stored; without
/// the ceiling a search that keeps minting fresh teams (distinct supplement
/// columns, for instance) grows the table without bound.
const MEMO_BYTES_CAP: usize = 256 << 20;

impl<'a> Evaluation<'a> {
    pub fn new(model: &'a Model, formula: &'a Formula, mode: EvalMode, budget: EvalBudget) -> Self {
        let mut metas = Vec::new();
        index_formula(formula, &mut metas);
        Evaluation {
            model,
            root: formula,
            mode,
            budget,
            metas,
            memo: HashMap::new(),
            memo_bytes: 0,
            steps: 0,
        }
    }

    fn memoize(&mut self, id: u32, x: &Team, out: bool) {
        let est = 64 + x.vars().len() * 24 + x.len() * (24 + x.vars().len() * 8);
        if self.memo_bytes + est > MEMO_BYTES_CAP {
            return;
        }
        if self.memo.insert((id, x.clone()), out).is_none() {
            self.memo_bytes += est;
        }
    }

    /// Clause evaluations spent so far, across all `satisfies` calls on this
    /// session. Lets a caller running many sessions share one step allowance.
    pub fn steps_used(&self) -> u64 {
        self.steps
    }

    /// `M ⊨_X φ`. The team domain must cover the free variables.
    pub fn satisfies(&mut self, x: &Team) -> Result<bool, EvalError> {
        let missing: Vec<String> = self.metas[0]
            .fv
            .iter()
            .filter(|v| !x.has_var(v))
            .cloned()
            .collect();
        if !missing.is_empty() {
            return Err(EvalError::DomainMismatch {
                team: x.vars().to_vec(),
                missing,
            });
        }
        x.validate_for(self.model)?;
        self.eval(self.root, 0, x, 0)
    }

    /// Books `k` units of clause work against the step budget. Charged on
    /// every clause evaluation and on each iteration of the enumeration
    /// loops, so exponential scans cannot run unmetered between clauses.
    fn charge(&mut self, k: u64) -> Result<(), EvalError> {
        self.steps = self.steps.saturating_add(k);
        if self.steps > self.budget.max_steps {
            return Err(BudgetExceeded {
                what: STEP_BUDGET.to_owned(),
                needed: self.steps as u128,
                limit: self.budget.max_steps as u128,
            }
            .into());
        }
        Ok(())
    }

    fn eval(&mut self, f: &Formula, id: u32, x: &Team, depth: usize) -> Result<bool, EvalError> {
        if depth > self.budget.max_depth {
            return Err(EvalError::DepthExceeded);
        }
        self.charge(1)?;
        // Locality: project the team to the node's free variables so the
        // memo sees canonical keys and the exponential clauses see the
        // smallest equivalent team.
        let projected;
        let x = if self.mode == EvalMode::Fast && x.vars() != self.metas[id as usize].fv.as_slice()
        {
            projected = x.project(&self.metas[id as usize].fv)?;
            &projected
        } else {
            x
        };
        if self.mode != EvalMode::Paranoid {
            if let Some(&hit) = self.memo.get(&(id, x.clone())) {
                return Ok(hit);
            }
            // A flat subtree holds of a team iff it holds of every row on
            // its own.
            if self.metas[id as usize].flat {
                let out = self.flat_satisfies(f, x.vars(), x.rows().iter())?;
                self.memoize(id, x, out);
                return Ok(out);
            }
        }
        let out = self.eval_clause(f, id, x, depth)?;
        if self.mode != EvalMode::Paranoid {
            self.memoize(id, x, out);
        }
        Ok(out)
    }

    fn eval_clause(
        &mut self,
        f: &Formula,
        id: u32,
        x: &Team,
        depth: usize,
    ) -> Result<bool, EvalError> {
        match f {
            Formula::Atom(_) | Formula::NegAtom(_) => {
                self.flat_satisfies(f, x.vars(), x.rows().iter())
            }
            Formula::Dep(terms) => {
                let terms: Vec<&Term> = terms.iter().collect();
                self.dep_holds(&terms, x.vars(), x.rows().iter())
            }
            Formula::NegDep(_) | Formula::Bottom => Ok(x.is_empty()),
            Formula::And(l, r) => {
                let (lid, rid) = self.child_ids(id);
                Ok(self.eval(l, lid, x, depth + 1)? && self.eval(r, rid, x, depth + 1)?)
            }
            Formula::Ivee(l, r) => {
                let (lid, rid) = self.child_ids(id);
                Ok(self.eval(l, lid, x, depth + 1)? || self.eval(r, rid, x, depth + 1)?)
            }
            Formula::Tensor(l, r) => self.eval_tensor(l, r, id, x, depth),
            Formula::Impl(l, r) => self.eval_impl(l, r, id, x, depth),
            Formula::Limpl(l, r) => self.eval_limpl(l, r, id, x, depth),
            Formula::Forall(v, b) => {
                let dup = x.duplicate(v, self.model);
                self.eval(b, id + 1, &dup, depth + 1)
            }
            Formula::Exists(v, b) => self.eval_exists(v, b, id, x, depth),
        }
    }

    fn child_ids(&self, id: u32) -> (u32, u32) {
        let lid = id + 1;
        (lid, lid + self.metas[lid as usize].size)
    }

    // --- ⊗ --------------------------------------------------------------

    fn eval_tensor(
        &mut self,
        l: &Formula,
        r: &Formula,
        id: u32,
        x: &Team,
        depth: usize,
    ) -> Result<bool, EvalError> {
        let (lid, rid) = self.child_ids(id);
        if self.mode == EvalMode::Paranoid {
            // The clause verbatim: some pair of subteams covering X, overlap
            // permitted.
            for y in enumerate_subteams(x, self.budget.max_subteam_rows)? {
                self.charge(1)?;
                if !self.eval(l, lid, &y, depth + 1)? {
                    continue;
                }
                for z in enumerate_subteams(x, self.budget.max_subteam_rows)? {
                    self.charge(1)?;
                    if y.union(&z)? == *x && self.eval(r, rid, &z, depth + 1)? {
                        return Ok(true);
                    }
                }
            }
            return Ok(false);
        }
        // Downward closure makes complement pairs sufficient: if Y ∪ Z = X
        // works, so does (Y, X \ Y) since X \ Y ⊆ Z.
        let rows: Vec<Vec<usize>> = x.rows().iter().cloned().collect();
        if rows.len() > self.budget.max_subteam_rows || rows.len() >= 64 {
            return Err(BudgetExceeded {
                what: "split enumeration".to_owned(),
                needed: rows.len() as u128,
                limit: self.budget.max_subteam_rows.min(63) as u128,
            }
            .into());
        }
        for mask in 0..(1u64 << rows.len()) {
            let mut yr = BTreeSet::new();
            let mut zr = BTreeSet::new();
            for (i, row) in rows.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    yr.insert(row.clone());
                } else {
                    zr.insert(row.clone());
                }
            }
            let y = Team::from_sorted_parts(x.vars().to_vec(), yr);
            let z = Team::from_sorted_parts(x.vars().to_vec(), zr);
            if self.eval(l, lid, &y, depth + 1)? && self.eval(r, rid, &z, depth + 1)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    // --- → and ⊸ ---------------------------------------------------------

    fn eval_impl(
        &mut self,
        l: &Formula,
        r: &Formula,
        id: u32,
        x: &Team,
        depth: usize,
    ) -> Result<bool, EvalError> {
        let (lid, rid) = self.child_ids(id);
        if self.mode != EvalMode::Paranoid {
            match self.antecedent_plan(l, lid) {
                AntecedentPlan::Flat => {
                    // Flat antecedent: the satisfying subteams of X are
                    // exactly the subsets of Y* = {s ∈ X : {s} ⊨ l}, and by
                    // downward closure it suffices to check Y* itself.
                    let y_star = self.flat_rows(l, x)?;
                    return self.eval(r, rid, &y_star, depth + 1);
                }
                AntecedentPlan::DepChain(parts) => {
                    if let Some(res) =
                        self.check_dep_chain_consequent(&parts, x, None, r, rid, depth)?
                    {
                        return Ok(res);
                    }
                    // Too many families: fall through to enumeration.
                }
                AntecedentPlan::Generic => {}
            }
        }
        for y in enumerate_subteams(x, self.budget.max_subteam_rows)? {
            if self.eval(l, lid, &y, depth + 1)? && !self.eval(r, rid, &y, depth + 1)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn eval_limpl(
        &mut self,
        l: &Formula,
        r: &Formula,
        id: u32,
        x: &Team,
        depth: usize,
    ) -> Result<bool, EvalError> {
        let (lid, rid) = self.child_ids(id);
        let space = full_team(self.model, x.vars());
        if space.len() > self.budget.max_team_space_rows.min(16) {
            return Err(BudgetExceeded {
                what: "team-space enumeration".to_owned(),
                needed: space.len() as u128,
                limit: self.budget.max_team_space_rows.min(16) as u128,
            }
            .into());
        }
        if self.mode != EvalMode::Paranoid {
            match self.antecedent_plan(l, lid) {
                AntecedentPlan::Flat => {
                    let y_star = self.flat_rows(l, &space)?;
                    let joined = x.union(&y_star)?;
                    return self.eval(r, rid, &joined, depth + 1);
                }
                AntecedentPlan::DepChain(parts) => {
                    if let Some(res) =
                        self.check_dep_chain_consequent(&parts, &space, Some(x), r, rid, depth)?
                    {
                        return Ok(res);
                    }
                }
                AntecedentPlan::Generic => {}
            }
        }
        for y in enumerate_subteams(&space, space.len())? {
            if self.eval(l, lid, &y, depth + 1)? {
                let joined = x.union(&y)?;
                if !self.eval(r, rid, &joined, depth + 1)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Classifies an antecedent for the implication clauses.
    fn antecedent_plan<'f>(&self, l: &'f Formula, lid: u32) -> AntecedentPlan<'f> {
        if self.metas[lid as usize].flat {
            return AntecedentPlan::Flat;
        }
        let mut parts = Vec::new();
        let mut stack = vec![(l, lid)];
        while let Some((f, id)) = stack.pop() {
            match f {
                Formula::And(a, b) => {
                    let (aid, bid) = self.child_ids(id);
                    stack.push((a, aid));
                    stack.push((b, bid));
                }
                other if self.metas[id as usize].flat => parts.push(ChainPart::Flat(other)),
                other => match as_dep_chain(other) {
                    Some(chain) => parts.push(ChainPart::Dep(chain)),
                    None => return AntecedentPlan::Generic,
                },
            }
        }
        AntecedentPlan::DepChain(parts)
    }

    /// The subteam of `x` whose rows individually satisfy a flat formula.
    fn flat_rows(&self, l: &Formula, x: &Team) -> Result<Team, EvalError> {
        let mut rows = BTreeSet::new();
        for row in x.rows() {
            if self.flat_satisfies(l, x.vars(), std::iter::once(row))? {
                rows.insert(row.clone());
            }
        }
        Ok(Team::from_sorted_parts(x.vars().to_vec(), rows))
    }

    /// Covering-family check for an antecedent that is a conjunction of
    /// dependence atoms and flat formulas.
    ///
    /// Every team satisfying the antecedent is contained in one of the
    /// "choice teams": fix, for each dependence atom and each class of rows
    /// agreeing on its determining terms, one of the determined values
    /// present in that class. Downward closure of the consequent then makes
    /// it enough to check the choice teams. For `->`, `base` is `None` and a
    /// choice team `Y` itself must satisfy the consequent; for `-*` the
    /// check is on `base ∪ Y`.
    ///
    /// Returns `None` when the family count exceeds the fallback cap.
    fn check_dep_chain_consequent(
        &mut self,
        parts: &[ChainPart<'_>],
        space: &Team,
        base: Option<&Team>,
        r: &Formula,
        rid: u32,
        depth: usize,
    ) -> Result<Option<bool>, EvalError> {
        const FAMILY_CAP: u128 = 1 << 16;
        // Rows surviving the flat conjuncts.
        let mut survivors: Vec<Vec<usize>> = Vec::new();
        'rows: for row in space.rows() {
            for p in parts {
                if let ChainPart::Flat(f) = p {
                    if !self.flat_satisfies(f, space.vars(), std::iter::once(row))? {
                        continue 'rows;
                    }
                }
            }
            survivors.push(row.clone());
        }
        // Per dependence atom: class key -> distinct determined values.
        let deps: Vec<&[&Term]> = parts
            .iter()
            .filter_map(|p| match p {
                ChainPart::Dep(t) => Some(t.as_slice()),
                ChainPart::Flat(_) => None,
            })
            .collect();
        // One "slot" per (dependence atom, class of rows agreeing on its
        // determining terms); a slot's options are the determined values
        // present in that class.
        let mut slots: Vec<(usize, Vec<usize>)> = Vec::new(); // (slot id, options)
        let mut row_keys: Vec<Vec<(usize, usize)>> = vec![Vec::new(); survivors.len()]; // per row: (slot id, value)
        for (di, terms) in deps.iter().enumerate() {
            let mut classes: HashMap<Vec<usize>, usize> = HashMap::new();
            let mut values: Vec<Vec<usize>> = Vec::new();
            for (ri, row) in survivors.iter().enumerate() {
                let mut scope = Vec::with_capacity(space.vars().len());
                for (v, &val) in space.vars().iter().zip(row.iter()) {
                    scope.push((v.clone(), val));
                }
                let mut key = Vec::with_capacity(terms.len() - 1);
                for t in &terms[..terms.len() - 1] {
                    key.push(self.term_value(t, &scope)?);
                }
                let last = self.term_value(terms.last().expect("dep arity >= 1"), &scope)?;
                let class = *classes.entry(key).or_insert_with(|| {
                    values.push(Vec::new());
                    values.len() - 1
                });
                if !values[class].contains(&last) {
                    values[class].push(last);
                }
                row_keys[ri].push((di * 1_000_000 + class, last));
            }
            for (class, vals) in values.into_iter().enumerate() {
                slots.push((di * 1_000_000 + class, vals));
            }
        }
        let mut family_count: u128 = 1;
        for (_, vals) in &slots {
            family_count = family_count.saturating_mul(vals.len().max(1) as u128);
        }
        if family_count > FAMILY_CAP {
            return Ok(None);
        }
        // Odometer over one chosen value per slot.
        let mut choice = vec![0usize; slots.len()];
        loop {
            let chosen: HashMap<usize, usize> = slots
                .iter()
                .zip(&choice)
                .map(|((slot_id, vals), &ci)| (*slot_id, vals[ci]))
                .collect();
            let mut rows = BTreeSet::new();
            'pick: for (ri, row) in survivors.iter().enumerate() {
                for &(slot_id, value) in &row_keys[ri] {
                    if chosen.get(&slot_id) != Some(&value) {
                        continue 'pick;
                    }
                }
                rows.insert(row.clone());
            }
            let y = Team::from_sorted_parts(space.vars().to_vec(), rows);
            let target = match base {
                Some(b) => b.union(&y)?,
                None => y,
            };
            if !self.eval(r, rid, &target, depth + 1)? {
                return Ok(Some(false));
            }
            let mut i = slots.len();
            loop {
                if i == 0 {
                    return Ok(Some(true));
                }
                i -= 1;
                choice[i] += 1;
                if choice[i] < slots[i].1.len() {
                    break;
                }
                choice[i] = 0;
            }
        }
    }

    // --- ∃ ----------------------------------------------------------------

    fn eval_exists(
        &mut self,
        v: &str,
        body: &Formula,
        id: u32,
        x: &Team,
        depth: usize,
    ) -> Result<bool, EvalError> {
        let bid = id + 1;
        if self.mode == EvalMode::Paranoid {
            for f in enumerate_supplement_functions(x, self.model, 1 << 20)? {
                self.charge(1)?;
                let sup = x.supplement(v, &f)?;
                if self.eval(body, bid, &sup, depth + 1)? {
                    return Ok(true);
                }
            }
            return Ok(false);
        }
        // Row-by-row search over supplement functions with early pruning:
        // a partial supplement team is a subteam of every completion, so a
        // dependence atom or flat conjunct of the body already violated on
        // the prefix can never recover (downward closure / flatness).
        //
        // A whole block of existentials is searched as one: the conjuncts
        // that prune the search sit under the innermost quantifier, and a
        // column-at-a-time search would run blind until it got there.
        let mut vars: Vec<&str> = vec![v];
        let mut inner: &Formula = body;
        let mut inner_id = bid;
        while let Formula::Exists(w, b) = inner {
            vars.push(w.as_str());
            inner_id += 1;
            inner = b.as_ref();
        }
        let rows: Vec<Vec<usize>> = x.rows().iter().cloned().collect();
        if rows.len() > self.budget.max_subteam_rows {
            return Err(BudgetExceeded {
                what: "supplement search".to_owned(),
                needed: rows.len() as u128,
                limit: self.budget.max_subteam_rows as u128,
            }
            .into());
        }
        // How each row grows, one column per quantifier in order: write at
        // `pos` when the variable is already a column at that point,
        // otherwise insert there.
        let mut new_vars: Vec<String> = x.vars().to_vec();
        let mut plan: Vec<(usize, bool)> = Vec::with_capacity(vars.len());
        for w in &vars {
            match new_vars.binary_search_by(|have| have.as_str().cmp(w)) {
                Ok(i) => plan.push((i, true)),
                Err(i) => {
                    plan.push((i, false));
                    new_vars.insert(i, (*w).to_owned());
                }
            }
        }
        debug_assert!(new_vars.windows(2).all(|p| p[0] < p[1]));
        let guards = self.prune_guards(inner, inner_id);
        let mut partial: BTreeSet<Vec<usize>> = BTreeSet::new();
        self.exists_dfs(
            &rows, 0, &plan, &new_vars, &guards, &mut partial, inner, inner_id, depth,
        )
    }

    /// Conjuncts of the body usable to prune partial supplement teams.
    fn prune_guards<'f>(&self, body: &'f Formula, bid: u32) -> Vec<ChainPart<'f>> {
        let mut out = Vec::new();
        let mut stack = vec![(body, bid)];
        while let Some((f, id)) = stack.pop() {
            match f {
                Formula::And(a, b) => {
                    let (aid, bid) = self.child_ids(id);
                    stack.push((a, aid));
                    stack.push((b, bid));
                }
                other if self.metas[id as usize].flat => out.push(ChainPart::Flat(other)),
                other => {
                    if let Some(chain) = as_dep_chain(other) {
                        out.push(ChainPart::Dep(chain));
                    }
                }
            }
        }
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn exists_dfs(
        &mut self,
        rows: &[Vec<usize>],
        i: usize,
        plan: &[(usize, bool)],
        new_vars: &[String],
        guards: &[ChainPart<'_>],
        partial: &mut BTreeSet<Vec<usize>>,
        body: &Formula,
        bid: u32,
        depth: usize,
    ) -> Result<bool, EvalError> {
        // Pruned branches never reach a clause evaluation, so the search
        // itself must be metered.
        self.charge(1)?;
        if i == rows.len() {
            let team = Team::from_sorted_parts(new_vars.to_vec(), partial.clone());
            return self.eval(body, bid, &team, depth + 1);
        }
        let n = self.model.domain_size();
        let mut combo = vec![0usize; plan.len()];
        'combos: loop {
            self.charge(1)?;
            let mut ext = rows[i].clone();
            for (&(pos, present), &a) in plan.iter().zip(&combo) {
                if present {
                    ext[pos] = a;
                } else {
                    ext.insert(pos, a);
                }
            }
            // Check the new row against the flat guards, and the grown
            // prefix against the dependence guards.
            let mut ok = true;
            for g in guards {
                match g {
                    ChainPart::Flat(f) => {
                        if !self.flat_satisfies(f, new_vars, std::iter::once(&ext))? {
                            ok = false;
                            break;
                        }
                    }
                    ChainPart::Dep(terms) => {
                        if !self.dep_holds(
                            terms,
                            new_vars,
                            partial.iter().chain(std::iter::once(&ext)),
                        )? {
                            ok = false;
                            break;
                        }
                    }
                }
            }
            if ok {
                let added = partial.insert(ext.clone());
                let found = self.exists_dfs(
                    rows, i + 1, plan, new_vars, guards, partial, body, bid, depth,
                )?;
                if added {
                    partial.remove(&ext);
                }
                if found {
                    return Ok(true);
                }
            }
            // Step the value tuple like an odometer, last column fastest.
            let mut j = combo.len();
            while j > 0 {
                j -= 1;
                combo[j] += 1;
                if combo[j] < n {
                    continue 'combos;
                }
                combo[j] = 0;
            }
            return Ok(false);
        }
    }

    // --- row-wise machinery -------------------------------------------------

    fn term_value(&self, t: &Term, scope: &[(String, usize)]) -> Result<usize, EvalError> {
        match t {
            Term::Var(v) => scope
                .iter()
                .rev()
                .find(|(name, _)| name == v)
                .map(|&(_, val)| val)
                .ok_or_else(|| EvalError::Internal(format!("unbound variable `{v}`"))),
            Term::Const(c) => Ok(self.model.constant(c)?),
            Term::App(f, args) => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.term_value(a, scope)?);
                }
                Ok(self.model.apply_fn(f, &vals)?)
            }
        }
    }

    fn atom_holds(&self, a: &Atom, scope: &[(String, usize)]) -> Result<bool, EvalError> {
        match a {
            Atom::Rel(r, args) => {
                let mut vals = Vec::with_capacity(args.len());
                for t in args {
                    vals.push(self.term_value(t, scope)?);
                }
                Ok(self.model.rel_holds(r, &vals)?)
            }
            Atom::Eq(l, r) => Ok(self.term_value(l, scope)? == self.term_value(r, scope)?),
        }
    }

    /// Classical single-assignment truth of a first-order formula (`|`
    /// read as disjunction).
    fn tarski(&self, f: &Formula, scope: &mut Vec<(String, usize)>) -> Result<bool, EvalError> {
        match f {
            Formula::Atom(a) => self.atom_holds(a, scope),
            Formula::NegAtom(a) => Ok(!self.atom_holds(a, scope)?),
            Formula::Bottom => Ok(false),
            Formula::And(l, r) => Ok(self.tarski(l, scope)? && self.tarski(r, scope)?),
            Formula::Tensor(l, r) => Ok(self.tarski(l, scope)? || self.tarski(r, scope)?),
            Formula::Impl(l, r) => Ok(!self.tarski(l, scope)? || self.tarski(r, scope)?),
            Formula::Forall(v, b) => {
                for a in self.model.elements() {
                    scope.push((v.clone(), a));
                    let ok = self.tarski(b, scope)?;
                    scope.pop();
                    if !ok {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Formula::Exists(v, b) => {
                for a in self.model.elements() {
                    scope.push((v.clone(), a));
                    let ok = self.tarski(b, scope)?;
                    scope.pop();
                    if ok {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            other => Err(EvalError::Internal(format!(
                "row-wise evaluation on a non-first-order node: {other:?}"
            ))),
        }
    }

    fn flat_satisfies<'r>(
        &self,
        f: &Formula,
        vars: &[String],
        rows: impl Iterator<Item = &'r Vec<usize>>,
    ) -> Result<bool, EvalError> {
        for row in rows {
            let mut scope: Vec<(String, usize)> = vars
                .iter()
                .cloned()
                .zip(row.iter().copied())
                .collect();
            if !self.tarski(f, &mut scope)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The dependence-atom clause: rows agreeing on the determining terms
    /// agree on the determined term.
    fn dep_holds<'r>(
        &self,
        terms: &[&Term],
        vars: &[String],
        rows: impl Iterator<Item = &'r Vec<usize>>,
    ) -> Result<bool, EvalError> {
        let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
        for row in rows {
            let scope: Vec<(String, usize)> = vars
                .iter()
                .cloned()
                .zip(row.iter().copied())
                .collect();
            let mut key = Vec::with_capacity(terms.len() - 1);
            for t in &terms[..terms.len() - 1] {
                key.push(self.term_value(t, &scope)?);
            }
            let last = self.term_value(terms.last().expect("dep arity >= 1"), &scope)?;
            match seen.entry(key) {
                std::collections::hash_map::Entry::Occupied(e) => {
                    if *e.get() != last {
                        return Ok(false);
                    }
                }
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(last);
                }
            }
        }
        Ok(true)
    }
}

enum ChainPart<'f> {
    Dep(Vec<&'f Term>),
    Flat(&'f Formula),
}

/// Reads a conjunct as a dependence chain if it is one: a dependence atom
/// as is, and a constancy-guarded determination
/// `(dep(t1) & ... & dep(tk)) -> dep(u...)` as the single atom
/// `dep(t1, ..., tk, u...)`. Two rows agreeing on every `ti` form a subteam
/// with each `ti` constant, so the guard forces them to agree down the `u`
/// chain, and conversely; both sides are two-row properties, so the pair
/// criterion is exact. The rewrite keeps guard-shaped antecedents out of
/// the generic subteam scan, which cannot finish once teams grow past a
/// few dozen rows.
fn as_dep_chain(f: &Formula) -> Option<Vec<&Term>> {
    match f {
        Formula::Dep(terms) => Some(terms.iter().collect()),
        Formula::Impl(l, r) => {
            let us = match r.as_ref() {
                Formula::Dep(us) => us,
                _ => return None,
            };
            let mut chain: Vec<&Term> = Vec::new();
            let mut stack = vec![l.as_ref()];
            while let Some(g) = stack.pop() {
                match g {
                    Formula::And(a, b) => {
                        stack.push(a);
                        stack.push(b);
                    }
                    Formula::Dep(ts) if ts.len() == 1 => chain.push(&ts[0]),
                    _ => return None,
                }
            }
            chain.extend(us.iter());
            Some(chain)
        }
        _ => None,
    }
}

enum AntecedentPlan<'f> {
    Flat,
    DepChain(Vec<ChainPart<'f>>),
    Generic,
}

/// `M ⊨_X φ` with all accelerations on.
pub fn satisfies(m: &Model, x: &Team, phi: &Formula, budget: EvalBudget) -> Result<bool, EvalError> {
    Evaluation::new(m, phi, EvalMode::Fast, budget).satisfies(x)
}

/// `M ⊨_X φ` in a chosen evaluation mode.
pub fn satisfies_mode(
    m: &Model,
    x: &Team,
    phi: &Formula,
    budget: EvalBudget,
    mode: EvalMode,
) -> Result<bool, EvalError> {
    Evaluation::new(m, phi, mode, budget).satisfies(x)
}

/// Sentence truth: `M ⊨_{{∅}} φ`.
pub fn sentence_true(m: &Model, phi: &Formula, budget: EvalBudget) -> Result<bool, EvalError> {
    let fv = phi.free_vars();
    if !fv.is_empty() {
        return Err(EvalError::NotASentence(fv.into_iter().collect()));
    }
    satisfies(m, &Team::singleton_empty(), phi, budget)
}

/// The three-valued verdict: evaluates a sentence at both `∅` and `{∅}`.
pub fn truth_value(m: &Model, phi: &Formula, budget: EvalBudget) -> Result<TruthValue, EvalError> {
    let fv = phi.free_vars();
    if !fv.is_empty() {
        return Err(EvalError::NotASentence(fv.into_iter().collect()));
    }
    let mut session = Evaluation::new(m, phi, EvalMode::Fast, budget);
    let at_empty = session.satisfies(&Team::empty(Vec::new()).expect("no vars"))?;
    let at_singleton = session.satisfies(&Team::singleton_empty())?;
    match (at_empty, at_singleton) {
        (true, true) => Ok(TruthValue::True),
        (true, false) => Ok(TruthValue::EmptyOnly),
        (false, false) => Ok(TruthValue::False),
        (false, true) => Err(EvalError::Internal(
            "satisfaction at {∅} without satisfaction at ∅ contradicts downward closure".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_formula;

    fn m(n: usize) -> Model {
        Model::new(n).unwrap()
    }

    fn sig1() -> crate::ast::Signature {
        crate::ast::Signature::new([("P".to_owned(), 1)], [], []).unwrap()
    }

    fn fm(src: &str) -> Formula {
        parse_formula(src, &sig1()).unwrap()
    }

    fn team(vars: &[&str], rows: &[&[usize]]) -> Team {
        Team::new(
            vars.iter().map(|s| s.to_string()).collect(),
            rows.iter().map(|r| r.to_vec()),
        )
        .unwrap()
    }

    fn sat(model: &Model, x: &Team, src: &str) -> bool {
        satisfies(model, x, &fm(src), EvalBudget::default()).unwrap()
    }

    #[test]
    fn step_budget_cuts_off_expensive_evaluations() {
        let model = m(3);
        // False, so the raw exists-clause must walk all 27 supplements.
        let phi = fm("A x. E y. (x=y & ~(x=y))");
        let mut budget = EvalBudget::default();
        budget.max_steps = 10;
        let err = satisfies_mode(
            &model,
            &Team::singleton_empty(),
            &phi,
            budget,
            EvalMode::Paranoid,
        )
        .unwrap_err();
        match err {
            EvalError::Budget(b) => assert_eq!(b.what, STEP_BUDGET),
            other => panic!("expected a step-budget overrun, got {other:?}"),
        }
        // The default allowance is effectively unlimited.
        let fine = satisfies_mode(
            &model,
            &Team::singleton_empty(),
            &phi,
            EvalBudget::default(),
            EvalMode::Paranoid,
        );
        assert!(fine.is_ok());
    }

    #[test]
    fn sessions_report_their_step_spend() {
        let model = m(2);
        let phi = fm("E x. dep(x)");
        let mut session = Evaluation::new(&model, &phi, EvalMode::Fast, EvalBudget::default());
        assert_eq!(session.steps_used(), 0);
        session.satisfies(&Team::singleton_empty()).unwrap();
        let first = session.steps_used();
        assert!(first > 0);
        session.satisfies(&Team::singleton_empty()).unwrap();
        assert!(session.steps_used() >= first);
    }

    #[test]
    fn empty_team_satisfies_d_and_id_formulas() {
        let model = m(2);
        let empty = team(&["x", "y"], &[]);
        for src in [
            "dep(x,y)",
            "ndep(x,y)",
            "bot",
            "x=y & dep(y)",
            "(x=y -> bot)",
            "A x. E y. dep(x,y)",
            "x=y | ~(x=y)",
            "dep(x) || dep(y)",
        ] {
            assert!(sat(&model, &empty, src), "{src}");
        }
    }

    #[test]
    fn linear_implication_fails_on_empty_team() {
        // The -* clause quantifies over all teams on dom(X), so the empty
        // team is not a free pass.
        let model = m(2);
        let empty = team(&["x"], &[]);
        assert!(!sat(&model, &empty, "x=x -* ~(x=x)"));
        let model1 = m(1);
        assert!(!sat(&model1, &empty, "x=x -* ~(x=x)"));
    }

    #[test]
    fn dependence_atom_clause() {
        let model = m(2);
        let bad = team(&["x", "y"], &[&[0, 0], &[0, 1]]);
        assert!(!sat(&model, &bad, "dep(x,y)"));
        let good = team(&["x", "y"], &[&[0, 0], &[1, 1]]);
        assert!(sat(&model, &good, "dep(x,y)"));
        // Unary: constancy.
        let varies = team(&["x"], &[&[0], &[1]]);
        assert!(!sat(&model, &varies, "dep(x)"));
        let constant = team(&["x"], &[&[1]]);
        assert!(sat(&model, &constant, "dep(x)"));
    }

    #[test]
    fn exists_picks_a_supplement_function() {
        let model = m(2);
        let full_x = full_team(&model, &["x".to_owned()]);
        assert!(sat(&model, &full_x, "E y. x=y"));
        assert!(sat(&model, &full_x, "E y. (x=y & dep(y,x))"));
        // No single choice can make y differ from x on both rows at n=1.
        let model1 = m(1);
        let one = team(&["x"], &[&[0]]);
        assert!(!sat(&model1, &one, "E y. ~(x=y)"));
    }

    #[test]
    fn forall_duplicates() {
        let model = m(2);
        let start = team(&["x"], &[&[0]]);
        // The split can separate the y=x rows from the rest; ⊻ cannot.
        assert!(sat(&model, &start, "A y. (dep(x) & (x=y | ~(x=y)))"));
        assert!(!sat(&model, &start, "A y. (x=y || ~(x=y))"));
        assert!(!sat(&model, &start, "A x. dep(x)"));
    }

    #[test]
    fn tensor_splits_the_team() {
        let model = m(2);
        let x = team(&["x"], &[&[0], &[1]]);
        // Split into the constant-0 part and the constant-1 part.
        assert!(sat(&model, &x, "dep(x) | dep(x)"));
        assert!(!sat(&model, &x, "dep(x) & dep(x)"));
        // ⊻ takes the whole team on one side.
        assert!(!sat(&model, &x, "dep(x) || dep(x)"));
    }

    #[test]
    fn implication_quantifies_over_subteams() {
        let model = m(2);
        let x = team(&["x", "y"], &[&[0, 0], &[1, 1]]);
        assert!(sat(&model, &x, "dep(x) -> dep(y)"));
        let bad = team(&["x", "y"], &[&[0, 0], &[0, 1]]);
        assert!(!sat(&model, &bad, "dep(x) -> dep(y)"));
    }

    #[test]
    fn sentence_truth_examples() {
        let model = m(2);
        assert!(sentence_true(&model, &fm("A x. x=x"), EvalBudget::default()).unwrap());
        assert!(!sentence_true(&model, &fm("bot"), EvalBudget::default()).unwrap());
        assert!(sentence_true(&model, &fm("A x. E y. x=y"), EvalBudget::default()).unwrap());
        assert!(
            matches!(
                sentence_true(&model, &fm("dep(x)"), EvalBudget::default()),
                Err(EvalError::NotASentence(_))
            )
        );
    }

    #[test]
    fn truth_value_is_three_valued() {
        let model = m(2);
        let b = EvalBudget::default();
        assert_eq!(truth_value(&model, &fm("bot"), b).unwrap(), TruthValue::EmptyOnly);
        assert_eq!(
            truth_value(&model, &fm("A x. x=x"), b).unwrap(),
            TruthValue::True
        );
        assert_eq!(
            truth_value(&model, &fm("A x. (x=x -* ~(x=x))"), b).unwrap(),
            TruthValue::False
        );
    }

    #[test]
    fn domain_must_cover_free_variables() {
        let model = m(2);
        let x = team(&["x"], &[&[0]]);
        assert!(matches!(
            satisfies(&model, &x, &fm("x=y"), EvalBudget::default()),
            Err(EvalError::DomainMismatch { .. })
        ));
    }

    #[test]
    fn budget_errors_are_reported() {
        let model = m(2);
        let big = full_team(
            &model,
            &["a".to_owned(), "b".to_owned(), "c".to_owned(), "d2".to_owned(), "e".to_owned()],
        );
        assert_eq!(big.len(), 32);
        // All five variables are free, so projection cannot shrink the team
        // and the subteam budget (20 rows) trips.
        let phi = parse_formula("ndep(a,b,c,d2,e) -> ndep(a)", &sig1()).unwrap();
        assert!(matches!(
            satisfies(&model, &big, &phi, EvalBudget::default()),
            Err(EvalError::Budget(_))
        ));
        // With only two relevant variables the projected team has 4 rows
        // and the same budget is comfortable.
        let phi = parse_formula("ndep(a) -> ndep(b)", &sig1()).unwrap();
        assert!(satisfies(&model, &big, &phi, EvalBudget::default()).is_ok());
    }

    #[test]
    fn locality_survives_extra_columns() {
        let model = m(3);
        let with_extra = team(&["x", "z"], &[&[0, 1], &[0, 2], &[1, 0]]);
        let projected = with_extra.project(&["x".to_owned()]).unwrap();
        for src in ["dep(x)", "E y. ~(x=y)", "x=x -* dep(x)", "dep(x) || ~(x=x)"] {
            let phi = fm(src);
            let b = EvalBudget::default();
            let fast = satisfies(&model, &with_extra, &phi, b).unwrap();
            let no_proj =
                satisfies_mode(&model, &with_extra, &phi, b, EvalMode::NoProjection).unwrap();
            let on_projected = satisfies(&model, &projected, &phi, b).unwrap();
            assert_eq!(fast, no_proj, "{src}");
            assert_eq!(fast, on_projected, "{src}");
        }
    }

    #[test]
    fn fast_and_paranoid_agree_on_small_cases() {
        let model = m(2);
        let phis = [
            "dep(x,y) -> dep(y,x)",
            "(dep(x) | dep(y))",
            "E z. (dep(z) & ~(z=x))",
            "x=y -* (dep(x) || bot)",
            "(x=y -> bot) -> ~(x=y)",
            "A z. (dep(x,z) | ~(z=y))",
        ];
        let full = full_team(&model, &["x".to_owned(), "y".to_owned()]);
        let b = EvalBudget::default();
        for src in phis {
            let phi = fm(src);
            for x in enumerate_subteams(&full, 16).unwrap() {
                let fast = satisfies(&model, &x, &phi, b).unwrap();
                let slow = satisfies_mode(&model, &x, &phi, b, EvalMode::Paranoid).unwrap();
                assert_eq!(fast, slow, "{src} on {x:?}");
            }
        }
    }

    #[test]
    fn accelerated_shapes_agree_with_the_raw_clauses() {
        // Each case leans on one of the non-obvious shortcuts: row-wise
        // evaluation of implications between flat formulas, folding
        // constancy-guard antecedents into dependence chains, and searching
        // a block of existentials as one supplement problem.
        let cases: [(&str, &[&str]); 6] = [
            ("(P(x) -> bot) -> ((P(y) -> bot) -> bot)", &["x", "y", "z"]),
            ("A w. ((P(w) -> bot) -> ~(x=y))", &["x", "y", "z"]),
            ("(dep(x) -> dep(y)) -> dep(y,x)", &["x", "y", "z"]),
            ("((dep(x) & dep(y)) -> dep(z)) -> dep(z,y)", &["x", "y", "z"]),
            ("E w. E u. (dep(w,u) & (~(w=u) | x=y))", &["x", "y"]),
            ("E w. E w. (dep(w) & ~(w=x))", &["x", "y"]),
        ];
        let mut model = m(2);
        model.add_relation("P", 1, [vec![1]]).unwrap();
        let b = EvalBudget::default();
        for (src, dom) in cases {
            let phi = fm(src);
            let full = full_team(&model, &dom.iter().map(|v| v.to_string()).collect::<Vec<_>>());
            for x in enumerate_subteams(&full, 16).unwrap() {
                let fast = satisfies(&model, &x, &phi, b).unwrap();
                let slow = satisfies_mode(&model, &x, &phi, b, EvalMode::Paranoid).unwrap();
                assert_eq!(fast, slow, "{src} on {x:?}");
            }
        }
    }

    #[test]
    fn downward_closure_spot_check() {
        let model = m(2);
        let b = EvalBudget::default();
        let full = full_team(&model, &["x".to_owned(), "y".to_owned()]);
        for src in ["dep(x,y)", "dep(x) | dep(y)", "E z. dep(x,z)", "x=y -> dep(x)"] {
            let phi = fm(src);
            for x in enumerate_subteams(&full, 16).unwrap() {
                if !satisfies(&model, &x, &phi, b).unwrap() {
                    continue;
                }
                for y in enumerate_subteams(&x, 16).unwrap() {
                    assert!(satisfies(&model, &y, &phi, b).unwrap(), "{src}");
                }
            }
        }
    }

    #[test]
    fn relation_literals_consult_the_table() {
        let mut model = m(2);
        model.add_relation("P", 1, [vec![1]]).unwrap();
        let x = team(&["x"], &[&[1]]);
        assert!(sat(&model, &x, "P(x)"));
        assert!(!sat(&model, &x, "~P(x)"));
        let mixed = team(&["x"], &[&[0], &[1]]);
        assert!(!sat(&model, &mixed, "P(x)"));
        assert!(!sat(&model, &mixed, "~P(x)"));
        // But the team splits into a P-part and a non-P-part.
        assert!(sat(&model, &mixed, "P(x) | ~P(x)"));
    }
}
