//! Finite models, assignments, teams, and the exhaustive enumerators the
//! evaluator and the verifier are built on.
//!
//! Domain elements are the dense integers `0..n`. Teams store their rows
//! canonically (variables sorted, rows in a sorted set), so two equal teams
//! always serialize to the same bytes.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::{is_identifier, Signature, Term, RESERVED_WORDS};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("budget exceeded: {what} needs {needed}, limit {limit}")]
pub struct BudgetExceeded {
    pub what: String,
    pub needed: u128,
    pub limit: u128,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("domain must have at least one element")]
    EmptyDomain,
    #[error("`{0}` is not a usable symbol name")]
    BadName(String),
    #[error("symbol `{0}` declared twice")]
    DuplicateSymbol(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("`{symbol}` has arity {expected}, got {got}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        got: usize,
    },
    #[error("element {value} out of range for domain of size {domain} (in {context})")]
    OutOfRange {
        context: String,
        value: usize,
        domain: usize,
    },
    #[error("function `{function}` must be total: expected {expected} entries, got {got}")]
    NotTotal {
        function: String,
        expected: usize,
        got: usize,
    },
    #[error("duplicate variable `{0}` in team domain")]
    DuplicateVariable(String),
    #[error("team row has {got} entries, expected {expected}")]
    RowWidth { expected: usize, got: usize },
    #[error("assignment domain does not match team domain")]
    AssignmentDomain,
    #[error("variable `{0}` is not in the team domain")]
    VarNotInTeam(String),
    #[error("variable `{0}` is unbound")]
    UnboundVariable(String),
    #[error("supplement function is missing a value for a team member")]
    MissingSupplementValue,
    #[error("teams have different variable domains")]
    DomainMismatch,
    #[error("malformed file: {0}")]
    Json(String),
}

fn check_name(name: &str) -> Result<(), ModelError> {
    if !is_identifier(name) || RESERVED_WORDS.contains(&name) {
        return Err(ModelError::BadName(name.to_owned()));
    }
    Ok(())
}

/// All `n^k` tuples over `0..n`, lexicographically, first coordinate most
/// significant.
pub(crate) fn tuples_lex(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(n.pow(k as u32));
    let mut cur = vec![0usize; k];
    loop {
        out.push(cur.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < n {
                break;
            }
            cur[i] = 0;
        }
    }
}

// --- assignments ----------------------------------------------------------

/// A finite partial map from variables to domain elements.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment(pub BTreeMap<String, usize>);

impl Assignment {
    pub fn empty() -> Self {
        Assignment(BTreeMap::new())
    }

    pub fn get(&self, var: &str) -> Option<usize> {
        self.0.get(var).copied()
    }

    /// `s(a/x)` — the assignment that agrees with `self` except at `x`.
    pub fn extend(&self, var: &str, value: usize) -> Assignment {
        let mut m = self.0.clone();
        m.insert(var.to_owned(), value);
        Assignment(m)
    }

    pub fn domain(&self) -> impl Iterator<Item = &String> {
        self.0.keys()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

// --- models ----------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
struct RelationTable {
    arity: usize,
    tuples: BTreeSet<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct FunctionTable {
    arity: usize,
    map: BTreeMap<Vec<usize>, usize>,
}

/// A finite first-order structure over the domain `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    domain: usize,
    relations: BTreeMap<String, RelationTable>,
    functions: BTreeMap<String, FunctionTable>,
    constants: BTreeMap<String, usize>,
}

impl Model {
    pub fn new(domain: usize) -> Result<Model, ModelError> {
        if domain == 0 {
            return Err(ModelError::EmptyDomain);
        }
        Ok(Model {
            domain,
            relations: BTreeMap::new(),
            functions: BTreeMap::new(),
            constants: BTreeMap::new(),
        })
    }

    pub fn domain_size(&self) -> usize {
        self.domain
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.domain
    }

    fn check_fresh(&self, name: &str) -> Result<(), ModelError> {
        check_name(name)?;
        if self.relations.contains_key(name)
            || self.functions.contains_key(name)
            || self.constants.contains_key(name)
        {
            return Err(ModelError::DuplicateSymbol(name.to_owned()));
        }
        Ok(())
    }

    pub fn add_relation(
        &mut self,
        name: &str,
        arity: usize,
        tuples: impl IntoIterator<Item = Vec<usize>>,
    ) -> Result<(), ModelError> {
        self.check_fresh(name)?;
        if arity == 0 {
            return Err(ModelError::BadName(name.to_owned()));
        }
        let mut set = BTreeSet::new();
        for t in tuples {
            if t.len() != arity {
                return Err(ModelError::ArityMismatch {
                    symbol: name.to_owned(),
                    expected: arity,
                    got: t.len(),
                });
            }
            for &v in &t {
                if v >= self.domain {
                    return Err(ModelError::OutOfRange {
                        context: format!("relation `{name}`"),
                        value: v,
                        domain: self.domain,
                    });
                }
            }
            set.insert(t);
        }
        self.relations
            .insert(name.to_owned(), RelationTable { arity, tuples: set });
        Ok(())
    }

    /// Adds a total function; each row is `[arg1, ..., argk, value]`.
    pub fn add_function(
        &mut self,
        name: &str,
        arity: usize,
        rows: impl IntoIterator<Item = Vec<usize>>,
    ) -> Result<(), ModelError> {
        self.check_fresh(name)?;
        if arity == 0 {
            return Err(ModelError::BadName(name.to_owned()));
        }
        let mut map = BTreeMap::new();
        for row in rows {
            if row.len() != arity + 1 {
                return Err(ModelError::ArityMismatch {
                    symbol: name.to_owned(),
                    expected: arity + 1,
                    got: row.len(),
                });
            }
            for &v in &row {
                if v >= self.domain {
                    return Err(ModelError::OutOfRange {
                        context: format!("function `{name}`"),
                        value: v,
                        domain: self.domain,
                    });
                }
            }
            let (value, args) = row.split_last().expect("arity >= 1");
            map.insert(args.to_vec(), *value);
        }
        let expected = self.domain.pow(arity as u32);
        if map.len() != expected {
            return Err(ModelError::NotTotal {
                function: name.to_owned(),
                expected,
                got: map.len(),
            });
        }
        self.functions
            .insert(name.to_owned(), FunctionTable { arity, map });
        Ok(())
    }

    pub fn add_constant(&mut self, name: &str, value: usize) -> Result<(), ModelError> {
        self.check_fresh(name)?;
        if value >= self.domain {
            return Err(ModelError::OutOfRange {
                context: format!("constant `{name}`"),
                value,
                domain: self.domain,
            });
        }
        self.constants.insert(name.to_owned(), value);
        Ok(())
    }

    pub fn rel_holds(&self, name: &str, args: &[usize]) -> Result<bool, ModelError> {
        let table = self
            .relations
            .get(name)
            .ok_or_else(|| ModelError::UnknownSymbol(name.to_owned()))?;
        if args.len() != table.arity {
            return Err(ModelError::ArityMismatch {
                symbol: name.to_owned(),
                expected: table.arity,
                got: args.len(),
            });
        }
        Ok(table.tuples.contains(args))
    }

    pub fn apply_fn(&self, name: &str, args: &[usize]) -> Result<usize, ModelError> {
        let table = self
            .functions
            .get(name)
            .ok_or_else(|| ModelError::UnknownSymbol(name.to_owned()))?;
        if args.len() != table.arity {
            return Err(ModelError::ArityMismatch {
                symbol: name.to_owned(),
                expected: table.arity,
                got: args.len(),
            });
        }
        Ok(*table.map.get(args).expect("function tables are total"))
    }

    pub fn constant(&self, name: &str) -> Result<usize, ModelError> {
        self.constants
            .get(name)
            .copied()
            .ok_or_else(|| ModelError::UnknownSymbol(name.to_owned()))
    }

    /// The signature this model interprets.
    pub fn signature(&self) -> Signature {
        Signature::new(
            self.relations
                .iter()
                .map(|(n, t)| (n.clone(), t.arity)),
            self.functions
                .iter()
                .map(|(n, t)| (n.clone(), t.arity)),
            self.constants.keys().cloned(),
        )
        .expect("model symbols are validated on construction")
    }

    /// Evaluates a term under an assignment.
    pub fn eval_term(&self, t: &Term, s: &Assignment) -> Result<usize, ModelError> {
        match t {
            Term::Var(v) => s
                .get(v)
                .ok_or_else(|| ModelError::UnboundVariable(v.clone())),
            Term::Const(c) => self.constant(c),
            Term::App(f, args) => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval_term(a, s)?);
                }
                self.apply_fn(f, &vals)
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ModelJson::from(self)).expect("model serialization")
    }

    pub fn from_json(text: &str) -> Result<Model, ModelError> {
        let raw: ModelJson =
            serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))?;
        raw.build()
    }
}

/// Loads a model from its JSON file format.
pub fn load_model(text: &str) -> Result<Model, ModelError> {
    Model::from_json(text)
}

/// Loads a team from its JSON file format.
pub fn load_team(text: &str) -> Result<Team, ModelError> {
    Team::from_json(text)
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RelationJson {
    Tuples(Vec<Vec<usize>>),
    Explicit { arity: usize, tuples: Vec<Vec<usize>> },
}

#[derive(Serialize, Deserialize)]
struct FunctionJson {
    arity: usize,
    table: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct ModelJson {
    domain: usize,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    relations: BTreeMap<String, RelationJson>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    functions: BTreeMap<String, FunctionJson>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    constants: BTreeMap<String, usize>,
}

impl From<&Model> for ModelJson {
    fn from(m: &Model) -> Self {
        ModelJson {
            domain: m.domain,
            relations: m
                .relations
                .iter()
                .map(|(n, t)| {
                    let tuples: Vec<_> = t.tuples.iter().cloned().collect();
                    // The bare tuple-list form cannot express an empty
                    // relation of arity > 1.
                    let r = if tuples.is_empty() && t.arity > 1 {
                        RelationJson::Explicit {
                            arity: t.arity,
                            tuples,
                        }
                    } else {
                        RelationJson::Tuples(tuples)
                    };
                    (n.clone(), r)
                })
                .collect(),
            functions: m
                .functions
                .iter()
                .map(|(n, t)| {
                    let table = t
                        .map
                        .iter()
                        .map(|(args, v)| {
                            let mut row = args.clone();
                            row.push(*v);
                            row
                        })
                        .collect();
                    (
                        n.clone(),
                        FunctionJson {
                            arity: t.arity,
                            table,
                        },
                    )
                })
                .collect(),
            constants: m.constants.clone(),
        }
    }
}

impl ModelJson {
    fn build(self) -> Result<Model, ModelError> {
        let mut m = Model::new(self.domain)?;
        for (name, rel) in self.relations {
            let (arity, tuples) = match rel {
                RelationJson::Explicit { arity, tuples } => (arity, tuples),
                RelationJson::Tuples(tuples) => {
                    // Arity is read off the first tuple; an empty bare list
                    // defaults to arity 1.
                    let arity = tuples.first().map(|t| t.len()).unwrap_or(1);
                    (arity, tuples)
                }
            };
            m.add_relation(&name, arity, tuples)?;
        }
        for (name, f) in self.functions {
            m.add_function(&name, f.arity, f.table)?;
        }
        for (name, v) in self.constants {
            m.add_constant(&name, v)?;
        }
        Ok(m)
    }
}

// --- teams ------------------------------------------------------------------

/// A set of assignments sharing one variable domain.
///
/// The empty team over any domain and the one-element team `{∅}` over the
/// empty domain are distinct values.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Team {
    vars: Vec<String>,
    rows: BTreeSet<Vec<usize>>,
}

impl Team {
    fn check_vars(mut vars: Vec<String>) -> Result<Vec<String>, ModelError> {
        for v in &vars {
            check_name(v)?;
        }
        vars.sort();
        for w in vars.windows(2) {
            if w[0] == w[1] {
                return Err(ModelError::DuplicateVariable(w[0].clone()));
            }
        }
        Ok(vars)
    }

    /// The empty team over the given variable domain.
    pub fn empty(vars: Vec<String>) -> Result<Team, ModelError> {
        Ok(Team {
            vars: Self::check_vars(vars)?,
            rows: BTreeSet::new(),
        })
    }

    /// `{∅}`: the team containing only the empty assignment.
    pub fn singleton_empty() -> Team {
        let mut rows = BTreeSet::new();
        rows.insert(Vec::new());
        Team {
            vars: Vec::new(),
            rows,
        }
    }

    /// Builds a team from rows given in the order of `vars` (any order;
    /// columns are permuted into the canonical sorted order).
    pub fn new(
        vars: Vec<String>,
        rows: impl IntoIterator<Item = Vec<usize>>,
    ) -> Result<Team, ModelError> {
        let given = vars;
        let sorted = Self::check_vars(given.clone())?;
        let perm: Vec<usize> = sorted
            .iter()
            .map(|v| given.iter().position(|g| g == v).expect("same set"))
            .collect();
        let mut set = BTreeSet::new();
        for row in rows {
            if row.len() != given.len() {
                return Err(ModelError::RowWidth {
                    expected: given.len(),
                    got: row.len(),
                });
            }
            set.insert(perm.iter().map(|&i| row[i]).collect());
        }
        Ok(Team {
            vars: sorted,
            rows: set,
        })
    }

    pub(crate) fn from_sorted_parts(vars: Vec<String>, rows: BTreeSet<Vec<usize>>) -> Team {
        debug_assert!(vars.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(rows.iter().all(|r| r.len() == vars.len()));
        Team { vars, rows }
    }

    pub fn from_assignments(
        vars: Vec<String>,
        assignments: impl IntoIterator<Item = Assignment>,
    ) -> Result<Team, ModelError> {
        let vars = Self::check_vars(vars)?;
        let mut rows = BTreeSet::new();
        for s in assignments {
            if s.0.len() != vars.len() {
                return Err(ModelError::AssignmentDomain);
            }
            let mut row = Vec::with_capacity(vars.len());
            for v in &vars {
                row.push(s.get(v).ok_or(ModelError::AssignmentDomain)?);
            }
            rows.insert(row);
        }
        Ok(Team { vars, rows })
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn rows(&self) -> &BTreeSet<Vec<usize>> {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn has_var(&self, var: &str) -> bool {
        self.vars.iter().any(|v| v == var)
    }

    pub(crate) fn col(&self, var: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == var)
    }

    pub fn assignments(&self) -> Vec<Assignment> {
        self.rows
            .iter()
            .map(|row| {
                Assignment(
                    self.vars
                        .iter()
                        .cloned()
                        .zip(row.iter().copied())
                        .collect(),
                )
            })
            .collect()
    }

    pub fn contains(&self, s: &Assignment) -> bool {
        if s.0.len() != self.vars.len() {
            return false;
        }
        let mut row = Vec::with_capacity(self.vars.len());
        for v in &self.vars {
            match s.get(v) {
                Some(x) => row.push(x),
                None => return false,
            }
        }
        self.rows.contains(&row)
    }

    /// Restriction of every assignment to `keep` (which must be a subset of
    /// the team domain); duplicate restricted rows collapse.
    pub fn project(&self, keep: &[String]) -> Result<Team, ModelError> {
        let keep = Self::check_vars(keep.to_vec())?;
        let cols: Vec<usize> = keep
            .iter()
            .map(|v| {
                self.col(v)
                    .ok_or_else(|| ModelError::VarNotInTeam(v.clone()))
            })
            .collect::<Result<_, _>>()?;
        let rows = self
            .rows
            .iter()
            .map(|row| cols.iter().map(|&c| row[c]).collect())
            .collect();
        Ok(Team { vars: keep, rows })
    }

    /// The supplement team `X(F/x) = {s(F(s)/x) : s ∈ X}`.
    pub fn supplement(&self, x: &str, f: &SupplementFunction) -> Result<Team, ModelError> {
        check_name(x)?;
        let mut rows = BTreeSet::new();
        for s in self.assignments() {
            let value = f.get(&s).ok_or(ModelError::MissingSupplementValue)?;
            rows.insert(self.extended_row_of(&s, x, value));
        }
        Ok(Team {
            vars: self.vars_with(x),
            rows,
        })
    }

    /// The duplicate team `X(M/x) = {s(a/x) : a ∈ M, s ∈ X}`.
    pub fn duplicate(&self, x: &str, m: &Model) -> Team {
        let (pos, present) = self.insert_point(x);
        let mut rows = BTreeSet::new();
        for row in &self.rows {
            for a in m.elements() {
                let mut r = row.clone();
                if present {
                    r[pos] = a;
                } else {
                    r.insert(pos, a);
                }
                rows.insert(r);
            }
        }
        Team {
            vars: self.vars_with(x),
            rows,
        }
    }

    /// Where `x` sits (or would sit) in the sorted domain, and whether it
    /// is already present.
    pub(crate) fn insert_point(&self, x: &str) -> (usize, bool) {
        match self.vars.binary_search_by(|v| v.as_str().cmp(x)) {
            Ok(i) => (i, true),
            Err(i) => (i, false),
        }
    }

    pub(crate) fn vars_with(&self, x: &str) -> Vec<String> {
        let (pos, present) = self.insert_point(x);
        let mut vars = self.vars.clone();
        if !present {
            vars.insert(pos, x.to_owned());
        }
        vars
    }

    fn extended_row_of(&self, s: &Assignment, x: &str, value: usize) -> Vec<usize> {
        let (pos, present) = self.insert_point(x);
        let mut row: Vec<usize> = self
            .vars
            .iter()
            .map(|v| s.get(v).expect("assignment matches team domain"))
            .collect();
        if present {
            row[pos] = value;
        } else {
            row.insert(pos, value);
        }
        row
    }

    /// Union of two teams over the same variable domain.
    pub fn union(&self, other: &Team) -> Result<Team, ModelError> {
        if self.vars != other.vars {
            return Err(ModelError::DomainMismatch);
        }
        let rows = self.rows.union(&other.rows).cloned().collect();
        Ok(Team {
            vars: self.vars.clone(),
            rows,
        })
    }

    pub fn is_subteam_of(&self, other: &Team) -> bool {
        self.vars == other.vars && self.rows.is_subset(&other.rows)
    }

    /// Checks that every row entry is an element of `m`.
    pub fn validate_for(&self, m: &Model) -> Result<(), ModelError> {
        for row in &self.rows {
            for &v in row {
                if v >= m.domain_size() {
                    return Err(ModelError::OutOfRange {
                        context: "team".to_owned(),
                        value: v,
                        domain: m.domain_size(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Vec<usize>> = self.rows.iter().cloned().collect();
        serde_json::to_string(&TeamJson {
            vars: self.vars.clone(),
            rows,
        })
        .expect("team serialization")
    }

    pub fn from_json(text: &str) -> Result<Team, ModelError> {
        let raw: TeamJson =
            serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))?;
        Team::new(raw.vars, raw.rows)
    }
}

#[derive(Serialize, Deserialize)]
struct TeamJson {
    vars: Vec<String>,
    rows: Vec<Vec<usize>>,
}

/// A total map from the assignments of one team to domain elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupplementFunction(pub BTreeMap<Assignment, usize>);

impl SupplementFunction {
    pub fn get(&self, s: &Assignment) -> Option<usize> {
        self.0.get(s).copied()
    }

    /// The constant function `F_a` on a team.
    pub fn constant(team: &Team, a: usize) -> SupplementFunction {
        SupplementFunction(
            team.assignments()
                .into_iter()
                .map(|s| (s, a))
                .collect(),
        )
    }
}

/// The full team `M^vars`: every assignment of the given variables.
pub fn full_team(m: &Model, vars: &[String]) -> Team {
    let mut vs: Vec<String> = vars.to_vec();
    vs.sort();
    vs.dedup();
    let rows: BTreeSet<Vec<usize>> = tuples_lex(m.domain_size(), vs.len()).into_iter().collect();
    Team::from_sorted_parts(vs, rows)
}

// --- enumeration -------------------------------------------------------------

/// All `2^|X|` subteams of `X`, the empty team first and `X` itself last.
pub fn enumerate_subteams(x: &Team, max_rows: usize) -> Result<SubteamIter, BudgetExceeded> {
    if x.len() > max_rows || x.len() >= 64 {
        return Err(BudgetExceeded {
            what: "subteam enumeration".to_owned(),
            needed: x.len() as u128,
            limit: max_rows.min(63) as u128,
        });
    }
    Ok(SubteamIter {
        vars: x.vars.clone(),
        rows: x.rows.iter().cloned().collect(),
        next: 0,
        end: 1u64 << x.len(),
    })
}

pub struct SubteamIter {
    vars: Vec<String>,
    rows: Vec<Vec<usize>>,
    next: u64,
    end: u64,
}

impl Iterator for SubteamIter {
    type Item = Team;

    fn next(&mut self) -> Option<Team> {
        if self.next == self.end {
            return None;
        }
        let mask = self.next;
        self.next += 1;
        let rows: BTreeSet<Vec<usize>> = self
            .rows
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, r)| r.clone())
            .collect();
        Some(Team::from_sorted_parts(self.vars.clone(), rows))
    }
}

/// All teams over `vars`, i.e. all subsets of the full team `M^vars`.
///
/// `max_rows` bounds the full team's size; it is clamped to 16 rows
/// (2^16 teams) no matter what is asked for.
pub fn enumerate_teams(
    m: &Model,
    vars: &[String],
    max_rows: usize,
) -> Result<SubteamIter, BudgetExceeded> {
    let full = full_team(m, vars);
    enumerate_subteams(&full, max_rows.min(16))
}

/// Number of interpretations of `sig` over a domain of `n` elements;
/// `None` on overflow.
pub fn count_models(sig: &Signature, n: usize) -> Option<u128> {
    let mut count: u128 = 1;
    let pow = |b: u128, e: u32| -> Option<u128> { b.checked_pow(e) };
    for (_, ar) in sig.relations() {
        let tuples = (n as u128).checked_pow(ar as u32)?;
        let tables = pow(2, u32::try_from(tuples).ok()?)?;
        count = count.checked_mul(tables)?;
    }
    for (_, ar) in sig.functions() {
        let tuples = (n as u128).checked_pow(ar as u32)?;
        let tables = pow(n as u128, u32::try_from(tuples).ok()?)?;
        count = count.checked_mul(tables)?;
    }
    for _ in sig.constants() {
        count = count.checked_mul(n as u128)?;
    }
    Some(count)
}

/// Every model of `sig` with domain `0..n`, in a fixed order: relation
/// tables vary slowest (in sorted symbol order), then function tables, then
/// constants, with the last symbol's table stepping fastest.
pub fn enumerate_models(
    sig: &Signature,
    n: usize,
    max_models: u128,
) -> Result<ModelIter, BudgetExceeded> {
    if n == 0 {
        return Err(BudgetExceeded {
            what: "model enumeration over an empty domain".to_owned(),
            needed: 0,
            limit: max_models,
        });
    }
    let count = count_models(sig, n).ok_or_else(|| BudgetExceeded {
        what: "model enumeration".to_owned(),
        needed: u128::MAX,
        limit: max_models,
    })?;
    if count > max_models {
        return Err(BudgetExceeded {
            what: "model enumeration".to_owned(),
            needed: count,
            limit: max_models,
        });
    }
    Ok(ModelIter {
        sig: sig.clone(),
        n,
        next: 0,
        count,
    })
}

pub struct ModelIter {
    sig: Signature,
    n: usize,
    next: u128,
    count: u128,
}

impl ModelIter {
    pub fn total(&self) -> u128 {
        self.count
    }

    /// The model at a given position of the enumeration order.
    pub fn decode(&self, index: u128) -> Model {
        decode_model(&self.sig, self.n, index)
    }
}

/// Decodes the model at `index` (mixed-radix; see [`enumerate_models`]).
pub fn decode_model(sig: &Signature, n: usize, index: u128) -> Model {
    let mut m = Model::new(n).expect("n >= 1");
    // Digits are peeled off fastest-first, i.e. in reverse symbol order.
    let mut idx = index;
    let consts: Vec<&str> = sig.constants().collect();
    let mut constant_digits: Vec<(String, usize)> = Vec::new();
    for name in consts.iter().rev() {
        constant_digits.push((name.to_string(), (idx % n as u128) as usize));
        idx /= n as u128;
    }
    let fns: Vec<(&str, usize)> = sig.functions().collect();
    let mut function_digits: Vec<(String, usize, u128)> = Vec::new();
    for (name, ar) in fns.iter().rev() {
        let tuples = (n as u128).pow(*ar as u32);
        let radix = (n as u128).pow(u32::try_from(tuples).expect("counted"));
        function_digits.push((name.to_string(), *ar, idx % radix));
        idx /= radix;
    }
    let rels: Vec<(&str, usize)> = sig.relations().collect();
    let mut relation_digits: Vec<(String, usize, u128)> = Vec::new();
    for (name, ar) in rels.iter().rev() {
        let tuples = (n as u128).pow(*ar as u32);
        let radix = 2u128.pow(u32::try_from(tuples).expect("counted"));
        relation_digits.push((name.to_string(), *ar, idx % radix));
        idx /= radix;
    }
    for (name, ar, digit) in relation_digits.into_iter().rev() {
        let all = tuples_lex(n, ar);
        let tuples: Vec<Vec<usize>> = all
            .into_iter()
            .enumerate()
            .filter(|(j, _)| digit & (1u128 << j) != 0)
            .map(|(_, t)| t)
            .collect();
        m.add_relation(&name, ar, tuples).expect("decoded in range");
    }
    for (name, ar, mut digit) in function_digits.into_iter().rev() {
        let all = tuples_lex(n, ar);
        // Base-n digits, last tuple fastest.
        let mut values = vec![0usize; all.len()];
        for v in values.iter_mut().rev() {
            *v = (digit % n as u128) as usize;
            digit /= n as u128;
        }
        let rows: Vec<Vec<usize>> = all
            .into_iter()
            .zip(values)
            .map(|(mut args, v)| {
                args.push(v);
                args
            })
            .collect();
        m.add_function(&name, ar, rows).expect("decoded in range");
    }
    for (name, value) in constant_digits.into_iter().rev() {
        m.add_constant(&name, value).expect("decoded in range");
    }
    m
}

impl Iterator for ModelIter {
    type Item = Model;

    fn next(&mut self) -> Option<Model> {
        if self.next == self.count {
            return None;
        }
        let m = decode_model(&self.sig, self.n, self.next);
        self.next += 1;
        Some(m)
    }
}

/// All `n^|X|` supplement functions on a team, deterministically: the first
/// assignment's value varies slowest.
pub fn enumerate_supplement_functions(
    x: &Team,
    m: &Model,
    max_count: u128,
) -> Result<SupplementIter, BudgetExceeded> {
    let n = m.domain_size() as u128;
    let count = n
        .checked_pow(u32::try_from(x.len()).unwrap_or(u32::MAX))
        .filter(|&c| c <= max_count)
        .ok_or_else(|| BudgetExceeded {
            what: "supplement-function enumeration".to_owned(),
            needed: u128::MAX,
            limit: max_count,
        })?;
    Ok(SupplementIter {
        assignments: x.assignments(),
        n: m.domain_size(),
        next: 0,
        count,
    })
}

pub struct SupplementIter {
    assignments: Vec<Assignment>,
    n: usize,
    next: u128,
    count: u128,
}

impl Iterator for SupplementIter {
    type Item = SupplementFunction;

    fn next(&mut self) -> Option<SupplementFunction> {
        if self.next == self.count {
            return None;
        }
        let mut idx = self.next;
        self.next += 1;
        let k = self.assignments.len();
        let mut values = vec![0usize; k];
        for v in values.iter_mut().rev() {
            idx = {
                *v = (idx % self.n as u128) as usize;
                idx / self.n as u128
            };
        }
        Some(SupplementFunction(
            self.assignments
                .iter()
                .cloned()
                .zip(values)
                .collect(),
        ))
    }
}
