//! Satisfiability queries and value enumeration under a path constraint.

use std::collections::{BTreeSet, HashMap};
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};

use super::cnf::{Blaster, Lit, DEFAULT_CLAUSE_LIMIT};
use super::expr::{ExprId, ExprStore, VarKey};
use super::sat::{SatOutcome, Solver, DEFAULT_CONFLICT_LIMIT};
use super::{Limit, SolverError};

pub const DEFAULT_VALUE_CAP: usize = 64;

static DUMP_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Resource bounds applied to each query.
#[derive(Debug, Clone)]
pub struct SolverLimits {
    /// Conflicts allowed across all solves of one query.
    pub conflict_limit: u64,
    pub clause_limit: usize,
    /// When set, every SAT call writes its CNF here in DIMACS format.
    pub dump_dir: Option<PathBuf>,
}

impl Default for SolverLimits {
    fn default() -> Self {
        SolverLimits {
            conflict_limit: DEFAULT_CONFLICT_LIMIT,
            clause_limit: DEFAULT_CLAUSE_LIMIT,
            dump_dir: None,
        }
    }
}

/// A satisfying assignment restricted to the query's variables.
#[derive(Debug, Clone)]
pub struct Model {
    bits: Vec<bool>,
    vars: HashMap<VarKey, Vec<Lit>>,
}

impl Model {
    fn read(&self, lits: &[Lit]) -> u64 {
        lits.iter()
            .enumerate()
            .filter(|(_, l)| self.bits[l.var() as usize] != l.is_neg())
            .fold(0u64, |acc, (i, _)| acc | 1 << i)
    }

    /// Value of a symbolic variable; variables the query never saw are 0.
    pub fn var_value(&self, key: &VarKey) -> u64 {
        self.vars.get(key).map(|l| self.read(l)).unwrap_or(0)
    }

    /// Evaluates any expression under this model.
    pub fn eval(&self, store: &ExprStore, e: ExprId) -> u64 {
        store.eval(e, &|k| self.var_value(k))
    }
}

/// Incremental query: path constraint asserted once, then repeated solves
/// with blocking clauses.
pub struct Query<'s> {
    store: &'s ExprStore,
    blaster: Blaster<'s>,
    solver: Solver,
    synced: usize,
    extra: Vec<Vec<Lit>>,
    limits: SolverLimits,
    conflicts_at_start: u64,
}

impl<'s> Query<'s> {
    pub fn new(store: &'s ExprStore, pc: &[ExprId], limits: &SolverLimits) -> Result<Self, SolverError> {
        let mut q = Query {
            store,
            blaster: Blaster::new(store, limits.clause_limit),
            solver: Solver::new(0),
            synced: 0,
            extra: Vec::new(),
            limits: limits.clone(),
            conflicts_at_start: 0,
        };
        for &c in pc {
            let l = q.blaster.lit(c)?;
            q.blaster.assert_lit(l)?;
        }
        Ok(q)
    }

    pub fn bits(&mut self, e: ExprId) -> Result<Vec<Lit>, SolverError> {
        self.blaster.bits(e)
    }

    fn sync(&mut self) {
        self.solver.reserve_vars(self.blaster.num_vars());
        let clauses = self.blaster.clauses();
        for c in &clauses[self.synced..] {
            self.solver.add_clause(c);
        }
        self.synced = clauses.len();
    }

    /// Forbids any future model where `lits` take exactly `value`.
    pub fn block(&mut self, lits: &[Lit], value: u64) {
        let clause: Vec<Lit> = lits
            .iter()
            .enumerate()
            .map(|(i, &l)| if (value >> i) & 1 == 1 { !l } else { l })
            .collect();
        self.solver.add_clause(&clause);
        self.extra.push(clause);
    }

    fn dump(&self) -> Result<(), SolverError> {
        let Some(dir) = &self.limits.dump_dir else {
            return Ok(());
        };
        let n = DUMP_COUNTER.fetch_add(1, Ordering::Relaxed);
        let clauses = self.blaster.clauses();
        let mut s = format!(
            "p cnf {} {}\n",
            self.blaster.num_vars(),
            clauses.len() + self.extra.len()
        );
        for c in clauses.iter().chain(&self.extra) {
            for l in c {
                s.push_str(&l.dimacs().to_string());
                s.push(' ');
            }
            s.push_str("0\n");
        }
        std::fs::create_dir_all(dir).map_err(|e| SolverError::Dump(e.to_string()))?;
        std::fs::write(dir.join(format!("query_{n:06}.cnf")), s).map_err(|e| SolverError::Dump(e.to_string()))
    }

    pub fn solve(&mut self) -> Result<Option<Model>, SolverError> {
        self.sync();
        self.dump()?;
        let used = self.solver.conflicts() - self.conflicts_at_start;
        let budget = self.limits.conflict_limit.saturating_sub(used);
        if budget == 0 {
            return Err(SolverError::ResourceOut(Limit::Conflicts));
        }
        match self.solver.solve(budget) {
            SatOutcome::Sat(bits) => Ok(Some(Model {
                bits,
                vars: self.blaster.var_bits().clone(),
            })),
            SatOutcome::Unsat => Ok(None),
            SatOutcome::ResourceOut(l) => Err(SolverError::ResourceOut(l)),
        }
    }

    pub fn store(&self) -> &ExprStore {
        self.store
    }

    pub fn read(model: &Model, lits: &[Lit]) -> u64 {
        model.read(lits)
    }
}

/// Whether the conjunction `pc` has a model.
pub fn is_satisfiable(store: &ExprStore, pc: &[ExprId], limits: &SolverLimits) -> Result<bool, SolverError> {
    Ok(find_model(store, pc, limits)?.is_some())
}

pub fn find_model(store: &ExprStore, pc: &[ExprId], limits: &SolverLimits) -> Result<Option<Model>, SolverError> {
    if pc.iter().any(|&c| store.as_const(c) == Some(0)) {
        return Ok(None);
    }
    let live: Vec<ExprId> = pc.iter().copied().filter(|&c| store.as_const(c) != Some(1)).collect();
    let mut q = Query::new(store, &live, limits)?;
    q.solve()
}

/// One feasible value of an enumerated expression with a model producing it.
#[derive(Debug, Clone)]
pub struct Solution {
    pub value: u64,
    pub model: Model,
}

/// Every value `e` can take under `pc`, each with a witnessing model, in
/// ascending value order. Fails with `CapExceeded` past `cap` values.
pub fn all_solutions(
    store: &ExprStore,
    e: ExprId,
    pc: &[ExprId],
    cap: usize,
    limits: &SolverLimits,
) -> Result<Vec<Solution>, SolverError> {
    if pc.iter().any(|&c| store.as_const(c) == Some(0)) {
        return Ok(Vec::new());
    }
    let live: Vec<ExprId> = pc.iter().copied().filter(|&c| store.as_const(c) != Some(1)).collect();
    let mut q = Query::new(store, &live, limits)?;
    let bits = q.bits(e)?;
    let mut out = Vec::new();
    while let Some(model) = q.solve()? {
        let value = model.read(&bits);
        out.push(Solution { value, model });
        if out.len() > cap {
            return Err(SolverError::CapExceeded { cap });
        }
        q.block(&bits, value);
    }
    out.sort_by_key(|s| s.value);
    Ok(out)
}

/// The set of values `e` can take under `pc`.
pub fn all_values(
    store: &ExprStore,
    e: ExprId,
    pc: &[ExprId],
    cap: usize,
    limits: &SolverLimits,
) -> Result<BTreeSet<u64>, SolverError> {
    Ok(all_solutions(store, e, pc, cap, limits)?
        .into_iter()
        .map(|s| s.value)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::BinOp;

    #[test]
    fn enumerates_mux_values() {
        let st = ExprStore::new();
        let c = st.var("c", 1, Some(0));
        let m = st.mux(c, st.konst(3, 1), st.konst(3, 0));
        let vals = all_values(&st, m, &[], 64, &SolverLimits::default()).unwrap();
        assert_eq!(vals.into_iter().collect::<Vec<_>>(), vec![0, 1]);
        let vals = all_values(&st, m, &[c], 64, &SolverLimits::default()).unwrap();
        assert_eq!(vals.into_iter().collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn cap_exceeded() {
        let st = ExprStore::new();
        let x = st.var("x", 4, Some(0));
        let r = all_values(&st, x, &[], 10, &SolverLimits::default());
        assert_eq!(r.unwrap_err(), SolverError::CapExceeded { cap: 10 });
        assert_eq!(all_values(&st, x, &[], 16, &SolverLimits::default()).unwrap().len(), 16);
    }

    #[test]
    fn constant_under_unsat_constraint_is_empty() {
        let st = ExprStore::new();
        let x = st.var("x", 2, Some(0));
        let pc = [st.eq_const(x, 1), st.eq_const(x, 2)];
        let k = st.konst(2, 3);
        assert!(all_values(&st, k, &pc, 4, &SolverLimits::default()).unwrap().is_empty());
        assert!(!is_satisfiable(&st, &pc, &SolverLimits::default()).unwrap());
    }

    #[test]
    fn model_evaluates_tracked_expressions() {
        let st = ExprStore::new();
        let x = st.var("x", 4, Some(0));
        let y = st.var("y", 4, Some(0));
        let s = st.binary(BinOp::Add, x, y);
        let pc = [st.eq_const(s, 9), st.eq_const(x, 4)];
        let m = find_model(&st, &pc, &SolverLimits::default()).unwrap().unwrap();
        assert_eq!(m.eval(&st, y), 5);
        assert_eq!(m.var_value(&VarKey { name: "z".into(), step: Some(0) }), 0);
    }

    #[test]
    fn dumps_dimacs_files() {
        let dir = std::env::temp_dir().join(format!("dctforge-dump-{}", std::process::id()));
        let st = ExprStore::new();
        let x = st.var("x", 2, Some(0));
        let limits = SolverLimits {
            dump_dir: Some(dir.clone()),
            ..Default::default()
        };
        all_values(&st, x, &[], 8, &limits).unwrap();
        let n = std::fs::read_dir(&dir).unwrap().count();
        assert!(n >= 5);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
