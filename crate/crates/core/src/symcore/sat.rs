//! Conflict-driven clause-learning SAT solver.
//!
//! Two watched literals, first-UIP learning, VSIDS with a binary heap
//! (ties to the lower variable index), Luby restarts and phase saving.
//! Fully deterministic: no randomness and no hash-order dependence.

use super::cnf::{CnfFormula, Lit};
use super::Limit;

const UNDEF: u8 = 2;
const RESTART_UNIT: u64 = 100;
const VAR_DECAY: f64 = 0.95;

pub const DEFAULT_CONFLICT_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatOutcome {
    /// Assignment indexed by variable.
    Sat(Vec<bool>),
    Unsat,
    /// A resource limit was hit before a result was reached.
    ResourceOut(Limit),
}

#[derive(Clone, Copy)]
struct Watch {
    cref: u32,
    blocker: Lit,
}

struct Clause {
    lits: Vec<Lit>,
    learnt: bool,
}

pub struct Solver {
    clauses: Vec<Clause>,
    watches: Vec<Vec<Watch>>,
    assigns: Vec<u8>,
    level: Vec<u32>,
    reason: Vec<Option<u32>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    heap: VarHeap,
    phase: Vec<bool>,
    seen: Vec<bool>,
    ok: bool,
    conflicts: u64,
}

impl Default for Solver {
    fn default() -> Self {
        Self::new(0)
    }
}

impl Solver {
    pub fn new(num_vars: u32) -> Self {
        let mut s = Solver {
            clauses: Vec::new(),
            watches: Vec::new(),
            assigns: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: Vec::new(),
            var_inc: 1.0,
            heap: VarHeap::default(),
            phase: Vec::new(),
            seen: Vec::new(),
            ok: true,
            conflicts: 0,
        };
        s.reserve_vars(num_vars);
        s
    }

    pub fn num_vars(&self) -> u32 {
        self.assigns.len() as u32
    }

    /// Total conflicts over the solver's lifetime.
    pub fn conflicts(&self) -> u64 {
        self.conflicts
    }

    /// Grows the variable set to at least `n` variables.
    pub fn reserve_vars(&mut self, n: u32) {
        while self.num_vars() < n {
            let v = self.num_vars();
            self.assigns.push(UNDEF);
            self.level.push(0);
            self.reason.push(None);
            self.activity.push(0.0);
            self.phase.push(false);
            self.seen.push(false);
            self.watches.push(Vec::new());
            self.watches.push(Vec::new());
            self.heap.insert(v, &self.activity);
        }
    }

    fn value(&self, l: Lit) -> u8 {
        let a = self.assigns[l.var() as usize];
        if a == UNDEF {
            UNDEF
        } else {
            a ^ l.is_neg() as u8
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    /// Adds a clause. Must be called between solves (at decision level 0).
    /// Returns false once the formula is known to be unsatisfiable.
    pub fn add_clause(&mut self, lits: &[Lit]) -> bool {
        if !self.ok {
            return false;
        }
        debug_assert_eq!(self.decision_level(), 0);
        if let Some(max) = lits.iter().map(|l| l.var()).max() {
            self.reserve_vars(max + 1);
        }
        let mut c: Vec<Lit> = lits.to_vec();
        c.sort();
        c.dedup();
        for w in c.windows(2) {
            if w[0] == !w[1] {
                return true;
            }
        }
        if c.iter().any(|&l| self.value(l) == 1) {
            return true;
        }
        // keep the original clause for model checking even when shortened
        let original = c.clone();
        c.retain(|&l| self.value(l) != 0);
        match c.len() {
            0 => {
                self.ok = false;
                false
            }
            1 => {
                self.store_inactive(original);
                self.enqueue(c[0], None);
                if self.propagate().is_some() {
                    self.ok = false;
                }
                self.ok
            }
            _ => {
                self.attach(c, false);
                true
            }
        }
    }

    fn store_inactive(&mut self, lits: Vec<Lit>) {
        self.clauses.push(Clause { lits, learnt: false });
    }

    fn attach(&mut self, lits: Vec<Lit>, learnt: bool) -> u32 {
        let cref = self.clauses.len() as u32;
        self.watches[(!lits[0]).code()].push(Watch {
            cref,
            blocker: lits[1],
        });
        self.watches[(!lits[1]).code()].push(Watch {
            cref,
            blocker: lits[0],
        });
        self.clauses.push(Clause { lits, learnt });
        cref
    }

    fn enqueue(&mut self, l: Lit, reason: Option<u32>) {
        let v = l.var() as usize;
        self.assigns[v] = !l.is_neg() as u8;
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[p.code()]);
            let mut i = 0;
            let mut j = 0;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.value(w.blocker) == 1 {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let cref = w.cref as usize;
                {
                    let c = &mut self.clauses[cref].lits;
                    if c[0] == false_lit {
                        c.swap(0, 1);
                    }
                }
                let first = self.clauses[cref].lits[0];
                if first != w.blocker && self.value(first) == 1 {
                    ws[j] = Watch {
                        cref: w.cref,
                        blocker: first,
                    };
                    j += 1;
                    continue;
                }
                let len = self.clauses[cref].lits.len();
                let mut moved = false;
                for k in 2..len {
                    let lk = self.clauses[cref].lits[k];
                    if self.value(lk) != 0 {
                        self.clauses[cref].lits.swap(1, k);
                        self.watches[(!lk).code()].push(Watch {
                            cref: w.cref,
                            blocker: first,
                        });
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = Watch {
                    cref: w.cref,
                    blocker: first,
                };
                j += 1;
                if self.value(first) == 0 {
                    while i < ws.len() {
                        ws[j] = ws[i];
                        i += 1;
                        j += 1;
                    }
                    ws.truncate(j);
                    self.watches[p.code()] = ws;
                    self.qhead = self.trail.len();
                    return Some(w.cref);
                }
                self.enqueue(first, Some(w.cref));
            }
            ws.truncate(j);
            self.watches[p.code()] = ws;
        }
        None
    }

    fn bump(&mut self, v: u32) {
        let a = &mut self.activity[v as usize];
        *a += self.var_inc;
        if *a > 1e100 {
            for x in self.activity.iter_mut() {
                *x *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.increased(v, &self.activity);
    }

    fn analyze(&mut self, mut confl: u32) -> (Vec<Lit>, u32) {
        let mut learnt = vec![Lit::new(0, false)];
        let mut path = 0usize;
        let mut p: Option<Lit> = None;
        let mut index = self.trail.len();
        loop {
            let skip = usize::from(p.is_some());
            let lits = self.clauses[confl as usize].lits.clone();
            for &q in &lits[skip..] {
                let v = q.var() as usize;
                if !self.seen[v] && self.level[v] > 0 {
                    self.bump(q.var());
                    self.seen[v] = true;
                    if self.level[v] >= self.decision_level() {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var() as usize] {
                    break;
                }
            }
            let pl = self.trail[index];
            p = Some(pl);
            self.seen[pl.var() as usize] = false;
            path -= 1;
            if path == 0 {
                break;
            }
            confl = self.reason[pl.var() as usize].expect("implied literal without reason");
        }
        learnt[0] = !p.unwrap();
        for l in &learnt[1..] {
            self.seen[l.var() as usize] = false;
        }
        let mut bt = 0;
        if learnt.len() > 1 {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var() as usize] > self.level[learnt[max_i].var() as usize] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            bt = self.level[learnt[1].var() as usize];
        }
        (learnt, bt)
    }

    fn cancel_until(&mut self, lvl: u32) {
        if self.decision_level() <= lvl {
            return;
        }
        let lim = self.trail_lim[lvl as usize];
        for k in (lim..self.trail.len()).rev() {
            let l = self.trail[k];
            let v = l.var();
            self.phase[v as usize] = !l.is_neg();
            self.assigns[v as usize] = UNDEF;
            self.reason[v as usize] = None;
            self.heap.insert(v, &self.activity);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(lvl as usize);
        self.qhead = lim;
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.assigns[v as usize] == UNDEF {
                return Some(Lit::new(v, !self.phase[v as usize]));
            }
        }
        None
    }

    /// Solves the current clause set within `conflict_budget` conflicts.
    pub fn solve(&mut self, conflict_budget: u64) -> SatOutcome {
        if !self.ok {
            return SatOutcome::Unsat;
        }
        self.cancel_until(0);
        let mut budget_used = 0u64;
        let mut restarts = 0u64;
        let mut since_restart = 0u64;
        let mut restart_at = luby(restarts) * RESTART_UNIT;
        loop {
            if let Some(confl) = self.propagate() {
                self.conflicts += 1;
                budget_used += 1;
                since_restart += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return SatOutcome::Unsat;
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let first = learnt[0];
                    let cref = self.attach(learnt, true);
                    self.enqueue(first, Some(cref));
                }
                self.var_inc /= VAR_DECAY;
                if budget_used >= conflict_budget {
                    self.cancel_until(0);
                    return SatOutcome::ResourceOut(Limit::Conflicts);
                }
            } else {
                if since_restart >= restart_at {
                    restarts += 1;
                    since_restart = 0;
                    restart_at = luby(restarts) * RESTART_UNIT;
                    self.cancel_until(0);
                    continue;
                }
                match self.pick_branch() {
                    None => {
                        let model: Vec<bool> = self.assigns.iter().map(|&a| a == 1).collect();
                        self.check_model(&model);
                        self.cancel_until(0);
                        return SatOutcome::Sat(model);
                    }
                    Some(l) => {
                        self.trail_lim.push(self.trail.len());
                        self.enqueue(l, None);
                    }
                }
            }
        }
    }

    fn check_model(&self, model: &[bool]) {
        for c in self.clauses.iter().filter(|c| !c.learnt) {
            let sat = c.lits.iter().any(|l| model[l.var() as usize] != l.is_neg());
            assert!(sat, "solver produced a model violating an input clause");
        }
    }
}

/// Solves a standalone formula.
pub fn check_sat(f: &CnfFormula, conflict_limit: u64) -> SatOutcome {
    let mut s = Solver::new(f.num_vars);
    for c in &f.clauses {
        if !s.add_clause(c) {
            return SatOutcome::Unsat;
        }
    }
    s.solve(conflict_limit)
}

/// The Luby sequence 1,1,2,1,1,2,4,...
fn luby(mut i: u64) -> u64 {
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < i + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != i {
        size = (size - 1) >> 1;
        seq -= 1;
        i %= size;
    }
    1 << seq
}

/// Max-heap of variables by activity; ties to the lower index.
#[derive(Default)]
struct VarHeap {
    heap: Vec<u32>,
    pos: Vec<Option<usize>>,
}

impl VarHeap {
    fn better(a: u32, b: u32, act: &[f64]) -> bool {
        let (x, y) = (act[a as usize], act[b as usize]);
        x > y || (x == y && a < b)
    }

    fn insert(&mut self, v: u32, act: &[f64]) {
        if self.pos.len() <= v as usize {
            self.pos.resize(v as usize + 1, None);
        }
        if self.pos[v as usize].is_some() {
            return;
        }
        self.heap.push(v);
        let i = self.heap.len() - 1;
        self.pos[v as usize] = Some(i);
        self.up(i, act);
    }

    fn increased(&mut self, v: u32, act: &[f64]) {
        if let Some(Some(i)) = self.pos.get(v as usize) {
            self.up(*i, act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<u32> {
        if self.heap.is_empty() {
            return None;
        }
        let top = self.heap.swap_remove(0);
        self.pos[top as usize] = None;
        if !self.heap.is_empty() {
            self.pos[self.heap[0] as usize] = Some(0);
            self.down(0, act);
        }
        Some(top)
    }

    fn up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            let pv = self.heap[parent];
            if !Self::better(v, pv, act) {
                break;
            }
            self.heap[i] = pv;
            self.pos[pv as usize] = Some(i);
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v as usize] = Some(i);
    }

    fn down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let child = if r < n && Self::better(self.heap[r], self.heap[l], act) { r } else { l };
            let cv = self.heap[child];
            if !Self::better(cv, v, act) {
                break;
            }
            self.heap[i] = cv;
            self.pos[cv as usize] = Some(i);
            i = child;
        }
        self.heap[i] = v;
        self.pos[v as usize] = Some(i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lit(d: i32) -> Lit {
        Lit::new(d.unsigned_abs() - 1, d < 0)
    }

    fn solver_with(clauses: &[Vec<i32>]) -> Solver {
        let mut s = Solver::new(0);
        for c in clauses {
            let ls: Vec<Lit> = c.iter().map(|&d| lit(d)).collect();
            s.add_clause(&ls);
        }
        s
    }

    fn brute_force(n: u32, clauses: &[Vec<i32>]) -> bool {
        (0u32..1 << n).any(|m| {
            clauses
                .iter()
                .all(|c| c.iter().any(|&d| ((m >> (d.unsigned_abs() - 1)) & 1 == 1) == (d > 0)))
        })
    }

    #[test]
    fn luby_prefix() {
        let got: Vec<u64> = (0..15).map(luby).collect();
        assert_eq!(got, vec![1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]);
    }

    #[test]
    fn pigeonhole_4_into_3_is_unsat() {
        // p(i,j): pigeon i in hole j, var = i*3 + j + 1
        let p = |i: i32, j: i32| i * 3 + j + 1;
        let mut cls = Vec::new();
        for i in 0..4 {
            cls.push((0..3).map(|j| p(i, j)).collect());
        }
        for j in 0..3 {
            for a in 0..4 {
                for b in a + 1..4 {
                    cls.push(vec![-p(a, j), -p(b, j)]);
                }
            }
        }
        let mut s = solver_with(&cls);
        assert_eq!(s.solve(DEFAULT_CONFLICT_LIMIT), SatOutcome::Unsat);
    }

    #[test]
    fn random_3cnf_agrees_with_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let n = rng.gen_range(3..=12u32);
            let m = rng.gen_range(1..=(n as usize * 5));
            let cls: Vec<Vec<i32>> = (0..m)
                .map(|_| {
                    (0..3)
                        .map(|_| {
                            let v = rng.gen_range(1..=n) as i32;
                            if rng.gen_bool(0.5) {
                                v
                            } else {
                                -v
                            }
                        })
                        .collect()
                })
                .collect();
            let mut s = solver_with(&cls);
            s.reserve_vars(n);
            let expect = brute_force(n, &cls);
            match s.solve(DEFAULT_CONFLICT_LIMIT) {
                SatOutcome::Sat(model) => {
                    assert!(expect);
                    for c in &cls {
                        assert!(c.iter().any(|&d| model[(d.unsigned_abs() - 1) as usize] == (d > 0)));
                    }
                }
                SatOutcome::Unsat => assert!(!expect),
                SatOutcome::ResourceOut(_) => panic!("budget exhausted on a tiny instance"),
            }
        }
    }

    #[test]
    fn incremental_blocking_enumerates_all_models() {
        // x1 xor x2, plus free x3: four models
        let mut s = solver_with(&[vec![1, 2], vec![-1, -2]]);
        s.reserve_vars(3);
        let mut count = 0;
        while let SatOutcome::Sat(m) = s.solve(DEFAULT_CONFLICT_LIMIT) {
            count += 1;
            let block: Vec<Lit> = (0..3).map(|v| Lit::new(v, m[v as usize])).collect();
            s.add_clause(&block);
        }
        assert_eq!(count, 4);
    }

    #[test]
    fn zero_budget_is_unknown_on_hard_instance() {
        let p = |i: i32, j: i32| i * 5 + j + 1;
        let mut cls = Vec::new();
        for i in 0..6 {
            cls.push((0..5).map(|j| p(i, j)).collect());
        }
        for j in 0..5 {
            for a in 0..6 {
                for b in a + 1..6 {
                    cls.push(vec![-p(a, j), -p(b, j)]);
                }
            }
        }
        let mut s = solver_with(&cls);
        assert_eq!(s.solve(1), SatOutcome::ResourceOut(Limit::Conflicts));
    }

    #[test]
    fn deterministic_models() {
        let cls = vec![vec![1, 2, 3], vec![-1, 4], vec![-2, -4], vec![3, -4]];
        let a = solver_with(&cls).solve(100);
        let b = solver_with(&cls).solve(100);
        assert_eq!(a, b);
    }
}
