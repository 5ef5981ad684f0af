//! Tseitin bit-blasting of expressions into CNF.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::ops::Not;

use super::expr::{ExprId, ExprStore, Node, VarKey};
use super::{Limit, SolverError};
use crate::circuit::{BinOp, UnOp};

/// A literal: variable index shifted left by one, low bit set when negated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: u32, negated: bool) -> Self {
        Lit(var << 1 | negated as u32)
    }

    pub fn var(self) -> u32 {
        self.0 >> 1
    }

    pub fn is_neg(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn code(self) -> usize {
        self.0 as usize
    }

    /// DIMACS integer (1-based, negative when negated).
    pub fn dimacs(self) -> i64 {
        let v = self.var() as i64 + 1;
        if self.is_neg() {
            -v
        } else {
            v
        }
    }
}

impl Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

/// CNF with a map from blasted expressions to their bit literals (LSB first).
#[derive(Debug, Clone, Default)]
pub struct CnfFormula {
    pub num_vars: u32,
    pub clauses: Vec<Vec<Lit>>,
    pub bit_map: HashMap<ExprId, Vec<Lit>>,
}

impl CnfFormula {
    pub fn to_dimacs(&self) -> String {
        let mut s = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            for l in c {
                let _ = write!(s, "{} ", l.dimacs());
            }
            s.push_str("0\n");
        }
        s
    }
}

pub const DEFAULT_CLAUSE_LIMIT: usize = 10_000_000;

/// Incremental bit-blaster. Shared subterms are encoded once.
pub struct Blaster<'s> {
    store: &'s ExprStore,
    num_vars: u32,
    clauses: Vec<Vec<Lit>>,
    cache: HashMap<ExprId, Vec<Lit>>,
    vars: HashMap<VarKey, Vec<Lit>>,
    tru: Lit,
    clause_limit: usize,
}

impl<'s> Blaster<'s> {
    pub fn new(store: &'s ExprStore, clause_limit: usize) -> Self {
        let mut b = Blaster {
            store,
            num_vars: 0,
            clauses: Vec::new(),
            cache: HashMap::new(),
            vars: HashMap::new(),
            tru: Lit(0),
            clause_limit,
        };
        b.tru = b.fresh();
        b.clauses.push(vec![b.tru]);
        b
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    pub fn true_lit(&self) -> Lit {
        self.tru
    }

    /// Bits of every symbolic variable encoded so far.
    pub fn var_bits(&self) -> &HashMap<VarKey, Vec<Lit>> {
        &self.vars
    }

    pub fn into_formula(self) -> CnfFormula {
        CnfFormula {
            num_vars: self.num_vars,
            clauses: self.clauses,
            bit_map: self.cache,
        }
    }

    fn fresh(&mut self) -> Lit {
        let l = Lit::new(self.num_vars, false);
        self.num_vars += 1;
        l
    }

    fn clause(&mut self, c: Vec<Lit>) -> Result<(), SolverError> {
        if self.clauses.len() >= self.clause_limit {
            return Err(SolverError::ResourceOut(Limit::Clauses));
        }
        self.clauses.push(c);
        Ok(())
    }

    /// Adds a unit clause forcing `l`.
    pub fn assert_lit(&mut self, l: Lit) -> Result<(), SolverError> {
        self.clause(vec![l])
    }

    /// Encodes a 1-bit expression and returns its literal.
    pub fn lit(&mut self, e: ExprId) -> Result<Lit, SolverError> {
        let bits = self.bits(e)?;
        assert_eq!(bits.len(), 1, "expected a 1-bit expression");
        Ok(bits[0])
    }

    fn konst(&self, b: bool) -> Lit {
        if b {
            self.tru
        } else {
            !self.tru
        }
    }

    fn const_val(&self, l: Lit) -> Option<bool> {
        if l == self.tru {
            Some(true)
        } else if l == !self.tru {
            Some(false)
        } else {
            None
        }
    }

    fn and2(&mut self, a: Lit, b: Lit) -> Result<Lit, SolverError> {
        match (self.const_val(a), self.const_val(b)) {
            (Some(false), _) | (_, Some(false)) => return Ok(self.konst(false)),
            (Some(true), _) => return Ok(b),
            (_, Some(true)) => return Ok(a),
            _ => {}
        }
        if a == b {
            return Ok(a);
        }
        if a == !b {
            return Ok(self.konst(false));
        }
        let o = self.fresh();
        self.clause(vec![!o, a])?;
        self.clause(vec![!o, b])?;
        self.clause(vec![o, !a, !b])?;
        Ok(o)
    }

    fn or2(&mut self, a: Lit, b: Lit) -> Result<Lit, SolverError> {
        Ok(!self.and2(!a, !b)?)
    }

    fn xor2(&mut self, a: Lit, b: Lit) -> Result<Lit, SolverError> {
        match (self.const_val(a), self.const_val(b)) {
            (Some(x), _) => return Ok(if x { !b } else { b }),
            (_, Some(y)) => return Ok(if y { !a } else { a }),
            _ => {}
        }
        if a == b {
            return Ok(self.konst(false));
        }
        if a == !b {
            return Ok(self.konst(true));
        }
        let o = self.fresh();
        self.clause(vec![!o, a, b])?;
        self.clause(vec![!o, !a, !b])?;
        self.clause(vec![o, !a, b])?;
        self.clause(vec![o, a, !b])?;
        Ok(o)
    }

    fn mux1(&mut self, c: Lit, t: Lit, f: Lit) -> Result<Lit, SolverError> {
        match self.const_val(c) {
            Some(true) => return Ok(t),
            Some(false) => return Ok(f),
            None => {}
        }
        if t == f {
            return Ok(t);
        }
        match (self.const_val(t), self.const_val(f)) {
            (Some(true), Some(false)) => return Ok(c),
            (Some(false), Some(true)) => return Ok(!c),
            (Some(true), _) => return self.or2(c, f),
            (Some(false), _) => return self.and2(!c, f),
            (_, Some(true)) => return self.or2(!c, t),
            (_, Some(false)) => return self.and2(c, t),
            _ => {}
        }
        let o = self.fresh();
        self.clause(vec![!c, !t, o])?;
        self.clause(vec![!c, t, !o])?;
        self.clause(vec![c, !f, o])?;
        self.clause(vec![c, f, !o])?;
        // redundant but helps propagation when t == f
        self.clause(vec![!t, !f, o])?;
        self.clause(vec![t, f, !o])?;
        Ok(o)
    }

    fn and_all(&mut self, lits: &[Lit]) -> Result<Lit, SolverError> {
        let mut acc = self.konst(true);
        for &l in lits {
            acc = self.and2(acc, l)?;
        }
        Ok(acc)
    }

    fn or_all(&mut self, lits: &[Lit]) -> Result<Lit, SolverError> {
        let mut acc = self.konst(false);
        for &l in lits {
            acc = self.or2(acc, l)?;
        }
        Ok(acc)
    }

    /// Ripple-carry addition; returns (sum, carry-out).
    fn add(&mut self, a: &[Lit], b: &[Lit], cin: Lit) -> Result<(Vec<Lit>, Lit), SolverError> {
        let mut carry = cin;
        let mut sum = Vec::with_capacity(a.len());
        for (&x, &y) in a.iter().zip(b) {
            let p = self.xor2(x, y)?;
            sum.push(self.xor2(p, carry)?);
            let g = self.and2(x, y)?;
            let pc = self.and2(p, carry)?;
            carry = self.or2(g, pc)?;
        }
        Ok((sum, carry))
    }

    fn eq_bits(&mut self, a: &[Lit], b: &[Lit]) -> Result<Lit, SolverError> {
        let mut same = Vec::with_capacity(a.len());
        for (&x, &y) in a.iter().zip(b) {
            same.push(!self.xor2(x, y)?);
        }
        self.and_all(&same)
    }

    fn eq_const_bits(&mut self, a: &[Lit], k: u64) -> Result<Lit, SolverError> {
        let lits: Vec<Lit> = a
            .iter()
            .enumerate()
            .map(|(i, &l)| if i < 64 && (k >> i) & 1 == 1 { l } else { !l })
            .collect();
        if a.len() < 64 && k >> a.len() != 0 {
            return Ok(self.konst(false));
        }
        self.and_all(&lits)
    }

    fn mux_bits(&mut self, c: Lit, t: &[Lit], f: &[Lit]) -> Result<Vec<Lit>, SolverError> {
        t.iter().zip(f).map(|(&x, &y)| self.mux1(c, x, y)).collect()
    }

    fn const_bits(&self, width: u32, value: u64) -> Vec<Lit> {
        (0..width).map(|i| self.konst((value >> i) & 1 == 1)).collect()
    }

    /// Encodes `e`, returning its bits LSB first.
    pub fn bits(&mut self, e: ExprId) -> Result<Vec<Lit>, SolverError> {
        if let Some(b) = self.cache.get(&e) {
            return Ok(b.clone());
        }
        let node = self.store.node(e);
        let out = match node {
            Node::Const { width, value } => self.const_bits(width, value),
            Node::Var { key, width } => {
                if let Some(b) = self.vars.get(&key) {
                    b.clone()
                } else {
                    let b: Vec<Lit> = (0..width).map(|_| self.fresh()).collect();
                    self.vars.insert(key, b.clone());
                    b
                }
            }
            Node::Unary(op, a) => {
                let x = self.bits(a)?;
                match op {
                    UnOp::Not => x.iter().map(|&l| !l).collect(),
                    UnOp::Neg => {
                        let inv: Vec<Lit> = x.iter().map(|&l| !l).collect();
                        let zero = self.const_bits(x.len() as u32, 0);
                        let one = self.konst(true);
                        self.add(&inv, &zero, one)?.0
                    }
                    UnOp::ReduceOr => vec![self.or_all(&x)?],
                    UnOp::ReduceAnd => vec![self.and_all(&x)?],
                }
            }
            Node::Binary(op, a, b) => {
                let x = self.bits(a)?;
                let y = self.bits(b)?;
                match op {
                    BinOp::And => x.iter().zip(&y).map(|(&p, &q)| self.and2(p, q)).collect::<Result<_, _>>()?,
                    BinOp::Or => x.iter().zip(&y).map(|(&p, &q)| self.or2(p, q)).collect::<Result<_, _>>()?,
                    BinOp::Xor => x.iter().zip(&y).map(|(&p, &q)| self.xor2(p, q)).collect::<Result<_, _>>()?,
                    BinOp::Add => {
                        let f = self.konst(false);
                        self.add(&x, &y, f)?.0
                    }
                    BinOp::Sub => {
                        let ny: Vec<Lit> = y.iter().map(|&l| !l).collect();
                        let t = self.konst(true);
                        self.add(&x, &ny, t)?.0
                    }
                    BinOp::Eq => vec![self.eq_bits(&x, &y)?],
                    BinOp::Ne => vec![!self.eq_bits(&x, &y)?],
                    BinOp::Ult => {
                        // a < b  iff  a + ~b + 1 produces no carry
                        let ny: Vec<Lit> = y.iter().map(|&l| !l).collect();
                        let t = self.konst(true);
                        vec![!self.add(&x, &ny, t)?.1]
                    }
                    BinOp::Shl => self.shl(&x, &y)?,
                }
            }
            Node::Mux(c, t, f) => {
                let c = self.lit(c)?;
                let t = self.bits(t)?;
                let f = self.bits(f)?;
                self.mux_bits(c, &t, &f)?
            }
            Node::Case {
                scrutinee,
                arms,
                default,
            } => {
                let s = self.bits(scrutinee)?;
                let mut acc = self.bits(default)?;
                for (k, arm) in arms.iter().rev() {
                    let hit = self.eq_const_bits(&s, *k)?;
                    let a = self.bits(*arm)?;
                    acc = self.mux_bits(hit, &a, &acc)?;
                }
                acc
            }
            Node::Slice { expr, hi, lo } => {
                let x = self.bits(expr)?;
                x[lo as usize..=hi as usize].to_vec()
            }
            Node::Concat(parts) => {
                let mut out = Vec::new();
                for p in parts.iter().rev() {
                    out.extend(self.bits(*p)?);
                }
                out
            }
            Node::ZExt { expr, width } => {
                let mut x = self.bits(expr)?;
                let f = self.konst(false);
                x.resize(width as usize, f);
                x
            }
        };
        self.cache.insert(e, out.clone());
        Ok(out)
    }

    fn shl(&mut self, x: &[Lit], s: &[Lit]) -> Result<Vec<Lit>, SolverError> {
        let w = x.len();
        let f = self.konst(false);
        let mut cur = x.to_vec();
        let mut overflow = Vec::new();
        for (j, &sj) in s.iter().enumerate() {
            let amount = 1usize.checked_shl(j as u32).unwrap_or(usize::MAX);
            if amount >= w {
                overflow.push(sj);
                continue;
            }
            let shifted: Vec<Lit> = (0..w).map(|i| if i >= amount { cur[i - amount] } else { f }).collect();
            cur = self.mux_bits(sj, &shifted, &cur)?;
        }
        if !overflow.is_empty() {
            let big = self.or_all(&overflow)?;
            let zeros = vec![f; w];
            cur = self.mux_bits(big, &zeros, &cur)?;
        }
        Ok(cur)
    }
}

/// Encodes `pc ∧ e` (both 1-bit) into a standalone CNF formula.
pub fn bit_blast(store: &ExprStore, e: ExprId, pc: &[ExprId], clause_limit: usize) -> Result<CnfFormula, SolverError> {
    let mut b = Blaster::new(store, clause_limit);
    for &c in pc.iter().chain(std::iter::once(&e)) {
        let l = b.lit(c)?;
        b.assert_lit(l)?;
    }
    Ok(b.into_formula())
}
