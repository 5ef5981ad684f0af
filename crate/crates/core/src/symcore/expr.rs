//! Hash-consed bit-vector expressions.

use std::collections::{HashMap, HashSet};
use std::fmt::{self, Write as _};
use std::sync::{Arc, RwLock};

use crate::circuit::{mask, BinOp, UnOp};

/// Handle to a node in an [`ExprStore`]. Structurally identical nodes share one id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExprId(u32);

impl ExprId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Identity of a fresh symbolic variable.
///
/// `step` is the clock cycle at which an input was sampled; `None` marks the
/// initial value of a register in a fully symbolic state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarKey {
    pub name: Arc<str>,
    pub step: Option<u32>,
}

impl fmt::Display for VarKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.step {
            Some(s) => write!(f, "{}@{}", self.name, s),
            None => write!(f, "{}@init", self.name),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Const { width: u32, value: u64 },
    Var { key: VarKey, width: u32 },
    Unary(UnOp, ExprId),
    Binary(BinOp, ExprId, ExprId),
    Mux(ExprId, ExprId, ExprId),
    Case {
        scrutinee: ExprId,
        arms: Box<[(u64, ExprId)]>,
        default: ExprId,
    },
    Slice { expr: ExprId, hi: u32, lo: u32 },
    Concat(Box<[ExprId]>),
    ZExt { expr: ExprId, width: u32 },
}

#[derive(Default)]
struct Inner {
    nodes: Vec<Node>,
    widths: Vec<u32>,
    table: HashMap<Node, ExprId>,
    simplified: HashMap<ExprId, ExprId>,
}

/// Interning table for [`Node`]s. Safe to share between threads.
#[derive(Default)]
pub struct ExprStore {
    inner: RwLock<Inner>,
}

impl fmt::Debug for ExprStore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExprStore").field("nodes", &self.len()).finish()
    }
}

impl ExprStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.inner.read().unwrap().nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn node(&self, id: ExprId) -> Node {
        self.inner.read().unwrap().nodes[id.index()].clone()
    }

    pub fn width(&self, id: ExprId) -> u32 {
        self.inner.read().unwrap().widths[id.index()]
    }

    pub fn as_const(&self, id: ExprId) -> Option<u64> {
        match &self.inner.read().unwrap().nodes[id.index()] {
            Node::Const { value, .. } => Some(*value),
            _ => None,
        }
    }

    fn width_of_node(&self, node: &Node) -> u32 {
        let w = |id: ExprId| self.width(id);
        match node {
            Node::Const { width, .. } | Node::Var { width, .. } | Node::ZExt { width, .. } => *width,
            Node::Unary(op, a) => match op {
                UnOp::Not | UnOp::Neg => w(*a),
                UnOp::ReduceOr | UnOp::ReduceAnd => 1,
            },
            Node::Binary(op, a, b) => {
                if *op != BinOp::Shl {
                    assert_eq!(w(*a), w(*b), "operand widths of {op:?} differ");
                }
                if op.is_comparison() {
                    1
                } else {
                    w(*a)
                }
            }
            Node::Mux(c, t, e) => {
                assert_eq!(w(*c), 1, "mux condition must be 1 bit");
                assert_eq!(w(*t), w(*e), "mux arm widths differ");
                w(*t)
            }
            Node::Case { default, .. } => w(*default),
            Node::Slice { expr, hi, lo } => {
                assert!(lo <= hi && *hi < w(*expr), "slice out of range");
                hi - lo + 1
            }
            Node::Concat(parts) => parts.iter().map(|p| w(*p)).sum(),
        }
    }

    /// Interns `node` without simplification.
    pub fn intern(&self, node: Node) -> ExprId {
        if let Some(&id) = self.inner.read().unwrap().table.get(&node) {
            return id;
        }
        let width = self.width_of_node(&node);
        let mut inner = self.inner.write().unwrap();
        if let Some(&id) = inner.table.get(&node) {
            return id;
        }
        let id = ExprId(inner.nodes.len() as u32);
        inner.nodes.push(node.clone());
        inner.widths.push(width);
        inner.table.insert(node, id);
        id
    }

    pub fn konst(&self, width: u32, value: u64) -> ExprId {
        self.intern(Node::Const {
            width,
            value: value & mask(width),
        })
    }

    pub fn tru(&self) -> ExprId {
        self.konst(1, 1)
    }

    pub fn fals(&self) -> ExprId {
        self.konst(1, 0)
    }

    pub fn var(&self, name: &str, width: u32, step: Option<u32>) -> ExprId {
        self.intern(Node::Var {
            key: VarKey {
                name: Arc::from(name),
                step,
            },
            width,
        })
    }

    pub fn unary(&self, op: UnOp, a: ExprId) -> ExprId {
        self.intern(Node::Unary(op, a))
    }

    pub fn binary(&self, op: BinOp, a: ExprId, b: ExprId) -> ExprId {
        self.intern(Node::Binary(op, a, b))
    }

    pub fn not(&self, a: ExprId) -> ExprId {
        self.unary(UnOp::Not, a)
    }

    pub fn and(&self, a: ExprId, b: ExprId) -> ExprId {
        self.binary(BinOp::And, a, b)
    }

    pub fn or(&self, a: ExprId, b: ExprId) -> ExprId {
        self.binary(BinOp::Or, a, b)
    }

    pub fn eq(&self, a: ExprId, b: ExprId) -> ExprId {
        self.binary(BinOp::Eq, a, b)
    }

    pub fn ult(&self, a: ExprId, b: ExprId) -> ExprId {
        self.binary(BinOp::Ult, a, b)
    }

    pub fn mux(&self, c: ExprId, t: ExprId, e: ExprId) -> ExprId {
        self.intern(Node::Mux(c, t, e))
    }

    pub fn case(&self, scrutinee: ExprId, arms: Vec<(u64, ExprId)>, default: ExprId) -> ExprId {
        self.intern(Node::Case {
            scrutinee,
            arms: arms.into_boxed_slice(),
            default,
        })
    }

    pub fn slice(&self, expr: ExprId, hi: u32, lo: u32) -> ExprId {
        self.intern(Node::Slice { expr, hi, lo })
    }

    pub fn concat(&self, parts: Vec<ExprId>) -> ExprId {
        assert!(!parts.is_empty(), "empty concatenation");
        if parts.len() == 1 {
            return parts[0];
        }
        self.intern(Node::Concat(parts.into_boxed_slice()))
    }

    pub fn zext(&self, expr: ExprId, width: u32) -> ExprId {
        self.intern(Node::ZExt { expr, width })
    }

    /// `e == value` with the constant sized to `e`.
    pub fn eq_const(&self, e: ExprId, value: u64) -> ExprId {
        let k = self.konst(self.width(e), value);
        self.eq(e, k)
    }

    /// Free variables of `e` in first-occurrence order.
    pub fn vars(&self, e: ExprId) -> Vec<(ExprId, VarKey, u32)> {
        let mut out = Vec::new();
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![e];
        while let Some(id) = stack.pop() {
            if !seen.insert(id) {
                continue;
            }
            let node = self.node(id);
            if let Node::Var { key, width } = &node {
                out.push((id, key.clone(), *width));
            }
            let mut kids = children(&node);
            kids.reverse();
            stack.extend(kids);
        }
        out
    }

    /// Evaluates `e` with variable values supplied by `lookup`.
    pub fn eval(&self, e: ExprId, lookup: &dyn Fn(&VarKey) -> u64) -> u64 {
        let mut memo = HashMap::new();
        self.eval_memo(e, lookup, &mut memo)
    }

    fn eval_memo(&self, e: ExprId, lookup: &dyn Fn(&VarKey) -> u64, memo: &mut HashMap<ExprId, u64>) -> u64 {
        if let Some(&v) = memo.get(&e) {
            return v;
        }
        let node = self.node(e);
        let v = match &node {
            Node::Const { value, .. } => *value,
            Node::Var { key, width } => lookup(key) & mask(*width),
            _ => {
                let vals: Vec<u64> = children(&node)
                    .into_iter()
                    .map(|c| self.eval_memo(c, lookup, memo))
                    .collect();
                self.apply(&node, &vals)
            }
        };
        memo.insert(e, v);
        v
    }

    /// Computes a node's value from the values of its children (in [`children`] order).
    fn apply(&self, node: &Node, vals: &[u64]) -> u64 {
        match node {
            Node::Const { value, .. } => *value,
            Node::Var { .. } => unreachable!("variables have no children"),
            Node::Unary(op, a) => {
                let w = self.width(*a);
                let v = vals[0];
                match op {
                    UnOp::Not => !v & mask(w),
                    UnOp::Neg => v.wrapping_neg() & mask(w),
                    UnOp::ReduceOr => (v != 0) as u64,
                    UnOp::ReduceAnd => (v == mask(w)) as u64,
                }
            }
            Node::Binary(op, a, _) => {
                let w = self.width(*a);
                let (x, y) = (vals[0], vals[1]);
                match op {
                    BinOp::And => x & y,
                    BinOp::Or => x | y,
                    BinOp::Xor => x ^ y,
                    BinOp::Add => x.wrapping_add(y) & mask(w),
                    BinOp::Sub => x.wrapping_sub(y) & mask(w),
                    BinOp::Eq => (x == y) as u64,
                    BinOp::Ne => (x != y) as u64,
                    BinOp::Ult => (x < y) as u64,
                    BinOp::Shl => {
                        if y >= w as u64 {
                            0
                        } else {
                            (x << y) & mask(w)
                        }
                    }
                }
            }
            Node::Mux(..) => {
                if vals[0] != 0 {
                    vals[1]
                } else {
                    vals[2]
                }
            }
            Node::Case { arms, .. } => {
                let s = vals[0];
                match arms.iter().position(|(k, _)| *k == s) {
                    Some(i) => vals[1 + i],
                    None => vals[vals.len() - 1],
                }
            }
            Node::Slice { hi, lo, .. } => (vals[0] >> lo) & mask(hi - lo + 1),
            Node::Concat(parts) => {
                let mut acc = 0u64;
                for (p, v) in parts.iter().zip(vals) {
                    let w = self.width(*p);
                    acc = if w >= 64 { 0 } else { acc << w } | v;
                }
                acc
            }
            Node::ZExt { .. } => vals[0],
        }
    }

    /// Returns an equivalent, simplified expression. Idempotent.
    pub fn simplify(&self, e: ExprId) -> ExprId {
        if let Some(&s) = self.inner.read().unwrap().simplified.get(&e) {
            return s;
        }
        let node = self.node(e);
        let rebuilt = match node {
            Node::Const { .. } | Node::Var { .. } => e,
            Node::Unary(op, a) => {
                let a = self.simplify(a);
                self.rewrite(Node::Unary(op, a))
            }
            Node::Binary(op, a, b) => {
                let (a, b) = (self.simplify(a), self.simplify(b));
                self.rewrite(Node::Binary(op, a, b))
            }
            Node::Mux(c, t, f) => {
                let c = self.simplify(c);
                // short-circuit on a constant condition
                match self.as_const(c) {
                    Some(1) => self.simplify(t),
                    Some(_) => self.simplify(f),
                    None => {
                        let (t, f) = (self.simplify(t), self.simplify(f));
                        self.rewrite(Node::Mux(c, t, f))
                    }
                }
            }
            Node::Case {
                scrutinee,
                arms,
                default,
            } => {
                let s = self.simplify(scrutinee);
                if let Some(k) = self.as_const(s) {
                    let pick = arms.iter().find(|(key, _)| *key == k).map(|(_, a)| *a).unwrap_or(default);
                    self.simplify(pick)
                } else {
                    let arms: Box<[(u64, ExprId)]> = arms.iter().map(|(k, a)| (*k, self.simplify(*a))).collect();
                    let default = self.simplify(default);
                    self.rewrite(Node::Case {
                        scrutinee: s,
                        arms,
                        default,
                    })
                }
            }
            Node::Slice { expr, hi, lo } => {
                let x = self.simplify(expr);
                self.rewrite(Node::Slice { expr: x, hi, lo })
            }
            Node::Concat(parts) => {
                let parts: Box<[ExprId]> = parts.iter().map(|p| self.simplify(*p)).collect();
                self.rewrite(Node::Concat(parts))
            }
            Node::ZExt { expr, width } => {
                let x = self.simplify(expr);
                self.rewrite(Node::ZExt { expr: x, width })
            }
        };
        let mut inner = self.inner.write().unwrap();
        inner.simplified.insert(e, rebuilt);
        inner.simplified.insert(rebuilt, rebuilt);
        rebuilt
    }

    fn ones(&self, w: u32) -> u64 {
        mask(w)
    }

    fn is_not_of(&self, a: ExprId, b: ExprId) -> bool {
        matches!(self.node(a), Node::Unary(UnOp::Not, x) if x == b)
            || matches!(self.node(b), Node::Unary(UnOp::Not, x) if x == a)
    }

    /// Applies local rules to a node whose children are already simplified.
    fn rewrite(&self, node: Node) -> ExprId {
        let kids = children(&node);
        if !kids.is_empty() && !matches!(node, Node::Var { .. }) {
            let consts: Option<Vec<u64>> = kids.iter().map(|k| self.as_const(*k)).collect();
            if let Some(vals) = consts {
                let w = self.width_of_node(&node);
                let v = self.apply(&node, &vals);
                return self.konst(w, v);
            }
        }
        match node {
            Node::Unary(op, a) => {
                let w = self.width(a);
                match (op, self.node(a)) {
                    (UnOp::Not, Node::Unary(UnOp::Not, x)) => x,
                    (UnOp::Neg, Node::Unary(UnOp::Neg, x)) => x,
                    (UnOp::ReduceOr | UnOp::ReduceAnd, _) if w == 1 => a,
                    _ => self.unary(op, a),
                }
            }
            Node::Binary(op, a, b) => self.rewrite_binary(op, a, b),
            Node::Mux(c, t, f) => {
                if t == f {
                    return t;
                }
                if self.width(t) == 1 {
                    match (self.as_const(t), self.as_const(f)) {
                        (Some(1), Some(0)) => return c,
                        (Some(0), Some(1)) => return self.rewrite(Node::Unary(UnOp::Not, c)),
                        _ => {}
                    }
                }
                if let Node::Unary(UnOp::Not, inner) = self.node(c) {
                    return self.rewrite(Node::Mux(inner, f, t));
                }
                self.mux(c, t, f)
            }
            Node::Case {
                scrutinee,
                arms,
                default,
            } => {
                // first match wins: drop shadowed keys before default-equal arms
                let sw = self.width(scrutinee);
                let mut seen = HashSet::new();
                let arms: Vec<(u64, ExprId)> = arms
                    .iter()
                    .filter(|(k, _)| *k <= mask(sw) && seen.insert(*k))
                    .filter(|(_, a)| *a != default)
                    .cloned()
                    .collect();
                if arms.is_empty() {
                    return default;
                }
                self.case(scrutinee, arms, default)
            }
            Node::Slice { expr, hi, lo } => {
                let w = self.width(expr);
                if lo == 0 && hi + 1 == w {
                    return expr;
                }
                match self.node(expr) {
                    Node::Slice { expr: inner, lo: ilo, .. } => {
                        self.rewrite(Node::Slice {
                            expr: inner,
                            hi: hi + ilo,
                            lo: lo + ilo,
                        })
                    }
                    Node::ZExt { expr: inner, .. } if hi < self.width(inner) => {
                        self.rewrite(Node::Slice { expr: inner, hi, lo })
                    }
                    Node::Concat(parts) => {
                        // locate a single part containing [hi:lo]
                        let mut base = 0u32;
                        for p in parts.iter().rev() {
                            let pw = self.width(*p);
                            if lo >= base && hi < base + pw {
                                return self.rewrite(Node::Slice {
                                    expr: *p,
                                    hi: hi - base,
                                    lo: lo - base,
                                });
                            }
                            base += pw;
                        }
                        self.slice(expr, hi, lo)
                    }
                    _ => self.slice(expr, hi, lo),
                }
            }
            Node::Concat(parts) => {
                if parts.len() == 1 {
                    return parts[0];
                }
                self.intern(Node::Concat(parts))
            }
            Node::ZExt { expr, width } => {
                if self.width(expr) == width {
                    expr
                } else {
                    self.zext(expr, width)
                }
            }
            Node::Const { .. } | Node::Var { .. } => self.intern(node),
        }
    }

    fn rewrite_binary(&self, op: BinOp, a: ExprId, b: ExprId) -> ExprId {
        let w = self.width(a);
        let ca = self.as_const(a);
        let cb = self.as_const(b);
        let ones = self.ones(w);
        match op {
            BinOp::And => {
                if ca == Some(0) || cb == Some(0) || self.is_not_of(a, b) {
                    return self.konst(w, 0);
                }
                if ca == Some(ones) {
                    return b;
                }
                if cb == Some(ones) || a == b {
                    return a;
                }
            }
            BinOp::Or => {
                if ca == Some(ones) || cb == Some(ones) || self.is_not_of(a, b) {
                    return self.konst(w, ones);
                }
                if ca == Some(0) {
                    return b;
                }
                if cb == Some(0) || a == b {
                    return a;
                }
            }
            BinOp::Xor => {
                if a == b {
                    return self.konst(w, 0);
                }
                if ca == Some(0) {
                    return b;
                }
                if cb == Some(0) {
                    return a;
                }
                if ca == Some(ones) {
                    return self.rewrite(Node::Unary(UnOp::Not, b));
                }
                if cb == Some(ones) {
                    return self.rewrite(Node::Unary(UnOp::Not, a));
                }
            }
            BinOp::Add => {
                if ca == Some(0) {
                    return b;
                }
                if cb == Some(0) {
                    return a;
                }
            }
            BinOp::Sub => {
                if a == b {
                    return self.konst(w, 0);
                }
                if cb == Some(0) {
                    return a;
                }
            }
            BinOp::Eq | BinOp::Ne => {
                let is_eq = op == BinOp::Eq;
                if a == b {
                    return self.konst(1, is_eq as u64);
                }
                // normalise the constant to the right
                let (x, k) = match (ca, cb) {
                    (Some(k), None) => (b, Some(k)),
                    (None, Some(k)) => (a, Some(k)),
                    _ => (a, None),
                };
                if let Some(k) = k {
                    if w == 1 {
                        let pos = (k == 1) == is_eq;
                        return if pos { x } else { self.rewrite(Node::Unary(UnOp::Not, x)) };
                    }
                    if let Node::Mux(c, t, f) = self.node(x) {
                        if let (Some(kt), Some(kf)) = (self.as_const(t), self.as_const(f)) {
                            let ht = (kt == k) == is_eq;
                            let hf = (kf == k) == is_eq;
                            return match (ht, hf) {
                                (true, true) => self.tru(),
                                (false, false) => self.fals(),
                                (true, false) => c,
                                (false, true) => self.rewrite(Node::Unary(UnOp::Not, c)),
                            };
                        }
                    }
                    let kc = self.konst(w, k);
                    return self.binary(op, x, kc);
                }
            }
            BinOp::Ult => {
                if a == b || cb == Some(0) {
                    return self.fals();
                }
            }
            BinOp::Shl => {
                if cb == Some(0) {
                    return a;
                }
                if let Some(s) = cb {
                    if s >= w as u64 {
                        return self.konst(w, 0);
                    }
                }
                if ca == Some(0) {
                    return a;
                }
            }
        }
        self.binary(op, a, b)
    }

    /// Renders `e` in the RTL-FSM expression syntax, with variables as `name@step`.
    pub fn display(&self, e: ExprId) -> String {
        let mut s = String::new();
        self.write(e, &mut s, false);
        s
    }

    fn write(&self, e: ExprId, s: &mut String, nested: bool) {
        match self.node(e) {
            Node::Const { width, value } => {
                let _ = write!(s, "{width}'d{value}");
            }
            Node::Var { key, .. } => {
                let _ = write!(s, "{key}");
            }
            Node::Unary(op, a) => match op {
                UnOp::Not => {
                    s.push('~');
                    self.write(a, s, true);
                }
                UnOp::Neg => {
                    s.push('-');
                    self.write(a, s, true);
                }
                UnOp::ReduceOr | UnOp::ReduceAnd => {
                    s.push_str(if op == UnOp::ReduceOr { "redor(" } else { "redand(" });
                    self.write(a, s, false);
                    s.push(')');
                }
            },
            Node::Binary(op, a, b) => {
                if nested {
                    s.push('(');
                }
                self.write(a, s, true);
                let _ = write!(s, " {} ", op.symbol());
                self.write(b, s, true);
                if nested {
                    s.push(')');
                }
            }
            Node::Mux(c, t, f) => {
                if nested {
                    s.push('(');
                }
                self.write(c, s, true);
                s.push_str(" ? ");
                self.write(t, s, true);
                s.push_str(" : ");
                self.write(f, s, true);
                if nested {
                    s.push(')');
                }
            }
            Node::Case {
                scrutinee,
                arms,
                default,
            } => {
                let w = self.width(scrutinee);
                s.push_str("case(");
                self.write(scrutinee, s, false);
                s.push_str("){ ");
                for (k, a) in arms.iter() {
                    let _ = write!(s, "{w}'d{k}: ");
                    self.write(*a, s, false);
                    s.push_str("; ");
                }
                s.push_str("default: ");
                self.write(default, s, false);
                s.push_str(" }");
            }
            Node::Slice { expr, hi, lo } => {
                let atomic = matches!(self.node(expr), Node::Var { .. } | Node::Concat(_));
                if !atomic {
                    s.push('(');
                }
                self.write(expr, s, false);
                if !atomic {
                    s.push(')');
                }
                let _ = write!(s, "[{hi}:{lo}]");
            }
            Node::Concat(parts) => {
                s.push('{');
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        s.push_str(", ");
                    }
                    self.write(*p, s, false);
                }
                s.push('}');
            }
            Node::ZExt { expr, width } => {
                s.push_str("zext(");
                self.write(expr, s, false);
                let _ = write!(s, ", {width})");
            }
        }
    }
}

/// Children in evaluation order. For `Case`: scrutinee, arms, default.
pub fn children(node: &Node) -> Vec<ExprId> {
    match node {
        Node::Const { .. } | Node::Var { .. } => Vec::new(),
        Node::Unary(_, a) | Node::Slice { expr: a, .. } | Node::ZExt { expr: a, .. } => vec![*a],
        Node::Binary(_, a, b) => vec![*a, *b],
        Node::Mux(c, t, f) => vec![*c, *t, *f],
        Node::Case {
            scrutinee,
            arms,
            default,
        } => {
            let mut v = Vec::with_capacity(arms.len() + 2);
            v.push(*scrutinee);
            v.extend(arms.iter().map(|(_, a)| *a));
            v.push(*default);
            v
        }
        Node::Concat(parts) => parts.to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shadowed_case_arm_survives_default_pruning() {
        let st = ExprStore::new();
        let s = st.var("s", 2, Some(0));
        let (k7, k15) = (st.konst(5, 7), st.konst(5, 15));
        // key 1 maps to the default first, so the later 15 arm is dead
        let e = st.case(s, vec![(1, k7), (1, k15), (5, k15)], k7);
        assert_eq!(st.simplify(e), k7);
        for v in 0..4 {
            assert_eq!(st.eval(e, &|_| v), 7);
        }
    }

    #[test]
    fn hash_consing_shares_ids() {
        let st = ExprStore::new();
        let a = st.var("a", 4, Some(0));
        let b = st.var("a", 4, Some(0));
        assert_eq!(a, b);
        let x = st.and(a, st.konst(4, 3));
        let y = st.and(b, st.konst(4, 3));
        assert_eq!(x, y);
        assert_ne!(st.var("a", 4, Some(1)), a);
    }

    #[test]
    fn mux_true_condition() {
        let st = ExprStore::new();
        let a = st.var("a", 3, Some(0));
        let b = st.var("b", 3, Some(0));
        let m = st.mux(st.tru(), a, b);
        assert_eq!(st.simplify(m), a);
    }

    #[test]
    fn case_on_constant_takes_default() {
        let st = ExprStore::new();
        let arms = (0..6).map(|k| (k, st.konst(3, (k + 1) % 6))).collect();
        let c = st.case(st.konst(3, 6), arms, st.konst(3, 0));
        assert_eq!(st.simplify(c), st.konst(3, 0));
    }

    #[test]
    fn identity_and_annihilator_rules() {
        let st = ExprStore::new();
        let x = st.var("x", 4, Some(0));
        assert_eq!(st.simplify(st.and(x, st.konst(4, 0))), st.konst(4, 0));
        assert_eq!(st.simplify(st.or(x, st.konst(4, 15))), st.konst(4, 15));
        assert_eq!(st.simplify(st.binary(BinOp::Xor, x, x)), st.konst(4, 0));
        assert_eq!(st.simplify(st.and(x, st.not(x))), st.konst(4, 0));
        let e = st.eq(x, x);
        assert_eq!(st.simplify(e), st.tru());
    }

    #[test]
    fn eq_of_const_mux_becomes_condition() {
        let st = ExprStore::new();
        let c = st.var("c", 1, Some(0));
        let m = st.mux(c, st.konst(3, 1), st.konst(3, 0));
        assert_eq!(st.simplify(st.eq_const(m, 1)), c);
        assert_eq!(st.simplify(st.eq_const(m, 0)), st.not(c));
        assert_eq!(st.simplify(st.eq_const(m, 5)), st.fals());
    }

    #[test]
    fn slice_through_concat() {
        let st = ExprStore::new();
        let a = st.var("a", 3, None);
        let b = st.var("b", 2, None);
        let c = st.concat(vec![a, b]);
        assert_eq!(st.simplify(st.slice(c, 4, 2)), a);
        assert_eq!(st.simplify(st.slice(c, 1, 1)), st.slice(b, 1, 1));
    }

    #[test]
    fn display_uses_step_names() {
        let st = ExprStore::new();
        let a = st.var("inValid", 1, Some(2));
        let s = st.var("pcmSq", 3, None);
        let e = st.and(a, st.ult(s, st.konst(3, 6)));
        assert_eq!(st.display(e), "inValid@2 & (pcmSq@init < 3'd6)");
    }

    #[test]
    fn eval_case_and_concat() {
        let st = ExprStore::new();
        let s = st.var("s", 2, None);
        let c = st.case(s, vec![(1, st.konst(2, 3))], st.konst(2, 0));
        let e = st.concat(vec![c, s]);
        let v = st.eval(e, &|_| 1);
        assert_eq!(v, 0b11_01);
        assert_eq!(st.eval(e, &|_| 2), 0b00_10);
    }
}
