//! Circuit intermediate representation.
//!
//! A [`Circuit`] is a synchronous Mealy machine: primary inputs, registers
//! with reset values and next-state logic, combinational nets, and outputs
//! that are functions of the current register values and inputs. Two text
//! frontends produce circuits: the line-oriented RTL-FSM format
//! ([`parse_rtl`] / [`print_rtl`]) and a BLIF subset for gate-level
//! netlists ([`parse_blif`]).

mod blif;
mod rtl;
pub mod sim;

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

pub use blif::parse_blif;
pub use rtl::{parse_expr, parse_rtl, print_expr, print_rtl};

/// Widest signal the IR accepts. Values are carried in `u64`.
pub const MAX_WIDTH: u32 = 64;

/// Widest FSM projection supported by [`StateSpec`].
pub const MAX_STATE_WIDTH: u32 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnOp {
    Not,
    Neg,
    ReduceOr,
    ReduceAnd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    And,
    Or,
    Xor,
    Add,
    Sub,
    Eq,
    Ne,
    Ult,
    Shl,
}

impl BinOp {
    pub fn is_comparison(self) -> bool {
        matches!(self, BinOp::Eq | BinOp::Ne | BinOp::Ult)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::And => "&",
            BinOp::Or => "|",
            BinOp::Xor => "^",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Ult => "<",
            BinOp::Shl => "<<",
        }
    }
}

/// Combinational expression over circuit signals.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Const { width: u32, value: u64 },
    Ref(String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Mux(Box<Expr>, Box<Expr>, Box<Expr>),
    Case {
        scrutinee: Box<Expr>,
        arms: Vec<(u64, Expr)>,
        default: Box<Expr>,
    },
    /// Bits `hi..=lo` of the operand.
    Slice { expr: Box<Expr>, hi: u32, lo: u32 },
    /// First element is the most significant.
    Concat(Vec<Expr>),
    ZExt { expr: Box<Expr>, width: u32 },
}

impl Expr {
    pub fn konst(width: u32, value: u64) -> Expr {
        Expr::Const { width, value }
    }

    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Ref(name.into())
    }

    pub fn unary(op: UnOp, e: Expr) -> Expr {
        Expr::Unary(op, Box::new(e))
    }

    pub fn binary(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn not(e: Expr) -> Expr {
        Expr::unary(UnOp::Not, e)
    }

    pub fn and(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinOp::And, a, b)
    }

    pub fn or(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinOp::Or, a, b)
    }

    pub fn eq(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinOp::Eq, a, b)
    }

    pub fn mux(c: Expr, t: Expr, e: Expr) -> Expr {
        Expr::Mux(Box::new(c), Box::new(t), Box::new(e))
    }

    pub fn slice(e: Expr, hi: u32, lo: u32) -> Expr {
        Expr::Slice {
            expr: Box::new(e),
            hi,
            lo,
        }
    }

    /// Calls `f` on every signal name referenced by this expression.
    pub fn for_each_ref<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            Expr::Const { .. } => {}
            Expr::Ref(n) => f(n),
            Expr::Unary(_, e) | Expr::Slice { expr: e, .. } | Expr::ZExt { expr: e, .. } => {
                e.for_each_ref(f)
            }
            Expr::Binary(_, a, b) => {
                a.for_each_ref(f);
                b.for_each_ref(f);
            }
            Expr::Mux(c, t, e) => {
                c.for_each_ref(f);
                t.for_each_ref(f);
                e.for_each_ref(f);
            }
            Expr::Case {
                scrutinee,
                arms,
                default,
            } => {
                scrutinee.for_each_ref(f);
                for (_, a) in arms {
                    a.for_each_ref(f);
                }
                default.for_each_ref(f);
            }
            Expr::Concat(parts) => {
                for p in parts {
                    p.for_each_ref(f);
                }
            }
        }
    }

    pub fn contains_case(&self) -> bool {
        match self {
            Expr::Case { .. } => true,
            Expr::Const { .. } | Expr::Ref(_) => false,
            Expr::Unary(_, e) | Expr::Slice { expr: e, .. } | Expr::ZExt { expr: e, .. } => {
                e.contains_case()
            }
            Expr::Binary(_, a, b) => a.contains_case() || b.contains_case(),
            Expr::Mux(c, t, e) => c.contains_case() || t.contains_case() || e.contains_case(),
            Expr::Concat(parts) => parts.iter().any(Expr::contains_case),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Input {
    pub name: String,
    pub width: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub name: String,
    pub width: u32,
    pub expr: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Net {
    pub name: String,
    pub width: u32,
    pub expr: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Register {
    pub name: String,
    pub width: u32,
    pub reset_value: u64,
    pub next: Expr,
}

/// A synchronous single-clock circuit.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Circuit {
    pub name: String,
    pub inputs: Vec<Input>,
    pub outputs: Vec<Output>,
    pub registers: Vec<Register>,
    pub nets: Vec<Net>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalKind {
    Input(usize),
    Register(usize),
    Net(usize),
}

/// One broken circuit invariant.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("`{signal}` references unknown signal `{name}`")]
    UnknownSignal { signal: String, name: String },
    #[error("width mismatch in `{signal}`: {detail}")]
    WidthMismatch { signal: String, detail: String },
    #[error("combinational cycle through `{0}`")]
    CombinationalCycle(String),
    #[error("`{signal}`: width {width} outside 1..={max}", max = MAX_WIDTH)]
    BadWidth { signal: String, width: u32 },
    #[error("register `{register}`: reset value {value} does not fit in {width} bits")]
    ResetOutOfRange {
        register: String,
        width: u32,
        value: u64,
    },
    #[error("`{signal}`: {detail}")]
    Malformed { signal: String, detail: String },
}

impl Violation {
    pub fn signal(&self) -> &str {
        match self {
            Violation::DuplicateName(s) | Violation::CombinationalCycle(s) => s,
            Violation::UnknownSignal { signal, .. }
            | Violation::WidthMismatch { signal, .. }
            | Violation::BadWidth { signal, .. }
            | Violation::Malformed { signal, .. } => signal,
            Violation::ResetOutOfRange { register, .. } => register,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("{line}:{col}: syntax error, expected {expected}")]
    Syntax {
        line: usize,
        col: usize,
        expected: String,
    },
    #[error("{line}: unsupported directive `{directive}`")]
    UnsupportedDirective { line: usize, directive: String },
    #[error("signal `{0}` is used but never driven")]
    UndrivenSignal(String),
    #[error("invalid circuit: {}", display_violations(.0))]
    Invalid(Vec<Violation>),
}

fn display_violations(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl CircuitError {
    pub fn violations(&self) -> &[Violation] {
        match self {
            CircuitError::Invalid(v) => v,
            _ => &[],
        }
    }
}

pub(crate) fn mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

impl Circuit {
    pub fn new(name: impl Into<String>) -> Self {
        Circuit {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn lookup(&self, name: &str) -> Option<(SignalKind, u32)> {
        if let Some(i) = self.inputs.iter().position(|s| s.name == name) {
            return Some((SignalKind::Input(i), self.inputs[i].width));
        }
        if let Some(i) = self.registers.iter().position(|s| s.name == name) {
            return Some((SignalKind::Register(i), self.registers[i].width));
        }
        if let Some(i) = self.nets.iter().position(|s| s.name == name) {
            return Some((SignalKind::Net(i), self.nets[i].width));
        }
        None
    }

    pub(crate) fn signal_table(&self) -> HashMap<&str, (SignalKind, u32)> {
        let mut t = HashMap::new();
        for (i, s) in self.inputs.iter().enumerate() {
            t.entry(s.name.as_str())
                .or_insert((SignalKind::Input(i), s.width));
        }
        for (i, s) in self.registers.iter().enumerate() {
            t.entry(s.name.as_str())
                .or_insert((SignalKind::Register(i), s.width));
        }
        for (i, s) in self.nets.iter().enumerate() {
            t.entry(s.name.as_str()).or_insert((SignalKind::Net(i), s.width));
        }
        t
    }

    pub fn register(&self, name: &str) -> Option<&Register> {
        self.registers.iter().find(|r| r.name == name)
    }

    pub fn output(&self, name: &str) -> Option<&Output> {
        self.outputs.iter().find(|o| o.name == name)
    }

    pub fn input_bits(&self) -> u32 {
        self.inputs.iter().map(|i| i.width).sum()
    }

    pub fn register_bits(&self) -> u32 {
        self.registers.iter().map(|r| r.width).sum()
    }

    /// Width of `e` in the context of this circuit, or `None` if it does not type-check.
    pub fn width_of(&self, e: &Expr) -> Option<u32> {
        let table = self.signal_table();
        let mut errs = Vec::new();
        let w = type_expr(e, &table, "", &mut errs);
        if errs.is_empty() {
            w
        } else {
            None
        }
    }

    /// Types `e` against this circuit's signals, reporting violations under `signal`.
    pub fn check_expr(&self, e: &Expr, signal: &str) -> Result<u32, Vec<Violation>> {
        let table = self.signal_table();
        let mut errs = Vec::new();
        let w = type_expr(e, &table, signal, &mut errs);
        match w {
            Some(w) if errs.is_empty() => Ok(w),
            _ => {
                if errs.is_empty() {
                    errs.push(Violation::Malformed {
                        signal: signal.to_string(),
                        detail: "ill-typed expression".to_string(),
                    });
                }
                Err(errs)
            }
        }
    }

    /// Checks every structural invariant and returns all violations found.
    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        let mut errs = Vec::new();

        let mut seen = HashSet::new();
        let all_names = self
            .inputs
            .iter()
            .map(|s| (&s.name, s.width))
            .chain(self.outputs.iter().map(|s| (&s.name, s.width)))
            .chain(self.registers.iter().map(|s| (&s.name, s.width)))
            .chain(self.nets.iter().map(|s| (&s.name, s.width)));
        for (name, width) in all_names {
            if !seen.insert(name.as_str()) {
                errs.push(Violation::DuplicateName(name.clone()));
            }
            if width == 0 || width > MAX_WIDTH {
                errs.push(Violation::BadWidth {
                    signal: name.clone(),
                    width,
                });
            }
        }

        let table = self.signal_table();
        let check = |signal: &str, declared: u32, e: &Expr, errs: &mut Vec<Violation>| {
            if let Some(w) = type_expr(e, &table, signal, errs) {
                if w != declared {
                    errs.push(Violation::WidthMismatch {
                        signal: signal.to_string(),
                        detail: format!("declared {declared} bits, expression has {w}"),
                    });
                }
            }
        };
        for n in &self.nets {
            check(&n.name, n.width, &n.expr, &mut errs);
        }
        for o in &self.outputs {
            check(&o.name, o.width, &o.expr, &mut errs);
        }
        for r in &self.registers {
            check(&r.name, r.width, &r.next, &mut errs);
            if r.width <= MAX_WIDTH && r.width > 0 && r.reset_value > mask(r.width) {
                errs.push(Violation::ResetOutOfRange {
                    register: r.name.clone(),
                    width: r.width,
                    value: r.reset_value,
                });
            }
        }

        errs.extend(self.find_cycles());

        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }

    /// Nets in dependency order (each net after every net it reads).
    /// Only meaningful for circuits without combinational cycles.
    pub fn net_order(&self) -> Vec<usize> {
        let index: HashMap<&str, usize> = self
            .nets
            .iter()
            .enumerate()
            .map(|(i, n)| (n.name.as_str(), i))
            .collect();
        let mut state = vec![0u8; self.nets.len()];
        let mut order = Vec::with_capacity(self.nets.len());
        for start in 0..self.nets.len() {
            if state[start] != 0 {
                continue;
            }
            // iterative DFS: (node, deps, next dep)
            let mut stack: Vec<(usize, Vec<usize>, usize)> = vec![(start, self.net_deps(start, &index), 0)];
            state[start] = 1;
            while let Some((node, deps, pos)) = stack.last_mut() {
                if *pos < deps.len() {
                    let d = deps[*pos];
                    *pos += 1;
                    if state[d] == 0 {
                        state[d] = 1;
                        let dd = self.net_deps(d, &index);
                        stack.push((d, dd, 0));
                    }
                } else {
                    state[*node] = 2;
                    order.push(*node);
                    stack.pop();
                }
            }
        }
        order
    }

    fn net_deps(&self, i: usize, index: &HashMap<&str, usize>) -> Vec<usize> {
        let mut deps = Vec::new();
        self.nets[i].expr.for_each_ref(&mut |r| {
            if let Some(&j) = index.get(r) {
                deps.push(j);
            }
        });
        deps
    }

    fn find_cycles(&self) -> Vec<Violation> {
        let index: HashMap<&str, usize> = self
            .nets
            .iter()
            .enumerate()
            .map(|(i, n)| (n.name.as_str(), i))
            .collect();
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; self.nets.len()];
        let mut reported = HashSet::new();
        let mut out = Vec::new();
        for start in 0..self.nets.len() {
            if state[start] != 0 {
                continue;
            }
            let mut stack: Vec<(usize, Vec<usize>, usize)> = vec![(start, self.net_deps(start, &index), 0)];
            state[start] = 1;
            while let Some((node, deps, pos)) = stack.last_mut() {
                if *pos < deps.len() {
                    let d = deps[*pos];
                    *pos += 1;
                    match state[d] {
                        0 => {
                            state[d] = 1;
                            let dd = self.net_deps(d, &index);
                            stack.push((d, dd, 0));
                        }
                        1 if reported.insert(d) => {
                            out.push(Violation::CombinationalCycle(self.nets[d].name.clone()));
                        }
                        _ => {}
                    }
                } else {
                    state[*node] = 2;
                    stack.pop();
                }
            }
        }
        out
    }
}

fn type_expr(
    e: &Expr,
    table: &HashMap<&str, (SignalKind, u32)>,
    signal: &str,
    errs: &mut Vec<Violation>,
) -> Option<u32> {
    let mismatch = |errs: &mut Vec<Violation>, detail: String| {
        errs.push(Violation::WidthMismatch {
            signal: signal.to_string(),
            detail,
        });
    };
    match e {
        Expr::Const { width, value } => {
            if *width == 0 || *width > MAX_WIDTH {
                errs.push(Violation::BadWidth {
                    signal: signal.to_string(),
                    width: *width,
                });
                return None;
            }
            if *value > mask(*width) {
                mismatch(errs, format!("constant {value} does not fit in {width} bits"));
                return None;
            }
            Some(*width)
        }
        Expr::Ref(n) => match table.get(n.as_str()) {
            Some((_, w)) => Some(*w),
            None => {
                errs.push(Violation::UnknownSignal {
                    signal: signal.to_string(),
                    name: n.clone(),
                });
                None
            }
        },
        Expr::Unary(op, a) => {
            let w = type_expr(a, table, signal, errs)?;
            Some(match op {
                UnOp::Not | UnOp::Neg => w,
                UnOp::ReduceOr | UnOp::ReduceAnd => 1,
            })
        }
        Expr::Binary(op, a, b) => {
            let wa = type_expr(a, table, signal, errs);
            let wb = type_expr(b, table, signal, errs);
            let (wa, wb) = (wa?, wb?);
            if *op == BinOp::Shl {
                return Some(wa);
            }
            if wa != wb {
                mismatch(errs, format!("operands of `{}` have widths {wa} and {wb}", op.symbol()));
                return None;
            }
            Some(if op.is_comparison() { 1 } else { wa })
        }
        Expr::Mux(c, t, f) => {
            let wc = type_expr(c, table, signal, errs);
            let wt = type_expr(t, table, signal, errs);
            let wf = type_expr(f, table, signal, errs);
            let (wc, wt, wf) = (wc?, wt?, wf?);
            let mut ok = true;
            if wc != 1 {
                mismatch(errs, format!("mux condition has width {wc}, expected 1"));
                ok = false;
            }
            if wt != wf {
                mismatch(errs, format!("mux arms have widths {wt} and {wf}"));
                ok = false;
            }
            ok.then_some(wt)
        }
        Expr::Case {
            scrutinee,
            arms,
            default,
        } => {
            let ws = type_expr(scrutinee, table, signal, errs);
            let wd = type_expr(default, table, signal, errs);
            let mut arm_widths = Vec::with_capacity(arms.len());
            for (_, a) in arms {
                arm_widths.push(type_expr(a, table, signal, errs));
            }
            let (ws, wd) = (ws?, wd?);
            let mut ok = true;
            let mut keys = HashSet::new();
            for ((key, _), wa) in arms.iter().zip(arm_widths) {
                if *key > mask(ws) {
                    mismatch(errs, format!("case key {key} does not fit scrutinee width {ws}"));
                    ok = false;
                }
                if !keys.insert(*key) {
                    errs.push(Violation::Malformed {
                        signal: signal.to_string(),
                        detail: format!("duplicate case key {key}"),
                    });
                    ok = false;
                }
                match wa {
                    Some(w) if w != wd => {
                        mismatch(errs, format!("case arm has width {w}, default has {wd}"));
                        ok = false;
                    }
                    None => ok = false,
                    _ => {}
                }
            }
            ok.then_some(wd)
        }
        Expr::Slice { expr, hi, lo } => {
            let w = type_expr(expr, table, signal, errs)?;
            if lo > hi || *hi >= w {
                mismatch(errs, format!("slice [{hi}:{lo}] out of range for width {w}"));
                return None;
            }
            Some(hi - lo + 1)
        }
        Expr::Concat(parts) => {
            if parts.is_empty() {
                errs.push(Violation::Malformed {
                    signal: signal.to_string(),
                    detail: "empty concatenation".into(),
                });
                return None;
            }
            let mut total = 0u32;
            let mut ok = true;
            for p in parts {
                match type_expr(p, table, signal, errs) {
                    Some(w) => total += w,
                    None => ok = false,
                }
            }
            if ok && total > MAX_WIDTH {
                errs.push(Violation::BadWidth {
                    signal: signal.to_string(),
                    width: total,
                });
                return None;
            }
            ok.then_some(total)
        }
        Expr::ZExt { expr, width } => {
            let w = type_expr(expr, table, signal, errs)?;
            if *width < w || *width > MAX_WIDTH {
                mismatch(errs, format!("zext from {w} to {width} bits"));
                return None;
            }
            Some(*width)
        }
    }
}

pub(crate) fn finish(c: Circuit) -> Result<Circuit, CircuitError> {
    c.validate().map_err(CircuitError::Invalid)?;
    Ok(c)
}

/// Projection of an FSM onto an ordered list of registers.
///
/// The first-listed register occupies the most significant bits of a [`StateId`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateSpec {
    registers: Vec<String>,
    widths: Vec<u32>,
    total_width: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StateSpecError {
    #[error("no state registers given")]
    Empty,
    #[error("`{0}` is not a register")]
    UnknownRegister(String),
    #[error("register `{0}` listed twice")]
    Duplicate(String),
    #[error("state projection is {0} bits wide, at most {max} supported", max = MAX_STATE_WIDTH)]
    TooWide(u32),
}

impl StateSpec {
    pub fn new<S: AsRef<str>>(c: &Circuit, registers: &[S]) -> Result<Self, StateSpecError> {
        if registers.is_empty() {
            return Err(StateSpecError::Empty);
        }
        let mut names = Vec::new();
        let mut widths = Vec::new();
        for r in registers {
            let r = r.as_ref();
            let reg = c
                .register(r)
                .ok_or_else(|| StateSpecError::UnknownRegister(r.to_string()))?;
            if names.iter().any(|n: &String| n == r) {
                return Err(StateSpecError::Duplicate(r.to_string()));
            }
            names.push(r.to_string());
            widths.push(reg.width);
        }
        let total_width: u32 = widths.iter().sum();
        if total_width > MAX_STATE_WIDTH {
            return Err(StateSpecError::TooWide(total_width));
        }
        Ok(StateSpec {
            registers: names,
            widths,
            total_width,
        })
    }

    pub fn registers(&self) -> &[String] {
        &self.registers
    }

    pub fn widths(&self) -> &[u32] {
        &self.widths
    }

    pub fn total_width(&self) -> u32 {
        self.total_width
    }

    pub fn contains(&self, register: &str) -> bool {
        self.registers.iter().any(|r| r == register)
    }

    /// Number of distinct state identifiers.
    pub fn domain_size(&self) -> u64 {
        1u64 << self.total_width
    }

    /// Concatenates per-register values (in state-register order) into a state id.
    pub fn join(&self, values: &[u64]) -> StateId {
        let mut acc = 0u64;
        for (v, w) in values.iter().zip(&self.widths) {
            acc = (acc << w) | (v & mask(*w));
        }
        StateId(acc as u32)
    }

    /// Inverse of [`StateSpec::join`].
    pub fn split(&self, id: StateId) -> Vec<u64> {
        let mut out = vec![0; self.widths.len()];
        let mut v = id.0 as u64;
        for (slot, w) in out.iter_mut().zip(&self.widths).rev() {
            *slot = v & mask(*w);
            v >>= w;
        }
        out
    }

    /// Circuit expression that evaluates to the projection.
    pub fn projection_expr(&self) -> Expr {
        if self.registers.len() == 1 {
            Expr::Ref(self.registers[0].clone())
        } else {
            Expr::Concat(self.registers.iter().cloned().map(Expr::Ref).collect())
        }
    }
}

/// Value of a [`StateSpec`] projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct StateId(pub u32);

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for StateId {
    fn from(v: u32) -> Self {
        StateId(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_reg(next: Expr) -> Circuit {
        Circuit {
            name: "t".into(),
            inputs: vec![Input {
                name: "a".into(),
                width: 1,
            }],
            registers: vec![Register {
                name: "r".into(),
                width: 3,
                reset_value: 0,
                next,
            }],
            ..Default::default()
        }
    }

    #[test]
    fn self_loop_net_is_a_cycle() {
        let mut c = Circuit::new("loop");
        c.nets.push(Net {
            name: "x".into(),
            width: 1,
            expr: Expr::var("x"),
        });
        let errs = c.validate().unwrap_err();
        assert_eq!(errs, vec![Violation::CombinationalCycle("x".into())]);
    }

    #[test]
    fn two_net_cycle_reported_once() {
        let mut c = Circuit::new("loop2");
        c.nets.push(Net {
            name: "x".into(),
            width: 1,
            expr: Expr::not(Expr::var("y")),
        });
        c.nets.push(Net {
            name: "y".into(),
            width: 1,
            expr: Expr::var("x"),
        });
        let errs = c.validate().unwrap_err();
        assert_eq!(errs.len(), 1);
        assert!(matches!(errs[0], Violation::CombinationalCycle(_)));
    }

    #[test]
    fn register_next_width_mismatch() {
        let c = one_reg(Expr::konst(4, 1));
        let errs = c.validate().unwrap_err();
        assert!(matches!(&errs[0], Violation::WidthMismatch { signal, .. } if signal == "r"));
    }

    #[test]
    fn reset_must_fit() {
        let mut c = one_reg(Expr::var("r"));
        c.registers[0].reset_value = 8;
        let errs = c.validate().unwrap_err();
        assert!(matches!(errs[0], Violation::ResetOutOfRange { value: 8, .. }));
    }

    #[test]
    fn unknown_and_duplicate_names() {
        let mut c = one_reg(Expr::var("nope"));
        c.nets.push(Net {
            name: "a".into(),
            width: 1,
            expr: Expr::konst(1, 0),
        });
        let errs = c.validate().unwrap_err();
        assert!(errs.contains(&Violation::DuplicateName("a".into())));
        assert!(errs
            .iter()
            .any(|e| matches!(e, Violation::UnknownSignal { name, .. } if name == "nope")));
    }

    #[test]
    fn case_typing() {
        let case = Expr::Case {
            scrutinee: Box::new(Expr::var("r")),
            arms: vec![(0, Expr::konst(3, 1)), (0, Expr::konst(3, 2))],
            default: Box::new(Expr::konst(3, 0)),
        };
        let errs = one_reg(case).validate().unwrap_err();
        assert!(errs.iter().any(|e| matches!(e, Violation::Malformed { .. })));
        let case = Expr::Case {
            scrutinee: Box::new(Expr::var("r")),
            arms: vec![(9, Expr::konst(3, 1))],
            default: Box::new(Expr::konst(3, 0)),
        };
        assert!(one_reg(case).validate().is_err());
    }

    #[test]
    fn net_order_respects_dependencies() {
        let mut c = Circuit::new("o");
        c.inputs.push(Input {
            name: "a".into(),
            width: 1,
        });
        c.nets.push(Net {
            name: "z".into(),
            width: 1,
            expr: Expr::not(Expr::var("y")),
        });
        c.nets.push(Net {
            name: "y".into(),
            width: 1,
            expr: Expr::var("a"),
        });
        c.validate().unwrap();
        assert_eq!(c.net_order(), vec![1, 0]);
    }

    #[test]
    fn state_spec_join_split() {
        let mut c = one_reg(Expr::var("r"));
        c.registers.push(Register {
            name: "q".into(),
            width: 2,
            reset_value: 1,
            next: Expr::var("q"),
        });
        let spec = StateSpec::new(&c, &["r", "q"]).unwrap();
        assert_eq!(spec.total_width(), 5);
        let id = spec.join(&[5, 2]);
        assert_eq!(id, StateId(0b10110));
        assert_eq!(spec.split(id), vec![5, 2]);
        assert_eq!(
            StateSpec::new(&c, &["a"]),
            Err(StateSpecError::UnknownRegister("a".into()))
        );
        assert_eq!(StateSpec::new::<&str>(&c, &[]), Err(StateSpecError::Empty));
    }
}
