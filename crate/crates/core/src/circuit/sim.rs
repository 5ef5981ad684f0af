//! Concrete cycle simulation.
//!
//! Evaluates circuit expressions directly over `u64` values. This path shares
//! nothing with the symbolic layer and is used as ground truth.

use super::{mask, BinOp, Circuit, Expr, SignalKind, UnOp};

/// Compiled view of a validated circuit for repeated concrete stepping.
pub struct Simulator<'c> {
    circuit: &'c Circuit,
    order: Vec<usize>,
}

/// Register and output values produced by one clock cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleResult {
    pub next: Vec<u64>,
    pub outputs: Vec<u64>,
}

impl<'c> Simulator<'c> {
    /// `circuit` must already be valid.
    pub fn new(circuit: &'c Circuit) -> Self {
        Simulator {
            circuit,
            order: circuit.net_order(),
        }
    }

    pub fn circuit(&self) -> &Circuit {
        self.circuit
    }

    pub fn reset_values(&self) -> Vec<u64> {
        self.circuit.registers.iter().map(|r| r.reset_value).collect()
    }

    /// Evaluates one clock cycle: outputs from the current registers and
    /// inputs, and all register next-values simultaneously.
    pub fn step(&self, regs: &[u64], inputs: &[u64]) -> CycleResult {
        let nets = self.eval_nets(regs, inputs);
        let env = Env {
            circuit: self.circuit,
            regs,
            inputs,
            nets: &nets,
        };
        let next = self
            .circuit
            .registers
            .iter()
            .map(|r| eval(&r.next, &env))
            .collect();
        let outputs = self
            .circuit
            .outputs
            .iter()
            .map(|o| eval(&o.expr, &env))
            .collect();
        CycleResult { next, outputs }
    }

    /// Evaluates only the register next-state functions.
    pub fn next_state(&self, regs: &[u64], inputs: &[u64]) -> Vec<u64> {
        let nets = self.eval_nets(regs, inputs);
        let env = Env {
            circuit: self.circuit,
            regs,
            inputs,
            nets: &nets,
        };
        self.circuit
            .registers
            .iter()
            .map(|r| eval(&r.next, &env))
            .collect()
    }

    /// Evaluates an arbitrary expression over the circuit's signals.
    pub fn eval_expr(&self, e: &Expr, regs: &[u64], inputs: &[u64]) -> u64 {
        let nets = self.eval_nets(regs, inputs);
        eval(
            e,
            &Env {
                circuit: self.circuit,
                regs,
                inputs,
                nets: &nets,
            },
        )
    }

    fn eval_nets(&self, regs: &[u64], inputs: &[u64]) -> Vec<u64> {
        let mut nets = vec![0u64; self.circuit.nets.len()];
        for &i in &self.order {
            let v = eval(
                &self.circuit.nets[i].expr,
                &Env {
                    circuit: self.circuit,
                    regs,
                    inputs,
                    nets: &nets,
                },
            );
            nets[i] = v;
        }
        nets
    }
}

struct Env<'a> {
    circuit: &'a Circuit,
    regs: &'a [u64],
    inputs: &'a [u64],
    nets: &'a [u64],
}

fn width(e: &Expr, env: &Env<'_>) -> u32 {
    match e {
        Expr::Const { width, .. } => *width,
        Expr::Ref(n) => env.circuit.lookup(n).map(|(_, w)| w).unwrap_or(0),
        Expr::Unary(op, a) => match op {
            UnOp::Not | UnOp::Neg => width(a, env),
            UnOp::ReduceOr | UnOp::ReduceAnd => 1,
        },
        Expr::Binary(op, a, _) => {
            if op.is_comparison() {
                1
            } else {
                width(a, env)
            }
        }
        Expr::Mux(_, t, _) => width(t, env),
        Expr::Case { default, .. } => width(default, env),
        Expr::Slice { hi, lo, .. } => hi - lo + 1,
        Expr::Concat(parts) => parts.iter().map(|p| width(p, env)).sum(),
        Expr::ZExt { width, .. } => *width,
    }
}

fn eval(e: &Expr, env: &Env<'_>) -> u64 {
    match e {
        Expr::Const { value, .. } => *value,
        Expr::Ref(n) => match env.circuit.lookup(n) {
            Some((SignalKind::Input(i), w)) => env.inputs[i] & mask(w),
            Some((SignalKind::Register(i), w)) => env.regs[i] & mask(w),
            Some((SignalKind::Net(i), _)) => env.nets[i],
            None => panic!("unresolved signal `{n}` in validated circuit"),
        },
        Expr::Unary(op, a) => {
            let w = width(a, env);
            let v = eval(a, env);
            match op {
                UnOp::Not => !v & mask(w),
                UnOp::Neg => v.wrapping_neg() & mask(w),
                UnOp::ReduceOr => (v != 0) as u64,
                UnOp::ReduceAnd => (v == mask(w)) as u64,
            }
        }
        Expr::Binary(op, a, b) => {
            let w = width(a, env);
            let (x, y) = (eval(a, env), eval(b, env));
            let m = mask(w);
            match op {
                BinOp::And => x & y,
                BinOp::Or => x | y,
                BinOp::Xor => x ^ y,
                BinOp::Add => x.wrapping_add(y) & m,
                BinOp::Sub => x.wrapping_sub(y) & m,
                BinOp::Eq => (x == y) as u64,
                BinOp::Ne => (x != y) as u64,
                BinOp::Ult => (x < y) as u64,
                BinOp::Shl => {
                    if y >= w as u64 {
                        0
                    } else {
                        (x << y) & m
                    }
                }
            }
        }
        Expr::Mux(c, t, f) => {
            if eval(c, env) != 0 {
                eval(t, env)
            } else {
                eval(f, env)
            }
        }
        Expr::Case {
            scrutinee,
            arms,
            default,
        } => {
            let s = eval(scrutinee, env);
            match arms.iter().find(|(k, _)| *k == s) {
                Some((_, a)) => eval(a, env),
                None => eval(default, env),
            }
        }
        Expr::Slice { expr, hi, lo } => (eval(expr, env) >> lo) & mask(hi - lo + 1),
        Expr::Concat(parts) => {
            let mut acc = 0u64;
            for p in parts {
                let w = width(p, env);
                acc = if w >= 64 { 0 } else { acc << w } | eval(p, env);
            }
            acc
        }
        Expr::ZExt { expr, .. } => eval(expr, env),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_rtl;

    #[test]
    fn counter_steps() {
        let c = parse_rtl(
            "circuit cnt\ninput en:1\nreg q:2 reset 0 next en ? q + 2'd1 : q\noutput top:1 = q == 2'd3\n",
        )
        .unwrap();
        let sim = Simulator::new(&c);
        let mut regs = sim.reset_values();
        for expect in [1, 2, 3, 0] {
            let r = sim.step(&regs, &[1]);
            regs = r.next;
            assert_eq!(regs, vec![expect]);
        }
        assert_eq!(sim.step(&[3], &[0]).outputs, vec![1]);
        assert_eq!(sim.step(&[3], &[0]).next, vec![3]);
    }

    #[test]
    fn concat_slice_shift() {
        let c = parse_rtl(
            "circuit x\ninput a:4\ninput s:2\noutput y:8 = {a, a[1:0], 2'd1}\noutput z:4 = a << s\noutput n:4 = -a\n",
        )
        .unwrap();
        let sim = Simulator::new(&c);
        let r = sim.step(&[], &[0b1011, 3]);
        assert_eq!(r.outputs, vec![0b1011_1101, 0b1000, 0b0101]);
    }
}
