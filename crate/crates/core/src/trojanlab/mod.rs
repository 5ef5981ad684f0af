//! Trojan construction and benchmark circuits.

pub mod corpus;
mod random;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::circuit::{self, mask, BinOp, Circuit, CircuitError, Expr, Register, StateId, StateSpec};

pub use random::{gen_random_fsm, FsmParams};

pub const TROJAN_STATE: &str = "trojan_state";
pub const TROJAN_ENABLE: &str = "trojan_ena";

#[derive(Debug, Error)]
pub enum TrojanError {
    #[error("unknown output `{0}`")]
    UnknownOutput(String),
    #[error("payload value {value} does not fit output `{output}` of width {width}")]
    WidthMismatch { output: String, value: u64, width: u32 },
    #[error("circuit already has a signal named `{0}`")]
    NameCollision(String),
    #[error("trigger needs at least one edge")]
    EmptyTrigger,
    #[error("edge ({0}, {1}) is outside the state space")]
    EdgeOutOfRange(StateId, StateId),
    #[error("infeasible generator parameters: {0}")]
    InfeasibleParams(String),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// Don't-care edges whose observation arms and then fires the trigger.
#[derive(Debug, Clone)]
pub struct TriggerSpec {
    pub dct_edges: BTreeSet<(StateId, StateId)>,
    pub state_spec: StateSpec,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PayloadSpec {
    StuckAt { output: String, value: u64 },
}

impl FromStr for PayloadSpec {
    type Err = String;

    /// `stuck-at:<output>:<value>`
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["stuck-at", out, v] => {
                let value = v.parse().map_err(|_| format!("bad payload value `{v}`"))?;
                Ok(PayloadSpec::StuckAt {
                    output: out.to_string(),
                    value,
                })
            }
            _ => Err(format!("expected `stuck-at:<output>:<value>`, got `{s}`")),
        }
    }
}

impl fmt::Display for PayloadSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PayloadSpec::StuckAt { output, value } => write!(f, "stuck-at:{output}:{value}"),
        }
    }
}

fn member(proj: &Expr, width: u32, set: &BTreeSet<StateId>) -> Expr {
    set.iter()
        .map(|s| Expr::eq(proj.clone(), Expr::konst(width, s.0 as u64)))
        .reduce(Expr::or)
        .unwrap_or(Expr::konst(1, 0))
}

/// Adds the idle/active/work trigger FSM and a gated stuck-at payload.
pub fn inject_trojan(c: &Circuit, trig: &TriggerSpec, pay: &PayloadSpec) -> Result<Circuit, TrojanError> {
    let PayloadSpec::StuckAt { output, value } = pay;
    let oi = c
        .outputs
        .iter()
        .position(|o| &o.name == output)
        .ok_or_else(|| TrojanError::UnknownOutput(output.clone()))?;
    let ow = c.outputs[oi].width;
    if *value > mask(ow) {
        return Err(TrojanError::WidthMismatch {
            output: output.clone(),
            value: *value,
            width: ow,
        });
    }
    for name in [TROJAN_STATE, TROJAN_ENABLE] {
        if c.lookup(name).is_some() {
            return Err(TrojanError::NameCollision(name.into()));
        }
    }
    if trig.dct_edges.is_empty() {
        return Err(TrojanError::EmptyTrigger);
    }
    let w = trig.state_spec.total_width();
    for &(s, d) in &trig.dct_edges {
        if s.0 as u64 > mask(w) || d.0 as u64 > mask(w) {
            return Err(TrojanError::EdgeOutOfRange(s, d));
        }
    }
    let sources: BTreeSet<StateId> = trig.dct_edges.iter().map(|e| e.0).collect();
    let dests: BTreeSet<StateId> = trig.dct_edges.iter().map(|e| e.1).collect();
    let proj = trig.state_spec.projection_expr();
    let arm = member(&proj, w, &sources);
    let fire = member(&proj, w, &dests);

    let ts = || Expr::var(TROJAN_STATE);
    let k2 = |v| Expr::konst(2, v);
    let state_next = Expr::Case {
        scrutinee: Box::new(ts()),
        arms: vec![
            (0, Expr::mux(arm, k2(1), k2(0))),
            (1, Expr::mux(fire, k2(2), k2(1))),
            (2, k2(2)),
        ],
        default: Box::new(ts()),
    };
    let ena_next = Expr::mux(
        Expr::binary(BinOp::Eq, ts(), k2(2)),
        Expr::konst(1, 1),
        Expr::var(TROJAN_ENABLE),
    );

    let mut out = c.clone();
    out.registers.push(Register {
        name: TROJAN_STATE.into(),
        width: 2,
        reset_value: 0,
        next: state_next,
    });
    out.registers.push(Register {
        name: TROJAN_ENABLE.into(),
        width: 1,
        reset_value: 0,
        next: ena_next,
    });
    let orig = std::mem::replace(&mut out.outputs[oi].expr, Expr::konst(1, 0));
    out.outputs[oi].expr = Expr::mux(Expr::var(TROJAN_ENABLE), Expr::konst(ow, *value), orig);
    Ok(circuit::finish(out)?)
}

/// Parses `6:0,7:0` into an edge set.
pub fn parse_edges(s: &str) -> Result<BTreeSet<(StateId, StateId)>, String> {
    let mut out = BTreeSet::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (a, b) = part
            .split_once(':')
            .ok_or_else(|| format!("edge `{part}` is not `src:dst`"))?;
        let a: u32 = a.trim().parse().map_err(|_| format!("bad state `{a}`"))?;
        let b: u32 = b.trim().parse().map_err(|_| format!("bad state `{b}`"))?;
        out.insert((StateId(a), StateId(b)));
    }
    if out.is_empty() {
        return Err("no edges given".into());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::sim::Simulator;

    fn ima_trigger(c: &Circuit, edges: &[(u32, u32)]) -> TriggerSpec {
        TriggerSpec {
            dct_edges: edges.iter().map(|&(a, b)| (StateId(a), StateId(b))).collect(),
            state_spec: StateSpec::new(c, &["pcmSq"]).unwrap(),
        }
    }

    fn stuck() -> PayloadSpec {
        "stuck-at:outValid:1".parse().unwrap()
    }

    #[test]
    fn injected_circuit_validates_and_resets_idle() {
        let c = corpus::ima();
        let t = inject_trojan(&c, &ima_trigger(&c, &[(6, 0), (7, 0)]), &stuck()).unwrap();
        assert!(t.validate().is_ok());
        let r = t.register(TROJAN_STATE).unwrap();
        assert_eq!((r.width, r.reset_value), (2, 0));
        let e = t.register(TROJAN_ENABLE).unwrap();
        assert_eq!((e.width, e.reset_value), (1, 0));
    }

    #[test]
    fn trigger_arms_then_fires() {
        let c = corpus::ima();
        let t = inject_trojan(&c, &ima_trigger(&c, &[(6, 0), (7, 0)]), &stuck()).unwrap();
        let sim = Simulator::new(&t);
        // registers: pcmSq, trojan_state, trojan_ena; inputs: inValid, inSamp
        let mut regs = vec![6, 0, 0];
        regs = sim.step(&regs, &[0, 0]).next;
        assert_eq!(regs, vec![0, 1, 0]);
        regs = sim.step(&regs, &[0, 0]).next;
        assert_eq!(regs, vec![0, 2, 0]);
        regs = sim.step(&regs, &[0, 0]).next;
        assert_eq!(regs, vec![0, 2, 1]);
        assert_eq!(sim.step(&regs, &[0, 0]).outputs, vec![1]);
    }

    #[test]
    fn honest_run_never_enables() {
        let c = corpus::ima();
        let t = inject_trojan(&c, &ima_trigger(&c, &[(6, 0), (7, 0)]), &stuck()).unwrap();
        let sim = Simulator::new(&t);
        let mut regs = sim.reset_values();
        for i in 0..40 {
            let r = sim.step(&regs, &[(i % 3 == 0) as u64, 0]);
            assert_eq!(r.outputs[0], (regs[0] == 5) as u64);
            regs = r.next;
            assert_eq!(regs[2], 0);
        }
    }

    #[test]
    fn errors() {
        let c = corpus::ima();
        let trig = ima_trigger(&c, &[(6, 0)]);
        let bad = PayloadSpec::StuckAt {
            output: "nope".into(),
            value: 1,
        };
        assert!(matches!(inject_trojan(&c, &trig, &bad), Err(TrojanError::UnknownOutput(_))));
        let wide = PayloadSpec::StuckAt {
            output: "outValid".into(),
            value: 2,
        };
        assert!(matches!(inject_trojan(&c, &trig, &wide), Err(TrojanError::WidthMismatch { .. })));
        let t = inject_trojan(&c, &trig, &stuck()).unwrap();
        assert!(matches!(inject_trojan(&t, &trig, &stuck()), Err(TrojanError::NameCollision(_))));
    }

    #[test]
    fn edge_parsing() {
        let e = parse_edges("6:0, 7:0").unwrap();
        assert_eq!(e.len(), 2);
        assert!(parse_edges("").is_err());
        assert!(parse_edges("6-0").is_err());
    }
}
