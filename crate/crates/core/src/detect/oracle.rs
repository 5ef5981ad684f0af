//! Exhaustive concrete-simulation reference.

use std::collections::{BTreeSet, HashSet};

use super::DetectError;
use crate::circuit::sim::Simulator;
use crate::circuit::{Circuit, Expr, SignalKind, StateId, StateSpec};
use crate::engine::{Behavior, Depth, MetaKind, Metadata};

/// Cap on register bits plus input bits.
pub const ORACLE_MAX_BITS: u32 = 20;

/// Inputs that can influence any register or output.
fn live_inputs(c: &Circuit) -> Vec<usize> {
    let mut live = BTreeSet::new();
    let mut visited = HashSet::new();
    let mut stack: Vec<&Expr> = c
        .registers
        .iter()
        .map(|r| &r.next)
        .chain(c.outputs.iter().map(|o| &o.expr))
        .collect();
    while let Some(e) = stack.pop() {
        e.for_each_ref(&mut |n| {
            if !visited.insert(n.to_string()) {
                return;
            }
            match c.lookup(n) {
                Some((SignalKind::Input(i), _)) => {
                    live.insert(i);
                }
                Some((SignalKind::Net(i), _)) => stack.push(&c.nets[i].expr),
                _ => {}
            }
        });
    }
    live.into_iter().collect()
}

/// Every assignment of `widths`, odometer order.
fn assignments(widths: &[u32]) -> Vec<Vec<u64>> {
    let total: u32 = widths.iter().sum();
    (0..1u64 << total)
        .map(|mut k| {
            widths
                .iter()
                .map(|&w| {
                    let v = k & ((1u64 << w) - 1);
                    k >>= w;
                    v
                })
                .collect()
        })
        .collect()
}

/// Ground truth by brute force: BFS over full register valuations from reset
/// for RS and behaviors, and every (valuation, input) pair for Trans.
pub fn oracle_analyze(c: &Circuit, spec: &StateSpec, depth: Depth) -> Result<Metadata, DetectError> {
    let bits = c.register_bits() + c.input_bits();
    if bits > ORACLE_MAX_BITS {
        return Err(DetectError::TooLargeForOracle {
            bits,
            cap: ORACLE_MAX_BITS,
        });
    }
    let sim = Simulator::new(c);
    let spec_idx: Vec<usize> = spec
        .registers()
        .iter()
        .map(|n| c.registers.iter().position(|r| &r.name == n).expect("state register exists"))
        .collect();
    let project = |v: &[u64]| spec.join(&spec_idx.iter().map(|&i| v[i]).collect::<Vec<_>>());

    let live = live_inputs(c);
    let live_widths: Vec<u32> = live.iter().map(|&i| c.inputs[i].width).collect();
    let input_vectors: Vec<Vec<u64>> = assignments(&live_widths)
        .into_iter()
        .map(|a| {
            let mut full = vec![0u64; c.inputs.len()];
            for (slot, v) in live.iter().zip(a) {
                full[*slot] = v;
            }
            full
        })
        .collect();

    let mut md = Metadata::new(MetaKind::Reach);
    let reset = sim.reset_values();
    md.rs.insert(project(&reset));
    let mut visited: HashSet<Vec<u64>> = HashSet::from([reset.clone()]);
    let mut frontier = vec![reset];
    let max_layers = match depth {
        Depth::Cycles(d) => d,
        Depth::Fixpoint => u32::MAX,
    };
    let mut layer = 0;
    let mut last_new = 0;
    while layer < max_layers && !frontier.is_empty() {
        layer += 1;
        let mut next = Vec::new();
        let mut new_proj = false;
        for v in &frontier {
            md.paths_explored += 1;
            let src = project(v);
            for inp in &input_vectors {
                let r = sim.step(v, inp);
                let dst = project(&r.next);
                new_proj |= md.rs.insert(dst);
                for (o, val) in c.outputs.iter().zip(&r.outputs) {
                    md.rbs.insert(Behavior::new(src, dst, o.name.clone(), *val));
                }
                if visited.insert(r.next.clone()) {
                    next.push(r.next);
                }
            }
        }
        if new_proj {
            last_new = layer;
        }
        frontier = next;
    }
    if frontier.is_empty() || depth == Depth::Fixpoint {
        md.discovered_diameter = Some(last_new);
    }

    let reg_widths: Vec<u32> = c.registers.iter().map(|r| r.width).collect();
    for v in assignments(&reg_widths) {
        let src = project(&v);
        for inp in &input_vectors {
            md.trans.insert((src, project(&sim.next_state(&v, inp))));
        }
    }
    Ok(md)
}

/// Convenience for tests: the oracle's DCT set.
pub fn oracle_dct(md: &Metadata) -> BTreeSet<(StateId, StateId)> {
    md.trans
        .iter()
        .filter(|(a, b)| !md.rs.contains(a) && md.rs.contains(b))
        .copied()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_rtl;
    use crate::trojanlab::corpus;

    #[test]
    fn toggle() {
        let c = parse_rtl("circuit t\ninput a:1\nreg q:1 reset 0 next ~q\noutput y:1 = q\n").unwrap();
        let md = oracle_analyze(&c, &StateSpec::new(&c, &["q"]).unwrap(), Depth::Fixpoint).unwrap();
        assert_eq!(md.rs.len(), 2);
        let t: BTreeSet<_> = [(StateId(0), StateId(1)), (StateId(1), StateId(0))].into();
        assert_eq!(md.trans, t);
    }

    #[test]
    fn ima_ground_truth() {
        let c = corpus::ima();
        let md = oracle_analyze(&c, &StateSpec::new(&c, &["pcmSq"]).unwrap(), Depth::Cycles(7)).unwrap();
        assert_eq!(md.rs.len(), 6);
        assert!(md.trans.contains(&(StateId(6), StateId(0))));
        assert!(md.trans.contains(&(StateId(7), StateId(0))));
        assert_eq!(oracle_dct(&md).len(), 2);
        assert_eq!(md.discovered_diameter, Some(5));
    }

    #[test]
    fn refuses_large_circuits() {
        let c = parse_rtl("circuit big\ninput a:1\nreg q:24 reset 0 next q\noutput y:1 = a\n").unwrap();
        let r = oracle_analyze(&c, &StateSpec::new(&c, &["q"]).unwrap(), Depth::Cycles(1));
        assert!(matches!(r, Err(DetectError::TooLargeForOracle { bits: 25, .. })));
    }
}
