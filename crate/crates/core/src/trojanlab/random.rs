use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::TrojanError;
use crate::circuit::{self, BinOp, Circuit, Expr, Input, Net, Output, Register};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FsmParams {
    /// 1..=4
    pub state_bits: u32,
    /// 0..=3
    pub input_bits: u32,
    /// Fraction of encodings reachable from reset, in (0, 1].
    pub reachable_fraction: f64,
    /// Exact number of unreachable-to-reachable edges.
    pub dct_count: usize,
}

/// Leaves of a decision tree over `bits` input bits, `in[bits[0]]` at the root.
fn tree(bits: &[u32], leaves: &[u64], width: u32) -> Expr {
    match bits.split_first() {
        None => Expr::konst(width, leaves[0]),
        Some((&b, rest)) => {
            let half = leaves.len() / 2;
            Expr::mux(
                Expr::slice(Expr::var("in"), b, b),
                tree(rest, &leaves[half..], width),
                tree(rest, &leaves[..half], width),
            )
        }
    }
}

/// A seeded random `case`-based FSM with a known reachable set and DCT count.
///
/// Register `state`, input `in`, net `nxt`, output `hit` marking the first
/// transition out of reset.
pub fn gen_random_fsm(seed: u64, p: FsmParams) -> Result<Circuit, TrojanError> {
    if !(1..=4).contains(&p.state_bits) {
        return Err(TrojanError::InfeasibleParams("state_bits must be 1..=4".into()));
    }
    if p.input_bits > 3 {
        return Err(TrojanError::InfeasibleParams("input_bits must be 0..=3".into()));
    }
    if !(p.reachable_fraction > 0.0 && p.reachable_fraction <= 1.0) {
        return Err(TrojanError::InfeasibleParams("reachable_fraction must be in (0, 1]".into()));
    }
    let n = 1usize << p.state_bits;
    let r = ((p.reachable_fraction * n as f64).round() as usize).clamp(1, n);
    let unreachable = n - r;
    let tree_bits = p.input_bits.min(2);
    let max_leaves = 1usize << tree_bits;
    let per_state = max_leaves.min(r);
    if p.dct_count > unreachable * per_state {
        return Err(TrojanError::InfeasibleParams(format!(
            "{} DCT edges requested but at most {} fit ({} unreachable states, {} targets each)",
            p.dct_count,
            unreachable * per_state,
            unreachable,
            per_state
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut states: Vec<u64> = (0..n as u64).collect();
    states.shuffle(&mut rng);
    let reach: Vec<u64> = states[..r].to_vec();
    let mut unreach: Vec<u64> = states[r..].to_vec();
    unreach.sort_unstable();
    let w = p.state_bits;

    let pick_bits = |rng: &mut ChaCha8Rng, k: u32| -> Vec<u32> {
        let mut all: Vec<u32> = (0..p.input_bits).collect();
        all.shuffle(rng);
        all.truncate(k as usize);
        all
    };

    let mut arms: Vec<(u64, Expr)> = Vec::new();
    for (i, &s) in reach.iter().enumerate() {
        let chain = reach[(i + 1) % r];
        let k = rng.gen_range(0..=tree_bits);
        let bits = pick_bits(&mut rng, k);
        let mut leaves: Vec<u64> = (0..1usize << k).map(|_| reach[rng.gen_range(0..r)]).collect();
        let slot = rng.gen_range(0..leaves.len());
        leaves[slot] = chain;
        arms.push((s, tree(&bits, &leaves, w)));
    }

    let mut quota = vec![0usize; unreachable];
    let mut order: Vec<usize> = (0..unreachable).collect();
    order.shuffle(&mut rng);
    let mut left = p.dct_count;
    while left > 0 {
        for &u in &order {
            if left > 0 && quota[u] < per_state {
                quota[u] += 1;
                left -= 1;
            }
        }
    }
    for (ui, &u) in unreach.iter().enumerate() {
        let q = quota[ui];
        if q == 0 {
            continue;
        }
        let mut targets = reach.clone();
        targets.shuffle(&mut rng);
        targets.truncate(q);
        let k = (usize::BITS - (q - 1).leading_zeros()).min(tree_bits);
        let bits = pick_bits(&mut rng, k);
        let leaves: Vec<u64> = (0..1usize << k).map(|j| targets[j % q]).collect();
        arms.push((u, tree(&bits, &leaves, w)));
    }
    arms.sort_by_key(|(k, _)| *k);

    let reset = reach[0];
    let first = reach[1 % r];
    let mut c = Circuit::new(format!("rand_fsm_{seed}"));
    if p.input_bits > 0 {
        c.inputs.push(Input {
            name: "in".into(),
            width: p.input_bits,
        });
    }
    c.nets.push(Net {
        name: "nxt".into(),
        width: w,
        expr: Expr::Case {
            scrutinee: Box::new(Expr::var("state")),
            arms,
            default: Box::new(Expr::var("state")),
        },
    });
    c.registers.push(Register {
        name: "state".into(),
        width: w,
        reset_value: reset,
        next: Expr::var("nxt"),
    });
    c.outputs.push(Output {
        name: "hit".into(),
        width: 1,
        expr: Expr::and(
            Expr::eq(Expr::var("state"), Expr::konst(w, reset)),
            Expr::binary(BinOp::Eq, Expr::var("nxt"), Expr::konst(w, first)),
        ),
    });
    Ok(circuit::finish(c)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::print_rtl;

    fn params(dct: usize) -> FsmParams {
        FsmParams {
            state_bits: 3,
            input_bits: 2,
            reachable_fraction: 0.75,
            dct_count: dct,
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let a = gen_random_fsm(1, params(2)).unwrap();
        let b = gen_random_fsm(1, params(2)).unwrap();
        assert_eq!(a, b);
        assert_eq!(print_rtl(&a), print_rtl(&b));
        let c = gen_random_fsm(2, params(2)).unwrap();
        assert_ne!(print_rtl(&a), print_rtl(&c));
    }

    #[test]
    fn infeasible_requests() {
        // 2 unreachable states with at most 4 targets each
        assert!(matches!(gen_random_fsm(1, params(9)), Err(TrojanError::InfeasibleParams(_))));
        let mut p = params(0);
        p.state_bits = 5;
        assert!(gen_random_fsm(1, p).is_err());
        let mut p = params(1);
        p.reachable_fraction = 1.0;
        assert!(gen_random_fsm(1, p).is_err());
    }

    #[test]
    fn no_inputs_supported() {
        let p = FsmParams {
            state_bits: 2,
            input_bits: 0,
            reachable_fraction: 0.5,
            dct_count: 2,
        };
        let c = gen_random_fsm(3, p).unwrap();
        assert!(c.inputs.is_empty());
    }
}
