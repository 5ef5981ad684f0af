#![allow(dead_code)]

use std::collections::HashMap;

use dctforge_core::circuit::{BinOp, UnOp};
use dctforge_core::symcore::VarKey;
use dctforge_core::{ExprId, ExprStore};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Variables `v0..` with the given widths, all at step 0.
pub fn make_vars(store: &ExprStore, widths: &[u32]) -> Vec<(ExprId, u32)> {
    widths
        .iter()
        .enumerate()
        .map(|(i, &w)| (store.var(&format!("v{i}"), w, Some(0)), w))
        .collect()
}

/// Random expression of width `w` over `vars`, built without simplification.
pub fn random_expr(store: &ExprStore, rng: &mut ChaCha8Rng, vars: &[(ExprId, u32)], w: u32, depth: u32) -> ExprId {
    let leaf = depth == 0 || rng.gen_bool(0.2);
    if leaf {
        let same: Vec<_> = vars.iter().filter(|v| v.1 == w).collect();
        if !same.is_empty() && rng.gen_bool(0.7) {
            return same[rng.gen_range(0..same.len())].0;
        }
        if rng.gen_bool(0.5) {
            let (v, vw) = vars[rng.gen_range(0..vars.len())];
            return fit(store, rng, v, vw, w);
        }
        return store.konst(w, rng.gen());
    }
    let d = depth - 1;
    match rng.gen_range(0..12) {
        0 => store.unary(UnOp::Not, random_expr(store, rng, vars, w, d)),
        1 => store.unary(UnOp::Neg, random_expr(store, rng, vars, w, d)),
        2 if w == 1 => {
            let iw = rng.gen_range(1..=6);
            let op = if rng.gen() { UnOp::ReduceOr } else { UnOp::ReduceAnd };
            store.unary(op, random_expr(store, rng, vars, iw, d))
        }
        3 if w == 1 => {
            let iw = rng.gen_range(1..=6);
            let op = [BinOp::Eq, BinOp::Ne, BinOp::Ult][rng.gen_range(0..3)];
            let a = random_expr(store, rng, vars, iw, d);
            let b = random_expr(store, rng, vars, iw, d);
            store.binary(op, a, b)
        }
        4 => {
            let c = random_expr(store, rng, vars, 1, d);
            let t = random_expr(store, rng, vars, w, d);
            let e = random_expr(store, rng, vars, w, d);
            store.mux(c, t, e)
        }
        5 => {
            let sw = rng.gen_range(1..=3);
            let s = random_expr(store, rng, vars, sw, d);
            let n = rng.gen_range(1..=3);
            let arms = (0..n)
                .map(|_| (rng.gen_range(0..1u64 << sw), random_expr(store, rng, vars, w, d)))
                .collect();
            let default = random_expr(store, rng, vars, w, d);
            store.case(s, arms, default)
        }
        6 => {
            let extra = rng.gen_range(0..=3);
            let lo = rng.gen_range(0..=extra);
            let inner = random_expr(store, rng, vars, w + extra, d);
            store.slice(inner, lo + w - 1, lo)
        }
        7 if w >= 2 => {
            let hi = rng.gen_range(1..w);
            let a = random_expr(store, rng, vars, hi, d);
            let b = random_expr(store, rng, vars, w - hi, d);
            store.concat(vec![a, b])
        }
        8 if w >= 2 => {
            let iw = rng.gen_range(1..w);
            store.zext(random_expr(store, rng, vars, iw, d), w)
        }
        9 => {
            let a = random_expr(store, rng, vars, w, d);
            let bw = rng.gen_range(1..=3);
            let b = random_expr(store, rng, vars, bw, d);
            store.binary(BinOp::Shl, a, b)
        }
        _ => {
            let op = [BinOp::And, BinOp::Or, BinOp::Xor, BinOp::Add, BinOp::Sub][rng.gen_range(0..5)];
            let a = random_expr(store, rng, vars, w, d);
            let b = random_expr(store, rng, vars, w, d);
            store.binary(op, a, b)
        }
    }
}

fn fit(store: &ExprStore, rng: &mut ChaCha8Rng, v: ExprId, vw: u32, w: u32) -> ExprId {
    use std::cmp::Ordering::*;
    match vw.cmp(&w) {
        Equal => v,
        Greater => {
            let lo = rng.gen_range(0..=vw - w);
            store.slice(v, lo + w - 1, lo)
        }
        Less => store.zext(v, w),
    }
}

/// Calls `f` with a lookup for every assignment of `vars`.
pub fn for_each_assignment(vars: &[(ExprId, u32)], mut f: impl FnMut(&HashMap<VarKey, u64>)) {
    let total: u32 = vars.iter().map(|v| v.1).sum();
    assert!(total <= 16, "exhaustive enumeration too large");
    let keys: Vec<VarKey> = (0..vars.len())
        .map(|i| VarKey {
            name: format!("v{i}").into(),
            step: Some(0),
        })
        .collect();
    for mut k in 0..1u64 << total {
        let mut m = HashMap::new();
        for (key, &(_, w)) in keys.iter().zip(vars) {
            m.insert(key.clone(), k & ((1 << w) - 1));
            k >>= w;
        }
        f(&m);
    }
}

pub fn lookup(m: &HashMap<VarKey, u64>) -> impl Fn(&VarKey) -> u64 + '_ {
    move |k| m.get(k).copied().unwrap_or(0)
}

/// Feasible random generator parameters within the generator's caps.
pub fn random_params(rng: &mut ChaCha8Rng) -> dctforge_core::FsmParams {
    let state_bits = rng.gen_range(1..=4u32);
    let input_bits = rng.gen_range(0..=3u32);
    let n = 1usize << state_bits;
    let r = rng.gen_range(1..=n);
    let per_state = (1usize << input_bits.min(2)).min(r);
    let dct_count = rng.gen_range(0..=(n - r) * per_state);
    dctforge_core::FsmParams {
        state_bits,
        input_bits,
        reachable_fraction: r as f64 / n as f64,
        dct_count,
    }
}
