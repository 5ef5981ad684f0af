mod common;

use std::collections::BTreeSet;

use dctforge_core::circuit::sim::Simulator;
use dctforge_core::detect::oracle_dct;
use dctforge_core::engine::reset_state;
use dctforge_core::symcore::{all_values, is_satisfiable, SolverLimits};
use dctforge_core::trojanlab::corpus;
use dctforge_core::{
    compute_dct, explore, gen_random_fsm, inject_trojan, oracle_analyze, parse_blif, parse_rtl, print_rtl, Circuit,
    Depth, ExploreConfig, ExprStore, MetaKind, Mode, PayloadSpec, StateSpec, TriggerSpec,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cfg(c: &Circuit, regs: &[&str], depth: Depth, mode: Mode) -> ExploreConfig {
    ExploreConfig::new(c, StateSpec::new(c, regs).unwrap()).with_depth(depth).with_mode(mode)
}

fn random_fsm(seed: u64) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = common::random_params(&mut rng);
    gen_random_fsm(seed, p).unwrap()
}

/// Random variable widths with at most `budget` total bits.
fn random_widths(rng: &mut ChaCha8Rng, budget: u32) -> Vec<u32> {
    let mut left = budget;
    let mut out = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        if left == 0 {
            break;
        }
        let w = rng.gen_range(1..=left.min(5));
        out.push(w);
        left -= w;
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn simplify_preserves_semantics_and_is_idempotent(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let store = ExprStore::new();
        let vars = common::make_vars(&store, &random_widths(&mut rng, 10));
        let w = rng.gen_range(1..=6);
        let e = common::random_expr(&store, &mut rng, &vars, w, 4);
        let s = store.simplify(e);
        prop_assert_eq!(store.width(s), w);
        prop_assert_eq!(store.simplify(s), s);
        let mut bad = None;
        common::for_each_assignment(&vars, |m| {
            let l = common::lookup(m);
            if bad.is_none() && store.eval(e, &l) != store.eval(s, &l) {
                bad = Some(m.clone());
            }
        });
        prop_assert!(bad.is_none(), "{} vs {} under {:?}", store.display(e), store.display(s), bad);
    }

    #[test]
    fn solver_agrees_with_enumeration(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let store = ExprStore::new();
        let vars = common::make_vars(&store, &random_widths(&mut rng, 12));
        let e = common::random_expr(&store, &mut rng, &vars, 1, 4);
        let mut expected = false;
        common::for_each_assignment(&vars, |m| expected |= store.eval(e, &common::lookup(m)) == 1);
        prop_assert_eq!(is_satisfiable(&store, &[e], &SolverLimits::default()).unwrap(), expected);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn all_values_matches_enumeration(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let store = ExprStore::new();
        let vars = common::make_vars(&store, &random_widths(&mut rng, 10));
        let w = rng.gen_range(1..=5);
        let e = common::random_expr(&store, &mut rng, &vars, w, 3);
        let guard = common::random_expr(&store, &mut rng, &vars, 1, 2);
        let mut expected = BTreeSet::new();
        common::for_each_assignment(&vars, |m| {
            let l = common::lookup(m);
            if store.eval(guard, &l) == 1 {
                expected.insert(store.eval(e, &l));
            }
        });
        let got = all_values(&store, e, &[guard], 64, &SolverLimits::default()).unwrap();
        prop_assert_eq!(got, expected);
    }
}

#[test]
fn four_bit_arithmetic_matches_integers() {
    use dctforge_core::circuit::BinOp;
    let store = ExprStore::new();
    let a = store.var("a", 4, Some(0));
    let b = store.var("b", 4, Some(0));
    let limits = SolverLimits::default();
    for x in 0..16u64 {
        for y in 0..16u64 {
            let pc = [store.eq_const(a, x), store.eq_const(b, y)];
            for (op, f) in [
                (BinOp::Add, (x + y) & 15),
                (BinOp::Sub, x.wrapping_sub(y) & 15),
                (BinOp::Ult, (x < y) as u64),
                (BinOp::Shl, if y < 4 { (x << y) & 15 } else { 0 }),
            ] {
                let e = store.binary(op, a, b);
                let vals = all_values(&store, e, &pc, 64, &limits).unwrap();
                assert_eq!(vals, BTreeSet::from([f]), "{x} {op:?} {y}");
            }
        }
    }
}

#[test]
fn corpus_round_trips_through_printer() {
    let mut circuits: Vec<Circuit> = corpus::all().into_iter().map(|e| e.circuit).collect();
    circuits.extend((0..50).map(random_fsm));
    for c in circuits {
        let text = print_rtl(&c);
        let back = parse_rtl(&text).unwrap();
        assert_eq!(back, c, "{}", c.name);
        assert_eq!(print_rtl(&back), text);
    }
}

#[test]
fn rtl_and_blif_frontends_agree() {
    let rtl = corpus::ima();
    let blif = corpus::ima_blif();
    let store = ExprStore::new();
    let a = compute_dct(&store, &rtl, &cfg(&rtl, &["pcmSq"], Depth::Cycles(7), Mode::BfsPrune)).unwrap();
    let b = compute_dct(&store, &blif, &cfg(&blif, &["q2", "q1", "q0"], Depth::Cycles(7), Mode::BfsPrune)).unwrap();
    assert_eq!(a.rs, b.rs);
    assert_eq!(a.trans, b.trans);
    assert_eq!(a.dct, b.dct);

    // cycle-accurate agreement on a seeded input trace
    let (sr, sb) = (Simulator::new(&rtl), Simulator::new(&blif));
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut r = sr.reset_values();
    let mut bl = sb.reset_values();
    for _ in 0..200 {
        let valid = rng.gen_range(0..2);
        let rin: Vec<u64> = rtl.inputs.iter().map(|i| if i.name == "inValid" { valid } else { rng.gen_range(0..4) }).collect();
        let bin: Vec<u64> = blif.inputs.iter().map(|i| if i.name == "inValid" { valid } else { 0 }).collect();
        let x = sr.step(&r, &rin);
        let y = sb.step(&bl, &bin);
        assert_eq!(x.outputs[0], y.outputs[blif.outputs.iter().position(|o| o.name == "outValid").unwrap()]);
        r = x.next;
        bl = y.next;
        assert_eq!(r[0], (bl[0] << 2) | (bl[1] << 1) | bl[2]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    /// Mutated sources either parse into a valid circuit or fail cleanly.
    #[test]
    fn mutated_sources_never_panic(seed in any::<u64>(), blif in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = if blif { corpus::IMA_BLIF } else { corpus::IMA_RTL };
        let mut bytes = base.as_bytes().to_vec();
        const ALPHABET: &[u8] = b"abqs019:;=?()[]{}<>+-~&|^'dbh,. \n";
        for _ in 0..rng.gen_range(1..=4) {
            let at = rng.gen_range(0..bytes.len());
            match rng.gen_range(0..3) {
                0 => { bytes.remove(at); }
                1 => bytes.insert(at, ALPHABET[rng.gen_range(0..ALPHABET.len())]),
                _ => bytes[at] = ALPHABET[rng.gen_range(0..ALPHABET.len())],
            }
        }
        let text = String::from_utf8_lossy(&bytes);
        let parsed = if blif { parse_blif(&text) } else { parse_rtl(&text) };
        if let Ok(c) = parsed {
            prop_assert!(c.validate().is_ok());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn generator_dct_count_is_exact(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = common::random_params(&mut rng);
        let c = gen_random_fsm(seed, p).unwrap();
        let spec = StateSpec::new(&c, &["state"]).unwrap();
        let o = oracle_analyze(&c, &spec, Depth::Fixpoint).unwrap();
        prop_assert_eq!(oracle_dct(&o).len(), p.dct_count);
        let expected_rs = ((p.reachable_fraction * (1u64 << p.state_bits) as f64).round()) as usize;
        prop_assert_eq!(o.rs.len(), expected_rs);
    }

    #[test]
    fn pruning_and_jobs_do_not_change_results(seed in any::<u64>()) {
        let c = random_fsm(seed);
        let store = ExprStore::new();
        let base = compute_dct(&store, &c, &cfg(&c, &["state"], Depth::Cycles(6), Mode::Bfs)).unwrap();
        let pruned = compute_dct(&store, &c, &cfg(&c, &["state"], Depth::Cycles(6), Mode::BfsPrune)).unwrap();
        let mut par = cfg(&c, &["state"], Depth::Cycles(6), Mode::BfsPrune);
        par.jobs = 3;
        let parallel = compute_dct(&store, &c, &par).unwrap();
        prop_assert_eq!(&base.rs, &pruned.rs);
        prop_assert_eq!(&base.trans, &pruned.trans);
        prop_assert_eq!(&base.dct, &pruned.dct);
        prop_assert_eq!(&pruned.rs, &parallel.rs);
        prop_assert_eq!(&pruned.stage1.rbs, &parallel.stage1.rbs);
        prop_assert_eq!(&pruned.witnesses, &parallel.witnesses);
    }

    #[test]
    fn reachable_set_grows_with_depth(seed in any::<u64>()) {
        let c = random_fsm(seed);
        let store = ExprStore::new();
        let init = [reset_state(&store, &c)];
        let mut prev = BTreeSet::new();
        for k in 0..=17 {
            let md = explore(&store, &c, &init, &cfg(&c, &["state"], Depth::Cycles(k), Mode::BfsPrune), MetaKind::Reach).unwrap();
            prop_assert!(prev.is_subset(&md.rs), "depth {}", k);
            prev = md.rs;
        }
        let fix = explore(&store, &c, &init, &cfg(&c, &["state"], Depth::Fixpoint, Mode::BfsPrune), MetaKind::Reach).unwrap();
        prop_assert_eq!(prev, fix.rs);
    }

    #[test]
    fn injection_preserves_honest_behavior(seed in any::<u64>()) {
        let c = random_fsm(seed);
        let spec = StateSpec::new(&c, &["state"]).unwrap();
        let o = oracle_analyze(&c, &spec, Depth::Fixpoint).unwrap();
        let dcts = oracle_dct(&o);
        prop_assume!(!dcts.is_empty());
        let trig = TriggerSpec { dct_edges: dcts, state_spec: spec };
        let pay: PayloadSpec = "stuck-at:hit:1".parse().unwrap();
        let t = inject_trojan(&c, &trig, &pay).unwrap();
        let store = ExprStore::new();
        let config = |x: &Circuit| cfg(x, &["state"], Depth::Fixpoint, Mode::BfsPrune);
        let clean = explore(&store, &c, &[reset_state(&store, &c)], &config(&c), MetaKind::Reach).unwrap();
        let dirty = explore(&store, &t, &[reset_state(&store, &t)], &config(&t), MetaKind::Reach).unwrap();
        prop_assert_eq!(clean.rs, dirty.rs);
        prop_assert_eq!(clean.rbs, dirty.rbs);
    }
}

#[test]
fn injection_preserves_honest_ima() {
    let store = ExprStore::new();
    let run = |c: &Circuit| {
        explore(&store, c, &[reset_state(&store, c)], &cfg(c, &["pcmSq"], Depth::Cycles(7), Mode::BfsPrune), MetaKind::Reach)
            .unwrap()
    };
    let clean = run(&corpus::ima());
    for trojaned in std::iter::once(corpus::ima_trojan()).chain(
        corpus::VARIANTS.iter().filter(|v| v.1 == 0).map(|v| corpus::variant(v.0, v.1).unwrap()),
    ) {
        let dirty = run(&trojaned);
        assert_eq!(clean.rs, dirty.rs);
        assert_eq!(clean.rbs, dirty.rbs);
    }
}
