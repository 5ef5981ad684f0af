use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dctforge_core::trojanlab::corpus;
use dctforge_core::{
    compute_dct, detect_trojan, gen_random_fsm, oracle_analyze, Circuit, Depth, ExploreConfig, ExprStore, FsmParams,
    Mode, StateSpec,
};

fn config(c: &Circuit, reg: &str, mode: Mode) -> ExploreConfig {
    ExploreConfig::new(c, StateSpec::new(c, &[reg]).unwrap())
        .with_depth(Depth::Cycles(7))
        .with_mode(mode)
}

fn dct(cr: &mut Criterion) {
    let ima = corpus::ima();
    let mut g = cr.benchmark_group("compute_dct_ima");
    for mode in [Mode::Bfs, Mode::BfsPrune] {
        let cfg = config(&ima, "pcmSq", mode);
        g.bench_with_input(BenchmarkId::from_parameter(mode), &cfg, |b, cfg| {
            b.iter(|| compute_dct(&ExprStore::new(), black_box(&ima), cfg).unwrap())
        });
    }
    g.finish();
}

fn trojan(cr: &mut Criterion) {
    let c = corpus::ima_trojan();
    let cfg = config(&c, "pcmSq", Mode::BfsPrune);
    cr.bench_function("detect_trojan_ima", |b| {
        b.iter(|| detect_trojan(&ExprStore::new(), black_box(&c), &cfg).unwrap())
    });
}

fn engine_vs_oracle(cr: &mut Criterion) {
    let p = FsmParams {
        state_bits: 4,
        input_bits: 3,
        reachable_fraction: 0.5,
        dct_count: 8,
    };
    let c = gen_random_fsm(7, p).unwrap();
    let cfg = ExploreConfig::new(&c, StateSpec::new(&c, &["state"]).unwrap());
    let mut g = cr.benchmark_group("random_fsm_16_states");
    g.bench_function("engine", |b| b.iter(|| compute_dct(&ExprStore::new(), black_box(&c), &cfg).unwrap()));
    g.bench_function("oracle", |b| {
        b.iter(|| oracle_analyze(black_box(&c), &cfg.state_spec, Depth::Fixpoint).unwrap())
    });
    g.finish();
}

criterion_group!(benches, dct, trojan, engine_vs_oracle);
criterion_main!(benches);
