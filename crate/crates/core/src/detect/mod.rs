//! Don't-care transition computation and three-stage Trojan detection.

mod oracle;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;
use tracing::info;

use crate::circuit::sim::Simulator;
use crate::circuit::{Circuit, StateId, StateSpec};
use crate::engine::{
    explore, reset_state, symbolic_state, Behavior, Depth, EngineError, ExploreConfig, MetaKind, Metadata, Mode,
};
use crate::symcore::{find_model, ExprStore, SolverError, VarKey};

pub use oracle::{oracle_analyze, oracle_dct, ORACLE_MAX_BITS};

#[derive(Debug, Error)]
pub enum DetectError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("circuit has {bits} register and input bits; the oracle handles at most {cap}")]
    TooLargeForOracle { bits: u32, cap: u32 },
    #[error("stage three would start from {count} states (cap {cap})")]
    StageThreeExplosion { count: usize, cap: usize },
}

/// Concrete evidence for one don't-care transition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub source: StateId,
    pub dest: StateId,
    /// Full register valuation before the transition.
    pub registers: BTreeMap<String, u64>,
    /// Input values during the transition cycle.
    pub inputs: BTreeMap<String, u64>,
}

impl Witness {
    /// Simulates one cycle from the witness and checks it lands on `dest`.
    pub fn replays(&self, c: &Circuit, spec: &StateSpec) -> bool {
        let sim = Simulator::new(c);
        let regs: Vec<u64> = c
            .registers
            .iter()
            .map(|r| self.registers.get(&r.name).copied().unwrap_or(0))
            .collect();
        let inputs: Vec<u64> = c
            .inputs
            .iter()
            .map(|i| self.inputs.get(&i.name).copied().unwrap_or(0))
            .collect();
        let project = |vals: &[u64]| {
            let parts: Vec<u64> = spec
                .registers()
                .iter()
                .map(|n| vals[c.registers.iter().position(|r| &r.name == n).unwrap()])
                .collect();
            spec.join(&parts)
        };
        let next = sim.next_state(&regs, &inputs);
        project(&regs) == self.source && project(&next) == self.dest
    }
}

#[derive(Debug, Clone)]
pub struct DctReport {
    pub rs: BTreeSet<StateId>,
    pub trans: BTreeSet<(StateId, StateId)>,
    pub dct: BTreeSet<(StateId, StateId)>,
    pub dest: BTreeSet<StateId>,
    pub witnesses: BTreeMap<(StateId, StateId), Witness>,
    pub constraint_dumps: BTreeMap<(StateId, StateId), String>,
    /// Reachability from reset.
    pub stage1: Metadata,
    /// One step from the fully symbolic state.
    pub stage2: Metadata,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    TrojanDetected,
    NoDct,
    Clean,
}

/// Output values seen on one transition, before and after a DCT.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransitionRow {
    pub src: StateId,
    pub dst: StateId,
    pub output: String,
    pub stage1: BTreeSet<u64>,
    pub stage3: BTreeSet<u64>,
    pub deviant: BTreeSet<u64>,
}

impl TransitionRow {
    pub fn reveals(&self) -> bool {
        !self.deviant.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct DestReport {
    pub rbs_prime: BTreeSet<Behavior>,
    pub dbs: BTreeSet<Behavior>,
    pub start_states: usize,
    pub metadata: Metadata,
}

#[derive(Debug, Clone)]
pub struct TrojanReport {
    pub dct: DctReport,
    pub rbs: BTreeSet<Behavior>,
    pub per_dest: BTreeMap<StateId, DestReport>,
    /// Union of every destination's deviant behaviors.
    pub dbs: BTreeSet<Behavior>,
    pub table: Vec<TransitionRow>,
    pub verdict: Verdict,
}

/// Stage 1 (reachability from reset) and stage 2 (one step from a fully
/// symbolic state), then DCT = transitions leaving unreachable states for reachable ones.
pub fn compute_dct(store: &ExprStore, c: &Circuit, cfg: &ExploreConfig) -> Result<DctReport, DetectError> {
    let spec = &cfg.state_spec;
    let stage1 = explore(store, c, &[reset_state(store, c)], cfg, MetaKind::Reach)?;
    info!(event = "stage1_done", rs = stage1.rs.len(), behaviors = stage1.rbs.len());

    let mut cfg2 = cfg.clone();
    cfg2.depth = Depth::Cycles(1);
    cfg2.mode = Mode::Bfs;
    let stage2 = explore(store, c, &[symbolic_state(store, c, spec)], &cfg2, MetaKind::States)?;
    info!(event = "stage2_done", trans = stage2.trans.len());

    let rs = stage1.rs.clone();
    let dct: BTreeSet<(StateId, StateId)> = stage2
        .trans
        .iter()
        .filter(|(s1, s2)| !rs.contains(s1) && rs.contains(s2))
        .copied()
        .collect();
    let dest = dct.iter().map(|e| e.1).collect();

    let mut witnesses = BTreeMap::new();
    let mut constraint_dumps = BTreeMap::new();
    for s in &stage2.sym_states {
        let (Some(src), Some(dst)) = (s.origin, s.concrete_projection(store, c, spec)) else {
            continue;
        };
        if !dct.contains(&(src, dst)) || witnesses.contains_key(&(src, dst)) {
            continue;
        }
        let model = find_model(store, &s.pc, &cfg.limits)?.expect("frontier states are satisfiable");
        let registers = c
            .registers
            .iter()
            .map(|r| {
                let key = VarKey {
                    name: r.name.as_str().into(),
                    step: None,
                };
                (r.name.clone(), model.var_value(&key))
            })
            .collect();
        let inputs = c
            .inputs
            .iter()
            .map(|i| {
                let key = VarKey {
                    name: i.name.as_str().into(),
                    step: Some(s.frame - 1),
                };
                (i.name.clone(), model.var_value(&key))
            })
            .collect();
        witnesses.insert(
            (src, dst),
            Witness {
                source: src,
                dest: dst,
                registers,
                inputs,
            },
        );
        let text = if s.pc.is_empty() {
            "true".to_string()
        } else {
            s.pc.iter().map(|&e| store.display(e)).collect::<Vec<_>>().join(" && ")
        };
        constraint_dumps.insert((src, dst), text);
    }

    Ok(DctReport {
        rs,
        trans: stage2.trans.clone(),
        dct,
        dest,
        witnesses,
        constraint_dumps,
        stage1,
        stage2,
    })
}

/// Exact set difference on behavior keys.
pub fn diff_behaviors(base: &BTreeSet<Behavior>, probe: &BTreeSet<Behavior>) -> BTreeSet<Behavior> {
    probe.difference(base).cloned().collect()
}

pub fn detect_trojan(store: &ExprStore, c: &Circuit, cfg: &ExploreConfig) -> Result<TrojanReport, DetectError> {
    let dct = compute_dct(store, c, cfg)?;
    let rbs = dct.stage1.rbs.clone();
    if dct.dct.is_empty() {
        let table = build_table(&rbs, &BTreeSet::new());
        return Ok(TrojanReport {
            dct,
            rbs,
            per_dest: BTreeMap::new(),
            dbs: BTreeSet::new(),
            table,
            verdict: Verdict::NoDct,
        });
    }

    let spec = &cfg.state_spec;
    let mut by_dest: BTreeMap<StateId, Vec<_>> = BTreeMap::new();
    let mut selected = 0usize;
    for s in &dct.stage2.sym_states {
        let Some(p) = s.concrete_projection(store, c, spec) else {
            continue;
        };
        if !dct.dest.contains(&p) {
            continue;
        }
        if cfg.dct_lineage_only && !s.origin.is_some_and(|o| dct.dct.contains(&(o, p))) {
            continue;
        }
        let mut start = s.clone();
        start.num_steps = 0;
        by_dest.entry(p).or_default().push(start);
        selected += 1;
    }
    if selected > cfg.path_cap {
        return Err(DetectError::StageThreeExplosion {
            count: selected,
            cap: cfg.path_cap,
        });
    }

    let mut cfg3 = cfg.clone();
    cfg3.depth = cfg.stage3_depth.unwrap_or(cfg.depth);
    let mut per_dest = BTreeMap::new();
    let mut dbs = BTreeSet::new();
    let mut stage3_all = BTreeSet::new();
    for (d, starts) in by_dest {
        let md = explore(store, c, &starts, &cfg3, MetaKind::Reach)?;
        let d_dbs = diff_behaviors(&rbs, &md.rbs);
        info!(event = "stage3_done", dest = d.0, starts = starts.len(), deviant = d_dbs.len());
        dbs.extend(d_dbs.iter().cloned());
        stage3_all.extend(md.rbs.iter().cloned());
        per_dest.insert(
            d,
            DestReport {
                rbs_prime: md.rbs.clone(),
                dbs: d_dbs,
                start_states: starts.len(),
                metadata: md,
            },
        );
    }
    let table = build_table(&rbs, &stage3_all);
    let verdict = if dbs.is_empty() {
        Verdict::Clean
    } else {
        Verdict::TrojanDetected
    };
    Ok(TrojanReport {
        dct,
        rbs,
        per_dest,
        dbs,
        table,
        verdict,
    })
}

fn build_table(stage1: &BTreeSet<Behavior>, stage3: &BTreeSet<Behavior>) -> Vec<TransitionRow> {
    type Key = (StateId, StateId, String);
    let mut rows: BTreeMap<Key, (BTreeSet<u64>, BTreeSet<u64>)> = BTreeMap::new();
    for b in stage1 {
        rows.entry((b.src, b.dst, b.output.clone())).or_default().0.insert(b.value);
    }
    for b in stage3 {
        rows.entry((b.src, b.dst, b.output.clone())).or_default().1.insert(b.value);
    }
    rows.into_iter()
        .map(|((src, dst, output), (s1, s3))| {
            let deviant = s3.difference(&s1).copied().collect();
            TransitionRow {
                src,
                dst,
                output,
                stage1: s1,
                stage3: s3,
                deviant,
            }
        })
        .collect()
}
