//! Bounded symbolic execution over clock cycles.
//!
//! A [`SymState`] holds one symbolic expression per register plus a path
//! constraint. [`step_cycle`] advances it by one clock edge, splitting into
//! one successor per feasible `(source, destination)` projection pair, and
//! [`explore`] schedules those steps layer by layer.

mod metadata;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;
use tracing::{debug, info};

use crate::circuit::{Circuit, Expr, SignalKind, StateId, StateSpec};
use crate::symcore::{all_solutions, all_values, is_satisfiable, ExprId, ExprStore, SolverError, SolverLimits, VarKey};

pub use metadata::{Behavior, MetaKind, Metadata, Warning};

pub const DEFAULT_PATH_CAP: usize = 4096;
pub const DEFAULT_VALUE_CAP: usize = crate::symcore::enumerate::DEFAULT_VALUE_CAP;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Depth {
    Cycles(u32),
    /// Run until a layer discovers no new state.
    Fixpoint,
}

impl FromStr for Depth {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("fixpoint") {
            return Ok(Depth::Fixpoint);
        }
        s.parse::<u32>()
            .map(Depth::Cycles)
            .map_err(|_| format!("expected a cycle count or `fixpoint`, got `{s}`"))
    }
}

impl fmt::Display for Depth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Depth::Cycles(n) => write!(f, "{n}"),
            Depth::Fixpoint => f.write_str("fixpoint"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Bfs,
    BfsPrune,
    /// Keeps a single successor per step; under-approximates reachability.
    Partial,
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "bfs" => Ok(Mode::Bfs),
            "bfs-prune" => Ok(Mode::BfsPrune),
            "partial" => Ok(Mode::Partial),
            _ => Err(format!("unknown mode `{s}` (bfs, bfs-prune, partial)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Bfs => "bfs",
            Mode::BfsPrune => "bfs-prune",
            Mode::Partial => "partial",
        })
    }
}

#[derive(Debug, Clone)]
pub struct ExploreConfig {
    pub depth: Depth,
    pub mode: Mode,
    pub state_spec: StateSpec,
    pub monitored_outputs: Vec<String>,
    /// 1-bit constraints over registers and inputs, conjoined every cycle.
    pub assumes: Vec<Expr>,
    /// Cap on distinct values of one monitored output per transition.
    pub value_cap: usize,
    /// Cap on successors of one step (and on projection enumerations).
    pub path_cap: usize,
    pub limits: SolverLimits,
    /// Worker threads; 0 picks the number of CPUs.
    pub jobs: usize,
    /// Depth of the third detection stage; defaults to `depth`.
    pub stage3_depth: Option<Depth>,
    /// Restrict the third stage to states whose source is a DCT source.
    pub dct_lineage_only: bool,
}

impl ExploreConfig {
    /// Defaults: fixpoint depth, pruned BFS, every output monitored.
    pub fn new(c: &Circuit, state_spec: StateSpec) -> Self {
        ExploreConfig {
            depth: Depth::Fixpoint,
            mode: Mode::BfsPrune,
            state_spec,
            monitored_outputs: c.outputs.iter().map(|o| o.name.clone()).collect(),
            assumes: Vec::new(),
            value_cap: DEFAULT_VALUE_CAP,
            path_cap: DEFAULT_PATH_CAP,
            limits: SolverLimits::default(),
            jobs: 1,
            stage3_depth: None,
            dct_lineage_only: false,
        }
    }

    pub fn with_depth(mut self, depth: Depth) -> Self {
        self.depth = depth;
        self
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn validate(&self, c: &Circuit) -> Result<(), EngineError> {
        for (name, &w) in self.state_spec.registers().iter().zip(self.state_spec.widths()) {
            match c.register(name) {
                Some(r) if r.width == w => {}
                _ => return Err(EngineError::Config(format!("state register `{name}` not in circuit"))),
            }
        }
        for o in &self.monitored_outputs {
            if c.output(o).is_none() {
                return Err(EngineError::Config(format!("unknown monitored output `{o}`")));
            }
        }
        for (i, a) in self.assumes.iter().enumerate() {
            match c.check_expr(a, "<assume>") {
                Ok(1) => {}
                Ok(w) => return Err(EngineError::Config(format!("assumption {i} has width {w}, expected 1"))),
                Err(v) => return Err(EngineError::Config(format!("assumption {i} is ill-formed: {v:?}"))),
            }
        }
        if self.value_cap == 0 || self.path_cap == 0 {
            return Err(EngineError::Config("caps must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("path explosion: more than {cap} successors in one step")]
    PathExplosion { cap: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// A symbolic execution state.
#[derive(Debug, Clone)]
pub struct SymState {
    /// One expression per circuit register, in declaration order.
    pub regs: Vec<ExprId>,
    /// Conjunction of 1-bit constraints.
    pub pc: Vec<ExprId>,
    pub num_steps: u32,
    /// Global cycle index used to name fresh inputs; never reset, so input
    /// variables of successive stages stay distinct.
    pub frame: u32,
    /// Projection of the symbolic source this lineage split on, if any.
    pub origin: Option<StateId>,
}

impl SymState {
    pub fn reg(&self, c: &Circuit, name: &str) -> Option<ExprId> {
        c.registers.iter().position(|r| r.name == name).map(|i| self.regs[i])
    }

    /// Projection expression: state registers concatenated, first one most significant.
    pub fn projection_expr(&self, store: &ExprStore, c: &Circuit, spec: &StateSpec) -> ExprId {
        let parts = spec
            .registers()
            .iter()
            .map(|n| self.reg(c, n).expect("state register exists"))
            .collect();
        store.simplify(store.concat(parts))
    }

    /// The projection when it is a constant.
    pub fn concrete_projection(&self, store: &ExprStore, c: &Circuit, spec: &StateSpec) -> Option<StateId> {
        store
            .as_const(self.projection_expr(store, c, spec))
            .map(|v| StateId(v as u32))
    }
}

/// One successor produced by [`step_cycle`].
#[derive(Debug, Clone)]
pub struct Step {
    pub src: StateId,
    pub dst: StateId,
    pub state: SymState,
    /// Every circuit output evaluated during this cycle.
    pub outputs: Vec<(String, ExprId)>,
    /// The fresh input variables of this cycle.
    pub inputs: Vec<(String, ExprId)>,
}

pub fn reset_state(store: &ExprStore, c: &Circuit) -> SymState {
    SymState {
        regs: c.registers.iter().map(|r| store.konst(r.width, r.reset_value)).collect(),
        pc: Vec::new(),
        num_steps: 0,
        frame: 0,
        origin: None,
    }
}

/// Every register (state or not) becomes a fresh unconstrained variable.
pub fn symbolic_state(store: &ExprStore, c: &Circuit, _spec: &StateSpec) -> SymState {
    SymState {
        regs: c.registers.iter().map(|r| store.var(&r.name, r.width, None)).collect(),
        pc: Vec::new(),
        num_steps: 0,
        frame: 0,
        origin: None,
    }
}

pub fn step_cycle(store: &ExprStore, c: &Circuit, s: &SymState, cfg: &ExploreConfig) -> Result<Vec<Step>, EngineError> {
    Engine::new(store, c, cfg)?.step(s)
}

/// All values the state projection can take under the state's path constraint.
pub fn project(store: &ExprStore, c: &Circuit, s: &SymState, cfg: &ExploreConfig) -> Result<BTreeSet<StateId>, EngineError> {
    Engine::new(store, c, cfg)?.project(s)
}

pub fn explore(
    store: &ExprStore,
    c: &Circuit,
    init: &[SymState],
    cfg: &ExploreConfig,
    kind: MetaKind,
) -> Result<Metadata, EngineError> {
    Engine::new(store, c, cfg)?.explore(init, kind)
}

struct Engine<'a> {
    store: &'a ExprStore,
    c: &'a Circuit,
    cfg: &'a ExploreConfig,
    table: HashMap<String, (SignalKind, u32)>,
    order: Vec<usize>,
    spec_idx: Vec<usize>,
    monitored: Vec<usize>,
}

fn push_conj(store: &ExprStore, pc: &mut Vec<ExprId>, e: ExprId) {
    if store.as_const(e) != Some(1) {
        pc.push(e);
    }
}

impl<'a> Engine<'a> {
    fn new(store: &'a ExprStore, c: &'a Circuit, cfg: &'a ExploreConfig) -> Result<Self, EngineError> {
        cfg.validate(c)?;
        let table = c.signal_table().into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        let spec_idx = cfg
            .state_spec
            .registers()
            .iter()
            .map(|n| c.registers.iter().position(|r| &r.name == n).unwrap())
            .collect();
        let monitored = cfg
            .monitored_outputs
            .iter()
            .map(|n| c.outputs.iter().position(|o| &o.name == n).unwrap())
            .collect();
        Ok(Engine {
            store,
            c,
            cfg,
            table,
            order: c.net_order(),
            spec_idx,
            monitored,
        })
    }

    fn lower(&self, e: &Expr, regs: &[ExprId], inputs: &[ExprId], nets: &[ExprId]) -> ExprId {
        let st = self.store;
        let rec = |x: &Expr| self.lower(x, regs, inputs, nets);
        match e {
            Expr::Const { width, value } => st.konst(*width, *value),
            Expr::Ref(n) => match self.table[n.as_str()].0 {
                SignalKind::Input(i) => inputs[i],
                SignalKind::Register(i) => regs[i],
                SignalKind::Net(i) => nets[i],
            },
            Expr::Unary(op, a) => st.unary(*op, rec(a)),
            Expr::Binary(op, a, b) => st.binary(*op, rec(a), rec(b)),
            Expr::Mux(cnd, t, f) => st.mux(rec(cnd), rec(t), rec(f)),
            Expr::Case {
                scrutinee,
                arms,
                default,
            } => {
                let arms = arms.iter().map(|(k, a)| (*k, rec(a))).collect();
                st.case(rec(scrutinee), arms, rec(default))
            }
            Expr::Slice { expr, hi, lo } => st.slice(rec(expr), *hi, *lo),
            Expr::Concat(parts) => st.concat(parts.iter().map(rec).collect()),
            Expr::ZExt { expr, width } => st.zext(rec(expr), *width),
        }
    }

    fn projection(&self, regs: &[ExprId]) -> ExprId {
        let parts = self.spec_idx.iter().map(|&i| regs[i]).collect();
        self.store.simplify(self.store.concat(parts))
    }

    fn project(&self, s: &SymState) -> Result<BTreeSet<StateId>, EngineError> {
        let p = self.projection(&s.regs);
        if let Some(k) = self.store.as_const(p) {
            return Ok(BTreeSet::from([StateId(k as u32)]));
        }
        let vals = all_values(self.store, p, &s.pc, self.cfg.path_cap, &self.cfg.limits)?;
        Ok(vals.into_iter().map(|v| StateId(v as u32)).collect())
    }

    fn enumerate_states(&self, e: ExprId, pc: &[ExprId]) -> Result<Vec<u64>, EngineError> {
        match all_values(self.store, e, pc, self.cfg.path_cap, &self.cfg.limits) {
            Ok(v) => Ok(v.into_iter().collect()),
            Err(SolverError::CapExceeded { cap }) => Err(EngineError::PathExplosion { cap }),
            Err(e) => Err(e.into()),
        }
    }

    fn step(&self, s: &SymState) -> Result<Vec<Step>, EngineError> {
        let st = self.store;
        let c = self.c;
        let inputs: Vec<ExprId> = c.inputs.iter().map(|i| st.var(&i.name, i.width, Some(s.frame))).collect();
        let mut nets = vec![st.fals(); c.nets.len()];
        for &i in &self.order {
            let e = self.lower(&c.nets[i].expr, &s.regs, &inputs, &nets);
            nets[i] = st.simplify(e);
        }
        let lower = |e: &Expr| st.simplify(self.lower(e, &s.regs, &inputs, &nets));
        let outputs: Vec<(String, ExprId)> = c.outputs.iter().map(|o| (o.name.clone(), lower(&o.expr))).collect();
        let next: Vec<ExprId> = c.registers.iter().map(|r| lower(&r.next)).collect();

        let mut pc = s.pc.clone();
        for a in &self.cfg.assumes {
            let e = lower(a);
            if st.as_const(e) == Some(0) {
                return Ok(Vec::new());
            }
            push_conj(st, &mut pc, e);
        }
        let constrained = pc.len() != s.pc.len();

        let src_expr = self.projection(&s.regs);
        let dst_expr = self.projection(&next);
        let dsts = match st.as_const(dst_expr) {
            Some(k) => {
                if !constrained || is_satisfiable(st, &pc, &self.cfg.limits)? {
                    vec![k]
                } else {
                    Vec::new()
                }
            }
            None => self.enumerate_states(dst_expr, &pc)?,
        };

        let input_list: Vec<(String, ExprId)> = c.inputs.iter().map(|i| i.name.clone()).zip(inputs.iter().copied()).collect();
        let mut steps = Vec::new();
        for v in dsts {
            let mut pcv = pc.clone();
            push_conj(st, &mut pcv, st.simplify(st.eq_const(dst_expr, v)));
            let srcs: Vec<(u64, Vec<ExprId>, bool)> = match st.as_const(src_expr) {
                Some(u) => vec![(u, pcv, false)],
                None => self
                    .enumerate_states(src_expr, &pcv)?
                    .into_iter()
                    .map(|u| {
                        let mut p = pcv.clone();
                        push_conj(st, &mut p, st.simplify(st.eq_const(src_expr, u)));
                        (u, p, true)
                    })
                    .collect(),
            };
            let dst_vals = self.cfg.state_spec.split(StateId(v as u32));
            for (u, pcu, split_src) in srcs {
                let mut regs = next.clone();
                for (k, &ri) in self.spec_idx.iter().enumerate() {
                    regs[ri] = st.konst(c.registers[ri].width, dst_vals[k]);
                }
                let origin = s.origin.or(if split_src { Some(StateId(u as u32)) } else { None });
                debug!(event = "path_spawned", src = u, dst = v, step = s.num_steps + 1);
                steps.push(Step {
                    src: StateId(u as u32),
                    dst: StateId(v as u32),
                    state: SymState {
                        regs,
                        pc: pcu,
                        num_steps: s.num_steps + 1,
                        frame: s.frame + 1,
                        origin,
                    },
                    outputs: outputs.clone(),
                    inputs: input_list.clone(),
                });
                if steps.len() > self.cfg.path_cap {
                    return Err(EngineError::PathExplosion { cap: self.cfg.path_cap });
                }
            }
        }
        Ok(steps)
    }

    fn behaviors(&self, step: &Step) -> Result<Vec<Behavior>, EngineError> {
        let mut out = Vec::new();
        for &oi in &self.monitored {
            let (name, e) = &step.outputs[oi];
            let sols = all_solutions(self.store, *e, &step.state.pc, self.cfg.value_cap, &self.cfg.limits)?;
            for sol in sols {
                let witness: BTreeMap<String, u64> = step
                    .inputs
                    .iter()
                    .map(|(n, _)| {
                        let key = VarKey {
                            name: n.as_str().into(),
                            step: Some(step.state.frame - 1),
                        };
                        (n.clone(), sol.model.var_value(&key))
                    })
                    .collect();
                out.push(Behavior {
                    src: step.src,
                    dst: step.dst,
                    output: name.clone(),
                    value: sol.value,
                    witness: Some(witness),
                });
            }
        }
        Ok(out)
    }

    fn expand(&self, s: &SymState, kind: MetaKind) -> Result<Vec<(Step, Vec<Behavior>)>, EngineError> {
        let mut steps = self.step(s)?;
        if self.cfg.mode == Mode::Partial {
            steps.truncate(1);
        }
        steps
            .into_iter()
            .map(|step| {
                let b = match kind {
                    MetaKind::Reach => self.behaviors(&step)?,
                    MetaKind::States => Vec::new(),
                };
                Ok((step, b))
            })
            .collect()
    }

    /// Non-state registers that feed the state registers' next-state logic.
    fn foreign_control_registers(&self) -> Vec<String> {
        let mut regs = BTreeSet::new();
        let mut visited = HashSet::new();
        let mut stack: Vec<&Expr> = self.spec_idx.iter().map(|&i| &self.c.registers[i].next).collect();
        while let Some(e) = stack.pop() {
            e.for_each_ref(&mut |n| {
                if !visited.insert(n.to_string()) {
                    return;
                }
                match self.table[n].0 {
                    SignalKind::Register(i) => {
                        if !self.spec_idx.contains(&i) {
                            regs.insert(n.to_string());
                        }
                    }
                    SignalKind::Net(i) => stack.push(&self.c.nets[i].expr),
                    SignalKind::Input(_) => {}
                }
            });
        }
        regs.into_iter().collect()
    }

    fn explore(&self, init: &[SymState], kind: MetaKind) -> Result<Metadata, EngineError> {
        let cfg = self.cfg;
        let mut md = Metadata::new(kind);
        let mut seen = BTreeSet::new();
        for s in init {
            for id in self.project(s)? {
                seen.insert(id);
                if kind == MetaKind::Reach {
                    md.rs.insert(id);
                }
            }
        }
        if cfg.mode == Mode::BfsPrune {
            let foreign = self.foreign_control_registers();
            if !foreign.is_empty() {
                md.warnings.push(Warning::PruningMayUnderApproximate { registers: foreign });
            }
        }
        let (max_layers, fixpoint) = match cfg.depth {
            Depth::Cycles(d) => (d, false),
            Depth::Fixpoint => {
                let w = cfg.state_spec.total_width();
                ((1u32 << w).saturating_add(1), true)
            }
        };
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| EngineError::Config(e.to_string()))?;

        let mut frontier: Vec<SymState> = init.to_vec();
        let mut layer = 0u32;
        let mut last_new = 0u32;
        let mut converged = !fixpoint;
        let mut new_at_last = false;
        while layer < max_layers && !frontier.is_empty() {
            layer += 1;
            let expanded: Vec<_> = pool.install(|| frontier.par_iter().map(|s| self.expand(s, kind)).collect());
            let mut next = Vec::new();
            let mut new_found = false;
            let mut pruned = 0u64;
            for r in expanded {
                md.paths_explored += 1;
                for (step, behs) in r? {
                    match kind {
                        MetaKind::Reach => {
                            md.rs.insert(step.dst);
                            md.rbs.extend(behs);
                        }
                        MetaKind::States => {
                            md.trans.insert((step.src, step.dst));
                        }
                    }
                    if cfg.mode == Mode::BfsPrune && seen.contains(&step.dst) {
                        pruned += 1;
                        debug!(event = "path_pruned", src = step.src.0, dst = step.dst.0, layer);
                        continue;
                    }
                    new_found |= seen.insert(step.dst);
                    next.push(step.state);
                }
            }
            md.paths_pruned += pruned;
            info!(
                event = "layer",
                layer,
                expanded = frontier.len(),
                spawned = next.len(),
                pruned,
                new_states = new_found
            );
            if new_found {
                last_new = layer;
            }
            new_at_last = new_found;
            frontier = next;
            if fixpoint && !new_found {
                converged = true;
                break;
            }
        }
        if fixpoint && frontier.is_empty() {
            converged = true;
        }
        match cfg.depth {
            Depth::Cycles(d) if d > 0 && layer == d && new_at_last => {
                md.warnings.push(Warning::DepthNotConverged { depth: d });
            }
            Depth::Fixpoint if !converged => md.warnings.push(Warning::FixpointCapReached { layers: layer }),
            _ => md.discovered_diameter = Some(last_new),
        }
        if kind == MetaKind::States {
            md.sym_states = frontier;
        }
        Ok(md)
    }
}
