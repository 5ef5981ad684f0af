//! JSON reports (schema version 1). Keys are emitted in sorted order, so a
//! report is byte-stable apart from the `timing_ms` object.

use std::collections::BTreeSet;

use serde::Serialize;
use serde_json::{json, Map, Value};

use dctforge_core::{Circuit, DctReport, ExploreConfig, Metadata, StateId, TrojanReport, Verdict};

pub const SCHEMA: u32 = 1;

pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report values serialize");
    s.push('\n');
    s
}

pub fn timing(parts: &[(&str, u128)]) -> Value {
    Value::Object(parts.iter().map(|(k, v)| (k.to_string(), json!(*v as u64))).collect())
}

fn header(command: &str, c: &Circuit, cfg: &ExploreConfig, timing_ms: Value) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("schema".into(), json!(SCHEMA));
    m.insert("command".into(), json!(command));
    m.insert("circuit".into(), json!(c.name));
    m.insert("state".into(), json!(cfg.state_spec.registers()));
    m.insert("depth".into(), json!(cfg.depth.to_string()));
    m.insert("mode".into(), json!(cfg.mode.to_string()));
    m.insert("timing_ms".into(), timing_ms);
    m
}

fn edges(set: &BTreeSet<(StateId, StateId)>) -> Value {
    json!(set.iter().map(|(a, b)| [a.0, b.0]).collect::<Vec<_>>())
}

fn stage_summary(md: &Metadata) -> Value {
    json!({
        "paths_explored": md.paths_explored,
        "paths_pruned": md.paths_pruned,
        "discovered_diameter": md.discovered_diameter,
        "warnings": md.warnings.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
    })
}

fn dct_fields(m: &mut Map<String, Value>, r: &DctReport) {
    m.insert("rs".into(), json!(r.rs));
    m.insert("rs_count".into(), json!(r.rs.len()));
    m.insert("trans".into(), edges(&r.trans));
    m.insert("dct".into(), edges(&r.dct));
    m.insert("dct_count".into(), json!(r.dct.len()));
    m.insert("dest".into(), json!(r.dest));
    m.insert("dest_count".into(), json!(r.dest.len()));
    let witnesses: Vec<Value> = r
        .witnesses
        .iter()
        .map(|(&(s, d), w)| {
            json!({
                "edge": [s.0, d.0],
                "source": w.source,
                "registers": w.registers,
                "inputs": w.inputs,
                "constraints": r.constraint_dumps.get(&(s, d)),
            })
        })
        .collect();
    m.insert("witnesses".into(), json!(witnesses));
    m.insert("behaviors".into(), json!(r.stage1.rbs));
    m.insert(
        "paths_explored".into(),
        json!(r.stage1.paths_explored + r.stage2.paths_explored),
    );
    m.insert("paths_pruned".into(), json!(r.stage1.paths_pruned + r.stage2.paths_pruned));
    m.insert(
        "stages".into(),
        json!({ "reach": stage_summary(&r.stage1), "states": stage_summary(&r.stage2) }),
    );
}

pub fn analyze(c: &Circuit, cfg: &ExploreConfig, r: &DctReport, timing_ms: Value) -> Value {
    let mut m = header("analyze", c, cfg, timing_ms);
    dct_fields(&mut m, r);
    Value::Object(m)
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::TrojanDetected => "TrojanDetected",
        Verdict::Clean => "Clean",
        Verdict::NoDct => "NoDct",
    }
}

pub fn trojan(c: &Circuit, cfg: &ExploreConfig, r: &TrojanReport, timing_ms: Value) -> Value {
    let mut m = header("trojan", c, cfg, timing_ms);
    dct_fields(&mut m, &r.dct);
    m.insert("dbs".into(), json!(r.dbs));
    m.insert("verdict".into(), json!(verdict_str(r.verdict)));
    let table: Vec<Value> = r
        .table
        .iter()
        .map(|row| {
            let mut v = serde_json::to_value(row).expect("rows serialize");
            v["reveals"] = json!(row.reveals());
            v
        })
        .collect();
    m.insert("table".into(), json!(table));
    let per_dest: Vec<Value> = r
        .per_dest
        .iter()
        .map(|(d, dr)| {
            json!({
                "dest": d,
                "start_states": dr.start_states,
                "behaviors": dr.rbs_prime.len(),
                "dbs": dr.dbs,
                "paths_explored": dr.metadata.paths_explored,
                "paths_pruned": dr.metadata.paths_pruned,
            })
        })
        .collect();
    m.insert("stage3".into(), json!(per_dest));
    Value::Object(m)
}

#[derive(Debug, Default, Serialize)]
pub struct SetDiff {
    engine_only: Vec<Value>,
    oracle_only: Vec<Value>,
}

impl SetDiff {
    fn of<T: Ord + Serialize>(engine: &BTreeSet<T>, oracle: &BTreeSet<T>) -> Self {
        SetDiff {
            engine_only: engine.difference(oracle).map(|x| json!(x)).collect(),
            oracle_only: oracle.difference(engine).map(|x| json!(x)).collect(),
        }
    }

    fn is_empty(&self) -> bool {
        self.engine_only.is_empty() && self.oracle_only.is_empty()
    }
}

/// Engine versus oracle on RS, Trans and DCT.
#[derive(Debug, Serialize)]
pub struct Diff {
    rs: SetDiff,
    trans: SetDiff,
    dct: SetDiff,
}

impl Diff {
    pub fn new(oracle: &Metadata, oracle_dct: &BTreeSet<(StateId, StateId)>, engine: &DctReport) -> Self {
        Diff {
            rs: SetDiff::of(&engine.rs, &oracle.rs),
            trans: SetDiff::of(&engine.trans, &oracle.trans),
            dct: SetDiff::of(&engine.dct, oracle_dct),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.rs.is_empty() && self.trans.is_empty() && self.dct.is_empty()
    }
}

pub fn oracle(c: &Circuit, cfg: &ExploreConfig, md: &Metadata, diff: Option<&Diff>, timing_ms: Value) -> Value {
    let mut m = header("oracle", c, cfg, timing_ms);
    let dct = dctforge_core::detect::oracle_dct(md);
    let dest: BTreeSet<StateId> = dct.iter().map(|e| e.1).collect();
    m.insert("rs".into(), json!(md.rs));
    m.insert("rs_count".into(), json!(md.rs.len()));
    m.insert("trans".into(), edges(&md.trans));
    m.insert("dct".into(), edges(&dct));
    m.insert("dct_count".into(), json!(dct.len()));
    m.insert("dest".into(), json!(dest));
    m.insert("dest_count".into(), json!(dest.len()));
    m.insert("behaviors".into(), json!(md.rbs));
    m.insert("paths_explored".into(), json!(md.paths_explored));
    m.insert("paths_pruned".into(), json!(md.paths_pruned));
    m.insert("discovered_diameter".into(), json!(md.discovered_diameter));
    m.insert("diff".into(), diff.map_or(Value::Null, |d| json!(d)));
    Value::Object(m)
}
