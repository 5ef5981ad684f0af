//! State-transition graph in DOT. Reachable states are white, unreachable
//! ones black; DCT edges are dashed.

use std::collections::BTreeSet;
use std::fmt::Write;

use dctforge_core::{DctReport, StateId, StateSpec};

/// Above this domain size only states that appear in RS or Trans are drawn.
const FULL_DOMAIN_LIMIT: u64 = 256;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn render(name: &str, spec: &StateSpec, r: &DctReport) -> String {
    let nodes: BTreeSet<StateId> = if spec.domain_size() <= FULL_DOMAIN_LIMIT {
        (0..spec.domain_size() as u32).map(StateId).collect()
    } else {
        r.rs.iter()
            .copied()
            .chain(r.trans.iter().flat_map(|&(a, b)| [a, b]))
            .collect()
    };
    let mut out = String::new();
    writeln!(out, "digraph {} {{", quote(name)).unwrap();
    writeln!(out, "  node [shape=circle, style=filled];").unwrap();
    for s in &nodes {
        let (fill, font) = if r.rs.contains(s) { ("white", "black") } else { ("black", "white") };
        writeln!(out, "  s{} [label=\"{}\", fillcolor={fill}, fontcolor={font}];", s.0, s.0).unwrap();
    }
    for e @ (a, b) in &r.trans {
        if r.dct.contains(e) {
            writeln!(out, "  s{} -> s{} [style=dashed, label=\"DCT\"];", a.0, b.0).unwrap();
        } else {
            writeln!(out, "  s{} -> s{};", a.0, b.0).unwrap();
        }
    }
    out.push_str("}\n");
    out
}
