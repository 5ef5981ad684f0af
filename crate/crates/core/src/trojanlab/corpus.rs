//! Bundled benchmark circuits (format version 1).

use std::collections::BTreeSet;

use super::{inject_trojan, PayloadSpec, TriggerSpec};
use crate::circuit::{self, parse_blif, parse_rtl, Circuit, Expr, StateId, StateSpec};

pub const IMA_RTL: &str = include_str!("../../corpus/v1/ima.snl");
pub const IMA_TROJAN_RTL: &str = include_str!("../../corpus/v1/ima_trojan.snl");
pub const COUNTER_RTL: &str = include_str!("../../corpus/v1/counter.snl");
pub const IMA_BLIF: &str = include_str!("../../corpus/v1/ima.blif");

macro_rules! variant {
    ($s:literal, $d:literal) => {
        (
            $s,
            $d,
            include_str!(concat!("../../corpus/v1/ima_t", $s, "_", $d, ".snl")),
        )
    };
}

/// Single-edge Trojan variants: `(source, destination, text)`.
pub const VARIANTS: [(u32, u32, &str); 12] = [
    variant!(6, 0),
    variant!(6, 1),
    variant!(6, 2),
    variant!(6, 3),
    variant!(6, 4),
    variant!(6, 5),
    variant!(7, 0),
    variant!(7, 1),
    variant!(7, 2),
    variant!(7, 3),
    variant!(7, 4),
    variant!(7, 5),
];

pub fn ima() -> Circuit {
    parse_rtl(IMA_RTL).expect("bundled IMA circuit parses")
}

pub fn ima_trojan() -> Circuit {
    parse_rtl(IMA_TROJAN_RTL).expect("bundled IMA Trojan circuit parses")
}

pub fn counter() -> Circuit {
    parse_rtl(COUNTER_RTL).expect("bundled counter parses")
}

pub fn ima_blif() -> Circuit {
    parse_blif(IMA_BLIF).expect("bundled IMA netlist parses")
}

pub fn variant(src: u32, dst: u32) -> Option<Circuit> {
    VARIANTS
        .iter()
        .find(|v| v.0 == src && v.1 == dst)
        .map(|v| parse_rtl(v.2).expect("bundled variant parses"))
}

fn stuck_at_valid() -> PayloadSpec {
    PayloadSpec::StuckAt {
        output: "outValid".into(),
        value: 1,
    }
}

fn trigger(c: &Circuit, edges: &[(u32, u32)]) -> TriggerSpec {
    TriggerSpec {
        dct_edges: edges.iter().map(|&(a, b)| (StateId(a), StateId(b))).collect::<BTreeSet<_>>(),
        state_spec: StateSpec::new(c, &["pcmSq"]).expect("pcmSq exists"),
    }
}

/// Rebuilds the two-edge IMA Trojan from the clean circuit.
pub fn build_ima_trojan() -> Circuit {
    let c = ima();
    inject_trojan(&c, &trigger(&c, &[(6, 0), (7, 0)]), &stuck_at_valid()).expect("injection succeeds")
}

/// Rebuilds a single-edge variant: the FSM gains the edge `src -> dst`
/// (the default arm already covers `dst == 0`) and the trigger watches it.
pub fn build_variant(src: u32, dst: u32) -> Circuit {
    let mut c = ima();
    if dst != 0 {
        let r = &mut c.registers[0];
        if let Expr::Case { arms, .. } = &mut r.next {
            arms.push((src as u64, Expr::konst(3, dst as u64)));
        }
        c = circuit::finish(c).expect("variant validates");
    }
    inject_trojan(&c, &trigger(&c, &[(src, dst)]), &stuck_at_valid()).expect("injection succeeds")
}

/// A corpus circuit with the state registers it should be analyzed under.
pub struct Entry {
    pub name: String,
    pub circuit: Circuit,
    pub state: Vec<&'static str>,
    pub trojan: bool,
}

/// Every bundled circuit.
pub fn all() -> Vec<Entry> {
    let mut out = vec![
        Entry {
            name: "ima".into(),
            circuit: ima(),
            state: vec!["pcmSq"],
            trojan: false,
        },
        Entry {
            name: "ima_trojan".into(),
            circuit: ima_trojan(),
            state: vec!["pcmSq"],
            trojan: true,
        },
        Entry {
            name: "counter".into(),
            circuit: counter(),
            state: vec!["cnt"],
            trojan: false,
        },
        Entry {
            name: "ima_blif".into(),
            circuit: ima_blif(),
            state: vec!["q2", "q1", "q0"],
            trojan: false,
        },
    ];
    for (s, d, text) in VARIANTS {
        out.push(Entry {
            name: format!("ima_t{s}_{d}"),
            circuit: parse_rtl(text).expect("bundled variant parses"),
            state: vec!["pcmSq"],
            trojan: true,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::print_rtl;
    use std::path::Path;

    /// Set `DCTFORGE_REGEN=1` to rewrite the generated corpus files.
    #[test]
    fn generated_files_match_builders() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus/v1");
        let mut expected = vec![("ima_trojan.snl".to_string(), build_ima_trojan())];
        for s in [6, 7] {
            for d in 0..6 {
                expected.push((format!("ima_t{s}_{d}.snl"), build_variant(s, d)));
            }
        }
        let regen = std::env::var("DCTFORGE_REGEN").is_ok();
        for (file, c) in expected {
            let text = print_rtl(&c);
            let path = dir.join(&file);
            if regen {
                std::fs::write(&path, &text).unwrap();
            }
            let on_disk = std::fs::read_to_string(&path).unwrap();
            assert_eq!(parse_rtl(&on_disk).unwrap(), c, "{file} is stale");
        }
    }

    #[test]
    fn corpus_parses() {
        let all = all();
        assert_eq!(all.len(), 16);
        let ima = &all[0].circuit;
        assert_eq!(ima.inputs.len(), 2);
        assert_eq!(ima.registers.len(), 1);
        assert_eq!(ima.registers[0].width, 3);
        assert_eq!(all[3].circuit.registers.len(), 3);
    }
}
