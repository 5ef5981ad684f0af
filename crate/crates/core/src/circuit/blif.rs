//! BLIF subset frontend for gate-level netlists.
//!
//! Supported: `.model`, `.inputs`, `.outputs`, `.names` (single-output
//! covers, `-` literals expanded into minterms), `.latch` with init value
//! 0 or 1, `.end`. Every `.names` becomes a 1-bit net and every `.latch` a
//! 1-bit register.

use std::collections::{HashMap, HashSet};

use super::{finish, Circuit, CircuitError, Expr, Input, Net, Output, Register};

/// Largest number of `-` literals expanded in a single cover row.
const MAX_DASHES: usize = 16;

struct Cover {
    inputs: Vec<String>,
    output: String,
    rows: Vec<(String, bool)>,
}

struct Latch {
    input: String,
    output: String,
    init: u64,
}

/// Joins `\` continuations and strips comments, keeping original line numbers.
fn logical_lines(text: &str) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    let mut pending: Option<(usize, String)> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let (body, cont) = match line.trim_end().strip_suffix('\\') {
            Some(b) => (b.to_string(), true),
            None => (line.to_string(), false),
        };
        let entry = match pending.take() {
            Some((n, mut acc)) => {
                acc.push(' ');
                acc.push_str(&body);
                (n, acc)
            }
            None => (i + 1, body),
        };
        if cont {
            pending = Some(entry);
        } else if !entry.1.trim().is_empty() {
            out.push(entry);
        }
    }
    if let Some(entry) = pending {
        if !entry.1.trim().is_empty() {
            out.push(entry);
        }
    }
    out
}

fn syntax(line: usize, expected: &str) -> CircuitError {
    CircuitError::Syntax {
        line,
        col: 1,
        expected: expected.to_string(),
    }
}

/// Maps arbitrary BLIF names onto unique RTL identifiers.
#[derive(Default)]
struct Namer {
    map: HashMap<String, String>,
    used: HashSet<String>,
}

impl Namer {
    fn sanitize(raw: &str) -> String {
        let mut s: String = raw
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '$' { c } else { '_' })
            .collect();
        if !s.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_') {
            s.insert(0, '_');
        }
        if super::rtl::is_keyword(&s) {
            s.push('_');
        }
        s
    }

    fn fresh(&mut self, base: &str) -> String {
        let mut name = base.to_string();
        while self.used.contains(&name) {
            name.push('_');
        }
        self.used.insert(name.clone());
        name
    }

    fn get(&mut self, raw: &str) -> String {
        if let Some(n) = self.map.get(raw) {
            return n.clone();
        }
        let n = self.fresh(&Self::sanitize(raw));
        self.map.insert(raw.to_string(), n.clone());
        n
    }
}

fn expand_row(plane: &str) -> Vec<Vec<bool>> {
    let mut acc: Vec<Vec<bool>> = vec![Vec::new()];
    for ch in plane.chars() {
        match ch {
            '1' | '0' => acc.iter_mut().for_each(|m| m.push(ch == '1')),
            _ => {
                acc = acc
                    .into_iter()
                    .flat_map(|m| {
                        let mut hi = m.clone();
                        hi.push(true);
                        let mut lo = m;
                        lo.push(false);
                        [lo, hi]
                    })
                    .collect();
            }
        }
    }
    acc
}

fn cover_expr(inputs: &[String], rows: &[(String, bool)]) -> Expr {
    let on_set = rows.first().map(|r| r.1).unwrap_or(true);
    let mut minterms: Vec<Vec<bool>> = Vec::new();
    let mut seen = HashSet::new();
    for (plane, _) in rows {
        for m in expand_row(plane) {
            if seen.insert(m.clone()) {
                minterms.push(m);
            }
        }
    }
    let sop = minterms
        .iter()
        .map(|m| {
            m.iter()
                .zip(inputs)
                .map(|(&bit, name)| {
                    if bit {
                        Expr::var(name.clone())
                    } else {
                        Expr::not(Expr::var(name.clone()))
                    }
                })
                .reduce(Expr::and)
                .unwrap_or(Expr::konst(1, 1))
        })
        .reduce(Expr::or)
        .unwrap_or(Expr::konst(1, 0));
    if on_set {
        sop
    } else {
        Expr::not(sop)
    }
}

/// Parses the BLIF subset into a validated circuit.
pub fn parse_blif(text: &str) -> Result<Circuit, CircuitError> {
    let mut model = None;
    let mut inputs: Vec<String> = Vec::new();
    let mut outputs: Vec<String> = Vec::new();
    let mut covers: Vec<Cover> = Vec::new();
    let mut latches: Vec<Latch> = Vec::new();
    let mut ended = false;

    for (line, content) in logical_lines(text) {
        let fields: Vec<&str> = content.split_whitespace().collect();
        let head = fields[0];
        if ended {
            return Err(syntax(line, "nothing after `.end`"));
        }
        if !head.starts_with('.') {
            let cover = covers
                .last_mut()
                .ok_or_else(|| syntax(line, "a directive"))?;
            let n = cover.inputs.len();
            let (plane, value) = match (n, fields.as_slice()) {
                (0, [v]) => ("", *v),
                (_, [p, v]) => (*p, *v),
                _ => return Err(syntax(line, "a cover row `<plane> <value>`")),
            };
            if plane.len() != n || !plane.chars().all(|c| matches!(c, '0' | '1' | '-')) {
                return Err(syntax(line, &format!("an input plane of {n} characters from 0, 1, -")));
            }
            if plane.chars().filter(|&c| c == '-').count() > MAX_DASHES {
                return Err(syntax(line, "at most 16 don't-care literals per row"));
            }
            let value = match value {
                "1" => true,
                "0" => false,
                _ => return Err(syntax(line, "output value 0 or 1")),
            };
            if let Some((_, first)) = cover.rows.first() {
                if *first != value {
                    return Err(syntax(line, "rows of one cover to share an output value"));
                }
            }
            cover.rows.push((plane.to_string(), value));
            continue;
        }
        match head {
            ".model" => {
                if fields.len() < 2 {
                    return Err(syntax(line, "a model name"));
                }
                model = Some(fields[1].to_string());
            }
            ".inputs" => inputs.extend(fields[1..].iter().map(|s| s.to_string())),
            ".outputs" => outputs.extend(fields[1..].iter().map(|s| s.to_string())),
            ".names" => {
                if fields.len() < 2 {
                    return Err(syntax(line, "at least an output signal"));
                }
                let output = fields[fields.len() - 1].to_string();
                covers.push(Cover {
                    inputs: fields[1..fields.len() - 1].iter().map(|s| s.to_string()).collect(),
                    output,
                    rows: Vec::new(),
                });
            }
            ".latch" => {
                // .latch <in> <out> [<type> <control>] [<init>]
                let (input, output, init) = match fields.as_slice() {
                    [_, i, o] => (i, o, "0"),
                    [_, i, o, init] => (i, o, *init),
                    [_, i, o, _ty, _ctl] => (i, o, "0"),
                    [_, i, o, _ty, _ctl, init] => (i, o, *init),
                    _ => return Err(syntax(line, "`.latch <input> <output> [<type> <control>] [<init>]`")),
                };
                let init = match init {
                    "0" => 0,
                    "1" => 1,
                    other => {
                        return Err(CircuitError::UnsupportedDirective {
                            line,
                            directive: format!(".latch init value {other}"),
                        })
                    }
                };
                latches.push(Latch {
                    input: input.to_string(),
                    output: output.to_string(),
                    init,
                });
            }
            ".end" => ended = true,
            other => {
                return Err(CircuitError::UnsupportedDirective {
                    line,
                    directive: other.to_string(),
                })
            }
        }
    }

    let model = model.ok_or_else(|| syntax(1, "`.model`"))?;

    let mut driven: HashSet<&str> = inputs.iter().map(String::as_str).collect();
    for c in &covers {
        if !driven.insert(c.output.as_str()) {
            return Err(CircuitError::Invalid(vec![super::Violation::DuplicateName(
                c.output.clone(),
            )]));
        }
    }
    for l in &latches {
        if !driven.insert(l.output.as_str()) {
            return Err(CircuitError::Invalid(vec![super::Violation::DuplicateName(
                l.output.clone(),
            )]));
        }
    }
    for c in &covers {
        for i in &c.inputs {
            if !driven.contains(i.as_str()) {
                return Err(CircuitError::UndrivenSignal(i.clone()));
            }
        }
    }
    for l in &latches {
        if !driven.contains(l.input.as_str()) {
            return Err(CircuitError::UndrivenSignal(l.input.clone()));
        }
    }
    for o in &outputs {
        if !driven.contains(o.as_str()) {
            return Err(CircuitError::UndrivenSignal(o.clone()));
        }
    }

    // Outputs keep their BLIF names; internal signals that share a name with
    // an output are renamed.
    let mut namer = Namer::default();
    let mut output_names = Vec::new();
    for o in &outputs {
        let n = namer.fresh(&Namer::sanitize(o));
        output_names.push(n);
    }
    let input_names: Vec<String> = inputs.iter().map(|i| namer.get(i)).collect();
    let mut circuit = Circuit::new(Namer::sanitize(&model));
    for n in input_names {
        circuit.inputs.push(Input { name: n, width: 1 });
    }
    for l in &latches {
        let name = namer.get(&l.output);
        let next = Expr::var(namer.get(&l.input));
        circuit.registers.push(Register {
            name,
            width: 1,
            reset_value: l.init,
            next,
        });
    }
    for c in &covers {
        let name = namer.get(&c.output);
        let ins: Vec<String> = c.inputs.iter().map(|i| namer.get(i)).collect();
        circuit.nets.push(Net {
            name,
            width: 1,
            expr: cover_expr(&ins, &c.rows),
        });
    }
    for (o, name) in outputs.iter().zip(output_names) {
        circuit.outputs.push(Output {
            name,
            width: 1,
            expr: Expr::var(namer.get(o)),
        });
    }
    finish(circuit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::sim::Simulator;
    use crate::circuit::Violation;

    #[test]
    fn buffer() {
        let c = parse_blif(".model buf\n.inputs a\n.outputs y\n.names a y\n1 1\n.end\n").unwrap();
        // the output keeps its name; the driving net is renamed
        assert_eq!(c.outputs[0].name, "y");
        assert_eq!(c.nets.len(), 1);
        assert_eq!(c.nets[0].expr, Expr::var("a"));
        assert_eq!(c.outputs[0].expr, Expr::var(c.nets[0].name.clone()));
    }

    #[test]
    fn single_latch() {
        let c = parse_blif(".model l\n.inputs d\n.outputs\n.latch d q 0\n.end\n").unwrap();
        assert_eq!(
            c.registers,
            vec![Register {
                name: "q".into(),
                width: 1,
                reset_value: 0,
                next: Expr::var("d"),
            }]
        );
    }

    #[test]
    fn dont_care_rows_expand() {
        let c = parse_blif(".model m\n.inputs a b c\n.outputs y\n.names a b c y\n1-1 1\n01- 1\n.end\n").unwrap();
        let sim = Simulator::new(&c);
        for v in 0..8u64 {
            let (a, b, cc) = (v >> 2 & 1, v >> 1 & 1, v & 1);
            let expect = (a == 1 && cc == 1) || (a == 0 && b == 1);
            assert_eq!(sim.step(&[], &[a, b, cc]).outputs[0], expect as u64, "input {v:03b}");
        }
    }

    #[test]
    fn off_set_and_constants() {
        let c = parse_blif(
            ".model m\n.inputs a b\n.outputs y one zero\n.names a b y\n11 0\n.names one\n1\n.names zero\n.end\n",
        )
        .unwrap();
        let sim = Simulator::new(&c);
        assert_eq!(sim.step(&[], &[1, 1]).outputs, vec![0, 1, 0]);
        assert_eq!(sim.step(&[], &[0, 1]).outputs, vec![1, 1, 0]);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_blif(".model m\n.inputs a\n.outputs y\n.subckt foo a=a y=y\n.end\n"),
            Err(CircuitError::UnsupportedDirective { line: 4, .. })
        ));
        assert!(matches!(
            parse_blif(".model m\n.inputs a\n.outputs y\n.names a b y\n11 1\n.end\n"),
            Err(CircuitError::UndrivenSignal(s)) if s == "b"
        ));
        assert!(matches!(
            parse_blif(".model m\n.inputs a\n.outputs q\n.latch a q 3\n.end\n"),
            Err(CircuitError::UnsupportedDirective { .. })
        ));
        assert!(matches!(
            parse_blif(".model m\n.inputs a\n.outputs y\n.names a y\n1x 1\n.end\n"),
            Err(CircuitError::Syntax { line: 5, .. })
        ));
        let err = parse_blif(".model m\n.inputs a\n.outputs y\n.names y a x\n11 1\n.names x y\n1 1\n.end\n")
            .unwrap_err();
        assert!(matches!(err.violations()[0], Violation::CombinationalCycle(_)));
    }

    #[test]
    fn continuation_and_comments() {
        let c = parse_blif(".model m # comment\n.inputs a \\\n b\n.outputs y\n.names a b y\n11 1\n.end\n").unwrap();
        assert_eq!(c.inputs.len(), 2);
    }
}
