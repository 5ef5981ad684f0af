//! The RTL-FSM text format.
//!
//! ```text
//! circuit ima
//! input inValid:1
//! reg pcmSq:3 reset 0 next case(pcmSq){ 3'd0: inValid ? 3'd1 : 3'd0; default: 3'd0 }
//! output outValid:1 = pcmSq == 3'd5
//! ```
//!
//! Statements end at a newline or `;`. Newlines inside parentheses, braces
//! or brackets are ignored, so long expressions may span lines. `//` starts
//! a comment.

use std::fmt::Write as _;

use super::{finish, BinOp, Circuit, CircuitError, Expr, Input, Net, Output, Register, UnOp};

const KEYWORDS: &[&str] = &[
    "circuit", "input", "output", "reg", "net", "reset", "next", "case", "default", "zext",
    "redor", "redand",
];

pub(crate) fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(u64),
    Sized(u32, u64),
    Punct(&'static str),
    Newline,
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn syntax(line: usize, col: usize, expected: impl Into<String>) -> CircuitError {
    CircuitError::Syntax {
        line,
        col,
        expected: expected.into(),
    }
}

fn parse_digits(s: &str, radix: u32) -> Option<u64> {
    let cleaned: String = s.chars().filter(|&c| c != '_').collect();
    if cleaned.is_empty() {
        return None;
    }
    u64::from_str_radix(&cleaned, radix).ok()
}

fn lex(text: &str) -> Result<Vec<Token>, CircuitError> {
    const PUNCTS: &[&str] = &[
        "==", "!=", "<<", ":", "=", "?", "(", ")", "{", "}", "[", "]", ",", ";", "|", "&", "^",
        "~", "-", "+", "<",
    ];
    let mut out = Vec::new();
    let mut depth = 0i32;
    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c == '/' && chars.get(i + 1) == Some(&'/') {
                break;
            }
            if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '$') {
                    i += 1;
                }
                out.push(Token {
                    tok: Tok::Ident(chars[start..i].iter().collect()),
                    line: line_no,
                    col,
                });
                continue;
            }
            if c.is_ascii_digit() {
                let (radix, skip) = match (c, chars.get(i + 1)) {
                    ('0', Some('x')) | ('0', Some('X')) => (16, 2),
                    ('0', Some('b')) | ('0', Some('B')) => (2, 2),
                    _ => (10, 0),
                };
                i += skip;
                let dstart = i;
                while i < chars.len() && (chars[i].is_digit(radix) || chars[i] == '_') {
                    i += 1;
                }
                let digits: String = chars[dstart..i].iter().collect();
                let value = parse_digits(&digits, radix).ok_or_else(|| syntax(line_no, col, "a number"))?;
                if radix == 10 && chars.get(i) == Some(&'\'') {
                    // sized constant <width>'<base><digits>
                    let width = u32::try_from(value).map_err(|_| syntax(line_no, col, "a constant width"))?;
                    i += 1;
                    let (radix, skip) = match (chars.get(i), chars.get(i + 1), chars.get(i + 2)) {
                        (Some('0'), Some('x'), _) => (16, 2),
                        (Some('0'), Some('b'), _) => (2, 2),
                        (Some('d'), _, _) | (Some('D'), _, _) => (10, 1),
                        (Some('b'), _, _) | (Some('B'), _, _) => (2, 1),
                        (Some('h'), _, _) | (Some('H'), _, _) => (16, 1),
                        _ => return Err(syntax(line_no, i + 1, "a constant base (d, b or h)")),
                    };
                    i += skip;
                    let vstart = i;
                    while i < chars.len() && (chars[i].is_digit(radix) || chars[i] == '_') {
                        i += 1;
                    }
                    let digits: String = chars[vstart..i].iter().collect();
                    let v = parse_digits(&digits, radix)
                        .ok_or_else(|| syntax(line_no, vstart + 1, "constant digits"))?;
                    out.push(Token {
                        tok: Tok::Sized(width, v),
                        line: line_no,
                        col,
                    });
                } else {
                    out.push(Token {
                        tok: Tok::Num(value),
                        line: line_no,
                        col,
                    });
                }
                continue;
            }
            let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
            let Some(p) = PUNCTS.iter().find(|p| rest.starts_with(**p)) else {
                return Err(syntax(line_no, col, "a token"));
            };
            match *p {
                "(" | "{" | "[" => depth += 1,
                ")" | "}" | "]" => depth -= 1,
                _ => {}
            }
            out.push(Token {
                tok: Tok::Punct(p),
                line: line_no,
                col,
            });
            i += p.len();
        }
        if depth <= 0 {
            out.push(Token {
                tok: Tok::Newline,
                line: line_no,
                col: chars.len() + 1,
            });
        }
    }
    let last = text.lines().count().max(1);
    out.push(Token {
        tok: Tok::Eof,
        line: last,
        col: 1,
    });
    Ok(out)
}

struct KeyCheck {
    signal: String,
    scrutinee: Expr,
    keys: Vec<(u32, usize, usize)>,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    current: String,
    key_checks: Vec<KeyCheck>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, expected: &str) -> CircuitError {
        let t = self.peek();
        syntax(t.line, t.col, expected)
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(&self.peek().tok, Tok::Punct(q) if *q == p)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<(), CircuitError> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.err(&format!("`{p}`")))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), CircuitError> {
        if self.is_keyword(kw) {
            self.bump();
            Ok(())
        } else {
            Err(self.err(&format!("`{kw}`")))
        }
    }

    fn ident(&mut self) -> Result<String, CircuitError> {
        match &self.peek().tok {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => Err(self.err("an identifier")),
        }
    }

    fn number(&mut self) -> Result<u64, CircuitError> {
        match self.peek().tok {
            Tok::Num(n) => {
                self.bump();
                Ok(n)
            }
            _ => Err(self.err("a number")),
        }
    }

    fn small_number(&mut self) -> Result<u32, CircuitError> {
        let t = self.peek().clone();
        let n = self.number()?;
        u32::try_from(n).map_err(|_| syntax(t.line, t.col, "a bit index or width"))
    }

    fn end_of_statement(&mut self) -> Result<(), CircuitError> {
        match self.peek().tok {
            Tok::Newline | Tok::Eof => Ok(()),
            Tok::Punct(";") => Ok(()),
            _ => Err(self.err("end of statement")),
        }
    }

    fn skip_separators(&mut self) {
        while matches!(self.peek().tok, Tok::Newline | Tok::Punct(";")) {
            self.bump();
        }
    }

    fn decl_head(&mut self) -> Result<(String, u32), CircuitError> {
        let name = self.ident()?;
        self.expect_punct(":")?;
        let width = self.small_number()?;
        Ok((name, width))
    }

    fn circuit(&mut self) -> Result<Circuit, CircuitError> {
        self.skip_separators();
        self.expect_keyword("circuit")?;
        let mut c = Circuit::new(self.ident()?);
        self.end_of_statement()?;
        loop {
            self.skip_separators();
            let t = self.peek().clone();
            let kw = match &t.tok {
                Tok::Eof => break,
                Tok::Ident(s) => s.clone(),
                _ => return Err(self.err("a declaration")),
            };
            self.bump();
            match kw.as_str() {
                "input" => {
                    let (name, width) = self.decl_head()?;
                    c.inputs.push(Input { name, width });
                }
                "output" => {
                    let (name, width) = self.decl_head()?;
                    self.expect_punct("=")?;
                    self.current = name.clone();
                    let expr = self.expr()?;
                    c.outputs.push(Output { name, width, expr });
                }
                "net" => {
                    let (name, width) = self.decl_head()?;
                    self.expect_punct("=")?;
                    self.current = name.clone();
                    let expr = self.expr()?;
                    c.nets.push(Net { name, width, expr });
                }
                "reg" => {
                    let (name, width) = self.decl_head()?;
                    self.expect_keyword("reset")?;
                    let reset_value = self.number()?;
                    self.expect_keyword("next")?;
                    self.current = name.clone();
                    let next = self.expr()?;
                    c.registers.push(Register {
                        name,
                        width,
                        reset_value,
                        next,
                    });
                }
                _ => return Err(syntax(t.line, t.col, "`input`, `output`, `reg` or `net`")),
            }
            self.end_of_statement()?;
        }
        Ok(c)
    }

    fn expr(&mut self) -> Result<Expr, CircuitError> {
        let cond = self.bitwise()?;
        if self.eat_punct("?") {
            let t = self.expr()?;
            self.expect_punct(":")?;
            let e = self.expr()?;
            Ok(Expr::mux(cond, t, e))
        } else {
            Ok(cond)
        }
    }

    fn bitwise(&mut self) -> Result<Expr, CircuitError> {
        let mut lhs = self.compare()?;
        loop {
            let op = if self.eat_punct("|") {
                BinOp::Or
            } else if self.eat_punct("&") {
                BinOp::And
            } else if self.eat_punct("^") {
                BinOp::Xor
            } else {
                return Ok(lhs);
            };
            let rhs = self.compare()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn compare(&mut self) -> Result<Expr, CircuitError> {
        let mut lhs = self.shift()?;
        loop {
            let op = if self.eat_punct("==") {
                BinOp::Eq
            } else if self.eat_punct("!=") {
                BinOp::Ne
            } else if self.eat_punct("<") {
                BinOp::Ult
            } else {
                return Ok(lhs);
            };
            let rhs = self.shift()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn shift(&mut self) -> Result<Expr, CircuitError> {
        let mut lhs = self.additive()?;
        while self.eat_punct("<<") {
            let rhs = self.additive()?;
            lhs = Expr::binary(BinOp::Shl, lhs, rhs);
        }
        Ok(lhs)
    }

    fn additive(&mut self) -> Result<Expr, CircuitError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat_punct("+") {
                BinOp::Add
            } else if self.eat_punct("-") {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, CircuitError> {
        if self.eat_punct("~") {
            Ok(Expr::unary(UnOp::Not, self.unary()?))
        } else if self.eat_punct("-") {
            Ok(Expr::unary(UnOp::Neg, self.unary()?))
        } else {
            self.postfix()
        }
    }

    fn postfix(&mut self) -> Result<Expr, CircuitError> {
        let mut e = self.primary()?;
        while self.eat_punct("[") {
            let hi = self.small_number()?;
            let lo = if self.eat_punct(":") { self.small_number()? } else { hi };
            self.expect_punct("]")?;
            e = Expr::slice(e, hi, lo);
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<Expr, CircuitError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Sized(width, value) => {
                self.bump();
                Ok(Expr::konst(width, value))
            }
            Tok::Punct("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Tok::Punct("{") => {
                self.bump();
                let mut parts = vec![self.expr()?];
                while self.eat_punct(",") {
                    parts.push(self.expr()?);
                }
                self.expect_punct("}")?;
                Ok(Expr::Concat(parts))
            }
            Tok::Ident(ref s) if s == "case" => {
                self.bump();
                self.case_expr()
            }
            Tok::Ident(ref s) if s == "zext" => {
                self.bump();
                self.expect_punct("(")?;
                let e = self.expr()?;
                self.expect_punct(",")?;
                let width = self.small_number()?;
                self.expect_punct(")")?;
                Ok(Expr::ZExt {
                    expr: Box::new(e),
                    width,
                })
            }
            Tok::Ident(ref s) if s == "redor" || s == "redand" => {
                let op = if s == "redor" {
                    UnOp::ReduceOr
                } else {
                    UnOp::ReduceAnd
                };
                self.bump();
                self.expect_punct("(")?;
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(Expr::unary(op, e))
            }
            Tok::Ident(_) => Ok(Expr::Ref(self.ident()?)),
            Tok::Num(_) => Err(self.err("a sized constant such as 3'd5")),
            _ => Err(self.err("an expression")),
        }
    }

    fn case_expr(&mut self) -> Result<Expr, CircuitError> {
        self.expect_punct("(")?;
        let scrutinee = self.expr()?;
        self.expect_punct(")")?;
        self.expect_punct("{")?;
        let mut arms = Vec::new();
        let mut keys = Vec::new();
        let default = loop {
            let t = self.peek().clone();
            match t.tok {
                Tok::Sized(w, v) => {
                    self.bump();
                    self.expect_punct(":")?;
                    let e = self.expr()?;
                    self.expect_punct(";")?;
                    arms.push((v, e));
                    keys.push((w, t.line, t.col));
                }
                Tok::Ident(ref s) if s == "default" => {
                    self.bump();
                    self.expect_punct(":")?;
                    let e = self.expr()?;
                    self.eat_punct(";");
                    break e;
                }
                _ => return Err(self.err("a case key or `default`")),
            }
        };
        self.expect_punct("}")?;
        self.key_checks.push(KeyCheck {
            signal: self.current.clone(),
            scrutinee: scrutinee.clone(),
            keys,
        });
        Ok(Expr::Case {
            scrutinee: Box::new(scrutinee),
            arms,
            default: Box::new(default),
        })
    }
}

/// Parses the RTL-FSM format and validates the result.
pub fn parse_rtl(text: &str) -> Result<Circuit, CircuitError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        current: String::new(),
        key_checks: Vec::new(),
    };
    let c = p.circuit()?;
    let c = finish(c)?;
    let mut errs = Vec::new();
    for check in &p.key_checks {
        let Some(w) = c.width_of(&check.scrutinee) else {
            continue;
        };
        for &(kw, line, col) in &check.keys {
            if kw != w {
                errs.push(super::Violation::WidthMismatch {
                    signal: check.signal.clone(),
                    detail: format!("case key at {line}:{col} has width {kw}, scrutinee has {w}"),
                });
            }
        }
    }
    if errs.is_empty() {
        Ok(c)
    } else {
        Err(CircuitError::Invalid(errs))
    }
}

/// Parses a standalone expression over the signals of `c`.
pub fn parse_expr(c: &Circuit, text: &str) -> Result<Expr, CircuitError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        current: "<expr>".to_string(),
        key_checks: Vec::new(),
    };
    let e = p.expr()?;
    if !matches!(p.peek().tok, Tok::Eof | Tok::Newline) {
        return Err(p.err("end of expression"));
    }
    c.check_expr(&e, "<expr>").map_err(CircuitError::Invalid)?;
    Ok(e)
}

/// Renders a validated circuit in the RTL-FSM format.
pub fn print_rtl(c: &Circuit) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "circuit {}", c.name);
    for i in &c.inputs {
        let _ = writeln!(s, "input {}:{}", i.name, i.width);
    }
    for n in &c.nets {
        let _ = writeln!(s, "net {}:{} = {}", n.name, n.width, print_expr(c, &n.expr));
    }
    for r in &c.registers {
        let _ = writeln!(
            s,
            "reg {}:{} reset {} next {}",
            r.name,
            r.width,
            r.reset_value,
            print_expr(c, &r.next)
        );
    }
    for o in &c.outputs {
        let _ = writeln!(s, "output {}:{} = {}", o.name, o.width, print_expr(c, &o.expr));
    }
    s
}

/// Renders one expression; `c` supplies widths for case keys.
pub fn print_expr(c: &Circuit, e: &Expr) -> String {
    let mut s = String::new();
    write_expr(c, e, &mut s, false);
    s
}

fn write_expr(c: &Circuit, e: &Expr, s: &mut String, nested: bool) {
    match e {
        Expr::Const { width, value } => {
            let _ = write!(s, "{width}'d{value}");
        }
        Expr::Ref(n) => s.push_str(n),
        Expr::Unary(op, a) => match op {
            UnOp::Not | UnOp::Neg => {
                s.push(if *op == UnOp::Not { '~' } else { '-' });
                write_expr(c, a, s, true);
            }
            UnOp::ReduceOr | UnOp::ReduceAnd => {
                s.push_str(if *op == UnOp::ReduceOr { "redor(" } else { "redand(" });
                write_expr(c, a, s, false);
                s.push(')');
            }
        },
        Expr::Binary(op, a, b) => {
            if nested {
                s.push('(');
            }
            write_expr(c, a, s, true);
            let _ = write!(s, " {} ", op.symbol());
            write_expr(c, b, s, true);
            if nested {
                s.push(')');
            }
        }
        Expr::Mux(cond, t, f) => {
            if nested {
                s.push('(');
            }
            write_expr(c, cond, s, true);
            s.push_str(" ? ");
            write_expr(c, t, s, true);
            s.push_str(" : ");
            write_expr(c, f, s, true);
            if nested {
                s.push(')');
            }
        }
        Expr::Case {
            scrutinee,
            arms,
            default,
        } => {
            let w = c.width_of(scrutinee).unwrap_or(64);
            s.push_str("case(");
            write_expr(c, scrutinee, s, false);
            s.push_str("){ ");
            for (k, a) in arms {
                let _ = write!(s, "{w}'d{k}: ");
                write_expr(c, a, s, false);
                s.push_str("; ");
            }
            s.push_str("default: ");
            write_expr(c, default, s, false);
            s.push_str(" }");
        }
        Expr::Slice { expr, hi, lo } => {
            let atomic = matches!(**expr, Expr::Ref(_) | Expr::Concat(_) | Expr::Slice { .. });
            if !atomic {
                s.push('(');
            }
            write_expr(c, expr, s, false);
            if !atomic {
                s.push(')');
            }
            let _ = write!(s, "[{hi}:{lo}]");
        }
        Expr::Concat(parts) => {
            s.push('{');
            for (i, p) in parts.iter().enumerate() {
                if i > 0 {
                    s.push_str(", ");
                }
                write_expr(c, p, s, false);
            }
            s.push('}');
        }
        Expr::ZExt { expr, width } => {
            s.push_str("zext(");
            write_expr(c, expr, s, false);
            let _ = write!(s, ", {width})");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Violation;

    #[test]
    fn identity_circuit() {
        let c = parse_rtl("circuit id; input a:1; output y:1 = a;").unwrap();
        assert_eq!(c.inputs.len(), 1);
        assert_eq!(c.outputs.len(), 1);
        assert!(c.registers.is_empty());
        assert_eq!(c.outputs[0].expr, Expr::var("a"));
    }

    #[test]
    fn precedence() {
        let c = parse_rtl("circuit p\ninput a:2\ninput b:2\noutput y:1 = a == b | a < b & ~a[0]\n").unwrap();
        // bitwise binds looser than comparison and is left-associative
        let expected = Expr::and(
            Expr::or(
                Expr::eq(Expr::var("a"), Expr::var("b")),
                Expr::binary(BinOp::Ult, Expr::var("a"), Expr::var("b")),
            ),
            Expr::not(Expr::slice(Expr::var("a"), 0, 0)),
        );
        assert_eq!(c.outputs[0].expr, expected);
    }

    #[test]
    fn multi_line_case_and_constants() {
        let text = "circuit m\ninput i:1\nreg s:3 reset 0x0 next case(s){\n  3'd0: i ? 3'b001 : 3'h0;\n  3'd1: 3'd2; // comment\n  default: 3'd0\n}\n";
        let c = parse_rtl(text).unwrap();
        let Expr::Case { arms, .. } = &c.registers[0].next else {
            panic!("expected case");
        };
        assert_eq!(arms.len(), 2);
        assert_eq!(arms[0].1, Expr::mux(Expr::var("i"), Expr::konst(3, 1), Expr::konst(3, 0)));
    }

    #[test]
    fn syntax_error_position() {
        let err = parse_rtl("circuit e\ninput a:1\noutput y:1 = a +\n").unwrap_err();
        match err {
            CircuitError::Syntax { line, col, .. } => {
                assert_eq!(line, 3);
                assert_eq!(col, 17);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_rtl("circuit e\nwire a:1\n"),
            Err(CircuitError::Syntax { line: 2, col: 1, .. })
        ));
        assert!(matches!(
            parse_rtl("circuit e\ninput a:1\noutput y:1 = 1\n"),
            Err(CircuitError::Syntax { .. })
        ));
    }

    #[test]
    fn semantic_errors_surface() {
        let err = parse_rtl("circuit e\ninput a:1\noutput y:1 = b\n").unwrap_err();
        assert!(matches!(&err.violations()[0], Violation::UnknownSignal { name, .. } if name == "b"));
        let err = parse_rtl("circuit e\ninput a:1\ninput a:1\n").unwrap_err();
        assert_eq!(err.violations(), &[Violation::DuplicateName("a".into())]);
        let err = parse_rtl("circuit e\ninput a:2\noutput y:1 = a\n").unwrap_err();
        assert!(matches!(err.violations()[0], Violation::WidthMismatch { .. }));
        let err = parse_rtl("circuit e\nnet x:1 = x\n").unwrap_err();
        assert_eq!(err.violations(), &[Violation::CombinationalCycle("x".into())]);
    }

    #[test]
    fn case_key_width_checked() {
        let err = parse_rtl("circuit e\nreg s:3 reset 0 next case(s){ 2'd1: 3'd0; default: s }\n").unwrap_err();
        assert!(matches!(err.violations()[0], Violation::WidthMismatch { .. }));
    }

    #[test]
    fn print_reparse() {
        let text = "circuit r\ninput a:4\ninput s:2\nnet t:4 = (a + 4'd1) - -a\nreg q:4 reset 3 next s == 2'd0 ? {a[1:0], s} : (q << s ^ t)\noutput y:8 = zext(redand(q), 8)\noutput z:1 = redor(a[3:1])\n";
        let c = parse_rtl(text).unwrap();
        let printed = print_rtl(&c);
        assert_eq!(parse_rtl(&printed).unwrap(), c);
    }
}
