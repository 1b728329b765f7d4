//! Kernel-expression language.
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := primary ("^" unary)?
//! primary := number | variable | func "(" expr ("," expr)* ")"
//!          | "chi" "(" expr "," expr ")" "(" expr ")" | "(" expr ")"
//! ```
//!
//! Variables are `u1..un` and `t1..tn`, with `u` and `t` as aliases of the
//! first coordinate. `chi(a, b)(x)` is the indicator of the open interval
//! `(a, b)`; its bounds must be constant. Multiplication short-circuits on
//! an exact zero, so an indicator factor masks values that are undefined
//! outside it (`chi(0,1)(u) * u^(-0.25)` is 0 at `u = -1`).

use crate::error::{Error, Result};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    U,
    T,
}

/// A variable reference; `index` 0 is the bare alias (`u` or `t`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Var {
    pub kind: VarKind,
    pub index: usize,
}

impl Var {
    /// Zero-based coordinate slot.
    pub fn slot(&self) -> usize {
        self.index.saturating_sub(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Abs,
    Sqrt,
    Max,
    Min,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
            Func::Max => "max",
            Func::Min => "min",
        }
    }

    fn lookup(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            "max" => Func::Max,
            "min" => Func::Min,
            _ => return None,
        })
    }

    fn variadic(self) -> bool {
        matches!(self, Func::Max | Func::Min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
    Chi { lo: f64, hi: f64, arg: Box<Expr> },
}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr> {
        let tokens = tokenize(text)?;
        let mut p = Parser {
            tokens,
            pos: 0,
            end: text.len(),
        };
        if p.tokens.is_empty() {
            return Err(Error::Syntax {
                offset: 0,
                message: "empty expression".into(),
            });
        }
        let e = p.expr()?;
        if let Some(t) = p.peek() {
            return Err(Error::Syntax {
                offset: t.offset,
                message: format!("unexpected {}", t.kind),
            });
        }
        Ok(e)
    }

    /// Rejects variables outside `1..=dim`, and bare aliases when `dim > 1`.
    pub fn check_dimension(&self, dim: usize) -> Result<()> {
        let mut bad = None;
        self.visit(&mut |e| {
            if let Expr::Var(v) = e {
                if (v.index == 0 && dim != 1) || v.index > dim {
                    bad.get_or_insert(*v);
                }
            }
        });
        match bad {
            Some(v) => Err(Error::UnknownIdentifier {
                name: Expr::Var(v).to_string(),
                offset: 0,
            }),
            None => Ok(()),
        }
    }

    fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Num(_) | Expr::Var(_) => {}
            Expr::Neg(a) => a.visit(f),
            Expr::Bin(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.visit(f)),
            Expr::Chi { arg, .. } => arg.visit(f),
        }
    }

    /// Zero-based `u` slots the expression reads.
    pub fn u_slots(&self) -> Vec<usize> {
        let mut slots = Vec::new();
        self.visit(&mut |e| {
            if let Expr::Var(v) = e {
                if v.kind == VarKind::U && !slots.contains(&v.slot()) {
                    slots.push(v.slot());
                }
            }
        });
        slots.sort_unstable();
        slots
    }

    /// Evaluates with `u` and `t` coordinates; missing slots read as NaN.
    pub fn eval(&self, u: &[f64], t: &[f64]) -> f64 {
        match self {
            Expr::Num(x) => *x,
            Expr::Var(v) => {
                let src = match v.kind {
                    VarKind::U => u,
                    VarKind::T => t,
                };
                src.get(v.slot()).copied().unwrap_or(f64::NAN)
            }
            Expr::Neg(a) => -a.eval(u, t),
            Expr::Bin(op, a, b) => {
                let x = a.eval(u, t);
                if *op == BinOp::Mul && x == 0.0 {
                    return 0.0;
                }
                let y = b.eval(u, t);
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => {
                        if y == 0.0 {
                            0.0
                        } else {
                            x * y
                        }
                    }
                    BinOp::Div => x / y,
                    BinOp::Pow => x.powf(y),
                }
            }
            Expr::Call(f, args) => {
                let first = args[0].eval(u, t);
                match f {
                    Func::Exp => first.exp(),
                    Func::Log => first.ln(),
                    Func::Abs => first.abs(),
                    Func::Sqrt => first.sqrt(),
                    Func::Max => args[1..].iter().fold(first, |m, a| m.max(a.eval(u, t))),
                    Func::Min => args[1..].iter().fold(first, |m, a| m.min(a.eval(u, t))),
                }
            }
            Expr::Chi { lo, hi, arg } => {
                let x = arg.eval(u, t);
                if x > *lo && x < *hi {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Points where the expression may fail to be smooth along `u` slot
    /// `slot`: indicator bounds and the literal argument of `max`, `min`
    /// and `abs` applied directly to that variable.
    pub fn breakpoints(&self, slot: usize) -> Vec<f64> {
        let is_var = |e: &Expr| matches!(e, Expr::Var(v) if v.kind == VarKind::U && v.slot() == slot);
        let mut out = Vec::new();
        self.visit(&mut |e| match e {
            Expr::Chi { lo, hi, arg } if is_var(arg) => {
                out.push(*lo);
                out.push(*hi);
            }
            Expr::Call(Func::Abs, args) if is_var(&args[0]) => out.push(0.0),
            Expr::Call(Func::Max | Func::Min, args) if args.iter().any(is_var) => {
                out.extend(args.iter().filter_map(|a| match a {
                    Expr::Num(c) => Some(*c),
                    _ => None,
                }));
            }
            _ => {}
        });
        out.retain(|x| x.is_finite());
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Interval of `u` slot `slot` implied by top-level indicator factors.
    pub fn indicator_bounds(&self, slot: usize) -> (f64, f64) {
        match self {
            Expr::Bin(BinOp::Mul, a, b) => {
                let (l1, h1) = a.indicator_bounds(slot);
                let (l2, h2) = b.indicator_bounds(slot);
                (l1.max(l2), h1.min(h2))
            }
            Expr::Bin(BinOp::Div, a, _) => a.indicator_bounds(slot),
            Expr::Chi { lo, hi, arg }
                if matches!(**arg, Expr::Var(v) if v.kind == VarKind::U && v.slot() == slot) =>
            {
                (*lo, *hi)
            }
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) if *x < 0.0 => write!(f, "({x})"),
            Expr::Num(x) => write!(f, "{x}"),
            Expr::Var(v) => {
                let name = match v.kind {
                    VarKind::U => 'u',
                    VarKind::T => 't',
                };
                if v.index == 0 {
                    write!(f, "{name}")
                } else {
                    write!(f, "{name}{}", v.index)
                }
            }
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Bin(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Expr::Chi { lo, hi, arg } => write!(f, "chi({lo}, {hi})({arg})"),
        }
    }
}

impl serde::Serialize for Expr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Expr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        Expr::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// Parses kernel-expression text.
pub fn parse_kernel_expression(text: &str) -> Result<Expr> {
    Expr::parse(text)
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Num(x) => write!(f, "number {x}"),
            TokenKind::Ident(s) => write!(f, "identifier '{s}'"),
            TokenKind::Op(c) => write!(f, "'{c}'"),
            TokenKind::LParen => write!(f, "'('"),
            TokenKind::RParen => write!(f, "')'"),
            TokenKind::Comma => write!(f, "','"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    offset: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let kind = if c.is_ascii_digit() || (c == '.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s = &text[start..i];
            let x = s.parse::<f64>().map_err(|_| Error::Syntax {
                offset: start,
                message: format!("malformed number '{s}'"),
            })?;
            TokenKind::Num(x)
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            TokenKind::Ident(text[start..i].to_string())
        } else {
            i += 1;
            match c {
                '+' | '-' | '*' | '/' | '^' => TokenKind::Op(c),
                '(' => TokenKind::LParen,
                ')' => TokenKind::RParen,
                ',' => TokenKind::Comma,
                _ => {
                    return Err(Error::Syntax {
                        offset: start,
                        message: format!("unexpected character '{}'", &text[start..].chars().next().unwrap_or(c)),
                    })
                }
            }
        };
        out.push(Token { kind, offset: start });
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn offset(&self) -> usize {
        self.peek().map_or(self.end, |t| t.offset)
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            offset: self.offset(),
            message: message.into(),
        })
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek().is_some_and(|t| &t.kind == kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokenKind) -> Result<()> {
        if self.eat(&kind) {
            Ok(())
        } else {
            match self.peek() {
                Some(t) => self.fail(format!("expected {kind}, found {}", t.kind)),
                None => self.fail(format!("expected {kind}, found end of input")),
            }
        }
    }

    fn op(&self) -> Option<char> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::Op(c),
                ..
            }) => Some(*c),
            _ => None,
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(c @ ('+' | '-')) = self.op() {
            self.pos += 1;
            let rhs = self.term()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(c @ ('*' | '/')) = self.op() {
            self.pos += 1;
            let rhs = self.unary()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.op() == Some('-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.op() == Some('^') {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        let Some(token) = self.peek().cloned() else {
            return self.fail("expected an operand, found end of input");
        };
        match token.kind {
            TokenKind::Num(x) => {
                self.pos += 1;
                Ok(Expr::Num(x))
            }
            TokenKind::LParen => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(TokenKind::RParen)?;
                Ok(e)
            }
            TokenKind::Ident(name) => {
                self.pos += 1;
                self.identifier(&name, token.offset)
            }
            other => self.fail(format!("expected an operand, found {other}")),
        }
    }

    fn identifier(&mut self, name: &str, offset: usize) -> Result<Expr> {
        if name == "chi" {
            self.expect(TokenKind::LParen)?;
            let lo = self.constant()?;
            self.expect(TokenKind::Comma)?;
            let hi = self.constant()?;
            self.expect(TokenKind::RParen)?;
            self.expect(TokenKind::LParen)?;
            let arg = self.expr()?;
            self.expect(TokenKind::RParen)?;
            return Ok(Expr::Chi {
                lo,
                hi,
                arg: Box::new(arg),
            });
        }
        if let Some(func) = Func::lookup(name) {
            self.expect(TokenKind::LParen)?;
            let mut args = vec![self.expr()?];
            while self.eat(&TokenKind::Comma) {
                args.push(self.expr()?);
            }
            let close = self.offset();
            self.expect(TokenKind::RParen)?;
            if func.variadic() && args.len() < 2 {
                return Err(Error::Syntax {
                    offset: close,
                    message: format!("{name} needs at least two arguments"),
                });
            }
            if !func.variadic() && args.len() != 1 {
                return Err(Error::Syntax {
                    offset: close,
                    message: format!("{name} takes one argument"),
                });
            }
            return Ok(Expr::Call(func, args));
        }
        variable(name).ok_or_else(|| Error::UnknownIdentifier {
            name: name.to_string(),
            offset,
        })
    }

    /// A constant sub-expression, folded at parse time.
    fn constant(&mut self) -> Result<f64> {
        let offset = self.offset();
        let e = self.expr()?;
        let mut has_var = false;
        e.visit(&mut |n| has_var |= matches!(n, Expr::Var(_)));
        if has_var {
            return Err(Error::Syntax {
                offset,
                message: "indicator bounds must be constant".into(),
            });
        }
        Ok(e.eval(&[], &[]))
    }
}

fn variable(name: &str) -> Option<Expr> {
    let kind = match name.as_bytes().first()? {
        b'u' => VarKind::U,
        b't' => VarKind::T,
        _ => return None,
    };
    let rest = &name[1..];
    let index = if rest.is_empty() {
        0
    } else if rest.bytes().all(|b| b.is_ascii_digit()) && !rest.starts_with('0') {
        rest.parse().ok()?
    } else {
        return None;
    };
    Some(Expr::Var(Var { kind, index }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval1(text: &str, u: f64) -> f64 {
        Expr::parse(text).unwrap().eval(&[u], &[])
    }

    #[test]
    fn boyd_kernel_expression() {
        assert!((eval1("chi(0,1)(u) * u^(-0.25)", 0.5) - 2f64.powf(0.25)).abs() < 1e-15);
        assert_eq!(eval1("chi(0,1)(u) * u^(-0.25)", -0.5), 0.0);
        assert_eq!(eval1("chi(0,1)(u) * u^(-0.25)", 1.0), 0.0);
    }

    #[test]
    fn calderon_kernel_expression() {
        assert_eq!(eval1("1/(u*max(1,u))", 2.0), 0.25);
        assert_eq!(eval1("1/(u*max(1,u))", 0.5), 2.0);
    }

    #[test]
    fn dangling_operator_offset() {
        match Expr::parse("u +") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 3),
            other => panic!("{other:?}"),
        }
        match Expr::parse("2 * (u") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 6),
            other => panic!("{other:?}"),
        }
        assert!(matches!(Expr::parse("u $ 2"), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(Expr::parse(""), Err(Error::Syntax { offset: 0, .. })));
        assert!(matches!(Expr::parse("max(u)"), Err(Error::Syntax { .. })));
        assert!(matches!(Expr::parse("chi(0,u)(u)"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn unknown_identifiers() {
        match Expr::parse("2 * foo(u)") {
            Err(Error::UnknownIdentifier { name, offset }) => {
                assert_eq!(name, "foo");
                assert_eq!(offset, 4);
            }
            other => panic!("{other:?}"),
        }
        assert!(Expr::parse("u0").is_err());
        assert!(Expr::parse("u1 + u2").unwrap().check_dimension(1).is_err());
        assert!(Expr::parse("u").unwrap().check_dimension(2).is_err());
        assert!(Expr::parse("u1 * t2").unwrap().check_dimension(2).is_ok());
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(eval1("1 - 2 - 3", 0.0), -4.0);
        assert_eq!(eval1("2 ^ 3 ^ 2", 0.0), 512.0);
        assert_eq!(eval1("-2 ^ 2", 0.0), -4.0);
        assert_eq!(eval1("2 ^ -1", 0.0), 0.5);
        assert_eq!(eval1("1 + 2 * 3 / 4", 0.0), 2.5);
        assert_eq!(eval1("1.5e1 + .5", 0.0), 15.5);
        assert_eq!(Expr::parse("t").unwrap().eval(&[], &[3.0]), 3.0);
    }

    #[test]
    fn printer_round_trips() {
        for text in [
            "chi(-1,0)(u) * exp(-(u - 0.5)^2)",
            "1/(u*max(1,u))",
            "min(u1, 2, abs(u2)) - -3",
            "sqrt(log(1/u))",
        ] {
            let e = Expr::parse(text).unwrap();
            let again = Expr::parse(&e.to_string()).unwrap();
            assert_eq!(e, again, "{text} -> {e}");
        }
    }

    #[test]
    fn breakpoints_and_bounds() {
        let e = Expr::parse("chi(0,1)(u) * u^(-0.25)").unwrap();
        assert_eq!(e.breakpoints(0), vec![0.0, 1.0]);
        assert_eq!(e.indicator_bounds(0), (0.0, 1.0));
        let e = Expr::parse("1/(u*max(1,u))").unwrap();
        assert_eq!(e.breakpoints(0), vec![1.0]);
        assert_eq!(e.indicator_bounds(0), (f64::NEG_INFINITY, f64::INFINITY));
        let e = Expr::parse("chi(-1,2)(u2)*abs(u1)").unwrap();
        assert_eq!(e.breakpoints(1), vec![-1.0, 2.0]);
        assert_eq!(e.breakpoints(0), vec![0.0]);
        assert_eq!(e.u_slots(), vec![0, 1]);
    }
}
