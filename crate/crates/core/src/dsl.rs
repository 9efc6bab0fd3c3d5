//! A small expression language for user-supplied loss functions.
//!
//! ```text
//! loss    := "lambda0" "=" expr ";" "lambda1" "=" expr [";"]
//! expr    := term (("+"|"-") term)*
//! term    := factor (("*"|"/") factor)*
//! factor  := unary ("^" factor)?
//! unary   := "-" unary | atom
//! atom    := number | "p" | func "(" expr ")" | "(" expr ")"
//! func    := "ln" | "exp" | "sqrt" | "abs"
//! ```
//!
//! Note that unary minus binds tighter than `^`: `-p^2` is `(-p)^2`.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Ln,
    Exp,
    Sqrt,
    Abs,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Ln => "ln",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "ln" => Func::Ln,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// The two branches of a parsed loss function.
#[derive(Clone, Debug, PartialEq)]
pub struct LossSpec {
    pub lambda0: Expr,
    pub lambda1: Expr,
}

impl Expr {
    /// Evaluates the expression at `p`. Domain errors produce NaN or ±∞.
    pub fn eval<T: Scalar>(&self, p: T) -> T {
        match self {
            Expr::Num(v) => lit(*v),
            Expr::Var => p,
            Expr::Neg(e) => -e.eval(p),
            Expr::Add(a, b) => a.eval(p) + b.eval(p),
            Expr::Sub(a, b) => a.eval(p) - b.eval(p),
            Expr::Mul(a, b) => a.eval(p) * b.eval(p),
            Expr::Div(a, b) => a.eval(p) / b.eval(p),
            Expr::Pow(a, b) => power(a.eval(p), b.eval(p)),
            Expr::Call(f, e) => {
                let x = e.eval(p);
                match f {
                    Func::Ln => x.ln(),
                    Func::Exp => x.exp(),
                    Func::Sqrt => x.sqrt(),
                    Func::Abs => x.abs(),
                }
            }
        }
    }

    /// Binding strength used by the printer; higher binds tighter.
    fn level(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Pow(..) => 3,
            Expr::Neg(..) => 4,
            Expr::Num(_) | Expr::Var | Expr::Call(..) => 5,
        }
    }
}

fn power<T: Scalar>(base: T, exponent: T) -> T {
    if exponent.fract() == T::zero() && exponent.abs() < lit(1.0e9) {
        base.powi(exponent.to_i32().unwrap())
    } else if base < T::zero() {
        T::nan()
    } else {
        base.powf(exponent)
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, min_level: u8) -> fmt::Result {
    if e.level() < min_level {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var => f.write_str("p"),
            Expr::Neg(e) => {
                f.write_str("-")?;
                write_child(f, e, 4)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                write_child(f, a, 1)?;
                f.write_str(if matches!(self, Expr::Add(..)) { " + " } else { " - " })?;
                write_child(f, b, 2)
            }
            Expr::Mul(a, b) | Expr::Div(a, b) => {
                write_child(f, a, 2)?;
                f.write_str(if matches!(self, Expr::Mul(..)) { " * " } else { " / " })?;
                write_child(f, b, 3)
            }
            Expr::Pow(a, b) => {
                write_child(f, a, 4)?;
                f.write_str("^")?;
                write_child(f, b, 3)
            }
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

impl fmt::Display for LossSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "lambda0 = {}; lambda1 = {}", self.lambda0, self.lambda1)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(usize, Tok)>> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        loop {
            let (at, tok) = lx.next()?;
            let end = tok == Tok::End;
            out.push((at, tok));
            if end {
                return Ok(out);
            }
        }
    }

    fn peek_byte(&self, offset: usize) -> Option<u8> {
        self.src.as_bytes().get(self.pos + offset).copied()
    }

    fn next(&mut self) -> Result<(usize, Tok)> {
        while self.peek_byte(0).is_some_and(|c| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(c) = self.peek_byte(0) else {
            return Ok((start, Tok::End));
        };
        if c.is_ascii_digit() || (c == b'.' && self.peek_byte(1).is_some_and(|d| d.is_ascii_digit())) {
            while self.peek_byte(0).is_some_and(|d| d.is_ascii_digit()) {
                self.pos += 1;
            }
            if self.peek_byte(0) == Some(b'.') {
                self.pos += 1;
                while self.peek_byte(0).is_some_and(|d| d.is_ascii_digit()) {
                    self.pos += 1;
                }
            }
            if matches!(self.peek_byte(0), Some(b'e' | b'E')) {
                let digit_at = if matches!(self.peek_byte(1), Some(b'+' | b'-')) { 2 } else { 1 };
                if self.peek_byte(digit_at).is_some_and(|d| d.is_ascii_digit()) {
                    self.pos += digit_at;
                    while self.peek_byte(0).is_some_and(|d| d.is_ascii_digit()) {
                        self.pos += 1;
                    }
                }
            }
            let text = &self.src[start..self.pos];
            let v = text
                .parse::<f64>()
                .map_err(|_| Error::Syntax { position: start, message: format!("malformed number `{text}`") })?;
            return Ok((start, Tok::Num(v)));
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while self.peek_byte(0).is_some_and(|d| d.is_ascii_alphanumeric() || d == b'_') {
                self.pos += 1;
            }
            return Ok((start, Tok::Ident(self.src[start..self.pos].to_string())));
        }
        if b"+-*/^();=".contains(&c) {
            self.pos += 1;
            return Ok((start, Tok::Sym(c as char)));
        }
        let ch = self.src[start..].chars().next().unwrap_or('?');
        Err(Error::Syntax { position: start, message: format!("unexpected character `{ch}`") })
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { position: self.pos(), message: message.into() })
    }

    fn expect_sym(&mut self, c: char) -> Result<()> {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            self.fail(format!("expected `{c}`, found {}", describe(self.peek())))
        }
    }

    fn expect_ident(&mut self, name: &str) -> Result<()> {
        match self.peek() {
            Tok::Ident(s) if s == name => {
                self.bump();
                Ok(())
            }
            other => self.fail(format!("expected `{name}`, found {}", describe(other))),
        }
    }

    fn spec(&mut self) -> Result<LossSpec> {
        self.expect_ident("lambda0")?;
        self.expect_sym('=')?;
        let lambda0 = self.expr()?;
        self.expect_sym(';')?;
        self.expect_ident("lambda1")?;
        self.expect_sym('=')?;
        let lambda1 = self.expr()?;
        if *self.peek() == Tok::Sym(';') {
            self.bump();
        }
        if *self.peek() != Tok::End {
            return self.fail(format!("unexpected {} after the loss definition", describe(self.peek())));
        }
        Ok(LossSpec { lambda0, lambda1 })
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Sym('+') => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Sym('-') => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Tok::Sym('*') => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Tok::Sym('/') => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.unary()?;
        if *self.peek() == Tok::Sym('^') {
            self.bump();
            let exponent = self.factor()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Expr> {
        if *self.peek() == Tok::Sym('-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::Ident(name) if name == "p" => {
                self.bump();
                Ok(Expr::Var)
            }
            Tok::Ident(name) => match Func::from_name(&name) {
                Some(func) => {
                    self.bump();
                    self.expect_sym('(')?;
                    let arg = self.expr()?;
                    self.expect_sym(')')?;
                    Ok(Expr::Call(func, Box::new(arg)))
                }
                None => self.fail(format!("unknown identifier `{name}`")),
            },
            Tok::Sym('(') => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(')')?;
                Ok(e)
            }
            other => self.fail(format!("expected an expression, found {}", describe(&other))),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(v) => format!("number `{v}`"),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Sym(c) => format!("`{c}`"),
        Tok::End => "end of input".to_string(),
    }
}

/// Parses a loss specification into its two branch expressions.
pub fn parse(text: &str) -> Result<LossSpec> {
    let toks = Lexer::tokens(text)?;
    Parser { toks, at: 0 }.spec()
}

/// Parses a single expression in `p`.
pub fn parse_expr(text: &str) -> Result<Expr> {
    let toks = Lexer::tokens(text)?;
    let mut parser = Parser { toks, at: 0 };
    let e = parser.expr()?;
    if *parser.peek() != Tok::End {
        return parser.fail(format!("unexpected {}", describe(parser.peek())));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn precedence_and_associativity() {
        let e = parse_expr("1 - 2 - 3").unwrap();
        assert_eq!(e.eval(0.0f64), -4.0);
        let e = parse_expr("2^3^2").unwrap();
        assert_eq!(e.eval(0.0f64), 512.0);
        let e = parse_expr("-p^2").unwrap();
        assert_eq!(e.eval(3.0f64), 9.0);
        let e = parse_expr("2*p+1/4").unwrap();
        assert_eq!(e.eval(0.5f64), 1.25);
        let e = parse_expr("sqrt(abs(-p)) * exp(ln(2))").unwrap();
        assert!((e.eval(4.0f64) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn fractional_power_of_negative_base_is_nan() {
        let e = parse_expr("(p-1)^0.5").unwrap();
        assert!(e.eval(0.5f64).is_nan());
        let e = parse_expr("(p-1)^2").unwrap();
        assert_eq!(e.eval(0.5f64), 0.25);
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse("lambda0 = p +; lambda1 = 1-p") {
            Err(Error::Syntax { position, .. }) => assert_eq!(position, 13),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("lambda0 = p"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("lambda0 = q; lambda1 = p"), Err(Error::Syntax { position: 10, .. })));
        assert!(matches!(parse("lambda0 = p; lambda1 = 1 - p; extra"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("lambda0 = p $ 2; lambda1 = p"), Err(Error::Syntax { position: 12, .. })));
    }

    #[test]
    fn trailing_semicolon_optional() {
        let a = parse("lambda0 = p^2; lambda1 = (1-p)^2;").unwrap();
        let b = parse("lambda0=p^2;lambda1=(1-p)^2").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn scientific_literals() {
        let e = parse_expr("1.5e-3 + .5").unwrap();
        assert!((e.eval(0.0f64) - 0.5015).abs() < 1e-15);
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            Just(Expr::Var),
            prop_oneof![Just(0.0), Just(1.0), Just(0.5), Just(2.0), Just(1e-7), Just(123.25), Just(3.0e20)]
                .prop_map(Expr::Num),
        ];
        leaf.prop_recursive(5, 48, 2, |inner| {
            let b = |e: Expr| Box::new(e);
            prop_oneof![
                inner.clone().prop_map(move |e| Expr::Neg(b(e))),
                (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Add(b(x), b(y))),
                (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Sub(b(x), b(y))),
                (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Mul(b(x), b(y))),
                (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Div(b(x), b(y))),
                (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Pow(b(x), b(y))),
                (prop_oneof![Just(Func::Ln), Just(Func::Exp), Just(Func::Sqrt), Just(Func::Abs)], inner)
                    .prop_map(move |(f, e)| Expr::Call(f, b(e))),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_then_parse_is_identity(l0 in arb_expr(), l1 in arb_expr()) {
            let spec = LossSpec { lambda0: l0, lambda1: l1 };
            let reparsed = parse(&spec.to_string()).unwrap();
            prop_assert_eq!(reparsed, spec);
        }
    }
}
