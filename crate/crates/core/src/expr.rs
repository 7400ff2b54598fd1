//! A small expression language for user-supplied metrics and weights.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | ident | func '(' expr ')' | '(' expr ')'
//! func   := exp | sqrt | sin | cos | ln
//! ```
//!
//! Identifiers are resolved against a caller-supplied list (`x1..xm` for
//! metrics, `t` for weights). Expressions can be differentiated
//! symbolically, which is how custom weights get exact a′ and a″.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Sqrt,
    Sin,
    Cos,
    Ln,
}

impl Func {
    fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "ln" => Func::Ln,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Ln => "ln",
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Exp => v.exp(),
            Func::Sqrt => v.sqrt(),
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Ln => v.ln(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

use Expr::*;

fn num(v: f64) -> Expr {
    Num(v)
}

fn add(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Num(x), Num(y)) => Num(x + y),
        (Num(x), _) if *x == 0.0 => b,
        (_, Num(y)) if *y == 0.0 => a,
        _ => Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Num(x), Num(y)) => Num(x - y),
        (_, Num(y)) if *y == 0.0 => a,
        (Num(x), _) if *x == 0.0 => neg(b),
        _ => Sub(Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Num(x), Num(y)) => Num(x * y),
        (Num(x), _) | (_, Num(x)) if *x == 0.0 => Num(0.0),
        (Num(x), _) if *x == 1.0 => b,
        (_, Num(y)) if *y == 1.0 => a,
        _ => Mul(Box::new(a), Box::new(b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Num(x), _) if *x == 0.0 => Num(0.0),
        (_, Num(y)) if *y == 1.0 => a,
        _ => Div(Box::new(a), Box::new(b)),
    }
}

fn neg(a: Expr) -> Expr {
    match a {
        Num(x) => Num(-x),
        Neg(inner) => *inner,
        other => Neg(Box::new(other)),
    }
}

fn call(f: Func, a: Expr) -> Expr {
    Call(f, Box::new(a))
}

impl Expr {
    pub fn parse(src: &str, vars: &[&str]) -> Result<Expr> {
        let tokens = tokenize(src)?;
        let mut p = Parser { tokens, pos: 0, vars };
        let e = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Parse(format!(
                "unexpected trailing input at token {} in `{src}`",
                p.pos + 1
            )));
        }
        Ok(e)
    }

    pub fn eval(&self, vals: &[f64]) -> f64 {
        match self {
            Num(v) => *v,
            Var(i) => vals[*i],
            Neg(a) => -a.eval(vals),
            Add(a, b) => a.eval(vals) + b.eval(vals),
            Sub(a, b) => a.eval(vals) - b.eval(vals),
            Mul(a, b) => a.eval(vals) * b.eval(vals),
            Div(a, b) => a.eval(vals) / b.eval(vals),
            Pow(a, b) => {
                let base = a.eval(vals);
                match **b {
                    Num(e) if e.fract() == 0.0 && e.abs() < 64.0 => base.powi(e as i32),
                    _ => base.powf(b.eval(vals)),
                }
            }
            Call(f, a) => f.apply(a.eval(vals)),
        }
    }

    /// Partial derivative with respect to variable slot `var`.
    pub fn diff(&self, var: usize) -> Expr {
        match self {
            Num(_) => num(0.0),
            Var(i) => num(if *i == var { 1.0 } else { 0.0 }),
            Neg(a) => neg(a.diff(var)),
            Add(a, b) => add(a.diff(var), b.diff(var)),
            Sub(a, b) => sub(a.diff(var), b.diff(var)),
            Mul(a, b) => add(
                mul(a.diff(var), (**b).clone()),
                mul((**a).clone(), b.diff(var)),
            ),
            Div(a, b) => div(
                sub(
                    mul(a.diff(var), (**b).clone()),
                    mul((**a).clone(), b.diff(var)),
                ),
                Pow(b.clone(), Box::new(num(2.0))),
            ),
            Pow(a, b) => {
                if let Num(e) = **b {
                    // d(f^e) = e f^(e-1) f'
                    mul(
                        mul(num(e), Pow(a.clone(), Box::new(num(e - 1.0)))),
                        a.diff(var),
                    )
                } else {
                    // d(f^g) = f^g (g' ln f + g f'/f)
                    mul(
                        self.clone(),
                        add(
                            mul(b.diff(var), call(Func::Ln, (**a).clone())),
                            div(mul((**b).clone(), a.diff(var)), (**a).clone()),
                        ),
                    )
                }
            }
            Call(f, a) => {
                let inner = (**a).clone();
                let outer = match f {
                    Func::Exp => call(Func::Exp, inner),
                    Func::Sqrt => div(num(0.5), call(Func::Sqrt, inner)),
                    Func::Sin => call(Func::Cos, inner),
                    Func::Cos => neg(call(Func::Sin, inner)),
                    Func::Ln => div(num(1.0), inner),
                };
                mul(outer, a.diff(var))
            }
        }
    }
}

impl Expr {
    /// Total derivative along a curve: Σ_i rate_i · ∂_i.
    pub fn total_diff(&self, rates: &[Expr]) -> Expr {
        rates
            .iter()
            .enumerate()
            .fold(num(0.0), |acc, (i, rate)| add(acc, mul(self.diff(i), rate.clone())))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Num(v) => write!(f, "{v}"),
            Var(i) => write!(f, "${i}"),
            Neg(a) => write!(f, "(-{a})"),
            Add(a, b) => write!(f, "({a} + {b})"),
            Sub(a, b) => write!(f, "({a} - {b})"),
            Mul(a, b) => write!(f, "({a} * {b})"),
            Div(a, b) => write!(f, "({a} / {b})"),
            Pow(a, b) => write!(f, "({a} ^ {b})"),
            Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number `{text}`")))?;
            out.push(Token::Num(v));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Token::Op(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    vars: &'a [&'a str],
}

impl Parser<'_> {
    fn peek_op(&self) -> Option<char> {
        match self.tokens.get(self.pos) {
            Some(Token::Op(c)) => Some(*c),
            _ => None,
        }
    }

    fn expect(&mut self, op: char) -> Result<()> {
        if self.peek_op() == Some(op) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Parse(format!("expected `{op}`")))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' {
                Add(Box::new(lhs), Box::new(rhs))
            } else {
                Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' {
                Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek_op() == Some('-') {
            self.pos += 1;
            return Ok(Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            let exp = self.unary()?;
            let exp = match exp {
                Neg(inner) if matches!(*inner, Num(_)) => Num(-inner.eval(&[])),
                e => e,
            };
            return Ok(Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.tokens.get(self.pos).cloned() {
            Some(Token::Num(v)) => {
                self.pos += 1;
                Ok(Num(v))
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                if let Some(f) = Func::from_name(&name) {
                    self.expect('(')?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(Call(f, Box::new(arg)));
                }
                match self.vars.iter().position(|v| *v == name) {
                    Some(i) => Ok(Var(i)),
                    None => Err(Error::Parse(format!(
                        "unknown identifier `{name}` (expected one of {:?} or a function)",
                        self.vars
                    ))),
                }
            }
            Some(Token::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Token::Op(c)) => Err(Error::Parse(format!("unexpected `{c}`"))),
            None => Err(Error::Parse("unexpected end of expression".into())),
        }
    }
}
