//! Expressions for user-defined state functions and generating functions:
//! a small grammar over numbers, identifiers, +, −, *, /, ^ and the
//! functions exp, ln, sqrt, pow. Parsed trees evaluate over dual numbers,
//! print back to parseable text, and differentiate symbolically so compiled
//! fields carry closed-form partials.
//!
//! Grammar (whitespace-insensitive):
//!   expr  := term { ("+" | "-") term }
//!   term  := unary { ("*" | "/") unary }
//!   unary := "-" unary | power
//!   power := atom [ "^" unary ]
//!   atom  := number | ident | ident "(" expr { "," expr } ")" | "(" expr ")"
//! "^" is right-associative and binds tighter than unary minus.

use darboux::{HyperDual, Result as CoreResult, ScalarField};
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Ln,
    Sqrt,
    Pow,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Pow => "pow",
        }
    }

    fn arity(self) -> usize {
        match self {
            Func::Pow => 2,
            _ => 1,
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        match name {
            "exp" => Some(Func::Exp),
            "ln" => Some(Func::Ln),
            "sqrt" => Some(Func::Sqrt),
            "pow" => Some(Func::Pow),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

/// Syntax error with the byte offset it occurred at and what would have
/// been accepted there.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at byte {offset}: expected {expected}, found {found}")]
pub struct ParseError {
    pub offset: usize,
    pub expected: String,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Comma => "','".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' => {
                toks.push((Tok::Plus, i));
                i += 1;
            }
            b'-' => {
                toks.push((Tok::Minus, i));
                i += 1;
            }
            b'*' => {
                toks.push((Tok::Star, i));
                i += 1;
            }
            b'/' => {
                toks.push((Tok::Slash, i));
                i += 1;
            }
            b'^' => {
                toks.push((Tok::Caret, i));
                i += 1;
            }
            b'(' => {
                toks.push((Tok::LParen, i));
                i += 1;
            }
            b')' => {
                toks.push((Tok::RParen, i));
                i += 1;
            }
            b',' => {
                toks.push((Tok::Comma, i));
                i += 1;
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
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
                let text = &src[start..i];
                let value: f64 = text.parse().map_err(|_| ParseError {
                    offset: start,
                    expected: "a number".into(),
                    found: format!("'{text}'"),
                })?;
                if !value.is_finite() {
                    return Err(ParseError {
                        offset: start,
                        expected: "a finite number".into(),
                        found: format!("'{text}'"),
                    });
                }
                toks.push((Tok::Num(value), start));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                toks.push((Tok::Ident(src[start..i].to_string()), start));
            }
            _ => {
                return Err(ParseError {
                    offset: i,
                    expected: "a number, identifier or operator".into(),
                    found: format!("'{}'", &src[i..i + 1]),
                })
            }
        }
    }
    Ok(toks)
}

struct Parser<'a> {
    toks: &'a [(Tok, usize)],
    pos: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, o)| *o)
    }

    fn err(&self, expected: &str) -> ParseError {
        ParseError {
            offset: self.offset(),
            expected: expected.into(),
            found: self
                .peek()
                .map_or("end of input".into(), Tok::describe),
        }
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        self.pos += 1;
        t
    }

    fn eat(&mut self, want: &Tok, expected: &str) -> Result<(), ParseError> {
        if self.peek() == Some(want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(expected))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let exponent = self.unary()?;
            Ok(Expr::Pow(Box::new(base), Box::new(exponent)))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(Tok::Num(_)) => {
                if let Tok::Num(v) = self.bump() {
                    Ok(Expr::Num(v))
                } else {
                    unreachable!()
                }
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                self.eat(&Tok::RParen, "')'")?;
                Ok(inner)
            }
            Some(Tok::Ident(_)) => {
                let ident_offset = self.offset();
                let name = match self.bump() {
                    Tok::Ident(s) => s,
                    _ => unreachable!(),
                };
                if self.peek() == Some(&Tok::LParen) {
                    let func = Func::from_name(&name).ok_or(ParseError {
                        offset: ident_offset,
                        expected: "one of the functions exp, ln, sqrt, pow".into(),
                        found: format!("'{name}'"),
                    })?;
                    self.pos += 1;
                    let mut args = vec![self.expr()?];
                    while self.peek() == Some(&Tok::Comma) {
                        self.pos += 1;
                        args.push(self.expr()?);
                    }
                    self.eat(&Tok::RParen, "')' or ','")?;
                    if args.len() != func.arity() {
                        return Err(ParseError {
                            offset: ident_offset,
                            expected: format!(
                                "{} argument(s) to {}",
                                func.arity(),
                                func.name()
                            ),
                            found: format!("{} argument(s)", args.len()),
                        });
                    }
                    Ok(Expr::Call(func, args))
                } else {
                    Ok(Expr::Var(name))
                }
            }
            _ => Err(self.err("a number, identifier, '(' or '-'")),
        }
    }
}

pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let toks = lex(src)?;
    let mut parser = Parser {
        toks: &toks,
        pos: 0,
        end: src.len(),
    };
    let expr = parser.expr()?;
    if parser.pos != toks.len() {
        return Err(parser.err("an operator or end of input"));
    }
    Ok(expr)
}

// Precedence levels for printing: + − at 1, * / at 2, unary minus at 3,
// ^ at 4, atoms above.
fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Neg(..) => 3,
        Expr::Num(v) if *v < 0.0 => 3,
        Expr::Pow(..) => 4,
        Expr::Num(_) | Expr::Var(_) | Expr::Call(..) => 5,
    }
}

fn fmt_child(e: &Expr, min_prec: u8, out: &mut String) {
    if prec(e) < min_prec {
        out.push('(');
        fmt_expr(e, out);
        out.push(')');
    } else {
        fmt_expr(e, out);
    }
}

fn fmt_expr(e: &Expr, out: &mut String) {
    match e {
        Expr::Num(v) => out.push_str(&format!("{v}")),
        Expr::Var(name) => out.push_str(name),
        Expr::Neg(a) => {
            out.push('-');
            fmt_child(a, 3, out);
        }
        Expr::Add(a, b) => {
            fmt_child(a, 1, out);
            out.push_str(" + ");
            fmt_child(b, 2, out);
        }
        Expr::Sub(a, b) => {
            fmt_child(a, 1, out);
            out.push_str(" - ");
            fmt_child(b, 2, out);
        }
        Expr::Mul(a, b) => {
            fmt_child(a, 2, out);
            out.push_str("*");
            fmt_child(b, 3, out);
        }
        Expr::Div(a, b) => {
            fmt_child(a, 2, out);
            out.push_str("/");
            fmt_child(b, 3, out);
        }
        Expr::Pow(a, b) => {
            // The base must be an atom; the exponent may carry a sign.
            fmt_child(a, 5, out);
            out.push('^');
            fmt_child(b, 3, out);
        }
        Expr::Call(func, args) => {
            out.push_str(func.name());
            out.push('(');
            for (i, arg) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                fmt_expr(arg, out);
            }
            out.push(')');
        }
    }
}

/// Print the tree so that reparsing yields an identical tree. Negative
/// literals (which arise only from constant substitution, never from
/// parsing) are parenthesized like unary minus.
pub fn pretty(e: &Expr) -> String {
    let mut out = String::new();
    fmt_expr(e, &mut out);
    out
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty(self))
    }
}

/// Replace named constants by their numeric values, so differentiation and
/// compilation see only variables.
pub fn substitute(e: &Expr, consts: &dyn Fn(&str) -> Option<f64>) -> Expr {
    match e {
        Expr::Num(_) => e.clone(),
        Expr::Var(name) => match consts(name) {
            Some(v) => Expr::Num(v),
            None => e.clone(),
        },
        Expr::Neg(a) => Expr::Neg(Box::new(substitute(a, consts))),
        Expr::Add(a, b) => Expr::Add(
            Box::new(substitute(a, consts)),
            Box::new(substitute(b, consts)),
        ),
        Expr::Sub(a, b) => Expr::Sub(
            Box::new(substitute(a, consts)),
            Box::new(substitute(b, consts)),
        ),
        Expr::Mul(a, b) => Expr::Mul(
            Box::new(substitute(a, consts)),
            Box::new(substitute(b, consts)),
        ),
        Expr::Div(a, b) => Expr::Div(
            Box::new(substitute(a, consts)),
            Box::new(substitute(b, consts)),
        ),
        Expr::Pow(a, b) => Expr::Pow(
            Box::new(substitute(a, consts)),
            Box::new(substitute(b, consts)),
        ),
        Expr::Call(func, args) => {
            Expr::Call(*func, args.iter().map(|a| substitute(a, consts)).collect())
        }
    }
}

/// Every identifier occurring in the tree, in first-appearance order.
pub fn identifiers(e: &Expr) -> Vec<String> {
    fn walk(e: &Expr, seen: &mut Vec<String>) {
        match e {
            Expr::Num(_) => {}
            Expr::Var(name) => {
                if !seen.iter().any(|s| s == name) {
                    seen.push(name.clone());
                }
            }
            Expr::Neg(a) => walk(a, seen),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => {
                walk(a, seen);
                walk(b, seen);
            }
            Expr::Call(_, args) => {
                for a in args {
                    walk(a, seen);
                }
            }
        }
    }
    let mut seen = Vec::new();
    walk(e, &mut seen);
    seen
}

// Folding constructors used by differentiation; they keep derivative trees
// small without touching parsed trees.
fn num(v: f64) -> Expr {
    Expr::Num(v)
}

fn is_zero(e: &Expr) -> bool {
    matches!(e, Expr::Num(v) if *v == 0.0)
}

fn is_one(e: &Expr) -> bool {
    matches!(e, Expr::Num(v) if *v == 1.0)
}

fn add(a: Expr, b: Expr) -> Expr {
    if is_zero(&a) {
        return b;
    }
    if is_zero(&b) {
        return a;
    }
    if let (Expr::Num(x), Expr::Num(y)) = (&a, &b) {
        return num(x + y);
    }
    Expr::Add(Box::new(a), Box::new(b))
}

fn sub(a: Expr, b: Expr) -> Expr {
    if is_zero(&b) {
        return a;
    }
    if is_zero(&a) {
        return neg(b);
    }
    if let (Expr::Num(x), Expr::Num(y)) = (&a, &b) {
        return num(x - y);
    }
    Expr::Sub(Box::new(a), Box::new(b))
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Neg(inner) => *inner,
        Expr::Num(v) => num(-v),
        other => Expr::Neg(Box::new(other)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    if is_zero(&a) || is_zero(&b) {
        return num(0.0);
    }
    if is_one(&a) {
        return b;
    }
    if is_one(&b) {
        return a;
    }
    if let (Expr::Num(x), Expr::Num(y)) = (&a, &b) {
        return num(x * y);
    }
    Expr::Mul(Box::new(a), Box::new(b))
}

fn div(a: Expr, b: Expr) -> Expr {
    if is_zero(&a) {
        return num(0.0);
    }
    if is_one(&b) {
        return a;
    }
    Expr::Div(Box::new(a), Box::new(b))
}

fn powe(a: Expr, b: Expr) -> Expr {
    if let Expr::Num(k) = b {
        if k == 1.0 {
            return a;
        }
        if k == 0.0 {
            return num(1.0);
        }
    }
    Expr::Pow(Box::new(a), Box::new(b))
}

/// Symbolic partial derivative with respect to `var`. Constants must have
/// been substituted first.
pub fn diff(e: &Expr, var: &str) -> Expr {
    match e {
        Expr::Num(_) => num(0.0),
        Expr::Var(name) => num(if name == var { 1.0 } else { 0.0 }),
        Expr::Neg(a) => neg(diff(a, var)),
        Expr::Add(a, b) => add(diff(a, var), diff(b, var)),
        Expr::Sub(a, b) => sub(diff(a, var), diff(b, var)),
        Expr::Mul(a, b) => add(
            mul(diff(a, var), (**b).clone()),
            mul((**a).clone(), diff(b, var)),
        ),
        Expr::Div(a, b) => div(
            sub(
                mul(diff(a, var), (**b).clone()),
                mul((**a).clone(), diff(b, var)),
            ),
            mul((**b).clone(), (**b).clone()),
        ),
        Expr::Pow(..) | Expr::Call(Func::Pow, _) => {
            let (a, b) = match e {
                Expr::Pow(a, b) => (&**a, &**b),
                Expr::Call(Func::Pow, args) => (&args[0], &args[1]),
                _ => unreachable!(),
            };
            let da = diff(a, var);
            if let Expr::Num(k) = b {
                // d(a^k) = k a^(k−1) a'
                return mul(mul(num(*k), powe(a.clone(), num(k - 1.0))), da);
            }
            let db = diff(b, var);
            // d(a^b) = a^b (b' ln a + b a'/a)
            mul(
                powe(a.clone(), b.clone()),
                add(
                    mul(db, Expr::Call(Func::Ln, vec![a.clone()])),
                    div(mul(b.clone(), da), a.clone()),
                ),
            )
        }
        Expr::Call(Func::Exp, args) => mul(
            Expr::Call(Func::Exp, vec![args[0].clone()]),
            diff(&args[0], var),
        ),
        Expr::Call(Func::Ln, args) => div(diff(&args[0], var), args[0].clone()),
        Expr::Call(Func::Sqrt, args) => div(
            diff(&args[0], var),
            mul(num(2.0), Expr::Call(Func::Sqrt, vec![args[0].clone()])),
        ),
    }
}

// A variable-resolved tree: evaluation never touches names, and power
// nodes with literal exponents are lowered to the cheapest dual primitive.
#[derive(Debug)]
enum Resolved {
    Num(f64),
    Slot(usize),
    Neg(Box<Resolved>),
    Add(Box<Resolved>, Box<Resolved>),
    Sub(Box<Resolved>, Box<Resolved>),
    Mul(Box<Resolved>, Box<Resolved>),
    Div(Box<Resolved>, Box<Resolved>),
    PowI(Box<Resolved>, i32),
    PowF(Box<Resolved>, f64),
    PowD(Box<Resolved>, Box<Resolved>),
    Exp(Box<Resolved>),
    Ln(Box<Resolved>),
    Sqrt(Box<Resolved>),
}

fn resolve(e: &Expr, vars: &[String]) -> Result<Resolved, String> {
    Ok(match e {
        Expr::Num(v) => Resolved::Num(*v),
        Expr::Var(name) => {
            let slot = vars
                .iter()
                .position(|v| v == name)
                .ok_or_else(|| name.clone())?;
            Resolved::Slot(slot)
        }
        Expr::Neg(a) => Resolved::Neg(Box::new(resolve(a, vars)?)),
        Expr::Add(a, b) => Resolved::Add(
            Box::new(resolve(a, vars)?),
            Box::new(resolve(b, vars)?),
        ),
        Expr::Sub(a, b) => Resolved::Sub(
            Box::new(resolve(a, vars)?),
            Box::new(resolve(b, vars)?),
        ),
        Expr::Mul(a, b) => Resolved::Mul(
            Box::new(resolve(a, vars)?),
            Box::new(resolve(b, vars)?),
        ),
        Expr::Div(a, b) => Resolved::Div(
            Box::new(resolve(a, vars)?),
            Box::new(resolve(b, vars)?),
        ),
        Expr::Pow(..) | Expr::Call(Func::Pow, _) => {
            let (a, b) = match e {
                Expr::Pow(a, b) => (&**a, &**b),
                Expr::Call(Func::Pow, args) => (&args[0], &args[1]),
                _ => unreachable!(),
            };
            let base = Box::new(resolve(a, vars)?);
            match b {
                Expr::Num(k) if k.fract() == 0.0 && k.abs() <= i32::MAX as f64 => {
                    Resolved::PowI(base, *k as i32)
                }
                Expr::Num(k) => Resolved::PowF(base, *k),
                Expr::Neg(inner) => match &**inner {
                    Expr::Num(k) if k.fract() == 0.0 && k.abs() <= i32::MAX as f64 => {
                        Resolved::PowI(base, -(*k as i32))
                    }
                    Expr::Num(k) => Resolved::PowF(base, -k),
                    _ => Resolved::PowD(base, Box::new(resolve(b, vars)?)),
                },
                _ => Resolved::PowD(base, Box::new(resolve(b, vars)?)),
            }
        }
        Expr::Call(Func::Exp, args) => Resolved::Exp(Box::new(resolve(&args[0], vars)?)),
        Expr::Call(Func::Ln, args) => Resolved::Ln(Box::new(resolve(&args[0], vars)?)),
        Expr::Call(Func::Sqrt, args) => Resolved::Sqrt(Box::new(resolve(&args[0], vars)?)),
    })
}

fn eval(r: &Resolved, x: &[HyperDual]) -> CoreResult<HyperDual> {
    Ok(match r {
        Resolved::Num(v) => HyperDual::constant(*v),
        Resolved::Slot(i) => x[*i],
        Resolved::Neg(a) => -eval(a, x)?,
        Resolved::Add(a, b) => eval(a, x)? + eval(b, x)?,
        Resolved::Sub(a, b) => eval(a, x)? - eval(b, x)?,
        Resolved::Mul(a, b) => eval(a, x)? * eval(b, x)?,
        Resolved::Div(a, b) => eval(a, x)?.div(eval(b, x)?)?,
        Resolved::PowI(a, k) => eval(a, x)?.powi(*k)?,
        Resolved::PowF(a, k) => eval(a, x)?.powf(*k)?,
        Resolved::PowD(a, b) => eval(a, x)?.pow(eval(b, x)?)?,
        Resolved::Exp(a) => eval(a, x)?.exp(),
        Resolved::Ln(a) => eval(a, x)?.ln()?,
        Resolved::Sqrt(a) => eval(a, x)?.sqrt()?,
    })
}

/// Compile a constant-free expression into a field over the named
/// variables, without derivative information.
pub fn compile(e: &Expr, vars: &[String]) -> Result<ScalarField, String> {
    let tree = Arc::new(resolve(e, vars)?);
    Ok(ScalarField::new(vars.len(), move |x| eval(&tree, x)))
}

/// Compile with closed-form first partials from symbolic differentiation.
pub fn compile_with_partials(e: &Expr, vars: &[String]) -> Result<ScalarField, String> {
    let base = compile(e, vars)?;
    let partials = vars
        .iter()
        .map(|v| compile(&diff(e, v), vars))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(base.with_partials(partials))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval_at(src: &str, vars: &[(&str, f64)]) -> f64 {
        let expr = parse_expr(src).unwrap();
        let names: Vec<String> = vars.iter().map(|(n, _)| n.to_string()).collect();
        let field = compile(&expr, &names).unwrap();
        let point: Vec<f64> = vars.iter().map(|(_, v)| *v).collect();
        field.value(&point).unwrap()
    }

    #[test]
    fn reference_energy_expression_evaluates() {
        let v = eval_at("3/2*exp(2/3*q1)*q2^(-2/3)", &[("q1", 0.0), ("q2", 1.0)]);
        assert!((v - 1.5).abs() < 1e-15);
    }

    #[test]
    fn literal_zero_is_zero_everywhere() {
        assert_eq!(eval_at("0", &[("q1", 3.7)]), 0.0);
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(eval_at("2 + 3*4", &[]), 14.0);
        assert_eq!(eval_at("2*3 ^ 2", &[]), 18.0);
        assert_eq!(eval_at("2^3^2", &[]), 512.0);
        assert_eq!(eval_at("-2^2", &[]), -4.0);
        assert_eq!(eval_at("(2 + 3)*4", &[]), 20.0);
        assert_eq!(eval_at("8/4/2", &[]), 1.0);
        assert_eq!(eval_at("8 - 4 - 2", &[]), 2.0);
        assert_eq!(eval_at("pow(2, -2)", &[]), 0.25);
    }

    #[test]
    fn incomplete_input_errors_at_the_end_offset() {
        let err = parse_expr("q1 +").unwrap_err();
        assert_eq!(err.offset, 4);
        assert!(err.found.contains("end of input"));
    }

    #[test]
    fn error_offsets_point_at_the_offending_byte() {
        assert_eq!(parse_expr("(q1").unwrap_err().offset, 3);
        assert_eq!(parse_expr("q1 ) q2").unwrap_err().offset, 3);
        assert_eq!(parse_expr("1 + $").unwrap_err().offset, 4);
        // Unknown function name is reported at the identifier.
        let err = parse_expr("q1 + foo(2)").unwrap_err();
        assert_eq!(err.offset, 5);
        assert!(err.expected.contains("exp"));
        // Wrong arity.
        let err = parse_expr("exp(1, 2)").unwrap_err();
        assert_eq!(err.offset, 0);
    }

    #[test]
    fn pretty_print_reparses_identically() {
        for src in [
            "3/2*exp(2/3*q1)*q2^(-2/3)",
            "-q1^2 + q2*(q1 - 3)",
            "pow(q1, q2)/sqrt(q1 + 1)",
            "2^3^2",
            "8 - 4 - 2",
            "8/4/2",
            "-(q1 + q2)",
            "--q1",
            "q1^-2",
        ] {
            let ast = parse_expr(src).unwrap();
            let printed = pretty(&ast);
            let reparsed = parse_expr(&printed)
                .unwrap_or_else(|e| panic!("{src} -> {printed}: {e}"));
            assert_eq!(ast, reparsed, "{src} -> {printed}");
        }
    }

    #[test]
    fn substitution_replaces_only_constants() {
        let expr = parse_expr("A*q1 + b").unwrap();
        let sub = substitute(&expr, &|name| match name {
            "A" => Some(2.0),
            "b" => Some(-1.0),
            _ => None,
        });
        assert_eq!(identifiers(&sub), vec!["q1".to_string()]);
        let field = compile(&sub, &["q1".to_string()]).unwrap();
        assert_eq!(field.value(&[3.0]).unwrap(), 5.0);
    }

    #[test]
    fn symbolic_derivatives_match_dual_derivatives() {
        let srcs = [
            "3/2*exp(2/3*q1)*q2^(-2/3)",
            "q1/q2",
            "sqrt(q1*q2 + 5)",
            "pow(q1 + 2, q2)",
            "ln(q1 + 3) - q2^3",
        ];
        for src in srcs {
            let expr = parse_expr(src).unwrap();
            let vars = vec!["q1".to_string(), "q2".to_string()];
            let field = compile_with_partials(&expr, &vars).unwrap();
            let x = [0.7, 1.3];
            let g = darboux::grad(&field, &x).unwrap();
            for i in 0..2 {
                let sym = field.partial(i).unwrap().value(&x).unwrap();
                assert!(
                    (g[i] - sym).abs() < 1e-12,
                    "{src} ∂{i}: dual {} vs symbolic {sym}",
                    g[i]
                );
            }
        }
    }

    #[test]
    fn unresolved_identifier_is_named() {
        let expr = parse_expr("q1 + q3").unwrap();
        let err = compile(&expr, &["q1".to_string(), "q2".to_string()]).unwrap_err();
        assert_eq!(err, "q3");
    }

    fn random_expr(rng: &mut rand_chacha::ChaCha8Rng, depth: usize) -> Expr {
        use rand::seq::SliceRandom;
        use rand::Rng;
        // Literals stay nonnegative: "-3" parses as Neg(Num(3)), so a negative
        // literal could never round-trip to the same tree.
        const NUMS: [f64; 7] = [0.0, 1.0, 2.0, 0.5, 3.75, 12.0, 0.125];
        const VARS: [&str; 4] = ["q1", "q2", "alpha", "x_2"];
        let pick = if depth == 0 {
            rng.gen_range(0..2)
        } else {
            rng.gen_range(0..10)
        };
        let sub = |rng: &mut rand_chacha::ChaCha8Rng| Box::new(random_expr(rng, depth - 1));
        match pick {
            0 => Expr::Num(*NUMS.choose(rng).unwrap()),
            1 => Expr::Var(VARS.choose(rng).unwrap().to_string()),
            2 => Expr::Neg(sub(rng)),
            3 => Expr::Add(sub(rng), sub(rng)),
            4 => Expr::Sub(sub(rng), sub(rng)),
            5 => Expr::Mul(sub(rng), sub(rng)),
            6 => Expr::Div(sub(rng), sub(rng)),
            7 => Expr::Pow(sub(rng), sub(rng)),
            8 => Expr::Call(
                *[Func::Exp, Func::Ln, Func::Sqrt].choose(rng).unwrap(),
                vec![random_expr(rng, depth - 1)],
            ),
            _ => Expr::Call(
                Func::Pow,
                vec![random_expr(rng, depth - 1), random_expr(rng, depth - 1)],
            ),
        }
    }

    #[test]
    fn seeded_corpus_of_200_trees_round_trips_through_pretty() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for case in 0..200 {
            let ast = random_expr(&mut rng, 5);
            let printed = pretty(&ast);
            let reparsed = parse_expr(&printed)
                .unwrap_or_else(|e| panic!("case {case}: `{printed}`: {e}"));
            assert_eq!(ast, reparsed, "case {case}: `{printed}`");
        }
    }

    #[test]
    fn parsed_reference_energy_matches_the_library_closure() {
        use rand::{Rng, SeedableRng};
        let params = darboux::IdealGasParams::new(1.0).unwrap();
        let system = darboux::ConstraintSystem::ideal_gas(&params);
        let reference = system.potential().expect("built-in has a closed form");
        let expr = parse_expr("3/2*exp(2/3*q1)*q2^(-2/3)").unwrap();
        let vars = vec!["q1".to_string(), "q2".to_string()];
        let field = compile_with_partials(&expr, &vars).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let q = [rng.gen_range(-1.0..1.0), rng.gen_range(0.5..4.0)];
            let ours = field.value(&q).unwrap();
            let theirs = reference.value(&q).unwrap();
            assert!(
                ((ours - theirs) / theirs).abs() < 1e-12,
                "u at {q:?}: {ours} vs {theirs}"
            );
            let dours = darboux::grad(&field, &q).unwrap();
            let dref = darboux::grad(reference, &q).unwrap();
            for i in 0..2 {
                let scale = dref[i].abs().max(1.0);
                assert!(
                    ((dours[i] - dref[i]) / scale).abs() < 1e-12,
                    "du/dq{} at {q:?}: {} vs {}",
                    i + 1,
                    dours[i],
                    dref[i]
                );
            }
        }
    }
}
