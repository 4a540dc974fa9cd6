//! Parsing, printing, and evaluation of real-valued coordinate expressions.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr     := term { ('+' | '-') term }
//! term     := factor { ('*' | '/') factor }
//! factor   := '-' factor | power
//! power    := atom [ '^' exponent ]
//! exponent := '-' exponent | power
//! atom     := number | name | name '(' expr { ',' expr } ')' | '(' expr ')'
//! ```
//!
//! `^` binds tightest and associates to the right; unary minus binds tighter
//! than `*` and `/` but looser than `^`, so `-x^2` is `-(x^2)` and `2^-3` is
//! accepted. `pow(a, b)` is equivalent to `a ^ b`; `log` is the natural
//! logarithm.

use std::collections::HashMap;
use std::fmt;

use crate::dual::{Dual, Scalar};

/// Built-in unary functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Sqrt,
    Abs,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(String),
    Neg(Box<Expr>),
    Unary(Func, Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

#[derive(Clone, Debug, thiserror::Error, PartialEq)]
#[error("parse error at byte {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

#[derive(Clone, Debug, thiserror::Error, PartialEq)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("domain error: {what} in `{context}`")]
    Domain { what: String, context: String },
}

// ---------------------------------------------------------------------------
// Lexer

#[derive(Clone, Debug, PartialEq)]
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

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut lx = Lexer {
            src: src.as_bytes(),
            pos: 0,
        };
        let mut out = Vec::new();
        loop {
            lx.skip_ws();
            if lx.pos >= lx.src.len() {
                return Ok(out);
            }
            let start = lx.pos;
            let c = lx.src[lx.pos];
            let tok = match c {
                b'+' => {
                    lx.pos += 1;
                    Tok::Plus
                }
                b'-' => {
                    lx.pos += 1;
                    Tok::Minus
                }
                b'*' => {
                    lx.pos += 1;
                    Tok::Star
                }
                b'/' => {
                    lx.pos += 1;
                    Tok::Slash
                }
                b'^' => {
                    lx.pos += 1;
                    Tok::Caret
                }
                b'(' => {
                    lx.pos += 1;
                    Tok::LParen
                }
                b')' => {
                    lx.pos += 1;
                    Tok::RParen
                }
                b',' => {
                    lx.pos += 1;
                    Tok::Comma
                }
                b'0'..=b'9' | b'.' => lx.number(start)?,
                c if c.is_ascii_alphabetic() || c == b'_' => lx.ident(start),
                other => {
                    return Err(ParseError {
                        offset: start,
                        message: format!("unexpected character `{}`", other as char),
                    })
                }
            };
            out.push((tok, start));
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn number(&mut self, start: usize) -> Result<Tok, ParseError> {
        let mut seen_dot = false;
        let mut seen_exp = false;
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            match c {
                b'0'..=b'9' => self.pos += 1,
                b'.' if !seen_dot && !seen_exp => {
                    seen_dot = true;
                    self.pos += 1;
                }
                b'e' | b'E' if !seen_exp && self.pos > start => {
                    // Exponent marker only if followed by digits or a sign.
                    let next = self.src.get(self.pos + 1);
                    let next2 = self.src.get(self.pos + 2);
                    let digit = |b: Option<&u8>| b.is_some_and(|b| b.is_ascii_digit());
                    if digit(next)
                        || ((next == Some(&b'+') || next == Some(&b'-')) && digit(next2))
                    {
                        seen_exp = true;
                        self.pos += 2;
                    } else {
                        break;
                    }
                }
                _ => break,
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>().map(Tok::Num).map_err(|_| ParseError {
            offset: start,
            message: format!("invalid number `{text}`"),
        })
    }

    fn ident(&mut self, start: usize) -> Tok {
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            if c.is_ascii_alphanumeric() || c == b'_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        Tok::Ident(std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string())
    }
}

// ---------------------------------------------------------------------------
// Parser

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let toks = Lexer::tokens(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: src.len(),
    };
    let e = p.expr()?;
    if let Some((_, off)) = p.peek() {
        return Err(ParseError {
            offset: off,
            message: "unexpected trailing input".to_string(),
        });
    }
    Ok(e)
}

impl Parser {
    fn peek(&self) -> Option<(&Tok, usize)> {
        self.toks.get(self.pos).map(|(t, o)| (t, *o))
    }

    fn next(&mut self) -> Option<(Tok, usize)> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, o)| *o)
    }

    fn err<T>(&self, offset: usize, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            offset,
            message: message.into(),
        })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Some((tok, _)) = self.peek() {
            let op = match tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            self.next();
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        while let Some((tok, _)) = self.peek() {
            let op = match tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => break,
            };
            self.next();
            let rhs = self.factor()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if let Some((Tok::Minus, _)) = self.peek() {
            self.next();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if let Some((Tok::Caret, _)) = self.peek() {
            self.next();
            let e = self.exponent()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(e)));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<Expr, ParseError> {
        if let Some((Tok::Minus, _)) = self.peek() {
            self.next();
            return Ok(Expr::Neg(Box::new(self.exponent()?)));
        }
        self.power()
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let here = self.here();
        match self.next() {
            Some((Tok::Num(v), _)) => Ok(Expr::Num(v)),
            Some((Tok::Ident(name), off)) => {
                if let Some((Tok::LParen, _)) = self.peek() {
                    self.next();
                    let mut args = vec![self.expr()?];
                    loop {
                        match self.next() {
                            Some((Tok::RParen, _)) => break,
                            Some((Tok::Comma, _)) => args.push(self.expr()?),
                            Some((_, o)) => return self.err(o, "expected `,` or `)`"),
                            None => return self.err(self.end, "unclosed function call"),
                        }
                    }
                    self.call(&name, args, off)
                } else {
                    Ok(Expr::Var(name))
                }
            }
            Some((Tok::LParen, _)) => {
                let e = self.expr()?;
                match self.next() {
                    Some((Tok::RParen, _)) => Ok(e),
                    Some((_, o)) => self.err(o, "expected `)`"),
                    None => self.err(self.end, "unclosed parenthesis"),
                }
            }
            Some((tok, off)) => self.err(off, format!("unexpected token `{tok:?}`")),
            None => self.err(here, "unexpected end of input"),
        }
    }

    fn call(&self, name: &str, mut args: Vec<Expr>, off: usize) -> Result<Expr, ParseError> {
        if name == "pow" {
            if args.len() != 2 {
                return self.err(off, format!("pow takes 2 arguments, got {}", args.len()));
            }
            let b = args.remove(0);
            let e = args.remove(0);
            return Ok(Expr::Bin(BinOp::Pow, Box::new(b), Box::new(e)));
        }
        match Func::from_name(name) {
            Some(f) => {
                if args.len() != 1 {
                    return self.err(
                        off,
                        format!("{name} takes 1 argument, got {}", args.len()),
                    );
                }
                Ok(Expr::Unary(f, Box::new(args.remove(0))))
            }
            None => self.err(off, format!("unknown function `{name}`")),
        }
    }
}

// ---------------------------------------------------------------------------
// Printer

// Precedence levels used for minimal parenthesization.
const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Num(_) | Expr::Var(_) | Expr::Unary(..) => PREC_ATOM,
        Expr::Neg(_) => PREC_NEG,
        Expr::Bin(BinOp::Add | BinOp::Sub, ..) => PREC_ADD,
        Expr::Bin(BinOp::Mul | BinOp::Div, ..) => PREC_MUL,
        Expr::Bin(BinOp::Pow, ..) => PREC_POW,
    }
}

/// Prints with the fewest parentheses that still reparse to the same tree.
pub fn print(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e, 0);
    s
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self))
    }
}

fn write_expr(out: &mut String, e: &Expr, min_prec: u8) {
    let p = prec(e);
    let need_parens = p < min_prec;
    if need_parens {
        out.push('(');
    }
    match e {
        Expr::Num(v) => {
            // `{}` on f64 is the shortest decimal that round-trips in value.
            out.push_str(&format!("{v}"));
        }
        Expr::Var(n) => out.push_str(n),
        Expr::Unary(f, a) => {
            out.push_str(f.name());
            out.push('(');
            write_expr(out, a, 0);
            out.push(')');
        }
        Expr::Neg(a) => {
            out.push('-');
            write_expr(out, a, PREC_NEG);
        }
        Expr::Bin(op, l, r) => {
            let (sym, lp, rp) = match op {
                // Left-associative: a right child at the same level needs parens.
                BinOp::Add => (" + ", PREC_ADD, PREC_ADD + 1),
                BinOp::Sub => (" - ", PREC_ADD, PREC_ADD + 1),
                BinOp::Mul => (" * ", PREC_MUL, PREC_MUL + 1),
                BinOp::Div => (" / ", PREC_MUL, PREC_MUL + 1),
                // Right-associative; `-` is allowed bare in the exponent.
                BinOp::Pow => ("^", PREC_ATOM, PREC_NEG),
            };
            write_expr(out, l, lp);
            out.push_str(sym);
            write_expr(out, r, rp);
        }
    }
    if need_parens {
        out.push(')');
    }
}

// ---------------------------------------------------------------------------
// Evaluation

/// Applies a built-in function with its domain checks. The error value is a
/// short description of the violated requirement.
pub fn apply_func<T: Scalar>(f: Func, x: &T) -> Result<T, String> {
    let p = x.primal();
    match f {
        Func::Exp => Ok(x.exp()),
        Func::Log => {
            if p <= 0.0 {
                Err(format!("log of non-positive value {p}"))
            } else {
                Ok(x.ln())
            }
        }
        Func::Sin => Ok(x.sin()),
        Func::Cos => Ok(x.cos()),
        Func::Tan => Ok(x.tan()),
        Func::Sinh => Ok(x.sinh()),
        Func::Cosh => Ok(x.cosh()),
        Func::Tanh => Ok(x.tanh()),
        Func::Sqrt => {
            if p < 0.0 {
                Err(format!("sqrt of negative value {p}"))
            } else {
                Ok(x.sqrt())
            }
        }
        Func::Abs => Ok(x.abs()),
    }
}

/// `base ^ exp` with the domain rules shared by the expression and field
/// evaluators:
///
/// - positive base: `powf` (exact native primal lane);
/// - any base with a constant integer exponent: `powi` by the integer value;
/// - otherwise: domain error (negative base with non-integer or derivative-
///   carrying exponent, zero base with non-positive or non-integer exponent).
pub fn scalar_pow<T: Scalar>(base: &T, exp: &T) -> Result<T, String> {
    let b = base.primal();
    let e = exp.primal();
    let integer_exp = exp.is_constant() && e.fract() == 0.0 && e.abs() < 9.0e15;
    if b > 0.0 && !integer_exp {
        return Ok(base.powf(exp));
    }
    if integer_exp {
        if b == 0.0 && e <= 0.0 {
            return Err(format!("zero base raised to non-positive exponent {e}"));
        }
        return Ok(base.powi(e as i64));
    }
    if b == 0.0 {
        Err(format!("zero base raised to non-integer exponent {e}"))
    } else {
        Err(format!(
            "negative base {b} raised to non-integer or non-constant exponent"
        ))
    }
}

fn eval_impl<T: Scalar>(
    e: &Expr,
    lookup: &impl Fn(&str) -> Option<T>,
) -> Result<T, EvalError> {
    match e {
        Expr::Num(v) => Ok(T::from_f64(*v)),
        Expr::Var(name) => lookup(name).ok_or_else(|| EvalError::Unbound(name.clone())),
        Expr::Neg(a) => Ok(-eval_impl(a, lookup)?),
        Expr::Unary(f, a) => {
            let x = eval_impl(a, lookup)?;
            apply_func(*f, &x).map_err(|what| EvalError::Domain {
                what,
                context: print(e),
            })
        }
        Expr::Bin(op, l, r) => {
            let a = eval_impl(l, lookup)?;
            let b = eval_impl(r, lookup)?;
            match op {
                BinOp::Add => Ok(a + b),
                BinOp::Sub => Ok(a - b),
                BinOp::Mul => Ok(a * b),
                BinOp::Div => {
                    if b.primal() == 0.0 {
                        Err(EvalError::Domain {
                            what: "division by zero".to_string(),
                            context: print(e),
                        })
                    } else {
                        Ok(a / b)
                    }
                }
                BinOp::Pow => scalar_pow(&a, &b).map_err(|what| EvalError::Domain {
                    what,
                    context: print(e),
                }),
            }
        }
    }
}

/// Evaluates with dual-number arguments; derivative slots propagate exactly.
pub fn evaluate(e: &Expr, env: &HashMap<String, Dual<f64>>) -> Result<Dual<f64>, EvalError> {
    eval_impl(e, &|name| env.get(name).cloned())
}

/// Plain real evaluation. Evaluating [`evaluate`] with zero-seeded slots
/// produces bitwise the same value.
pub fn evaluate_real(e: &Expr, env: &HashMap<String, f64>) -> Result<f64, EvalError> {
    eval_impl(e, &|name| env.get(name).copied())
}

/// Free variables in order of first appearance.
pub fn free_vars(e: &Expr) -> Vec<String> {
    fn walk(e: &Expr, out: &mut Vec<String>) {
        match e {
            Expr::Num(_) => {}
            Expr::Var(n) => {
                if !out.iter().any(|v| v == n) {
                    out.push(n.clone());
                }
            }
            Expr::Neg(a) | Expr::Unary(_, a) => walk(a, out),
            Expr::Bin(_, l, r) => {
                walk(l, out);
                walk(r, out);
            }
        }
    }
    let mut out = Vec::new();
    walk(e, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(n: &str) -> Expr {
        Expr::Var(n.to_string())
    }

    fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Bin(op, Box::new(l), Box::new(r))
    }

    #[test]
    fn parses_common_shapes() {
        assert_eq!(
            parse("exp(t)").unwrap(),
            Expr::Unary(Func::Exp, Box::new(var("t")))
        );
        assert_eq!(
            parse("2*x + -y^2").unwrap(),
            bin(
                BinOp::Add,
                bin(BinOp::Mul, num(2.0), var("x")),
                Expr::Neg(Box::new(bin(BinOp::Pow, var("y"), num(2.0)))),
            )
        );
        assert_eq!(
            parse("pow(x, 3)").unwrap(),
            bin(BinOp::Pow, var("x"), num(3.0))
        );
    }

    #[test]
    fn precedence_and_associativity() {
        // -x^2 is -(x^2)
        assert_eq!(
            parse("-x^2").unwrap(),
            Expr::Neg(Box::new(bin(BinOp::Pow, var("x"), num(2.0))))
        );
        // x^2^3 is x^(2^3)
        assert_eq!(
            parse("x^2^3").unwrap(),
            bin(BinOp::Pow, var("x"), bin(BinOp::Pow, num(2.0), num(3.0)))
        );
        // 2^-3 allowed
        assert_eq!(
            parse("2^-3").unwrap(),
            bin(BinOp::Pow, num(2.0), Expr::Neg(Box::new(num(3.0))))
        );
        // a - b - c is (a - b) - c
        assert_eq!(
            parse("a - b - c").unwrap(),
            bin(BinOp::Sub, bin(BinOp::Sub, var("a"), var("b")), var("c"))
        );
        // -x*y is (-x)*y
        assert_eq!(
            parse("-x*y").unwrap(),
            bin(BinOp::Mul, Expr::Neg(Box::new(var("x"))), var("y"))
        );
        // 1 + 2 * 3 ^ 2
        let e = parse("1 + 2 * 3 ^ 2").unwrap();
        let env = HashMap::new();
        assert_eq!(evaluate_real(&e, &env).unwrap(), 19.0);
    }

    #[test]
    fn whitespace_insensitive() {
        assert_eq!(parse(" 2 * x ").unwrap(), parse("2*x").unwrap());
        assert_eq!(parse("exp( t )").unwrap(), parse("exp(t)").unwrap());
    }

    #[test]
    fn parse_errors_carry_byte_offsets() {
        let e = parse("exp(").unwrap_err();
        assert_eq!(e.offset, 4);
        let e = parse(")x").unwrap_err();
        assert_eq!(e.offset, 0);
        let e = parse("2 +").unwrap_err();
        assert_eq!(e.offset, 3);
        let e = parse("foo(x)").unwrap_err();
        assert_eq!(e.offset, 0);
        assert!(e.message.contains("unknown function"));
        let e = parse("pow(x)").unwrap_err();
        assert!(e.message.contains("pow takes 2 arguments"));
        let e = parse("sin(x, y)").unwrap_err();
        assert!(e.message.contains("takes 1 argument"));
        let e = parse("x $ y").unwrap_err();
        assert_eq!(e.offset, 2);
        let e = parse("x + y z").unwrap_err();
        assert_eq!(e.offset, 6);
    }

    #[test]
    fn evaluates_with_exact_derivatives() {
        // exp(2t) at t = 0: value 1, derivative 2.
        let e = parse("exp(2*t)").unwrap();
        let mut env = HashMap::new();
        env.insert("t".to_string(), Dual::var(0.0, 1, 0));
        let r = evaluate(&e, &env).unwrap();
        assert_eq!(r.val, 1.0);
        assert_eq!(r.der, vec![2.0]);

        // t^3 at t = 2: value 8, derivative 12.
        let e = parse("t^3").unwrap();
        let mut env = HashMap::new();
        env.insert("t".to_string(), Dual::var(2.0, 1, 0));
        let r = evaluate(&e, &env).unwrap();
        assert_eq!(r.val, 8.0);
        assert_eq!(r.der, vec![12.0]);
    }

    #[test]
    fn scaled_exponential_frozen_value() {
        let e = parse("c*exp(t)").unwrap();
        let mut env = HashMap::new();
        env.insert("c".to_string(), Dual::constant(1.5));
        env.insert("t".to_string(), Dual::var(1.0, 1, 0));
        let r = evaluate(&e, &env).unwrap();
        let expect = 1.5 * std::f64::consts::E;
        assert_eq!(r.val.to_bits(), expect.to_bits());
        assert_eq!(r.der[0].to_bits(), expect.to_bits());
    }

    #[test]
    fn zero_seed_matches_real_eval_bitwise() {
        let cases = [
            "exp(t) * sin(x) + sqrt(x + 3)/tanh(t + 2)",
            "x^t + log(x) - cos(t)^2",
            "pow(x, 2.5) + abs(t - 1)",
        ];
        for src in cases {
            let e = parse(src).unwrap();
            let mut seeded_env = HashMap::new();
            seeded_env.insert("t".to_string(), Dual::var(0.3, 2, 0));
            seeded_env.insert("x".to_string(), Dual::var(1.7, 2, 1));
            let mut zero_env = HashMap::new();
            zero_env.insert("t".to_string(), Dual::constant(0.3));
            zero_env.insert("x".to_string(), Dual::constant(1.7));
            let mut real_env = HashMap::new();
            real_env.insert("t".to_string(), 0.3);
            real_env.insert("x".to_string(), 1.7);
            let dual = evaluate(&e, &zero_env).unwrap();
            let real = evaluate_real(&e, &real_env).unwrap();
            assert_eq!(dual.val.to_bits(), real.to_bits(), "case {src}");
            // And the seeded primal lane agrees too.
            let seeded = evaluate(&e, &seeded_env).unwrap();
            assert_eq!(seeded.val.to_bits(), real.to_bits(), "case {src}");
        }
    }

    #[test]
    fn domain_errors() {
        let env_at = |v: f64| {
            let mut env = HashMap::new();
            env.insert("x".to_string(), Dual::var(v, 1, 0));
            env
        };
        let log = parse("log(x)").unwrap();
        assert!(matches!(
            evaluate(&log, &env_at(-1.0)),
            Err(EvalError::Domain { .. })
        ));
        assert!(matches!(
            evaluate(&log, &env_at(0.0)),
            Err(EvalError::Domain { .. })
        ));
        let div = parse("1/x").unwrap();
        assert!(matches!(
            evaluate(&div, &env_at(0.0)),
            Err(EvalError::Domain { .. })
        ));
        let sqrt = parse("sqrt(x)").unwrap();
        assert!(matches!(
            evaluate(&sqrt, &env_at(-2.0)),
            Err(EvalError::Domain { .. })
        ));
        assert_eq!(evaluate(&sqrt, &env_at(0.0)).unwrap().val, 0.0);
        let unbound = parse("y + 1").unwrap();
        assert_eq!(
            evaluate(&unbound, &env_at(1.0)),
            Err(EvalError::Unbound("y".to_string()))
        );
    }

    #[test]
    fn pow_domain_rules() {
        let eval1 = |src: &str, x: f64| {
            let e = parse(src).unwrap();
            let mut env = HashMap::new();
            env.insert("x".to_string(), Dual::var(x, 1, 0));
            evaluate(&e, &env)
        };
        // Negative base with integer constant exponent routes through powi.
        let r = eval1("x^3", -2.0).unwrap();
        assert_eq!(r.val, -8.0);
        assert_eq!(r.der, vec![12.0]);
        // Negative base with fractional exponent is a domain error.
        assert!(matches!(
            eval1("x^0.5", -2.0),
            Err(EvalError::Domain { .. })
        ));
        // Zero base: positive integer exponent fine, non-positive errors.
        assert_eq!(eval1("x^2", 0.0).unwrap().val, 0.0);
        assert!(matches!(eval1("x^0", 0.0), Err(EvalError::Domain { .. })));
        assert!(matches!(eval1("x^-1", 0.0), Err(EvalError::Domain { .. })));
        assert!(matches!(
            eval1("x^2.5", 0.0),
            Err(EvalError::Domain { .. })
        ));
        // Exponent computed from constants still counts as integer.
        let r = eval1("x^(1+1)", -3.0).unwrap();
        assert_eq!(r.val, 9.0);
        // Seeded exponent over a negative base is rejected even when its
        // value is an integer: the derivative needs log of the base.
        let e = parse("y^x").unwrap();
        let mut env = HashMap::new();
        env.insert("y".to_string(), Dual::constant(-2.0));
        env.insert("x".to_string(), Dual::var(2.0, 1, 0));
        assert!(matches!(evaluate(&e, &env), Err(EvalError::Domain { .. })));
    }

    #[test]
    fn print_round_trips() {
        let cases = [
            "exp(t)",
            "2 * x + -y^2",
            "x^2^3",
            "2^-3",
            "a - b - c",
            "a - (b - c)",
            "x * (y + z)",
            "-(x + y)",
            "-x * y",
            "x / y / z",
            "x / (y / z)",
            "pow(x, 3)",
            "sqrt(abs(x))",
            "(x + y)^(a + b)",
        ];
        for src in cases {
            let e = parse(src).unwrap();
            let printed = print(&e);
            let back = parse(&printed).unwrap();
            assert_eq!(back, e, "{src} printed as {printed}");
        }
    }

    #[test]
    fn free_vars_in_order() {
        let e = parse("exp(t) * x + t - y").unwrap();
        assert_eq!(free_vars(&e), vec!["t", "x", "y"]);
        assert!(free_vars(&parse("1 + 2").unwrap()).is_empty());
    }
}
