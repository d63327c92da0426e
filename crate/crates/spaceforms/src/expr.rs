//! A small expression language for chart maps, warp functions, and
//! deformation generators. Hand-rolled lexer and recursive-descent parser
//! with standard infix precedence and a right-associative power operator;
//! evaluation runs on second-order jets ([`crate::Jet`]), so user programs
//! get exact derivatives.
//!
//! Grammar (no conditionals, no loops, no user functions):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?            -- right associative
//! atom   := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Known functions: `sin cos sinh cosh tanh exp log sqrt pow atan2`.
//! Variables are `u`, `v`, `t` plus any declared named parameters.

use crate::jet::Jet;
use crate::Real;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

/// Jet of a program value: value, first derivatives (u, v, t) and second
/// derivatives (uu, uv, vv).
pub type JetValue<T> = Jet<T>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: u32, col: u32, msg: String },
    #[error("unknown identifier `{name}` at {line}:{col}")]
    UnknownIdentifier { name: String, line: u32, col: u32 },
    #[error("domain error: {0}")]
    Domain(String),
}

type Result<X> = std::result::Result<X, ExprError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Sinh,
    Cosh,
    Tanh,
    Exp,
    Log,
    Sqrt,
    Pow,
    Atan2,
}

impl Func {
    fn from_name(s: &str) -> Option<(Func, usize)> {
        Some(match s {
            "sin" => (Func::Sin, 1),
            "cos" => (Func::Cos, 1),
            "sinh" => (Func::Sinh, 1),
            "cosh" => (Func::Cosh, 1),
            "tanh" => (Func::Tanh, 1),
            "exp" => (Func::Exp, 1),
            "log" => (Func::Log, 1),
            "sqrt" => (Func::Sqrt, 1),
            "pow" => (Func::Pow, 2),
            "atan2" => (Func::Atan2, 2),
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Pow => "pow",
            Func::Atan2 => "atan2",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Var(String),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

/// A parsed program: one expression per output component.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprProgram {
    exprs: Vec<Node>,
    vars: BTreeSet<String>,
}

// ---------------------------------------------------------------- lexer

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    Semi,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: u32,
    col: u32,
}

fn lex(src: &str) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    let mut line = 1u32;
    let mut col = 1u32;
    let mut it = src.chars().peekable();
    while let Some(&c) = it.peek() {
        let (l0, c0) = (line, col);
        let mut bump = |it: &mut std::iter::Peekable<std::str::Chars>| {
            let c = it.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut it);
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let mut s = String::new();
            while let Some(&d) = it.peek() {
                if d.is_ascii_digit() || d == '.' {
                    s.push(bump(&mut it));
                } else if d == 'e' || d == 'E' {
                    // exponent only if followed by digit or sign+digit
                    let mut probe = it.clone();
                    probe.next();
                    match probe.peek() {
                        Some(&p) if p.is_ascii_digit() => {
                            s.push(bump(&mut it));
                        }
                        Some(&('+' | '-')) => {
                            let mut probe2 = probe.clone();
                            probe2.next();
                            if matches!(probe2.peek(), Some(p) if p.is_ascii_digit()) {
                                s.push(bump(&mut it));
                                s.push(bump(&mut it));
                            } else {
                                break;
                            }
                        }
                        _ => break,
                    }
                } else {
                    break;
                }
            }
            let val: f64 = s.parse().map_err(|_| ExprError::Syntax {
                line: l0,
                col: c0,
                msg: format!("bad number literal `{s}`"),
            })?;
            out.push(Spanned { tok: Tok::Num(val), line: l0, col: c0 });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&d) = it.peek() {
                if d.is_ascii_alphanumeric() || d == '_' {
                    s.push(bump(&mut it));
                } else {
                    break;
                }
            }
            out.push(Spanned { tok: Tok::Ident(s), line: l0, col: c0 });
            continue;
        }
        let tok = match c {
            '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            ';' => Tok::Semi,
            other => {
                return Err(ExprError::Syntax {
                    line: l0,
                    col: c0,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        };
        bump(&mut it);
        out.push(Spanned { tok, line: l0, col: c0 });
    }
    Ok(out)
}

// --------------------------------------------------------------- parser

struct Parser<'a> {
    toks: &'a [Spanned],
    pos: usize,
    depth: u32,
    end_line: u32,
    end_col: u32,
}

const MAX_DEPTH: u32 = 200;

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (u32, u32) {
        self.toks
            .get(self.pos)
            .map(|s| (s.line, s.col))
            .unwrap_or((self.end_line, self.end_col))
    }

    fn err(&self, msg: impl Into<String>) -> ExprError {
        let (line, col) = self.here();
        ExprError::Syntax { line, col, msg: msg.into() }
    }

    fn next(&mut self) -> Option<&Spanned> {
        let s = self.toks.get(self.pos);
        if s.is_some() {
            self.pos += 1;
        }
        s
    }

    fn enter(&mut self) -> Result<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            Err(self.err("expression nested too deeply"))
        } else {
            Ok(())
        }
    }

    fn expr(&mut self) -> Result<Node> {
        self.enter()?;
        let mut lhs = self.term()?;
        while let Some(Tok::Op(op @ ('+' | '-'))) = self.peek() {
            let op = *op;
            self.next();
            let rhs = self.term()?;
            lhs = if op == '+' {
                Node::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        self.enter()?;
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(op @ ('*' | '/'))) = self.peek() {
            let op = *op;
            self.next();
            let rhs = self.unary()?;
            lhs = if op == '*' {
                Node::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node> {
        self.enter()?;
        let n = if let Some(Tok::Op('-')) = self.peek() {
            self.next();
            Node::Neg(Box::new(self.unary()?))
        } else {
            self.power()?
        };
        self.depth -= 1;
        Ok(n)
    }

    fn power(&mut self) -> Result<Node> {
        self.enter()?;
        let base = self.atom()?;
        let n = if let Some(Tok::Op('^')) = self.peek() {
            self.next();
            let exp = self.unary()?; // right associative
            Node::Pow(Box::new(base), Box::new(exp))
        } else {
            base
        };
        self.depth -= 1;
        Ok(n)
    }

    fn atom(&mut self) -> Result<Node> {
        self.enter()?;
        let s = match self.next() {
            Some(s) => s.clone(),
            None => return Err(self.err("unexpected end of input")),
        };
        let n = match &s.tok {
            Tok::Num(x) => Node::Num(*x),
            Tok::LParen => {
                let inner = self.expr()?;
                match self.peek() {
                    Some(Tok::RParen) => {
                        self.next();
                        inner
                    }
                    _ => return Err(self.err("expected `)`")),
                }
            }
            Tok::Ident(name) => {
                if let Some(Tok::LParen) = self.peek() {
                    let (fun, arity) = Func::from_name(name).ok_or_else(|| {
                        ExprError::UnknownIdentifier {
                            name: name.clone(),
                            line: s.line,
                            col: s.col,
                        }
                    })?;
                    self.next(); // (
                    let mut args = vec![self.expr()?];
                    while let Some(Tok::Comma) = self.peek() {
                        self.next();
                        args.push(self.expr()?);
                    }
                    match self.peek() {
                        Some(Tok::RParen) => {
                            self.next();
                        }
                        _ => {
                            return Err(
                                self.err(format!("unclosed argument list of `{name}`"))
                            )
                        }
                    }
                    if args.len() != arity {
                        return Err(ExprError::Syntax {
                            line: s.line,
                            col: s.col,
                            msg: format!(
                                "`{name}` takes {arity} argument(s), got {}",
                                args.len()
                            ),
                        });
                    }
                    Node::Call(fun, args)
                } else {
                    Node::Var(name.clone())
                }
            }
            other => {
                return Err(ExprError::Syntax {
                    line: s.line,
                    col: s.col,
                    msg: format!("unexpected token {other:?}"),
                })
            }
        };
        self.depth -= 1;
        Ok(n)
    }
}

fn collect_vars(n: &Node, out: &mut BTreeSet<String>) {
    match n {
        Node::Num(_) => {}
        Node::Var(name) => {
            out.insert(name.clone());
        }
        Node::Neg(a) => collect_vars(a, out),
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
            collect_vars(a, out);
            collect_vars(b, out);
        }
        Node::Call(_, args) => args.iter().for_each(|a| collect_vars(a, out)),
    }
}

impl ExprProgram {
    /// Parse a scalar or vector program. Components are separated by `;`.
    /// Free variables must lie in `{u, v, t} ∪ declared_params`.
    pub fn parse_with_params(source: &str, declared_params: &[&str]) -> Result<Self> {
        let toks = lex(source)?;
        let (end_line, end_col) = toks
            .last()
            .map(|s| (s.line, s.col + 1))
            .unwrap_or((1, 1));
        let mut p = Parser { toks: &toks, pos: 0, depth: 0, end_line, end_col };
        let mut exprs = Vec::new();
        if p.peek().is_none() {
            return Err(p.err("empty program"));
        }
        loop {
            exprs.push(p.expr()?);
            match p.peek() {
                None => break,
                Some(Tok::Semi) => {
                    p.next();
                    if p.peek().is_none() {
                        break; // trailing semicolon
                    }
                }
                Some(_) => return Err(p.err("expected `;` or end of input")),
            }
        }
        let mut vars = BTreeSet::new();
        for e in &exprs {
            collect_vars(e, &mut vars);
        }
        for name in &vars {
            let known = name == "u" || name == "v" || name == "t"
                || declared_params.contains(&name.as_str());
            if !known {
                // locate it for the error position
                let spot = toks.iter().find(|s| matches!(&s.tok, Tok::Ident(n) if n == name));
                let (line, col) = spot.map(|s| (s.line, s.col)).unwrap_or((1, 1));
                return Err(ExprError::UnknownIdentifier { name: name.clone(), line, col });
            }
        }
        Ok(ExprProgram { exprs, vars })
    }

    pub fn parse(source: &str) -> Result<Self> {
        Self::parse_with_params(source, &[])
    }

    /// Number of output components.
    pub fn arity(&self) -> usize {
        self.exprs.len()
    }

    /// Free variables of the program.
    pub fn vars(&self) -> &BTreeSet<String> {
        &self.vars
    }

    /// Evaluate all components on jets.
    pub fn eval_jet<T: Real>(
        &self,
        u: Jet<T>,
        v: Jet<T>,
        t: Jet<T>,
        params: &BTreeMap<String, T>,
    ) -> Result<Vec<JetValue<T>>> {
        self.exprs
            .iter()
            .map(|e| eval_node(e, u, v, t, params))
            .collect()
    }

    /// Convenience: evaluate a scalar program's first component.
    pub fn eval_scalar<T: Real>(
        &self,
        u: Jet<T>,
        v: Jet<T>,
        t: Jet<T>,
        params: &BTreeMap<String, T>,
    ) -> Result<JetValue<T>> {
        eval_node(&self.exprs[0], u, v, t, params)
    }
}

fn is_const<T: Real>(j: &Jet<T>) -> bool {
    j.du == T::zero()
        && j.dv == T::zero()
        && j.dt == T::zero()
        && j.duu == T::zero()
        && j.duv == T::zero()
        && j.dvv == T::zero()
}

fn jet_pow<T: Real>(a: Jet<T>, b: Jet<T>) -> Result<Jet<T>> {
    if is_const(&b) {
        let bi = b.v.round();
        if (b.v - bi).abs() < T::of(1e-12) && bi.abs() < T::of(64.0) {
            let k = bi.as_f64() as i32;
            if k >= 0 || a.v != T::zero() {
                return Ok(a.powi(k));
            }
        }
        if a.v > T::zero() {
            return Ok(a.powf(b.v));
        }
        return Err(ExprError::Domain(format!(
            "pow: non-integer exponent with non-positive base {}",
            a.v.as_f64()
        )));
    }
    if a.v <= T::zero() {
        return Err(ExprError::Domain(
            "pow: variable exponent requires positive base".into(),
        ));
    }
    Ok((b * a.ln()).exp())
}

fn eval_node<T: Real>(
    n: &Node,
    u: Jet<T>,
    v: Jet<T>,
    t: Jet<T>,
    params: &BTreeMap<String, T>,
) -> Result<Jet<T>> {
    Ok(match n {
        Node::Num(x) => Jet::constant(T::of(*x)),
        Node::Var(name) => match name.as_str() {
            "u" => u,
            "v" => v,
            "t" => t,
            other => Jet::constant(*params.get(other).ok_or_else(|| {
                ExprError::Domain(format!("parameter `{other}` not bound"))
            })?),
        },
        Node::Neg(a) => -eval_node(a, u, v, t, params)?,
        Node::Add(a, b) => eval_node(a, u, v, t, params)? + eval_node(b, u, v, t, params)?,
        Node::Sub(a, b) => eval_node(a, u, v, t, params)? - eval_node(b, u, v, t, params)?,
        Node::Mul(a, b) => eval_node(a, u, v, t, params)? * eval_node(b, u, v, t, params)?,
        Node::Div(a, b) => {
            let den = eval_node(b, u, v, t, params)?;
            if den.v == T::zero() {
                return Err(ExprError::Domain("division by zero".into()));
            }
            eval_node(a, u, v, t, params)? / den
        }
        Node::Pow(a, b) => jet_pow(eval_node(a, u, v, t, params)?, eval_node(b, u, v, t, params)?)?,
        Node::Call(f, args) => {
            let a0 = eval_node(&args[0], u, v, t, params)?;
            match f {
                Func::Sin => a0.sin(),
                Func::Cos => a0.cos(),
                Func::Sinh => a0.sinh(),
                Func::Cosh => a0.cosh(),
                Func::Tanh => a0.tanh(),
                Func::Exp => a0.exp(),
                Func::Log => {
                    if a0.v <= T::zero() {
                        return Err(ExprError::Domain(format!(
                            "log of non-positive value {}",
                            a0.v.as_f64()
                        )));
                    }
                    a0.ln()
                }
                Func::Sqrt => {
                    if a0.v < T::zero() {
                        return Err(ExprError::Domain(format!(
                            "sqrt of negative value {}",
                            a0.v.as_f64()
                        )));
                    }
                    a0.sqrt()
                }
                Func::Pow => jet_pow(a0, eval_node(&args[1], u, v, t, params)?)?,
                Func::Atan2 => {
                    let a1 = eval_node(&args[1], u, v, t, params)?;
                    if a0.v == T::zero() && a1.v == T::zero() {
                        return Err(ExprError::Domain("atan2 at the origin".into()));
                    }
                    a0.atan2(a1)
                }
            }
        }
    })
}

// canonical printing (fully parenthesized), used for the round-trip property
fn fmt_node(n: &Node, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match n {
        Node::Num(x) => write!(f, "{x}"),
        Node::Var(s) => write!(f, "{s}"),
        Node::Neg(a) => {
            write!(f, "(-")?;
            fmt_node(a, f)?;
            write!(f, ")")
        }
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
            let op = match n {
                Node::Add(..) => '+',
                Node::Sub(..) => '-',
                Node::Mul(..) => '*',
                Node::Div(..) => '/',
                _ => '^',
            };
            write!(f, "(")?;
            fmt_node(a, f)?;
            write!(f, "{op}")?;
            fmt_node(b, f)?;
            write!(f, ")")
        }
        Node::Call(fun, args) => {
            write!(f, "{}(", fun.name())?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                fmt_node(a, f)?;
            }
            write!(f, ")")
        }
    }
}

impl fmt::Display for ExprProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.exprs.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            fmt_node(e, f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_reports_vars() {
        let p = ExprProgram::parse("cosh(t)*sin(u)").unwrap();
        let vars: Vec<_> = p.vars().iter().cloned().collect();
        assert_eq!(vars, vec!["t".to_string(), "u".to_string()]);
    }

    #[test]
    fn syntax_error_carries_position() {
        let e = ExprProgram::parse("sin(u").unwrap_err();
        match e {
            ExprError::Syntax { col, .. } => assert_eq!(col, 6),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_identifier_rejected() {
        let e = ExprProgram::parse("foo(u)").unwrap_err();
        assert!(matches!(e, ExprError::UnknownIdentifier { ref name, .. } if name == "foo"));
        let e2 = ExprProgram::parse("u + bogus").unwrap_err();
        assert!(matches!(e2, ExprError::UnknownIdentifier { ref name, .. } if name == "bogus"));
    }

    #[test]
    fn declared_params_accepted() {
        let p = ExprProgram::parse_with_params("r0*(1+t*sin(u))", &["r0"]).unwrap();
        let mut params = BTreeMap::new();
        params.insert("r0".to_string(), 2.0);
        let j = p
            .eval_scalar(Jet::var_u(0.0), Jet::var_v(0.0), Jet::constant(0.0), &params)
            .unwrap();
        assert_eq!(j.v, 2.0);
    }

    #[test]
    fn product_rule_example() {
        let p = ExprProgram::parse("u*v").unwrap();
        let j = p
            .eval_scalar(Jet::var_u(2.0), Jet::var_v(3.0), Jet::constant(0.0), &BTreeMap::new())
            .unwrap();
        assert_eq!((j.v, j.du, j.dv, j.duv, j.duu), (6.0, 3.0, 2.0, 1.0, 0.0));
    }

    #[test]
    fn cosh_t_example() {
        let p = ExprProgram::parse("cosh(t)").unwrap();
        let j = p
            .eval_scalar(Jet::constant(0.0), Jet::constant(0.0), Jet::var_t(1.0), &BTreeMap::new())
            .unwrap();
        assert!((j.dt - 1.0f64.sinh()).abs() < 1e-14);
    }

    #[test]
    fn power_right_associative() {
        let p = ExprProgram::parse("2^3^2").unwrap();
        let j = p
            .eval_scalar(
                Jet::<f64>::constant(0.0),
                Jet::constant(0.0),
                Jet::constant(0.0),
                &BTreeMap::new(),
            )
            .unwrap();
        assert_eq!(j.v, 512.0); // 2^(3^2)
    }

    #[test]
    fn vector_arity() {
        let p = ExprProgram::parse("sin(u); cos(u); t").unwrap();
        assert_eq!(p.arity(), 3);
    }

    #[test]
    fn domain_errors() {
        let p = ExprProgram::parse("log(u)").unwrap();
        let e = p.eval_scalar(
            Jet::<f64>::var_u(-1.0),
            Jet::constant(0.0),
            Jet::constant(0.0),
            &BTreeMap::new(),
        );
        assert!(matches!(e, Err(ExprError::Domain(_))));
    }

    #[test]
    fn print_parse_idempotent() {
        for src in ["u*v+3", "-sin(u)^2 + pow(v, 2)", "atan2(u, v)/(1+t)", "2^3^u"] {
            let p = ExprProgram::parse(src).unwrap();
            let printed = p.to_string();
            let p2 = ExprProgram::parse(&printed).unwrap();
            assert_eq!(printed, p2.to_string());
            assert_eq!(p, p2);
        }
    }
}
