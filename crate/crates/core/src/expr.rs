//! Integrand expressions.
//!
//! A small arithmetic language over named line classes:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*')? power)*          juxtaposition multiplies
//! unary   := '-' unary | power              so -x^2 is -(x^2)
//! power   := atom ('^' INT)?
//! atom    := INT ('/' INT)? | 'beta' | 'm' INT | 'c1' '(' NAME ')'
//!          | 'e' '(' NAME ')' | NAME | '(' expr ')'
//! ```
//!
//! A bare `NAME` is shorthand for `c1(NAME)`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::algebra::{int, Rational, TruncatedSeries};
use crate::error::{Error, Result};
use crate::fgl::{universal_coefficient_name, BETA};
use crate::space::{BundleSpec, IntersectionRing, LineSummand};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClassExpr {
    Const(Rational),
    Beta,
    /// The universal coefficient mₖ.
    Coeff(u32),
    C1(String),
    Euler(String),
    Sum(Vec<ClassExpr>),
    Product(Vec<ClassExpr>),
    Neg(Box<ClassExpr>),
    Pow(Box<ClassExpr>, u32),
}

/// Line and bundle names visible to an expression.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClassEnv {
    pub lines: BTreeMap<String, LineSummand>,
    pub bundles: BTreeMap<String, BundleSpec>,
}

impl ClassEnv {
    pub fn bundle(&self, name: &str) -> Result<BundleSpec> {
        if let Some(b) = self.bundles.get(name) {
            return Ok(b.clone());
        }
        if let Some(l) = self.lines.get(name) {
            return Ok(BundleSpec::new(vec![l.clone()]));
        }
        Err(Error::UnknownVariable(name.into()))
    }

    pub fn line(&self, name: &str) -> Result<&LineSummand> {
        self.lines.get(name).ok_or_else(|| Error::UnknownVariable(name.into()))
    }
}

fn merge(a: Option<(i64, i64)>, b: Option<(i64, i64)>) -> Option<(i64, i64)> {
    match (a, b) {
        (Some((a0, a1)), Some((b0, b1))) => Some((a0.min(b0), a1.max(b1))),
        (x, None) => x,
        (None, y) => y,
    }
}

impl ClassExpr {
    pub fn parse(src: &str) -> Result<Self> {
        let tokens = tokenize(src)?;
        let mut p = Parser { tokens, pos: 0 };
        if p.tokens.is_empty() {
            return Ok(ClassExpr::Const(Rational::zero()));
        }
        let e = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Parse(format!("unexpected `{}`", p.tokens[p.pos])));
        }
        Ok(e)
    }

    pub fn int(n: i64) -> Self {
        ClassExpr::Const(int(n))
    }

    pub fn c1(name: &str) -> Self {
        ClassExpr::C1(name.into())
    }

    pub fn pow(self, k: u32) -> Self {
        ClassExpr::Pow(Box::new(self), k)
    }

    pub fn times(self, other: ClassExpr) -> Self {
        ClassExpr::Product(vec![self, other])
    }

    /// Syntactically zero (e.g. an empty integrand).
    pub fn is_zero_literal(&self) -> bool {
        matches!(self, ClassExpr::Const(c) if c.is_zero())
    }

    /// Range of codegrees the expression can have; `None` when it is the
    /// zero constant.
    pub fn codegree_range(&self, env: &ClassEnv) -> Result<Option<(i64, i64)>> {
        Ok(match self {
            ClassExpr::Const(c) if c.is_zero() => None,
            ClassExpr::Const(_) => Some((0, 0)),
            ClassExpr::Beta => Some((-1, -1)),
            ClassExpr::Coeff(k) => Some((-(*k as i64), -(*k as i64))),
            ClassExpr::C1(name) => {
                env.line(name)?;
                Some((1, 1))
            }
            ClassExpr::Euler(name) => {
                let r = env.bundle(name)?.rank() as i64;
                Some((r, r))
            }
            ClassExpr::Neg(x) => x.codegree_range(env)?,
            ClassExpr::Sum(xs) => {
                let mut acc = None;
                for x in xs {
                    acc = merge(acc, x.codegree_range(env)?);
                }
                acc
            }
            ClassExpr::Product(xs) => {
                let mut acc = Some((0, 0));
                for x in xs {
                    acc = match (acc, x.codegree_range(env)?) {
                        (Some((a0, a1)), Some((b0, b1))) => Some((a0 + b0, a1 + b1)),
                        _ => None,
                    };
                }
                acc
            }
            ClassExpr::Pow(x, 0) => {
                x.codegree_range(env)?;
                Some((0, 0))
            }
            ClassExpr::Pow(x, k) => x
                .codegree_range(env)?
                .map(|(a, b)| (a * *k as i64, b * *k as i64)),
        })
    }

    /// Every line and bundle name the expression mentions.
    pub fn names(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.walk(&mut |e| match e {
            ClassExpr::C1(n) | ClassExpr::Euler(n) => out.push(n.clone()),
            _ => {}
        });
        out.sort();
        out.dedup();
        out
    }

    fn walk(&self, f: &mut impl FnMut(&ClassExpr)) {
        f(self);
        match self {
            ClassExpr::Sum(xs) | ClassExpr::Product(xs) => xs.iter().for_each(|x| x.walk(f)),
            ClassExpr::Neg(x) | ClassExpr::Pow(x, _) => x.walk(f),
            _ => {}
        }
    }

    pub fn mentions_beta(&self) -> bool {
        let mut seen = false;
        self.walk(&mut |e| seen |= matches!(e, ClassExpr::Beta));
        seen
    }

    pub fn eval(&self, ring: &IntersectionRing, env: &ClassEnv) -> Result<TruncatedSeries> {
        Ok(match self {
            ClassExpr::Const(c) => ring.constant(c.clone()),
            ClassExpr::Beta => ring.variable(BETA).map_err(|_| {
                Error::TheoryMismatch(format!("`beta` is not a coefficient of the {} theory", ring.kind()))
            })?,
            ClassExpr::Coeff(k) => ring.variable(&universal_coefficient_name(*k)).map_err(|_| {
                Error::TheoryMismatch(format!(
                    "`m{k}` is not a coefficient of the {} theory at order {}",
                    ring.kind(),
                    ring.fgl().order()
                ))
            })?,
            ClassExpr::C1(name) => ring.line_class(env.line(name)?)?,
            ClassExpr::Euler(name) => ring.euler(&env.bundle(name)?)?,
            ClassExpr::Neg(x) => -&x.eval(ring, env)?,
            ClassExpr::Sum(xs) => {
                let mut acc = ring.zero();
                for x in xs {
                    acc = &acc + &x.eval(ring, env)?;
                }
                acc
            }
            ClassExpr::Product(xs) => {
                let mut acc = ring.one();
                for x in xs {
                    acc = ring.mul(&acc, &x.eval(ring, env)?)?;
                }
                acc
            }
            ClassExpr::Pow(x, k) => ring.pow(&x.eval(ring, env)?, *k)?,
        })
    }
}

impl fmt::Display for ClassExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassExpr::Const(c) => {
                if c.denom().is_one() {
                    write!(f, "{}", c.numer())
                } else {
                    write!(f, "{}/{}", c.numer(), c.denom())
                }
            }
            ClassExpr::Beta => write!(f, "beta"),
            ClassExpr::Coeff(k) => write!(f, "m{k}"),
            ClassExpr::C1(n) => write!(f, "c1({n})"),
            ClassExpr::Euler(n) => write!(f, "e({n})"),
            ClassExpr::Neg(x) => write!(f, "-({x})"),
            ClassExpr::Sum(xs) => {
                let parts: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
                write!(f, "({})", parts.join(" + "))
            }
            ClassExpr::Product(xs) => {
                let parts: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
                write!(f, "({})", parts.join("*"))
            }
            ClassExpr::Pow(x, k) => write!(f, "{x}^{k}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Token {
    Int(String),
    Ident(String),
    Sym(char),
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Int(s) | Token::Ident(s) => write!(f, "{s}"),
            Token::Sym(c) => write!(f, "{c}"),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&d) = chars.peek() {
                if d.is_ascii_digit() {
                    s.push(d);
                    chars.next();
                } else {
                    break;
                }
            }
            out.push(Token::Int(s));
        } else if c.is_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&d) = chars.peek() {
                if d.is_alphanumeric() || d == '_' || d == '\'' {
                    s.push(d);
                    chars.next();
                } else {
                    break;
                }
            }
            out.push(Token::Ident(s));
        } else if "+-*^/()·".contains(c) {
            out.push(Token::Sym(if c == '·' { '*' } else { c }));
            chars.next();
        } else {
            return Err(Error::Parse(format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Token::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(Error::Parse(match self.peek() {
                Some(t) => format!("expected `{c}`, found `{t}`"),
                None => format!("expected `{c}` at end of input"),
            }))
        }
    }

    fn expr(&mut self) -> Result<ClassExpr> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat('+') {
                terms.push(self.term()?);
            } else if self.eat('-') {
                terms.push(ClassExpr::Neg(Box::new(self.term()?)));
            } else {
                break;
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            ClassExpr::Sum(terms)
        })
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Some(Token::Int(_)) | Some(Token::Ident(_)) | Some(Token::Sym('('))
        )
    }

    fn term(&mut self) -> Result<ClassExpr> {
        let mut factors = vec![self.unary()?];
        loop {
            if self.eat('*') || self.starts_atom() {
                factors.push(self.power()?);
            } else {
                break;
            }
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            ClassExpr::Product(factors)
        })
    }

    fn power(&mut self) -> Result<ClassExpr> {
        let base = self.atom()?;
        if self.eat('^') {
            match self.next() {
                Some(Token::Int(s)) => {
                    let k: u32 = s
                        .parse()
                        .map_err(|_| Error::Parse(format!("exponent `{s}` out of range")))?;
                    Ok(ClassExpr::Pow(Box::new(base), k))
                }
                Some(t) => Err(Error::Parse(format!("exponent must be a nonnegative integer, found `{t}`"))),
                None => Err(Error::Parse("missing exponent".into())),
            }
        } else {
            Ok(base)
        }
    }

    fn unary(&mut self) -> Result<ClassExpr> {
        if self.eat('-') {
            Ok(ClassExpr::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn name_arg(&mut self) -> Result<String> {
        self.expect('(')?;
        let name = match self.next() {
            Some(Token::Ident(s)) => s,
            Some(t) => return Err(Error::Parse(format!("expected a name, found `{t}`"))),
            None => return Err(Error::Parse("expected a name".into())),
        };
        self.expect(')')?;
        Ok(name)
    }

    fn atom(&mut self) -> Result<ClassExpr> {
        match self.next() {
            Some(Token::Int(s)) => {
                let mut r = crate::algebra::parse_rational(&s)?;
                if self.eat('/') {
                    match self.next() {
                        Some(Token::Int(d)) => {
                            let d = crate::algebra::parse_rational(&d)?;
                            if d.is_zero() {
                                return Err(Error::Parse("division by zero".into()));
                            }
                            r /= d;
                        }
                        _ => return Err(Error::Parse("`/` must be followed by an integer".into())),
                    }
                }
                Ok(ClassExpr::Const(r))
            }
            Some(Token::Ident(s)) => match s.as_str() {
                "beta" => Ok(ClassExpr::Beta),
                "c1" if self.peek() == Some(&Token::Sym('(')) => Ok(ClassExpr::C1(self.name_arg()?)),
                "e" if self.peek() == Some(&Token::Sym('(')) => Ok(ClassExpr::Euler(self.name_arg()?)),
                _ => {
                    if let Some(k) = s.strip_prefix('m').and_then(|d| d.parse::<u32>().ok()) {
                        if k >= 1 {
                            return Ok(ClassExpr::Coeff(k));
                        }
                    }
                    Ok(ClassExpr::C1(s))
                }
            },
            Some(Token::Sym('(')) => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(t) => Err(Error::Parse(format!("unexpected `{t}`"))),
            None => Err(Error::Parse("unexpected end of expression".into())),
        }
    }
}
