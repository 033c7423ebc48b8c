//! A small expression language for field polynomials and operator products.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary ('*' unary)*
//! unary   := '-' unary | postfix
//! postfix := primary ('^' INT)*
//! primary := NUMBER | 'i' | '(' expr ')' | field | named | call
//! field   := ('d' '[' ident (',' ident)* ']')? ('phi' | 'phis') ('^' INT)? '(' label ')'
//! named   := 'L' '(' label ')' | 'j' '[' ident ']' '(' label ')' | 'Q' '(' label ')'
//! call    := ('tproduct' | 'star' | 'fstar' | 'comm' | 'bracket') '(' expr (',' expr)* ')'
//! ```
//!
//! Numbers are `3`, `1/2`, `2i`, `1/2i`; `i` alone is the imaginary unit.
//! The printer emits the minimal parenthesization, and `parse(print(e)) == e`
//! for every expression whose numeric literals are non-negative.

use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::coeff::{format_number, int, Number, Rational};
use crate::field::{FieldError, FieldPolynomial, Species};
use crate::symbols::{Index, Label};
use crate::wick::{unrenormalized_tproduct, OperatorExpr, WickError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CallOp {
    TProduct,
    Star,
    FeynmanStar,
    Commutator,
    Bracket,
}

impl CallOp {
    pub fn name(self) -> &'static str {
        match self {
            CallOp::TProduct => "tproduct",
            CallOp::Star => "star",
            CallOp::FeynmanStar => "fstar",
            CallOp::Commutator => "comm",
            CallOp::Bracket => "bracket",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        [Self::TProduct, Self::Star, Self::FeynmanStar, Self::Commutator, Self::Bracket]
            .into_iter()
            .find(|op| op.name() == s)
    }

    /// `None` for variadic operations.
    fn arity(self) -> Option<usize> {
        match self {
            CallOp::TProduct => None,
            _ => Some(2),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    /// A single literal: a non-negative rational or a non-negative multiple of `i`.
    Num(Number),
    /// `(∂^{derivs} φ)^power` at `label`.
    Field { species: Species, derivs: Vec<Index>, power: u32, label: Label },
    Lagrangian(Label),
    Current(Index, Label),
    Charge(Label),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Call(CallOp, Vec<Expr>),
}

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }

    fn write(&self, out: &mut String, min: u8) {
        let wrap = self.precedence() < min;
        if wrap {
            out.push('(');
        }
        match self {
            Expr::Num(n) => out.push_str(&format_number(n)),
            Expr::Field { species, derivs, power, label } => {
                if !derivs.is_empty() {
                    out.push_str(&format!("d{}", crate::symbols::fmt_indices(derivs)));
                }
                out.push_str(species.name());
                if *power != 1 {
                    out.push_str(&format!("^{power}"));
                }
                out.push_str(&format!("({label})"));
            }
            Expr::Lagrangian(l) => out.push_str(&format!("L({l})")),
            Expr::Current(i, l) => out.push_str(&format!("j[{i}]({l})")),
            Expr::Charge(l) => out.push_str(&format!("Q({l})")),
            Expr::Neg(a) => {
                out.push('-');
                a.write(out, 3);
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                a.write(out, 1);
                out.push_str(if matches!(self, Expr::Add(..)) { " + " } else { " - " });
                b.write(out, 2);
            }
            Expr::Mul(a, b) => {
                a.write(out, 2);
                out.push_str(" * ");
                b.write(out, 3);
            }
            Expr::Pow(a, n) => {
                a.write(out, 5);
                out.push_str(&format!("^{n}"));
            }
            Expr::Call(op, args) => {
                out.push_str(op.name());
                out.push('(');
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    a.write(out, 0);
                }
                out.push(')');
            }
        }
        if wrap {
            out.push(')');
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write(&mut s, 0);
        f.write_str(&s)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    /// Byte offset into the input.
    pub offset: usize,
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub expected: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    /// Magnitude, and whether it carries a trailing `i`.
    Number(Rational, bool),
    Sym(char),
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Number(r, im) => write!(f, "`{r}{}`", if *im { "i" } else { "" }),
            Tok::Sym(c) => write!(f, "`{c}`"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn error_at(src: &str, offset: usize, message: String, expected: Vec<String>) -> ParseError {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |s| s.chars().count()) + 1;
    ParseError { offset, line, column, message, expected }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut out = Vec::new();
    let mut k = 0;
    let digits = |k: &mut usize| -> String {
        let mut s = String::new();
        while *k < chars.len() && chars[*k].1.is_ascii_digit() {
            s.push(chars[*k].1);
            *k += 1;
        }
        s
    };
    while k < chars.len() {
        let (off, c) = chars[k];
        if c.is_whitespace() {
            k += 1;
        } else if c.is_ascii_digit() {
            let numer = digits(&mut k);
            let mut value: Rational = numer
                .parse::<i128>()
                .map(Rational::from_integer)
                .map_err(|_| error_at(src, off, format!("number `{numer}` is too large"), Vec::new()))?;
            if k < chars.len() && chars[k].1 == '/' {
                let slash = chars[k].0;
                k += 1;
                let denom = digits(&mut k);
                let d: i128 = denom
                    .parse()
                    .map_err(|_| error_at(src, slash, "expected a denominator after `/`".into(), vec!["integer".into()]))?;
                if d == 0 {
                    return Err(error_at(src, slash, "zero denominator".into(), Vec::new()));
                }
                value /= Rational::from_integer(d);
            }
            let imaginary = k < chars.len()
                && chars[k].1 == 'i'
                && !(k + 1 < chars.len() && is_ident_char(chars[k + 1].1));
            if imaginary {
                k += 1;
            }
            out.push((Tok::Number(value, imaginary), off));
        } else if is_ident_start(c) {
            let mut s = String::new();
            while k < chars.len() && is_ident_char(chars[k].1) {
                s.push(chars[k].1);
                k += 1;
            }
            out.push((Tok::Ident(s), off));
        } else if "()[],*+-^".contains(c) {
            out.push((Tok::Sym(c), off));
            k += 1;
        } else {
            return Err(error_at(src, off, format!("unexpected character `{c}`"), Vec::new()));
        }
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &[&str]) -> Result<T, ParseError> {
        let list = expected.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        Err(error_at(
            self.src,
            self.offset(),
            format!("expected {}, found {}", list.join(" or "), self.peek()),
            list,
        ))
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.fail(&[&format!("`{c}`")])
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.fail(&[what]),
        }
    }

    fn integer(&mut self) -> Result<u32, ParseError> {
        match self.peek().clone() {
            Tok::Number(r, false) if r.is_integer() && !r.is_negative() && *r.numer() <= u32::MAX as i128 => {
                self.bump();
                Ok(*r.numer() as u32)
            }
            _ => self.fail(&["exponent"]),
        }
    }

    fn label(&mut self) -> Result<Label, ParseError> {
        self.expect('(')?;
        let l = self.ident("point label")?;
        self.expect(')')?;
        Ok(Label::new(l))
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while self.eat('*') {
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        let mut e = self.primary()?;
        while self.eat('^') {
            e = Expr::Pow(Box::new(e), self.integer()?);
        }
        Ok(e)
    }

    fn field(&mut self, derivs: Vec<Index>) -> Result<Expr, ParseError> {
        let species = match self.ident("`phi` or `phis`")?.as_str() {
            "phi" => Species::Phi,
            "phis" => Species::PhiStar,
            _ => {
                self.pos -= 1;
                return self.fail(&["`phi`", "`phis`"]);
            }
        };
        let power = if self.eat('^') { self.integer()? } else { 1 };
        let label = self.label()?;
        Ok(Expr::Field { species, derivs, power, label })
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let start = self.offset();
        match self.peek().clone() {
            Tok::Number(r, imaginary) => {
                self.bump();
                let zero = Rational::zero();
                Ok(Expr::Num(if imaginary { Number::new(zero, r) } else { Number::new(r, zero) }))
            }
            Tok::Sym('(') => {
                self.bump();
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                match name.as_str() {
                    "i" => Ok(Expr::Num(Number::new(Rational::zero(), Rational::one()))),
                    "phi" | "phis" => {
                        self.pos -= 1;
                        self.field(Vec::new())
                    }
                    "d" => {
                        self.expect('[')?;
                        let mut derivs = vec![Index::new(self.ident("index name")?)];
                        while self.eat(',') {
                            derivs.push(Index::new(self.ident("index name")?));
                        }
                        self.expect(']')?;
                        self.field(derivs)
                    }
                    "L" => Ok(Expr::Lagrangian(self.label()?)),
                    "Q" => Ok(Expr::Charge(self.label()?)),
                    "j" => {
                        self.expect('[')?;
                        let idx = Index::new(self.ident("index name")?);
                        if *self.peek() == Tok::Sym(',') {
                            return Err(error_at(
                                self.src,
                                self.offset(),
                                "the current `j` takes exactly one index".into(),
                                vec!["`]`".into()],
                            ));
                        }
                        self.expect(']')?;
                        Ok(Expr::Current(idx, self.label()?))
                    }
                    other => {
                        let Some(op) = CallOp::from_name(other) else {
                            return Err(error_at(
                                self.src,
                                start,
                                format!("unknown identifier `{other}`"),
                                vec!["phi".into(), "phis".into(), "d".into(), "L".into(), "j".into(), "Q".into()],
                            ));
                        };
                        self.expect('(')?;
                        let mut args = vec![self.expr()?];
                        while self.eat(',') {
                            args.push(self.expr()?);
                        }
                        self.expect(')')?;
                        if let Some(n) = op.arity() {
                            if args.len() != n {
                                return Err(error_at(
                                    self.src,
                                    start,
                                    format!("`{}` takes {n} arguments, got {}", op.name(), args.len()),
                                    Vec::new(),
                                ));
                            }
                        }
                        Ok(Expr::Call(op, args))
                    }
                }
            }
            _ => self.fail(&["number", "field", "`(`"]),
        }
    }
}

pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { src, toks, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.fail(&["operator", "end of input"]);
    }
    Ok(e)
}

/// Parses and evaluates to a field polynomial, rejecting operator-valued input.
pub fn parse_polynomial(src: &str) -> Result<FieldPolynomial, DslError> {
    match eval(&parse(src)?)? {
        Value::Polynomial(p) => Ok(p),
        Value::Operator(_) => Err(DslError::Eval(EvalError::NotAPolynomial(src.to_string()))),
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("`{0}` is an operator product, but a local polynomial is required here")]
    NotAPolynomial(String),
    #[error(transparent)]
    Wick(#[from] WickError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DslError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Result of evaluating an expression.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Polynomial(FieldPolynomial),
    Operator(OperatorExpr),
}

impl Value {
    pub fn into_operator(self) -> OperatorExpr {
        match self {
            Value::Polynomial(p) => OperatorExpr::from_polynomial(&p),
            Value::Operator(o) => o,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Polynomial(p) => p.fmt(f),
            Value::Operator(o) => o.fmt(f),
        }
    }
}

fn binary(
    a: Value,
    b: Value,
    poly: impl Fn(&FieldPolynomial, &FieldPolynomial) -> FieldPolynomial,
    op: impl Fn(&OperatorExpr, &OperatorExpr) -> OperatorExpr,
) -> Value {
    match (a, b) {
        (Value::Polynomial(x), Value::Polynomial(y)) => Value::Polynomial(poly(&x, &y)),
        (a, b) => Value::Operator(op(&a.into_operator(), &b.into_operator())),
    }
}

pub fn eval(e: &Expr) -> Result<Value, EvalError> {
    Ok(match e {
        Expr::Num(n) => Value::Polynomial(FieldPolynomial::constant(*n)),
        Expr::Field { species, derivs, power, label } => {
            Value::Polynomial(FieldPolynomial::basic(label, *species, derivs.clone()).pow(*power))
        }
        Expr::Lagrangian(l) => Value::Polynomial(FieldPolynomial::lagrangian(l)),
        Expr::Current(i, l) => Value::Polynomial(FieldPolynomial::current(i, l)),
        Expr::Charge(l) => Value::Polynomial(FieldPolynomial::charge_generator(l)),
        Expr::Neg(a) => match eval(a)? {
            Value::Polynomial(p) => Value::Polynomial(p.scale(&int(-1))),
            Value::Operator(o) => Value::Operator(o.scale(&int(-1))),
        },
        Expr::Add(a, b) => binary(eval(a)?, eval(b)?, FieldPolynomial::add, OperatorExpr::add),
        Expr::Sub(a, b) => binary(eval(a)?, eval(b)?, FieldPolynomial::sub, OperatorExpr::sub),
        Expr::Mul(a, b) => binary(eval(a)?, eval(b)?, FieldPolynomial::multiply, OperatorExpr::multiply),
        Expr::Pow(a, n) => match eval(a)? {
            Value::Polynomial(p) => Value::Polynomial(p.pow(*n)),
            Value::Operator(o) => {
                Value::Operator((0..*n).fold(OperatorExpr::one(), |acc, _| acc.multiply(&o)))
            }
        },
        Expr::Call(op, args) => {
            let values = args.iter().map(eval).collect::<Result<Vec<_>, _>>()?;
            match op {
                CallOp::TProduct => {
                    let polys = values
                        .into_iter()
                        .zip(args)
                        .map(|(v, a)| match v {
                            Value::Polynomial(p) => Ok(p),
                            Value::Operator(_) => Err(EvalError::NotAPolynomial(a.to_string())),
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    Value::Operator(unrenormalized_tproduct(&polys)?)
                }
                _ => {
                    let mut it = values.into_iter().map(Value::into_operator);
                    let (a, b) = (it.next().expect("arity checked"), it.next().expect("arity checked"));
                    Value::Operator(match op {
                        CallOp::Star => a.star(&b),
                        CallOp::FeynmanStar => a.feynman_star(&b),
                        CallOp::Commutator => a.commutator(&b),
                        CallOp::Bracket => a.poisson_bracket(&b),
                        CallOp::TProduct => unreachable!(),
                    })
                }
            }
        }
    })
}

pub fn parse_and_eval(src: &str) -> Result<Value, DslError> {
    Ok(eval(&parse(src)?)?)
}
