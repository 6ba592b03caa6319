//! Canonical S-expression form of scalars, vectors and operators. The
//! writer is deterministic and the reader accepts everything it writes plus
//! a few convenience forms; see `docs/grammar.md`.

use std::fmt;

use num_traits::{One, Zero};

use crate::fields::{field_vec, FieldKind};
use crate::symkernel::{
    Frame, KernelError, OpExpr, OpFactor, OpTerm, Poly, RatFunc, Rational, ScalarExpr, SymbolTable,
    VecAtom, VecExpr, VecTerm,
};

fn number(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn poly(p: &Poly) -> String {
    let mut terms = Vec::new();
    for (m, c) in p.terms().rev() {
        let mut parts = Vec::new();
        if m.is_one() || !c.is_one() {
            parts.push(number(c));
        }
        for (s, k) in m.factors() {
            if *k == 1 {
                parts.push(s.name().to_owned());
            } else {
                parts.push(format!("(^ {} {k})", s.name()));
            }
        }
        terms.push(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            format!("(* {})", parts.join(" "))
        });
    }
    match terms.len() {
        0 => "0".into(),
        1 => terms.pop().unwrap(),
        _ => format!("(+ {})", terms.join(" ")),
    }
}

pub fn ratfunc(r: &RatFunc) -> String {
    if r.den().is_one() {
        poly(r.num())
    } else {
        format!("(/ {} {})", poly(r.num()), poly(r.den()))
    }
}

pub fn scalar(s: &ScalarExpr) -> String {
    let mut parts: Vec<String> = s
        .grades()
        .map(|(g, r)| {
            if g == 0 {
                ratfunc(r)
            } else {
                format!("(mu {g} {})", ratfunc(r))
            }
        })
        .collect();
    match parts.len() {
        0 => "0".into(),
        1 => parts.pop().unwrap(),
        _ => format!("(+ {})", parts.join(" ")),
    }
}

pub fn vec_term(t: &VecTerm) -> String {
    match t {
        VecTerm::Atom(a) => match a {
            VecAtom::Position(Frame::Lab, i) => format!("(r {i})"),
            VecAtom::Position(Frame::Jacobi, i) => format!("(R {i})"),
            VecAtom::Momentum(Frame::Lab, i) => format!("(p {i})"),
            VecAtom::Momentum(Frame::Jacobi, i) => format!("(P {i})"),
            VecAtom::Spin(i) => format!("(S {i})"),
            VecAtom::MagneticMoment(i) => format!("(M {i})"),
            VecAtom::Field(fa) => {
                let mut s = format!(
                    "(field {} {} {}",
                    fa.kind.name(),
                    fa.scale,
                    vector(&fa.point)
                );
                for d in &fa.dirs {
                    s.push(' ');
                    s.push_str(&vec_term(d));
                }
                s.push(')');
                s
            }
        },
        VecTerm::Cross(a, b) => format!("(cross {} {})", vec_term(a), vec_term(b)),
    }
}

pub fn vector(v: &VecExpr) -> String {
    let mut parts: Vec<String> = v
        .terms()
        .map(|(t, c)| {
            if c.is_one() {
                vec_term(t)
            } else {
                format!("(* {} {})", scalar(c), vec_term(t))
            }
        })
        .collect();
    match parts.len() {
        0 => "0".into(),
        1 => parts.pop().unwrap(),
        _ => format!("(+ {})", parts.join(" ")),
    }
}

pub fn factor(f: &OpFactor) -> String {
    match f {
        OpFactor::Dot(a, b) => format!("(dot {} {})", vec_term(a), vec_term(b)),
        OpFactor::InverseNorm(v) => format!("(invnorm {})", vector(v)),
        OpFactor::Named(n) => format!("(atom {n})"),
    }
}

pub fn term(t: &OpTerm) -> String {
    let mut parts = Vec::new();
    if !t.coeff.is_one() || t.factors.is_empty() {
        parts.push(scalar(&t.coeff));
    }
    parts.extend(t.factors.iter().map(factor));
    let body = if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        format!("(* {})", parts.join(" "))
    };
    if t.hc {
        format!("(hc {body})")
    } else {
        body
    }
}

pub fn op(e: &OpExpr) -> String {
    let mut parts: Vec<String> = e.to_terms().iter().map(term).collect();
    match parts.len() {
        0 => "0".into(),
        1 => parts.pop().unwrap(),
        _ => format!("(+ {})", parts.join(" ")),
    }
}

/// One term per line, for readable golden files.
pub fn op_multiline(e: &OpExpr) -> String {
    let terms = e.to_terms();
    match terms.len() {
        0 => "0".into(),
        1 => term(&terms[0]),
        _ => {
            let body: Vec<String> = terms.iter().map(|t| format!("  {}", term(t))).collect();
            format!("(+\n{})", body.join("\n"))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexp {
    Atom(String, Pos),
    List(Vec<Sexp>, Pos),
}

impl Sexp {
    pub fn pos(&self) -> Pos {
        match self {
            Sexp::Atom(_, p) | Sexp::List(_, p) => *p,
        }
    }

    pub fn error(&self, msg: impl Into<String>) -> ParseError {
        let p = self.pos();
        ParseError {
            line: p.line,
            col: p.col,
            msg: msg.into(),
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(s, _) => Some(s),
            Sexp::List(..) => None,
        }
    }

    pub fn as_usize(&self) -> Result<usize, ParseError> {
        self.as_atom()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| self.error("expected a non-negative integer"))
    }

    pub fn as_i64(&self) -> Result<i64, ParseError> {
        self.as_atom()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| self.error("expected an integer"))
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(s, _) => f.write_str(s),
            Sexp::List(items, _) => {
                f.write_str("(")?;
                for (i, x) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Reads every top-level form; `;` starts a comment.
pub fn read_all(text: &str) -> Result<Vec<Sexp>, ParseError> {
    let mut stack: Vec<(Vec<Sexp>, Pos)> = Vec::new();
    let mut top = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1, 1);
    while let Some(&c) = chars.peek() {
        let here = Pos { line, col };
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
                continue;
            }
            ';' => {
                while chars.peek().is_some_and(|&c| c != '\n') {
                    chars.next();
                }
                continue;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
                continue;
            }
            '(' => {
                chars.next();
                col += 1;
                stack.push((Vec::new(), here));
                continue;
            }
            ')' => {
                chars.next();
                col += 1;
                let (items, p) = stack.pop().ok_or(ParseError {
                    line: here.line,
                    col: here.col,
                    msg: "unbalanced `)`".into(),
                })?;
                let node = Sexp::List(items, p);
                match stack.last_mut() {
                    Some((v, _)) => v.push(node),
                    None => top.push(node),
                }
                continue;
            }
            _ => {}
        }
        let mut s = String::new();
        while let Some(&c) = chars.peek() {
            if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                break;
            }
            s.push(c);
            chars.next();
            col += 1;
        }
        let node = Sexp::Atom(s, here);
        match stack.last_mut() {
            Some((v, _)) => v.push(node),
            None => top.push(node),
        }
    }
    if let Some((_, p)) = stack.last() {
        return Err(ParseError {
            line: p.line,
            col: p.col,
            msg: "unclosed `(`".into(),
        });
    }
    Ok(top)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Scalar(ScalarExpr),
    Vector(VecExpr),
    Op(OpExpr),
}

impl Value {
    fn kind(&self) -> &'static str {
        match self {
            Value::Scalar(_) => "scalar",
            Value::Vector(_) => "vector",
            Value::Op(_) => "operator",
        }
    }
}

pub struct Reader<'a> {
    pub symbols: &'a SymbolTable,
}

fn parse_number(s: &str) -> Option<Rational> {
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    if !n
        .trim_start_matches('-')
        .chars()
        .all(|c| c.is_ascii_digit())
        || n.trim_start_matches('-').is_empty()
    {
        return None;
    }
    let n: num_bigint::BigInt = n.parse().ok()?;
    let d: num_bigint::BigInt = d.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(Rational::new(n, d))
}

impl Reader<'_> {
    pub fn scalar(&self, x: &Sexp) -> Result<ScalarExpr, ParseError> {
        match self.eval(x)? {
            Value::Scalar(s) => Ok(s),
            v => Err(x.error(format!("expected a scalar, found a {}", v.kind()))),
        }
    }

    pub fn vector(&self, x: &Sexp) -> Result<VecExpr, ParseError> {
        match self.eval(x)? {
            Value::Vector(v) => Ok(v),
            Value::Scalar(s) if s.is_zero() => Ok(VecExpr::zero()),
            v => Err(x.error(format!("expected a vector, found a {}", v.kind()))),
        }
    }

    pub fn op(&self, x: &Sexp) -> Result<OpExpr, ParseError> {
        match self.eval(x)? {
            Value::Op(o) => Ok(o),
            Value::Scalar(s) => Ok(OpExpr::scalar(s)),
            v => Err(x.error(format!("expected an operator, found a {}", v.kind()))),
        }
    }

    pub fn eval(&self, x: &Sexp) -> Result<Value, ParseError> {
        match x {
            Sexp::Atom(s, _) => {
                if let Some(q) = parse_number(s) {
                    return Ok(Value::Scalar(ScalarExpr::rational(q)));
                }
                self.symbols.lookup(s).map_err(|e| x.error(e.to_string()))?;
                Ok(Value::Scalar(ScalarExpr::symbol(s)))
            }
            Sexp::List(items, _) => {
                let (head, args) = items.split_first().ok_or_else(|| x.error("empty form"))?;
                let name = head
                    .as_atom()
                    .ok_or_else(|| head.error("form head must be a name"))?;
                self.form(x, name, args)
            }
        }
    }

    fn arity(&self, x: &Sexp, args: &[Sexp], n: usize) -> Result<(), ParseError> {
        if args.len() != n {
            return Err(x.error(format!("expected {n} argument(s), found {}", args.len())));
        }
        Ok(())
    }

    fn index(&self, x: &Sexp) -> Result<u8, ParseError> {
        let i = x.as_usize()?;
        if i == 0 || i > u8::MAX as usize {
            return Err(x.error("particle index out of range"));
        }
        Ok(i as u8)
    }

    fn form(&self, x: &Sexp, name: &str, args: &[Sexp]) -> Result<Value, ParseError> {
        let kerr = |e: KernelError| x.error(e.to_string());
        let atom = |a: VecAtom| Ok(Value::Vector(VecExpr::atom(a)));
        match name {
            "+" => {
                let mut acc = Value::Scalar(ScalarExpr::zero());
                for a in args {
                    acc = add(x, acc, self.eval(a)?)?;
                }
                Ok(acc)
            }
            "-" => match args {
                [a] => Ok(negate(self.eval(a)?)),
                [a, b] => add(x, self.eval(a)?, negate(self.eval(b)?)),
                _ => Err(x.error("`-` takes one or two arguments")),
            },
            "neg" => {
                self.arity(x, args, 1)?;
                Ok(negate(self.eval(&args[0])?))
            }
            "*" => {
                let mut acc = Value::Scalar(ScalarExpr::one());
                for a in args {
                    acc = mul(x, acc, self.eval(a)?)?;
                }
                Ok(acc)
            }
            "/" => {
                self.arity(x, args, 2)?;
                let d = self.scalar(&args[1])?;
                let inv = ScalarExpr::one()
                    .div(&d)
                    .ok_or_else(|| args[1].error("division by zero or by a mixed-grade scalar"))?;
                mul(x, self.eval(&args[0])?, Value::Scalar(inv))
            }
            "^" => {
                self.arity(x, args, 2)?;
                let b = self.scalar(&args[0])?;
                let k = args[1].as_i64()?;
                let b = if k < 0 {
                    ScalarExpr::one()
                        .div(&b)
                        .ok_or_else(|| args[0].error("cannot invert"))?
                } else {
                    b
                };
                Ok(Value::Scalar(b.pow(k.unsigned_abs() as u32)))
            }
            "mu" => {
                self.arity(x, args, 2)?;
                let k = args[0].as_i64()? as i32;
                mul(x, Value::Scalar(ScalarExpr::mu(k)), self.eval(&args[1])?)
            }
            "r" | "R" | "p" | "P" | "S" | "M" => {
                self.arity(x, args, 1)?;
                let i = self.index(&args[0])?;
                match name {
                    "r" => atom(VecAtom::Position(Frame::Lab, i)),
                    "R" => atom(VecAtom::Position(Frame::Jacobi, i)),
                    "p" => atom(VecAtom::Momentum(Frame::Lab, i)),
                    "P" => atom(VecAtom::Momentum(Frame::Jacobi, i)),
                    "S" => atom(VecAtom::Spin(i)),
                    _ => atom(VecAtom::MagneticMoment(i)),
                }
            }
            "cross" => {
                self.arity(x, args, 2)?;
                Ok(Value::Vector(
                    self.vector(&args[0])?.cross(&self.vector(&args[1])?),
                ))
            }
            "field" => {
                if args.len() < 3 {
                    return Err(x.error("field needs a kind, a scale and a point"));
                }
                let kind = args[0]
                    .as_atom()
                    .and_then(FieldKind::parse)
                    .ok_or_else(|| args[0].error("field kind must be E, B, A or Pi"))?;
                let scale = args[1].as_usize()? as u32;
                let point = self.vector(&args[2])?;
                let dirs = args[3..]
                    .iter()
                    .map(|d| self.vector(d))
                    .collect::<Result<Vec<_>, _>>()?;
                if point.contains_field() || dirs.iter().any(VecExpr::contains_field) {
                    return Err(x.error("field points and directions cannot contain fields"));
                }
                Ok(Value::Vector(field_vec(kind, scale, &point, &dirs)))
            }
            "dot" => {
                self.arity(x, args, 2)?;
                Ok(Value::Op(OpExpr::dot(
                    &self.vector(&args[0])?,
                    &self.vector(&args[1])?,
                )))
            }
            "invnorm" => {
                self.arity(x, args, 1)?;
                Ok(Value::Op(
                    OpExpr::inverse_norm(&self.vector(&args[0])?).map_err(kerr)?,
                ))
            }
            "atom" => {
                self.arity(x, args, 1)?;
                let n = args[0]
                    .as_atom()
                    .ok_or_else(|| args[0].error("atom name expected"))?;
                Ok(Value::Op(OpExpr::named(n)))
            }
            "hc" => {
                self.arity(x, args, 1)?;
                Ok(Value::Op(self.op(&args[0])?.mark_hc()))
            }
            _ => Err(x.error(format!("unknown form `{name}`"))),
        }
    }
}

fn negate(v: Value) -> Value {
    match v {
        Value::Scalar(s) => Value::Scalar(s.neg()),
        Value::Vector(v) => Value::Vector(v.neg()),
        Value::Op(o) => Value::Op(o.neg()),
    }
}

fn add(x: &Sexp, a: Value, b: Value) -> Result<Value, ParseError> {
    use Value::*;
    Ok(match (a, b) {
        (Scalar(a), Scalar(b)) => Scalar(a.add(&b)),
        (Vector(a), Vector(b)) => Vector(a.add(&b)),
        (Op(a), Op(b)) => Op(a.add(&b)),
        (Scalar(a), Op(b)) | (Op(b), Scalar(a)) => Op(OpExpr::scalar(a).add(&b)),
        (Scalar(a), Vector(b)) | (Vector(b), Scalar(a)) if a.is_zero() => Vector(b),
        (a, b) => return Err(x.error(format!("cannot add a {} and a {}", a.kind(), b.kind()))),
    })
}

fn mul(x: &Sexp, a: Value, b: Value) -> Result<Value, ParseError> {
    use Value::*;
    Ok(match (a, b) {
        (Scalar(a), Scalar(b)) => Scalar(a.mul(&b)),
        (Scalar(a), Vector(b)) | (Vector(b), Scalar(a)) => Vector(b.scale(&a)),
        (Scalar(a), Op(b)) | (Op(b), Scalar(a)) => Op(b.scale(&a)),
        (Op(a), Op(b)) => Op(a.multiply(&b).map_err(|e| x.error(e.to_string()))?),
        (a, b) => return Err(x.error(format!("cannot multiply a {} by a {}", a.kind(), b.kind()))),
    })
}

/// Parses a single operator expression.
pub fn parse_op(text: &str, symbols: &SymbolTable) -> Result<OpExpr, ParseError> {
    let forms = read_all(text)?;
    match forms.as_slice() {
        [one] => Reader { symbols }.op(one),
        _ => Err(ParseError {
            line: 1,
            col: 1,
            msg: format!("expected one expression, found {}", forms.len()),
        }),
    }
}

pub fn parse_vector(text: &str, symbols: &SymbolTable) -> Result<VecExpr, ParseError> {
    let forms = read_all(text)?;
    match forms.as_slice() {
        [one] => Reader { symbols }.vector(one),
        _ => Err(ParseError {
            line: 1,
            col: 1,
            msg: format!("expected one expression, found {}", forms.len()),
        }),
    }
}

pub fn parse_scalar(text: &str, symbols: &SymbolTable) -> Result<ScalarExpr, ParseError> {
    let forms = read_all(text)?;
    match forms.as_slice() {
        [one] => Reader { symbols }.scalar(one),
        _ => Err(ParseError {
            line: 1,
            col: 1,
            msg: format!("expected one expression, found {}", forms.len()),
        }),
    }
}
