//! Sparse multivariate polynomials over exact rationals.
//!
//! Monomials are ordered graded-lexicographically: total degree first, then
//! by exponent of the alphabetically earliest symbol. The leading term of a
//! polynomial is the largest monomial under this order.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

/// Interned scalar symbol name. Ordering and equality follow the name.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(&'static str);

fn interner() -> &'static Mutex<HashSet<&'static str>> {
    static POOL: OnceLock<Mutex<HashSet<&'static str>>> = OnceLock::new();
    POOL.get_or_init(|| Mutex::new(HashSet::new()))
}

impl Symbol {
    pub fn new(name: &str) -> Symbol {
        let mut pool = interner().lock().expect("symbol pool poisoned");
        if let Some(s) = pool.get(name) {
            return Symbol(s);
        }
        let leaked: &'static str = Box::leak(name.to_owned().into_boxed_str());
        pool.insert(leaked);
        Symbol(leaked)
    }

    pub fn name(&self) -> &'static str {
        self.0
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.0)
    }
}

/// Product of symbol powers, sorted by symbol, no zero exponents.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(Symbol, u32)>);

impl Monomial {
    pub fn one() -> Monomial {
        Monomial(Vec::new())
    }

    pub fn var(s: Symbol, exp: u32) -> Monomial {
        if exp == 0 {
            Monomial::one()
        } else {
            Monomial(vec![(s, exp)])
        }
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn exponent(&self, s: Symbol) -> u32 {
        self.0
            .iter()
            .find(|(v, _)| *v == s)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn factors(&self) -> &[(Symbol, u32)] {
        &self.0
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() || j < other.0.len() {
            match (self.0.get(i), other.0.get(j)) {
                (Some(a), Some(b)) if a.0 == b.0 => {
                    out.push((a.0, a.1 + b.1));
                    i += 1;
                    j += 1;
                }
                (Some(a), Some(b)) if a.0 < b.0 => {
                    out.push(*a);
                    i += 1;
                }
                (Some(_), Some(b)) => {
                    out.push(*b);
                    j += 1;
                }
                (Some(a), None) => {
                    out.push(*a);
                    i += 1;
                }
                (None, Some(b)) => {
                    out.push(*b);
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        Monomial(out)
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut j = 0;
        for &(s, e) in &self.0 {
            if j < other.0.len() && other.0[j].0 < s {
                return None;
            }
            if j < other.0.len() && other.0[j].0 == s {
                let d = other.0[j].1;
                if d > e {
                    return None;
                }
                if e > d {
                    out.push((s, e - d));
                }
                j += 1;
            } else {
                out.push((s, e));
            }
        }
        if j < other.0.len() {
            return None;
        }
        Some(Monomial(out))
    }

    /// Removes symbol `s`, returning its exponent and the remaining monomial.
    fn split_off(&self, s: Symbol) -> (u32, Monomial) {
        let mut rest = Vec::with_capacity(self.0.len());
        let mut e = 0;
        for &(v, k) in &self.0 {
            if v == s {
                e = k;
            } else {
                rest.push((v, k));
            }
        }
        (e, Monomial(rest))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            o => return o,
        }
        let (mut i, mut j) = (0, 0);
        loop {
            match (self.0.get(i), other.0.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some(a), Some(b)) => {
                    if a.0 == b.0 {
                        match a.1.cmp(&b.1) {
                            Ordering::Equal => {
                                i += 1;
                                j += 1;
                            }
                            o => return o,
                        }
                    } else if a.0 < b.0 {
                        return Ordering::Greater;
                    } else {
                        return Ordering::Less;
                    }
                }
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(s, e)| {
                if *e == 1 {
                    s.to_string()
                } else {
                    format!("{s}^{e}")
                }
            })
            .collect();
        f.write_str(&parts.join("*"))
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .rev()
            .map(|(m, c)| format!("{c}*{m:?}"))
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

pub fn rational(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn one() -> Poly {
        Poly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Poly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::one(), c);
        }
        Poly { terms }
    }

    pub fn var(s: Symbol) -> Poly {
        Poly::term(Rational::one(), Monomial::var(s, 1))
    }

    pub fn term(c: Rational, m: Monomial) -> Poly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn leading(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn symbols(&self) -> Vec<Symbol> {
        let mut out: Vec<Symbol> = self
            .terms
            .keys()
            .flat_map(|m| m.0.iter().map(|(s, _)| *s))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, k: &Rational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    fn mul_term(&self, m: &Monomial, c: &Rational) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(k, v)| (k.mul(m), v * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut out = Poly::one();
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        let (lm, lc) = d.leading()?;
        let (lm, lc) = (lm.clone(), lc.clone());
        let mut q = Poly::zero();
        let mut r = self.clone();
        while let Some((rm, rc)) = r.leading() {
            let m = rm.div(&lm)?;
            let c = rc / &lc;
            r = r.sub(&d.mul_term(&m, &c));
            q.add_term(m, c);
        }
        Some(q)
    }

    /// Divides by the leading coefficient.
    pub fn monic(&self) -> Poly {
        match self.leading() {
            None => Poly::zero(),
            Some((_, c)) => {
                let inv = c.recip();
                self.scale(&inv)
            }
        }
    }

    pub fn degree_in(&self, s: Symbol) -> u32 {
        self.terms.keys().map(|m| m.exponent(s)).max().unwrap_or(0)
    }

    /// Coefficients with respect to `s`, each free of `s`.
    fn coefficients_in(&self, s: Symbol) -> BTreeMap<u32, Poly> {
        let mut out: BTreeMap<u32, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (e, rest) = m.split_off(s);
            out.entry(e).or_default().add_term(rest, c.clone());
        }
        out
    }

    /// Replaces symbol `s` by a polynomial.
    pub fn substitute(&self, s: Symbol, value: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (e, coeff) in self.coefficients_in(s) {
            out = out.add(&coeff.mul(&value.pow(e)));
        }
        out
    }

    pub fn eval_f64(&self, value: &dyn Fn(Symbol) -> f64) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut t = c.to_f64().unwrap_or(f64::NAN);
                for (s, e) in &m.0 {
                    t *= value(*s).powi(*e as i32);
                }
                t
            })
            .sum()
    }

    /// Sign of the leading coefficient.
    pub fn leading_is_negative(&self) -> bool {
        self.leading().is_some_and(|(_, c)| c.is_negative())
    }
}

fn content_in(p: &Poly, s: Symbol) -> Poly {
    let mut g = Poly::zero();
    for c in p.coefficients_in(s).into_values() {
        g = gcd(&g, &c);
        if g.is_one() {
            break;
        }
    }
    g
}

fn primitive_in(p: &Poly, s: Symbol) -> Poly {
    let c = content_in(p, s);
    p.div_exact(&c).expect("content divides polynomial")
}

/// Pseudo-remainder of `a` by `b` viewed as univariate in `s`.
fn pseudo_rem(a: &Poly, b: &Poly, s: Symbol) -> Poly {
    let db = b.degree_in(s);
    let lcb = b.coefficients_in(s).remove(&db).unwrap_or_else(Poly::zero);
    let mut r = a.clone();
    while !r.is_zero() && r.degree_in(s) >= db {
        let dr = r.degree_in(s);
        let lcr = r.coefficients_in(s).remove(&dr).unwrap_or_else(Poly::zero);
        let shift = Poly::term(Rational::one(), Monomial::var(s, dr - db));
        r = r.mul(&lcb).sub(&lcr.mul(&shift).mul(b));
    }
    r
}

/// Monic greatest common divisor over the rationals (recursive primitive PRS).
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    if a.div_exact(b).is_some() {
        return b.monic();
    }
    if b.div_exact(a).is_some() {
        return a.monic();
    }
    let mut vars = a.symbols();
    vars.extend(b.symbols());
    vars.sort();
    vars.dedup();
    let s = vars[0];
    let (da, db) = (a.degree_in(s), b.degree_in(s));
    if da == 0 {
        return gcd(a, &content_in(b, s));
    }
    if db == 0 {
        return gcd(&content_in(a, s), b);
    }
    let (ca, cb) = (content_in(a, s), content_in(b, s));
    let content = gcd(&ca, &cb);
    let mut p = a.div_exact(&ca).expect("content divides");
    let mut q = b.div_exact(&cb).expect("content divides");
    if p.degree_in(s) < q.degree_in(s) {
        std::mem::swap(&mut p, &mut q);
    }
    loop {
        let r = pseudo_rem(&p, &q, s);
        if r.is_zero() {
            break;
        }
        if r.degree_in(s) == 0 {
            q = Poly::one();
            break;
        }
        p = q;
        q = primitive_in(&r, s);
    }
    primitive_in(&q, s).mul(&content).monic()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Poly {
        Poly::var(Symbol::new(n))
    }

    fn c(n: i64) -> Poly {
        Poly::constant(rational(n, 1))
    }

    #[test]
    fn grlex_orders_by_degree_then_lex() {
        let a = Monomial::var(Symbol::new("a"), 1);
        let b2 = Monomial::var(Symbol::new("b"), 2);
        let b = Monomial::var(Symbol::new("b"), 1);
        assert!(b2 > a);
        assert!(a > b);
        assert_eq!(a.mul(&b).div(&b), Some(a.clone()));
        assert_eq!(a.div(&b), None);
    }

    #[test]
    fn exact_division_detects_non_divisibility() {
        let p = v("x").add(&v("y")).mul(&v("x").sub(&v("y")));
        assert_eq!(p.div_exact(&v("x").add(&v("y"))), Some(v("x").sub(&v("y"))));
        assert_eq!(p.div_exact(&v("x")), None);
    }

    #[test]
    fn gcd_of_products() {
        let f = v("m1").add(&v("m2"));
        let g = v("m1").mul(&v("m3")).add(&c(2));
        let h = v("e").sub(&v("m2"));
        let a = f.mul(&g).mul(&f);
        let b = f.mul(&h).mul(&v("m1"));
        assert_eq!(gcd(&a, &b), f.monic());
        assert_eq!(gcd(&g, &h), Poly::one());
        assert_eq!(gcd(&a.scale(&rational(3, 2)), &a), a.monic());
    }

    #[test]
    fn gcd_multivariate_shared_quadratic() {
        let q = v("x").mul(&v("x")).add(&v("x").mul(&v("y"))).add(&c(1));
        let a = q.mul(&v("y").add(&c(3)));
        let b = q.mul(&v("x").sub(&v("y")));
        assert_eq!(gcd(&a, &b), q.monic());
    }
}
