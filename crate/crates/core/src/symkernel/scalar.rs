//! Commuting scalar coefficients: normalized rational functions, graded by
//! an integer power of the expansion parameter μ.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use super::poly::{gcd, rational, Poly, Rational, Symbol};

/// Reduced `num / den` with a monic denominator; zero is `0 / 1`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{:?}", self.num)
        } else {
            write!(f, "({:?})/({:?})", self.num, self.den)
        }
    }
}

impl RatFunc {
    pub fn new(num: Poly, den: Poly) -> RatFunc {
        assert!(!den.is_zero(), "rational function with zero denominator");
        if num.is_zero() {
            return RatFunc::zero();
        }
        if let Some(c) = den.as_constant() {
            return RatFunc {
                num: num.scale(&c.recip()),
                den: Poly::one(),
            };
        }
        let g = gcd(&num, &den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (
                num.div_exact(&g).expect("gcd divides"),
                den.div_exact(&g).expect("gcd divides"),
            )
        };
        let lc = den.leading().map(|(_, c)| c.recip()).unwrap();
        RatFunc {
            num: num.scale(&lc),
            den: den.scale(&lc),
        }
    }

    pub fn from_poly(p: Poly) -> RatFunc {
        RatFunc {
            num: p,
            den: Poly::one(),
        }
    }

    pub fn zero() -> RatFunc {
        RatFunc {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    pub fn one() -> RatFunc {
        RatFunc::from_poly(Poly::one())
    }

    pub fn constant(c: Rational) -> RatFunc {
        RatFunc::from_poly(Poly::constant(c))
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn add(&self, o: &RatFunc) -> RatFunc {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            return RatFunc::new(self.num.add(&o.num), self.den.clone());
        }
        RatFunc::new(
            self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            self.den.mul(&o.den),
        )
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, o: &RatFunc) -> RatFunc {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &RatFunc) -> RatFunc {
        if self.is_zero() || o.is_zero() {
            return RatFunc::zero();
        }
        if self.den.is_one() && o.den.is_one() {
            return RatFunc::from_poly(self.num.mul(&o.num));
        }
        RatFunc::new(self.num.mul(&o.num), self.den.mul(&o.den))
    }

    pub fn inv(&self) -> Option<RatFunc> {
        if self.is_zero() {
            None
        } else {
            Some(RatFunc::new(self.den.clone(), self.num.clone()))
        }
    }

    pub fn div(&self, o: &RatFunc) -> Option<RatFunc> {
        Some(self.mul(&o.inv()?))
    }

    pub fn symbols(&self) -> Vec<Symbol> {
        let mut s = self.num.symbols();
        s.extend(self.den.symbols());
        s.sort();
        s.dedup();
        s
    }

    pub fn substitute(&self, s: Symbol, value: &RatFunc) -> RatFunc {
        let apply = |p: &Poly| -> RatFunc {
            if p.degree_in(s) == 0 {
                return RatFunc::from_poly(p.clone());
            }
            let mut out = RatFunc::zero();
            let mut pw = RatFunc::one();
            let coeffs = coefficient_list(p, s);
            for (k, c) in coeffs.into_iter().enumerate() {
                if k > 0 {
                    pw = pw.mul(value);
                }
                if !c.is_zero() {
                    out = out.add(&RatFunc::from_poly(c).mul(&pw));
                }
            }
            out
        };
        apply(&self.num)
            .div(&apply(&self.den))
            .expect("substitution made denominator vanish")
    }

    pub fn eval_f64(&self, value: &dyn Fn(Symbol) -> f64) -> f64 {
        self.num.eval_f64(value) / self.den.eval_f64(value)
    }

    /// Leading numerator coefficient is negative.
    pub fn is_negative_leading(&self) -> bool {
        self.num.leading_is_negative()
    }
}

/// Coefficients of `p` as a polynomial in `s`, lowest power first.
pub fn coefficient_list(p: &Poly, s: Symbol) -> Vec<Poly> {
    let d = p.degree_in(s) as usize;
    let mut out = vec![Poly::zero(); d + 1];
    for (m, c) in p.terms() {
        let e = m.exponent(s) as usize;
        let rest: Vec<_> = m
            .factors()
            .iter()
            .filter(|(v, _)| *v != s)
            .cloned()
            .collect();
        let mut mono = super::poly::Monomial::one();
        for (v, k) in rest {
            mono = mono.mul(&super::poly::Monomial::var(v, k));
        }
        out[e] = out[e].add(&Poly::term(c.clone(), mono));
    }
    out
}

/// Finite sum over μ-grades of rational-function coefficients.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ScalarExpr {
    grades: BTreeMap<i32, RatFunc>,
}

impl fmt::Debug for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.grades.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .grades
            .iter()
            .map(|(g, r)| {
                if *g == 0 {
                    format!("{r:?}")
                } else {
                    format!("mu^{g}*{r:?}")
                }
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

impl ScalarExpr {
    pub fn zero() -> ScalarExpr {
        ScalarExpr::default()
    }

    pub fn one() -> ScalarExpr {
        ScalarExpr::graded(0, RatFunc::one())
    }

    pub fn graded(grade: i32, r: RatFunc) -> ScalarExpr {
        let mut grades = BTreeMap::new();
        if !r.is_zero() {
            grades.insert(grade, r);
        }
        ScalarExpr { grades }
    }

    pub fn from_ratfunc(r: RatFunc) -> ScalarExpr {
        ScalarExpr::graded(0, r)
    }

    pub fn int(n: i64) -> ScalarExpr {
        ScalarExpr::from_ratfunc(RatFunc::constant(rational(n, 1)))
    }

    pub fn ratio(n: i64, d: i64) -> ScalarExpr {
        ScalarExpr::from_ratfunc(RatFunc::constant(rational(n, d)))
    }

    pub fn rational(q: Rational) -> ScalarExpr {
        ScalarExpr::from_ratfunc(RatFunc::constant(q))
    }

    pub fn symbol(name: &str) -> ScalarExpr {
        ScalarExpr::from_ratfunc(RatFunc::from_poly(Poly::var(Symbol::new(name))))
    }

    pub fn mu(k: i32) -> ScalarExpr {
        ScalarExpr::graded(k, RatFunc::one())
    }

    pub fn is_zero(&self) -> bool {
        self.grades.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.grades.len() == 1 && self.grades.get(&0).is_some_and(RatFunc::is_one)
    }

    pub fn grades(&self) -> impl Iterator<Item = (i32, &RatFunc)> {
        self.grades.iter().map(|(g, r)| (*g, r))
    }

    pub fn grade_part(&self, g: i32) -> RatFunc {
        self.grades.get(&g).cloned().unwrap_or_else(RatFunc::zero)
    }

    /// The single grade carried by a homogeneous nonzero scalar.
    pub fn homogeneous_grade(&self) -> Option<i32> {
        if self.grades.len() == 1 {
            self.grades.keys().next().copied()
        } else {
            None
        }
    }

    pub fn as_constant(&self) -> Option<Rational> {
        if self.grades.is_empty() {
            return Some(Rational::zero());
        }
        if self.grades.len() == 1 {
            return self.grades.get(&0).and_then(RatFunc::as_constant);
        }
        None
    }

    pub fn add(&self, o: &ScalarExpr) -> ScalarExpr {
        let mut grades = self.grades.clone();
        for (g, r) in &o.grades {
            let sum = match grades.get(g) {
                Some(x) => x.add(r),
                None => r.clone(),
            };
            if sum.is_zero() {
                grades.remove(g);
            } else {
                grades.insert(*g, sum);
            }
        }
        ScalarExpr { grades }
    }

    pub fn neg(&self) -> ScalarExpr {
        ScalarExpr {
            grades: self.grades.iter().map(|(g, r)| (*g, r.neg())).collect(),
        }
    }

    pub fn sub(&self, o: &ScalarExpr) -> ScalarExpr {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &ScalarExpr) -> ScalarExpr {
        if self.is_one() {
            return o.clone();
        }
        if o.is_one() {
            return self.clone();
        }
        let mut out = ScalarExpr::zero();
        for (ga, ra) in &self.grades {
            for (gb, rb) in &o.grades {
                out = out.add(&ScalarExpr::graded(ga + gb, ra.mul(rb)));
            }
        }
        out
    }

    /// Division by a grade-homogeneous nonzero scalar.
    pub fn div(&self, o: &ScalarExpr) -> Option<ScalarExpr> {
        let g = o.homogeneous_grade()?;
        let inv = o.grades[&g].inv()?;
        Some(self.mul(&ScalarExpr::graded(-g, inv)))
    }

    pub fn pow(&self, k: u32) -> ScalarExpr {
        let mut out = ScalarExpr::one();
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn shift_grade(&self, k: i32) -> ScalarExpr {
        ScalarExpr {
            grades: self
                .grades
                .iter()
                .map(|(g, r)| (g + k, r.clone()))
                .collect(),
        }
    }

    pub fn symbols(&self) -> Vec<Symbol> {
        let mut s: Vec<Symbol> = self.grades.values().flat_map(RatFunc::symbols).collect();
        s.sort();
        s.dedup();
        s
    }

    pub fn substitute(&self, s: Symbol, value: &RatFunc) -> ScalarExpr {
        ScalarExpr {
            grades: self
                .grades
                .iter()
                .map(|(g, r)| (*g, r.substitute(s, value)))
                .filter(|(_, r)| !r.is_zero())
                .collect(),
        }
    }

    /// Rewrites every power `s^k` as `μ^k · factor^k`, moving it into the grade.
    pub fn absorb_into_grade(&self, s: Symbol, factor: &RatFunc) -> ScalarExpr {
        let mut out = ScalarExpr::zero();
        for (g, r) in &self.grades {
            let num = split_by_power(r.num(), s);
            let den = split_by_power(r.den(), s);
            assert!(
                den.len() == 1,
                "cannot absorb a symbol appearing in a sum denominator"
            );
            let (dk, dpoly) = den.into_iter().next().unwrap();
            for (nk, npoly) in num {
                let k = nk as i32 - dk as i32;
                let mut coeff = RatFunc::new(npoly, dpoly.clone());
                let fk = if k >= 0 {
                    pow_rf(factor, k as u32)
                } else {
                    pow_rf(&factor.inv().unwrap(), (-k) as u32)
                };
                coeff = coeff.mul(&fk);
                out = out.add(&ScalarExpr::graded(g + k, coeff));
            }
        }
        out
    }

    pub fn eval_f64(&self, value: &dyn Fn(Symbol) -> f64) -> f64 {
        assert!(
            self.grades.keys().all(|g| *g == 0),
            "numeric evaluation of a graded scalar"
        );
        self.grades.values().map(|r| r.eval_f64(value)).sum()
    }

    /// Leading coefficient of the lowest grade is negative.
    pub fn looks_negative(&self) -> bool {
        self.grades
            .values()
            .next()
            .is_some_and(RatFunc::is_negative_leading)
    }
}

fn pow_rf(r: &RatFunc, k: u32) -> RatFunc {
    let mut out = RatFunc::one();
    for _ in 0..k {
        out = out.mul(r);
    }
    out
}

/// Groups the terms of `p` by the exponent of `s`, stripping `s`.
fn split_by_power(p: &Poly, s: Symbol) -> BTreeMap<u32, Poly> {
    let list = coefficient_list(p, s);
    list.into_iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(k, c)| (k as u32, c))
        .collect()
}

impl From<i64> for ScalarExpr {
    fn from(n: i64) -> Self {
        ScalarExpr::int(n)
    }
}

impl std::ops::Mul for ScalarExpr {
    type Output = ScalarExpr;
    fn mul(self, rhs: Self) -> Self::Output {
        ScalarExpr::mul(&self, &rhs)
    }
}

impl std::ops::Add for ScalarExpr {
    type Output = ScalarExpr;
    fn add(self, rhs: Self) -> Self::Output {
        ScalarExpr::add(&self, &rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(n: &str) -> ScalarExpr {
        ScalarExpr::symbol(n)
    }

    #[test]
    fn normalization_is_unique() {
        let m1 = s("m1");
        let m2 = s("m2");
        let total = m1.add(&m2);
        let a = s("e")
            .mul(&m1)
            .div(&total)
            .unwrap()
            .add(&s("e").mul(&m2).div(&total).unwrap());
        assert_eq!(a, s("e"));
        let b = m1.div(&total).unwrap();
        let c = m1
            .mul(&ScalarExpr::int(3))
            .div(&total.mul(&ScalarExpr::int(3)))
            .unwrap();
        assert_eq!(b, c);
    }

    #[test]
    fn zero_is_empty() {
        let x = s("x");
        assert!(x.sub(&x).is_zero());
        assert_eq!(x.sub(&x), ScalarExpr::zero());
    }

    #[test]
    fn grades_multiply_additively() {
        let a = ScalarExpr::mu(1).mul(&s("e"));
        let b = ScalarExpr::mu(2).mul(&s("m1"));
        let p = a.mul(&b);
        assert_eq!(p.homogeneous_grade(), Some(3));
    }

    #[test]
    fn absorb_alpha() {
        // alpha * hbar -> mu * hbar / Z with Z = 2
        let a = s("alpha").mul(&s("hbar"));
        let half = RatFunc::constant(rational(1, 2));
        let out = a.absorb_into_grade(Symbol::new("alpha"), &half);
        assert_eq!(
            out,
            ScalarExpr::mu(1)
                .mul(&s("hbar"))
                .mul(&ScalarExpr::ratio(1, 2))
        );
    }

    #[test]
    fn substitution_into_denominator() {
        let r = s("x").div(&s("y").add(&ScalarExpr::int(1))).unwrap();
        let out = r.substitute(Symbol::new("y"), &RatFunc::constant(rational(1, 1)));
        assert_eq!(out, s("x").mul(&ScalarExpr::ratio(1, 2)));
    }
}
