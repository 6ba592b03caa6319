//! Index-free vector expressions: atoms, cross products and their linear
//! combinations with scalar coefficients.

use std::collections::BTreeMap;
use std::fmt;

use super::commute::vec_terms_commute;
use super::poly::Symbol;
use super::scalar::ScalarExpr;
use crate::fields::FieldAtom;

/// Coordinate frame of a particle position or momentum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Frame {
    Lab,
    Jacobi,
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VecAtom {
    Position(Frame, u8),
    Momentum(Frame, u8),
    Spin(u8),
    MagneticMoment(u8),
    Field(Box<FieldAtom>),
}

impl VecAtom {
    pub fn is_field(&self) -> bool {
        matches!(self, VecAtom::Field(_))
    }
}

impl fmt::Debug for VecAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VecAtom::Position(Frame::Lab, i) => write!(f, "r{i}"),
            VecAtom::Position(Frame::Jacobi, i) => write!(f, "R{i}"),
            VecAtom::Momentum(Frame::Lab, i) => write!(f, "p{i}"),
            VecAtom::Momentum(Frame::Jacobi, i) => write!(f, "P{i}"),
            VecAtom::Spin(i) => write!(f, "S{i}"),
            VecAtom::MagneticMoment(i) => write!(f, "M{i}"),
            VecAtom::Field(a) => write!(f, "{a:?}"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VecTerm {
    Atom(VecAtom),
    Cross(Box<VecTerm>, Box<VecTerm>),
}

impl fmt::Debug for VecTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VecTerm::Atom(a) => write!(f, "{a:?}"),
            VecTerm::Cross(a, b) => write!(f, "({a:?} ^ {b:?})"),
        }
    }
}

impl VecTerm {
    pub fn atom(a: VecAtom) -> VecTerm {
        VecTerm::Atom(a)
    }

    /// Visits every atom, including those nested in field points and
    /// directional-derivative arguments.
    pub fn for_each_atom(&self, visit: &mut dyn FnMut(&VecAtom)) {
        match self {
            VecTerm::Atom(a) => {
                visit(a);
                if let VecAtom::Field(fa) = a {
                    fa.point.for_each_atom(visit);
                    for d in &fa.dirs {
                        d.for_each_atom(visit);
                    }
                }
            }
            VecTerm::Cross(a, b) => {
                a.for_each_atom(visit);
                b.for_each_atom(visit);
            }
        }
    }

    pub fn for_each_scalar(&self, visit: &mut dyn FnMut(&ScalarExpr)) {
        match self {
            VecTerm::Atom(VecAtom::Field(fa)) => {
                fa.point.for_each_scalar(visit);
                for d in &fa.dirs {
                    d.for_each_scalar(visit);
                }
            }
            VecTerm::Atom(_) => {}
            VecTerm::Cross(a, b) => {
                a.for_each_scalar(visit);
                b.for_each_scalar(visit);
            }
        }
    }

    pub fn contains_field(&self) -> bool {
        let mut found = false;
        self.for_each_atom(&mut |a| found |= a.is_field());
        found
    }
}

/// Canonical cross product of two terms: `(sign, term)` or `None` for zero.
pub(crate) fn cross_terms(a: &VecTerm, b: &VecTerm) -> Option<(i64, VecTerm)> {
    if vec_terms_commute(a, b) {
        if a == b {
            return None;
        }
        if a > b {
            return Some((-1, VecTerm::Cross(Box::new(b.clone()), Box::new(a.clone()))));
        }
    }
    Some((1, VecTerm::Cross(Box::new(a.clone()), Box::new(b.clone()))))
}

/// Linear combination of vector terms, always held in canonical form.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct VecExpr {
    terms: BTreeMap<VecTerm, ScalarExpr>,
}

impl fmt::Debug for VecExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(t, c)| format!("[{c:?}]{t:?}"))
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

impl VecExpr {
    pub fn zero() -> VecExpr {
        VecExpr::default()
    }

    pub fn from_term(coeff: ScalarExpr, t: VecTerm) -> VecExpr {
        let mut v = VecExpr::zero();
        v.add_term(t, coeff);
        v
    }

    pub fn atom(a: VecAtom) -> VecExpr {
        VecExpr::from_term(ScalarExpr::one(), VecTerm::Atom(a))
    }

    pub fn position(frame: Frame, i: u8) -> VecExpr {
        VecExpr::atom(VecAtom::Position(frame, i))
    }

    pub fn momentum(frame: Frame, i: u8) -> VecExpr {
        VecExpr::atom(VecAtom::Momentum(frame, i))
    }

    pub fn moment(i: u8) -> VecExpr {
        VecExpr::atom(VecAtom::MagneticMoment(i))
    }

    pub fn spin(i: u8) -> VecExpr {
        VecExpr::atom(VecAtom::Spin(i))
    }

    pub(crate) fn add_term(&mut self, t: VecTerm, c: ScalarExpr) {
        if c.is_zero() {
            return;
        }
        let sum = match self.terms.get(&t) {
            Some(old) => old.add(&c),
            None => c,
        };
        if sum.is_zero() {
            self.terms.remove(&t);
        } else {
            self.terms.insert(t, sum);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&VecTerm, &ScalarExpr)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &VecExpr) -> VecExpr {
        let mut out = self.clone();
        for (t, c) in &o.terms {
            out.add_term(t.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &VecExpr) -> VecExpr {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> VecExpr {
        self.scale(&ScalarExpr::int(-1))
    }

    pub fn scale(&self, k: &ScalarExpr) -> VecExpr {
        let mut out = VecExpr::zero();
        for (t, c) in &self.terms {
            out.add_term(t.clone(), c.mul(k));
        }
        out
    }

    /// Bilinear cross product with antisymmetry applied to commuting pairs.
    pub fn cross(&self, o: &VecExpr) -> VecExpr {
        let mut out = VecExpr::zero();
        for (ta, ca) in &self.terms {
            for (tb, cb) in &o.terms {
                if let Some((sign, t)) = cross_terms(ta, tb) {
                    out.add_term(t, ca.mul(cb).mul(&ScalarExpr::int(sign)));
                }
            }
        }
        out
    }

    pub fn coefficient(&self, t: &VecTerm) -> ScalarExpr {
        self.terms.get(t).cloned().unwrap_or_else(ScalarExpr::zero)
    }

    pub fn contains_field(&self) -> bool {
        self.terms.keys().any(VecTerm::contains_field)
    }

    pub fn for_each_atom(&self, visit: &mut dyn FnMut(&VecAtom)) {
        for t in self.terms.keys() {
            t.for_each_atom(visit);
        }
    }

    pub fn for_each_scalar(&self, visit: &mut dyn FnMut(&ScalarExpr)) {
        for (t, c) in &self.terms {
            visit(c);
            t.for_each_scalar(visit);
        }
    }

    pub fn symbols(&self) -> Vec<Symbol> {
        let mut out = Vec::new();
        self.for_each_scalar(&mut |s| out.extend(s.symbols()));
        out.sort();
        out.dedup();
        out
    }

    /// Fixes the overall sign so the first coefficient has a positive
    /// leading numerator; used for arguments of `|v|`.
    pub fn sign_normalized(&self) -> VecExpr {
        match self.terms.values().next() {
            Some(c) if c.looks_negative() => self.neg(),
            _ => self.clone(),
        }
    }

    /// Every coefficient of `self` is `k` times the matching one of `o`.
    pub fn ratio_to(&self, o: &VecExpr) -> Option<ScalarExpr> {
        if self.terms.len() != o.terms.len() || o.is_zero() {
            return None;
        }
        let mut ratio: Option<ScalarExpr> = None;
        for ((ta, ca), (tb, cb)) in self.terms.iter().zip(o.terms.iter()) {
            if ta != tb {
                return None;
            }
            let r = ca.div(cb)?;
            match &ratio {
                None => ratio = Some(r),
                Some(prev) if *prev == r => {}
                Some(_) => return None,
            }
        }
        ratio
    }
}
