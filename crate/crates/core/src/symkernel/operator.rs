//! Noncommutative operator expressions: ordered products of scalar-operator
//! factors with graded scalar coefficients and an optional `+ h.c.` marker.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::commute::{commutes, vec_terms_commute};
use super::poly::Symbol;
use super::scalar::ScalarExpr;
use super::vector::{VecAtom, VecExpr, VecTerm};
use super::KernelError;
use crate::fields::field_vec;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OpFactor {
    /// `a · b` in the written order.
    Dot(VecTerm, VecTerm),
    /// `1 / |v|`.
    InverseNorm(VecExpr),
    Named(String),
}

impl fmt::Debug for OpFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpFactor::Dot(a, b) => write!(f, "({a:?} . {b:?})"),
            OpFactor::InverseNorm(v) => write!(f, "1/|{v:?}|"),
            OpFactor::Named(n) => f.write_str(n),
        }
    }
}

impl OpFactor {
    pub fn for_each_atom(&self, visit: &mut dyn FnMut(&VecAtom)) {
        match self {
            OpFactor::Dot(a, b) => {
                a.for_each_atom(visit);
                b.for_each_atom(visit);
            }
            OpFactor::InverseNorm(v) => v.for_each_atom(visit),
            OpFactor::Named(_) => {}
        }
    }

    fn for_each_scalar(&self, visit: &mut dyn FnMut(&ScalarExpr)) {
        match self {
            OpFactor::Dot(a, b) => {
                a.for_each_scalar(visit);
                b.for_each_scalar(visit);
            }
            OpFactor::InverseNorm(v) => v.for_each_scalar(visit),
            OpFactor::Named(_) => {}
        }
    }
}

/// Structural identity of a term: its ordered factors and marker.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OpKey {
    pub factors: Vec<OpFactor>,
    pub hc: bool,
}

/// A single term as handed to or returned from an [`OpExpr`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpTerm {
    pub coeff: ScalarExpr,
    pub factors: Vec<OpFactor>,
    pub hc: bool,
}

/// Lexicographically least reordering reachable by swapping adjacent
/// commuting factors.
pub fn normal_order(factors: Vec<OpFactor>) -> Vec<OpFactor> {
    let mut rest = factors;
    let mut out = Vec::with_capacity(rest.len());
    while !rest.is_empty() {
        let mut best = 0;
        for i in 1..rest.len() {
            if rest[i] < rest[best] && rest[..i].iter().all(|x| commutes(x, &rest[i])) {
                best = i;
            }
        }
        out.push(rest.remove(best));
    }
    out
}

fn dot_factor(a: &VecTerm, b: &VecTerm) -> OpFactor {
    if a > b && vec_terms_commute(a, b) {
        OpFactor::Dot(b.clone(), a.clone())
    } else {
        OpFactor::Dot(a.clone(), b.clone())
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct OpExpr {
    terms: BTreeMap<OpKey, ScalarExpr>,
}

impl fmt::Debug for OpExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (k, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "[{c:?}]")?;
            for fac in &k.factors {
                write!(f, "{fac:?}")?;
            }
            if k.hc {
                f.write_str("+h.c.")?;
            }
        }
        Ok(())
    }
}

impl OpExpr {
    pub fn zero() -> OpExpr {
        OpExpr::default()
    }

    pub fn one() -> OpExpr {
        OpExpr::scalar(ScalarExpr::one())
    }

    pub fn scalar(c: ScalarExpr) -> OpExpr {
        let mut e = OpExpr::zero();
        e.push(
            OpKey {
                factors: Vec::new(),
                hc: false,
            },
            c,
        );
        e
    }

    pub fn from_term(t: OpTerm) -> OpExpr {
        let mut e = OpExpr::zero();
        e.push(
            OpKey {
                factors: normal_order(t.factors),
                hc: t.hc,
            },
            t.coeff,
        );
        e
    }

    pub fn named(name: &str) -> OpExpr {
        OpExpr::from_term(OpTerm {
            coeff: ScalarExpr::one(),
            factors: vec![OpFactor::Named(name.to_owned())],
            hc: false,
        })
    }

    /// Bilinear dot product `u · v`.
    pub fn dot(u: &VecExpr, v: &VecExpr) -> OpExpr {
        let mut e = OpExpr::zero();
        for (ta, ca) in u.terms() {
            for (tb, cb) in v.terms() {
                e.push(
                    OpKey {
                        factors: vec![dot_factor(ta, tb)],
                        hc: false,
                    },
                    ca.mul(cb),
                );
            }
        }
        e
    }

    /// `1 / |v|`, with the sign of `v` normalized.
    pub fn inverse_norm(v: &VecExpr) -> Result<OpExpr, KernelError> {
        if v.is_zero() {
            return Err(KernelError::ZeroNorm);
        }
        Ok(OpExpr::from_term(OpTerm {
            coeff: ScalarExpr::one(),
            factors: vec![OpFactor::InverseNorm(v.sign_normalized())],
            hc: false,
        }))
    }

    fn push(&mut self, key: OpKey, c: ScalarExpr) {
        if c.is_zero() {
            return;
        }
        let sum = match self.terms.get(&key) {
            Some(old) => old.add(&c),
            None => c,
        };
        if sum.is_zero() {
            self.terms.remove(&key);
        } else {
            self.terms.insert(key, sum);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&OpKey, &ScalarExpr)> {
        self.terms.iter()
    }

    pub fn to_terms(&self) -> Vec<OpTerm> {
        self.terms
            .iter()
            .map(|(k, c)| OpTerm {
                coeff: c.clone(),
                factors: k.factors.clone(),
                hc: k.hc,
            })
            .collect()
    }

    pub fn coefficient(&self, key: &OpKey) -> ScalarExpr {
        self.terms
            .get(key)
            .cloned()
            .unwrap_or_else(ScalarExpr::zero)
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

    pub fn add(&self, o: &OpExpr) -> OpExpr {
        let mut out = self.clone();
        for (k, c) in &o.terms {
            out.push(k.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &OpExpr) -> OpExpr {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> OpExpr {
        self.scale(&ScalarExpr::int(-1))
    }

    pub fn scale(&self, k: &ScalarExpr) -> OpExpr {
        let mut out = OpExpr::zero();
        for (key, c) in &self.terms {
            out.push(key.clone(), c.mul(k));
        }
        out
    }

    /// Ordered product `self · o`. Products that would place a marked term
    /// next to another operator are rejected because the adjoint of the
    /// product is not representable by the marker.
    pub fn multiply(&self, o: &OpExpr) -> Result<OpExpr, KernelError> {
        let mut out = OpExpr::zero();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &o.terms {
                if (ka.hc && !kb.factors.is_empty()) || (kb.hc && !ka.factors.is_empty()) {
                    return Err(KernelError::MarkedProduct);
                }
                let mut factors = ka.factors.clone();
                factors.extend(kb.factors.iter().cloned());
                out.push(
                    OpKey {
                        factors: normal_order(factors),
                        hc: ka.hc || kb.hc,
                    },
                    ca.mul(cb),
                );
            }
        }
        Ok(out)
    }

    /// Attaches the `+ h.c.` marker to every operator term. Pure scalar terms
    /// are real and are doubled instead.
    pub fn mark_hc(&self) -> OpExpr {
        let mut out = OpExpr::zero();
        for (k, c) in &self.terms {
            if k.factors.is_empty() {
                out.push(k.clone(), c.mul(&ScalarExpr::int(2)));
            } else {
                out.push(
                    OpKey {
                        factors: k.factors.clone(),
                        hc: true,
                    },
                    c.clone(),
                );
            }
        }
        out
    }

    /// Rebuilds every term through the canonical constructors.
    pub fn canonicalize(&self) -> OpExpr {
        let mut out = OpExpr::zero();
        for (k, c) in &self.terms {
            let mut term = OpExpr::scalar(c.clone());
            for f in &k.factors {
                let piece = match f {
                    OpFactor::Dot(a, b) => OpExpr::dot(
                        &VecExpr::from_term(ScalarExpr::one(), a.clone()),
                        &VecExpr::from_term(ScalarExpr::one(), b.clone()),
                    ),
                    OpFactor::InverseNorm(v) => {
                        OpExpr::inverse_norm(v).expect("stored norm argument is nonzero")
                    }
                    OpFactor::Named(n) => OpExpr::named(n),
                };
                term = term.multiply(&piece).expect("unmarked product");
            }
            out = out.add(&if k.hc { term.mark_hc() } else { term });
        }
        out
    }

    pub fn equals(&self, o: &OpExpr) -> bool {
        self.canonicalize() == o.canonicalize()
    }

    /// Replaces atoms by their linear images everywhere, including field
    /// evaluation points, derivative directions and norm arguments.
    pub fn substitute(&self, map: &LinearMap) -> Result<OpExpr, KernelError> {
        let mut out = OpExpr::zero();
        for (k, c) in &self.terms {
            let mut term = OpExpr::scalar(c.clone());
            for f in &k.factors {
                let piece = match f {
                    OpFactor::Dot(a, b) => OpExpr::dot(&map.apply_term(a), &map.apply_term(b)),
                    OpFactor::InverseNorm(v) => OpExpr::inverse_norm(&map.apply(v))?,
                    OpFactor::Named(n) => OpExpr::named(n),
                };
                term = term.multiply(&piece)?;
            }
            out = out.add(&if k.hc { term.mark_hc() } else { term });
        }
        Ok(out)
    }

    pub fn grades(&self) -> BTreeSet<i32> {
        self.terms
            .values()
            .flat_map(|c| c.grades().map(|(g, _)| g))
            .collect()
    }

    /// Keeps only the grade-`g` part of every coefficient.
    pub fn grade_part(&self, g: i32) -> OpExpr {
        let mut out = OpExpr::zero();
        for (k, c) in &self.terms {
            out.push(k.clone(), ScalarExpr::graded(g, c.grade_part(g)));
        }
        out
    }

    pub fn shift_grade(&self, k: i32) -> OpExpr {
        self.map_coefficients(|c| c.shift_grade(k))
    }

    pub fn map_coefficients(&self, f: impl Fn(&ScalarExpr) -> ScalarExpr) -> OpExpr {
        let mut out = OpExpr::zero();
        for (k, c) in &self.terms {
            out.push(k.clone(), f(c));
        }
        out
    }

    /// Applies `f` to each term and sums the results.
    pub fn flat_map_terms(
        &self,
        mut f: impl FnMut(&OpKey, &ScalarExpr) -> Result<OpExpr, KernelError>,
    ) -> Result<OpExpr, KernelError> {
        let mut out = OpExpr::zero();
        for (k, c) in &self.terms {
            out = out.add(&f(k, c)?);
        }
        Ok(out)
    }

    pub fn for_each_atom(&self, visit: &mut dyn FnMut(&VecAtom)) {
        for k in self.terms.keys() {
            for f in &k.factors {
                f.for_each_atom(visit);
            }
        }
    }

    pub fn symbols(&self) -> Vec<Symbol> {
        let mut out = Vec::new();
        for (k, c) in &self.terms {
            out.extend(c.symbols());
            for f in &k.factors {
                f.for_each_scalar(&mut |s| out.extend(s.symbols()));
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Every coefficient of `self` is `k` times the matching one of `o`.
    pub fn ratio_to(&self, o: &OpExpr) -> Option<ScalarExpr> {
        if self.terms.len() != o.terms.len() || o.is_zero() {
            return None;
        }
        let mut ratio: Option<ScalarExpr> = None;
        for ((ka, ca), (kb, cb)) in self.terms.iter().zip(o.terms.iter()) {
            if ka != kb {
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

/// Linear substitution on particle atoms (positions, momenta, spins,
/// moments). Field atoms are rebuilt from their substituted arguments.
#[derive(Clone, Debug, Default)]
pub struct LinearMap {
    images: BTreeMap<VecAtom, VecExpr>,
}

impl LinearMap {
    pub fn new() -> LinearMap {
        LinearMap::default()
    }

    pub fn insert(&mut self, atom: VecAtom, image: VecExpr) -> Result<(), KernelError> {
        if atom.is_field() {
            return Err(KernelError::FieldInMap);
        }
        if image.contains_field() {
            return Err(KernelError::FieldInMap);
        }
        self.images.insert(atom, image);
        Ok(())
    }

    pub fn images(&self) -> impl Iterator<Item = (&VecAtom, &VecExpr)> {
        self.images.iter()
    }

    pub fn symbols(&self) -> Vec<Symbol> {
        let mut out: Vec<Symbol> = self.images.values().flat_map(VecExpr::symbols).collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn apply_term(&self, t: &VecTerm) -> VecExpr {
        match t {
            VecTerm::Atom(VecAtom::Field(fa)) => {
                let point = self.apply(&fa.point);
                let dirs: Vec<VecExpr> = fa.dirs.iter().map(|d| self.apply_term(d)).collect();
                field_vec(fa.kind, fa.scale, &point, &dirs)
            }
            VecTerm::Atom(a) => match self.images.get(a) {
                Some(img) => img.clone(),
                None => VecExpr::atom(a.clone()),
            },
            VecTerm::Cross(a, b) => self.apply_term(a).cross(&self.apply_term(b)),
        }
    }

    pub fn apply(&self, v: &VecExpr) -> VecExpr {
        let mut out = VecExpr::zero();
        for (t, c) in v.terms() {
            out = out.add(&self.apply_term(t).scale(c));
        }
        out
    }
}
