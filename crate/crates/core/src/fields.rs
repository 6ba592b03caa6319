//! Field-operator atoms, their Taylor expansion about a reference point, and
//! the dilation rules that rescale them.

use std::collections::BTreeMap;
use std::fmt;

use crate::symkernel::{
    KernelError, OpExpr, OpFactor, RatFunc, Rational, ScalarExpr, VecAtom, VecExpr, VecTerm,
};

/// Free photon energy operator.
pub const FREE_FIELD_ATOM: &str = "H_f";
/// Electrostatic self-energy of the polarization field.
pub const SELF_ENERGY_ATOM: &str = "H_self";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldKind {
    E,
    B,
    A,
    Pi,
}

impl FieldKind {
    pub fn name(self) -> &'static str {
        match self {
            FieldKind::E => "E",
            FieldKind::B => "B",
            FieldKind::A => "A",
            FieldKind::Pi => "Pi",
        }
    }

    pub fn parse(s: &str) -> Option<FieldKind> {
        match s {
            "E" => Some(FieldKind::E),
            "B" => Some(FieldKind::B),
            "A" => Some(FieldKind::A),
            "Pi" => Some(FieldKind::Pi),
            _ => None,
        }
    }
}

/// `(d₁·∇)…(d_n·∇) F(r)` at `r = μ^scale · point`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldAtom {
    pub kind: FieldKind,
    pub scale: u32,
    pub point: VecExpr,
    /// Directional-derivative arguments, kept sorted since the derivatives
    /// commute.
    pub dirs: Vec<VecTerm>,
}

impl fmt::Debug for FieldAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.dirs {
            write!(f, "({d:?}.grad)")?;
        }
        write!(
            f,
            "{}(mu^{} {:?})",
            self.kind.name(),
            self.scale,
            self.point
        )
    }
}

impl FieldAtom {
    pub fn new(kind: FieldKind, scale: u32, point: VecExpr) -> FieldAtom {
        FieldAtom {
            kind,
            scale,
            point,
            dirs: Vec::new(),
        }
    }

    /// Number of applied derivatives.
    pub fn order(&self) -> usize {
        self.dirs.len()
    }
}

/// Field vector with derivative arguments expanded multilinearly.
/// `Pi` is rewritten as `-eps0 E`.
pub fn field_vec(kind: FieldKind, scale: u32, point: &VecExpr, dirs: &[VecExpr]) -> VecExpr {
    let (kind, prefactor) = match kind {
        FieldKind::Pi => (FieldKind::E, ScalarExpr::symbol("eps0").neg()),
        k => (k, ScalarExpr::one()),
    };
    let mut partial: Vec<(ScalarExpr, Vec<VecTerm>)> = vec![(prefactor, Vec::new())];
    for d in dirs {
        debug_assert!(!d.contains_field(), "derivative argument contains a field");
        let mut next = Vec::new();
        for (c, ts) in &partial {
            for (t, k) in d.terms() {
                let mut ts = ts.clone();
                ts.push(t.clone());
                next.push((c.mul(k), ts));
            }
        }
        partial = next;
    }
    let mut out = VecExpr::zero();
    for (c, mut ts) in partial {
        ts.sort();
        let atom = FieldAtom {
            kind,
            scale,
            point: point.clone(),
            dirs: ts,
        };
        out = out.add(&VecExpr::from_term(
            c,
            VecTerm::Atom(VecAtom::Field(Box::new(atom))),
        ));
    }
    out
}

fn factorial(n: u32) -> Rational {
    (1..=n as i64).fold(Rational::from_integer(1.into()), |acc, k| {
        acc * Rational::from_integer(k.into())
    })
}

/// Taylor series of `atom` about `μ^scale · base`: entry `n` is
/// `μ^{n·scale}/n! (X·∇)ⁿ F` with `X = point − base`.
pub fn taylor_expand(
    atom: &FieldAtom,
    base: &VecExpr,
    order: u32,
) -> Result<Vec<(u32, VecExpr)>, KernelError> {
    let x = atom.point.sub(base);
    if x.contains_field() {
        return Err(KernelError::NotAffine(format!("{:?}", atom.point)));
    }
    let mut base_terms = base.terms();
    if let (Some((t, _)), None) = (base_terms.next(), base_terms.next()) {
        if !x.coefficient(t).is_zero() {
            return Err(KernelError::NotAffine(format!("{:?}", atom.point)));
        }
    }
    let old: Vec<VecExpr> = atom
        .dirs
        .iter()
        .map(|d| VecExpr::from_term(ScalarExpr::one(), d.clone()))
        .collect();
    let mut out = Vec::new();
    for n in 0..=order {
        let mut dirs = old.clone();
        dirs.extend(std::iter::repeat_n(x.clone(), n as usize));
        let coeff = ScalarExpr::graded(
            (n * atom.scale) as i32,
            RatFunc::constant(factorial(n).recip()),
        );
        out.push((
            n,
            field_vec(atom.kind, atom.scale, base, &dirs).scale(&coeff),
        ));
    }
    Ok(out)
}

fn expand_term(t: &VecTerm, base: &VecExpr, order: u32) -> Result<VecExpr, KernelError> {
    match t {
        VecTerm::Atom(VecAtom::Field(fa)) => {
            let mut out = VecExpr::zero();
            for (_, v) in taylor_expand(fa, base, order)? {
                out = out.add(&v);
            }
            Ok(out)
        }
        VecTerm::Atom(_) => Ok(VecExpr::from_term(ScalarExpr::one(), t.clone())),
        VecTerm::Cross(a, b) => {
            Ok(expand_term(a, base, order)?.cross(&expand_term(b, base, order)?))
        }
    }
}

/// Expands every field atom of `e` about `base` and drops all contributions
/// above `max_grade`.
pub fn expand_fields(e: &OpExpr, base: &VecExpr, max_grade: i32) -> Result<OpExpr, KernelError> {
    let expanded = e.flat_map_terms(|key, coeff| {
        let low = coeff.grades().map(|(g, _)| g).min().unwrap_or(0);
        let budget = (max_grade - low).max(0) as u32;
        let mut term = OpExpr::scalar(coeff.clone());
        for f in &key.factors {
            let piece = match f {
                OpFactor::Dot(a, b) => OpExpr::dot(
                    &expand_term(a, base, budget)?,
                    &expand_term(b, base, budget)?,
                ),
                OpFactor::InverseNorm(v) => OpExpr::inverse_norm(v)?,
                OpFactor::Named(n) => OpExpr::named(n),
            };
            term = term.multiply(&piece)?;
        }
        Ok(if key.hc { term.mark_hc() } else { term })
    })?;
    let mut out = OpExpr::zero();
    for g in expanded.grades() {
        if g <= max_grade {
            out = out.add(&expanded.grade_part(g));
        }
    }
    Ok(out)
}

/// μ-grade rules of the dilation: prefactor grades per atom class and the
/// factor by which field evaluation points are stretched.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScalingAxiom {
    pub position: i32,
    pub momentum: i32,
    pub inverse_norm: i32,
    pub fields: BTreeMap<FieldKind, i32>,
    /// Grade picked up by each directional derivative of a field.
    pub derivative: i32,
    /// Power of μ multiplying a field evaluation point.
    pub point_scale: u32,
    pub named: BTreeMap<String, i32>,
}

impl ScalingAxiom {
    fn term(&self, t: &VecTerm) -> Result<(i32, VecTerm), KernelError> {
        match t {
            VecTerm::Atom(a) => {
                let w = match a {
                    VecAtom::Position(..) => self.position,
                    VecAtom::Momentum(..) => self.momentum,
                    VecAtom::Spin(_) | VecAtom::MagneticMoment(_) => 0,
                    VecAtom::Field(fa) => {
                        let mut w = *self
                            .fields
                            .get(&fa.kind)
                            .ok_or_else(|| KernelError::UnknownAtom(fa.kind.name().into()))?;
                        for d in &fa.dirs {
                            w += self.derivative + self.term(d)?.0;
                        }
                        let mut moved = (**fa).clone();
                        moved.scale += self.point_scale;
                        return Ok((w, VecTerm::Atom(VecAtom::Field(Box::new(moved)))));
                    }
                };
                Ok((w, t.clone()))
            }
            VecTerm::Cross(a, b) => {
                let (wa, ta) = self.term(a)?;
                let (wb, tb) = self.term(b)?;
                Ok((wa + wb, VecTerm::Cross(Box::new(ta), Box::new(tb))))
            }
        }
    }
}

/// Applies the dilation term by term; each factor contributes its grade and
/// field points are stretched.
pub fn apply_dilation(e: &OpExpr, ax: &ScalingAxiom) -> Result<OpExpr, KernelError> {
    e.flat_map_terms(|key, coeff| {
        let mut shift = 0;
        let mut term = OpExpr::one();
        for f in &key.factors {
            let piece = match f {
                OpFactor::Dot(a, b) => {
                    let (wa, ta) = ax.term(a)?;
                    let (wb, tb) = ax.term(b)?;
                    shift += wa + wb;
                    OpExpr::dot(
                        &VecExpr::from_term(ScalarExpr::one(), ta),
                        &VecExpr::from_term(ScalarExpr::one(), tb),
                    )
                }
                OpFactor::InverseNorm(v) => {
                    shift += ax.inverse_norm;
                    OpExpr::inverse_norm(v)?
                }
                OpFactor::Named(n) => {
                    shift += *ax
                        .named
                        .get(n)
                        .ok_or_else(|| KernelError::UnknownAtom(n.clone()))?;
                    OpExpr::named(n)
                }
            };
            term = term.multiply(&piece)?;
        }
        let term = term.scale(&coeff.shift_grade(shift));
        Ok(if key.hc { term.mark_hc() } else { term })
    })
}
