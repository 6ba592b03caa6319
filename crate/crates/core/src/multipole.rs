//! Graded multipole families and the interaction hierarchy.

use std::collections::BTreeMap;
use std::fmt;

use crate::fields::expand_fields;
use crate::pzw::Group;
use crate::symkernel::{
    coefficient_list, KernelError, OpExpr, RatFunc, ScalarExpr, Symbol, VecExpr, LAMBDA,
    LAMBDA_PRIME,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MultipoleError {
    #[error("integration variable `{0}` appears in a denominator")]
    LambdaDenominator(&'static str),
    #[error("integration variable `{0}` survives inside an operator factor")]
    LambdaInFactor(&'static str),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// `∫₀¹ p(λ) dλ` for `p` polynomial in `var`.
pub fn lambda_integrate(p: &ScalarExpr, var: &'static str) -> Result<ScalarExpr, MultipoleError> {
    let s = Symbol::new(var);
    let mut out = ScalarExpr::zero();
    for (g, r) in p.grades() {
        if r.den().degree_in(s) > 0 {
            return Err(MultipoleError::LambdaDenominator(var));
        }
        for (k, c) in coefficient_list(r.num(), s).into_iter().enumerate() {
            let term = RatFunc::new(c, r.den().clone()).mul(&RatFunc::constant(
                crate::symkernel::rational(1, k as i64 + 1),
            ));
            out = out.add(&ScalarExpr::graded(g, term));
        }
    }
    Ok(out)
}

/// Integrates both λ variables out of every coefficient.
pub fn integrate_op(e: &OpExpr) -> Result<OpExpr, MultipoleError> {
    let mut out = OpExpr::zero();
    for t in e.to_terms() {
        let c = lambda_integrate(&lambda_integrate(&t.coeff, LAMBDA)?, LAMBDA_PRIME)?;
        let mut piece = OpExpr::from_term(crate::symkernel::OpTerm {
            coeff: ScalarExpr::one(),
            ..t
        });
        piece = piece.scale(&c);
        out = out.add(&piece);
    }
    for var in [LAMBDA, LAMBDA_PRIME] {
        if out.symbols().contains(&Symbol::new(var)) {
            return Err(MultipoleError::LambdaInFactor(var));
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    E,
    S,
    M,
    MM,
    A,
    AA,
    /// Electrostatic self-energy, only present when requested.
    SelfEnergy,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::E,
        Family::S,
        Family::M,
        Family::MM,
        Family::A,
        Family::AA,
        Family::SelfEnergy,
    ];

    /// Grade of the `n = 0` entry.
    pub fn offset(self) -> i32 {
        match self {
            Family::E | Family::A | Family::SelfEnergy => 1,
            Family::S | Family::M | Family::AA => 2,
            Family::MM => 4,
        }
    }

    pub fn of_group(g: Group) -> Option<Family> {
        match g {
            Group::Electric => Some(Family::E),
            Group::Spin => Some(Family::S),
            Group::Paramagnetic => Some(Family::M),
            Group::Diamagnetic => Some(Family::MM),
            Group::MinimalCross => Some(Family::A),
            Group::MinimalSquare => Some(Family::AA),
            Group::SelfEnergy => Some(Family::SelfEnergy),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::E => "E",
            Family::S => "S",
            Family::M => "M",
            Family::MM => "MM",
            Family::A => "A",
            Family::AA => "AA",
            Family::SelfEnergy => "self",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `T^n` for `n = 0..`, stored at grade 0; the hierarchy places entry `n`
/// at grade `offset + n`. Entries carry the sign with which they enter the
/// scaled Hamiltonian.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedFamily {
    pub tag: Family,
    pub entries: BTreeMap<u32, OpExpr>,
}

impl GradedFamily {
    /// Splits a scaled, λ-form coupling group into its graded entries up to
    /// `nmax`, expanding fields about `base`.
    pub fn from_group(
        tag: Family,
        group: &OpExpr,
        base: &VecExpr,
        nmax: u32,
    ) -> Result<GradedFamily, MultipoleError> {
        let top = tag.offset() + nmax as i32;
        let expanded = integrate_op(&expand_fields(group, base, top)?)?;
        let mut entries = BTreeMap::new();
        for n in 0..=nmax {
            let g = tag.offset() + n as i32;
            let part = expanded.grade_part(g);
            if !part.is_zero() {
                entries.insert(n, part.shift_grade(-g));
            }
        }
        Ok(GradedFamily { tag, entries })
    }

    pub fn entry(&self, n: i64) -> Option<&OpExpr> {
        u32::try_from(n).ok().and_then(|n| self.entries.get(&n))
    }
}

/// Contribution of one family entry to a grade block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece {
    pub family: Family,
    pub n: u32,
    pub expr: OpExpr,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Hierarchy {
    pub blocks: BTreeMap<i32, Vec<Piece>>,
}

impl Hierarchy {
    /// Total grade-`g` operator, carrying `μ^g`.
    pub fn block(&self, g: i32) -> OpExpr {
        self.blocks
            .get(&g)
            .map(|ps| ps.iter().fold(OpExpr::zero(), |acc, p| acc.add(&p.expr)))
            .unwrap_or_default()
    }

    pub fn order(&self) -> i32 {
        self.blocks.keys().next_back().copied().unwrap_or(0)
    }

    /// Family tags present in grade `g`, with multiplicity.
    pub fn tags(&self, g: i32) -> Vec<(Family, u32)> {
        self.blocks
            .get(&g)
            .map(|ps| ps.iter().map(|p| (p.family, p.n)).collect())
            .unwrap_or_default()
    }

    pub fn truncate(&self, k: i32) -> Hierarchy {
        Hierarchy {
            blocks: self
                .blocks
                .range(..=k)
                .map(|(g, v)| (*g, v.clone()))
                .collect(),
        }
    }
}

/// Grade `n` collects `T_X^{n − offset(X)}` over the given families, for
/// `n = 1..=k`.
pub fn assemble_hierarchy(families: &[GradedFamily], k: i32) -> Hierarchy {
    let mut blocks = BTreeMap::new();
    for g in 1..=k {
        let mut pieces = Vec::new();
        for f in families {
            if let Some(e) = f.entry((g - f.tag.offset()) as i64) {
                pieces.push(Piece {
                    family: f.tag,
                    n: (g - f.tag.offset()) as u32,
                    expr: e.shift_grade(g),
                });
            }
        }
        blocks.insert(g, pieces);
    }
    Hierarchy { blocks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symkernel::rational;

    fn lam() -> ScalarExpr {
        ScalarExpr::symbol(LAMBDA)
    }

    #[test]
    fn powers_integrate_to_reciprocals() {
        assert_eq!(
            lambda_integrate(&ScalarExpr::one(), LAMBDA).unwrap(),
            ScalarExpr::one()
        );
        for n in 0..6 {
            let got = lambda_integrate(&lam().pow(n), LAMBDA).unwrap();
            assert_eq!(got, ScalarExpr::rational(rational(1, n as i64 + 1)));
        }
    }

    #[test]
    fn lambda_in_denominator_is_rejected() {
        let p = ScalarExpr::one().div(&lam()).unwrap();
        assert!(lambda_integrate(&p, LAMBDA).is_err());
    }

    #[test]
    fn offsets() {
        let got: Vec<i32> = [
            Family::E,
            Family::S,
            Family::M,
            Family::MM,
            Family::A,
            Family::AA,
        ]
        .iter()
        .map(|f| f.offset())
        .collect();
        assert_eq!(got, vec![1, 2, 2, 4, 1, 2]);
    }
}
