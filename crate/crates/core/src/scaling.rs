//! Scaling constants from monomial constraints and the scaled Hamiltonians.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::fields::{apply_dilation, FieldKind, ScalingAxiom, FREE_FIELD_ATOM, SELF_ENERGY_ATOM};
use crate::pzw::{Group, Hamiltonian};
use crate::symkernel::{rational, KernelError, RatFunc, Rational, Symbol};

/// `μ^mu · η^eta · (Zα)^za`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Power {
    pub mu: i64,
    pub eta: i64,
    pub za: i64,
}

impl Power {
    pub fn new(mu: i64, eta: i64, za: i64) -> Power {
        Power { mu, eta, za }
    }
}

/// Equalities between monomials in `μ`, `η`, `Zα`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScalingConstraint {
    pub equations: Vec<(Power, Power)>,
}

impl ScalingConstraint {
    /// Kinetic, Coulomb and free-field energies at the same order:
    /// `μ² = Zα·μ = η`.
    pub fn standard() -> ScalingConstraint {
        ScalingConstraint {
            equations: vec![
                (Power::new(2, 0, 0), Power::new(1, 0, 1)),
                (Power::new(1, 0, 1), Power::new(0, 1, 0)),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScalingError {
    #[error(
        "inconsistent scaling constraints (coefficient rank {rank}, augmented rank {augmented})"
    )]
    Inconsistent { rank: usize, augmented: usize },
    #[error("underdetermined scaling constraints (rank {rank} of 2 unknowns)")]
    Underdetermined { rank: usize },
    #[error("η is not an integer power of μ (η = μ^{0})")]
    FractionalGrade(Rational),
    #[error("zero-order group `{group}` sits at grade {grade} after scaling")]
    ZeroOrderGrade { group: &'static str, grade: i32 },
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// `μ = (Zα)^mu`, `η = (Zα)^eta`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScalingSolution {
    pub mu: Rational,
    pub eta: Rational,
}

impl fmt::Display for ScalingSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "mu = (Z alpha)^{}, eta = (Z alpha)^{}",
            self.mu, self.eta
        )
    }
}

/// Row-reduces `rows` in place and returns the rank over the first `cols`
/// columns.
fn row_reduce(rows: &mut [Vec<Rational>], cols: usize) -> usize {
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank][col].clone();
        for v in rows[rank].iter_mut() {
            *v = v.clone() / pivot.clone();
        }
        for r in 0..rows.len() {
            if r != rank && !rows[r][col].is_zero() {
                let k = rows[r][col].clone();
                for c in 0..rows[r].len() {
                    let d = rows[rank][c].clone() * k.clone();
                    rows[r][c] -= d;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Solves the exponent equations for `μ` and `η` as powers of `Zα`.
pub fn solve_scaling(c: &ScalingConstraint) -> Result<ScalingSolution, ScalingError> {
    let mut rows: Vec<Vec<Rational>> = c
        .equations
        .iter()
        .map(|(l, r)| {
            vec![
                rational(l.mu - r.mu, 1),
                rational(l.eta - r.eta, 1),
                rational(r.za - l.za, 1),
            ]
        })
        .collect();
    let rank = row_reduce(&mut rows, 2);
    let augmented = rank + rows[rank..].iter().any(|r| !r[2].is_zero()) as usize;
    if augmented > rank {
        return Err(ScalingError::Inconsistent { rank, augmented });
    }
    if rank < 2 {
        return Err(ScalingError::Underdetermined { rank });
    }
    Ok(ScalingSolution {
        mu: rows[0][2].clone(),
        eta: rows[1][2].clone(),
    })
}

impl ScalingSolution {
    /// `η` expressed as an integer power of `μ`.
    pub fn eta_grade(&self) -> Result<i32, ScalingError> {
        let g = self.eta.clone() / self.mu.clone();
        if !g.is_integer() || g.is_negative() {
            return Err(ScalingError::FractionalGrade(g));
        }
        Ok(g.to_integer().try_into().expect("small exponent"))
    }

    /// Grade table: `p → μp`, `r → r/μ`, `1/|r| → μ/|r|`, `E, B, Π → η² F(η r/μ)`,
    /// `A → η A(η r/μ)`, `H_f → η H_f`, each gradient `→ η`.
    pub fn axioms(&self) -> Result<ScalingAxiom, ScalingError> {
        let eta = self.eta_grade()?;
        let stretch = eta - 1;
        if stretch < 0 {
            return Err(ScalingError::FractionalGrade(
                self.eta.clone() / self.mu.clone() - Rational::one(),
            ));
        }
        let fields = BTreeMap::from([
            (FieldKind::E, 2 * eta),
            (FieldKind::B, 2 * eta),
            (FieldKind::Pi, 2 * eta),
            (FieldKind::A, eta),
        ]);
        let named = BTreeMap::from([
            (FREE_FIELD_ATOM.to_owned(), eta),
            (SELF_ENERGY_ATOM.to_owned(), eta + 1),
        ]);
        Ok(ScalingAxiom {
            position: -1,
            momentum: 1,
            inverse_norm: 1,
            fields,
            derivative: eta,
            point_scale: stretch as u32,
            named,
        })
    }
}

/// Dilates `h`, divides out the global `μ²`, and eliminates `α = μ/Z`.
/// The unperturbed groups are checked to land at grade 0.
pub fn scale_hamiltonian(
    h: &Hamiltonian,
    sol: &ScalingSolution,
    z: u32,
) -> Result<Hamiltonian, ScalingError> {
    let ax = sol.axioms()?;
    let alpha = Symbol::new("alpha");
    let inv_z = RatFunc::constant(rational(1, z as i64));
    let scaled = h.map(|e| {
        Ok(apply_dilation(e, &ax)?
            .shift_grade(-2)
            .map_coefficients(|c| c.absorb_into_grade(alpha, &inv_z)))
    })?;
    for (g, e) in &scaled.groups {
        if g.is_zero_order() {
            if let Some(&bad) = e.grades().iter().find(|&&k| k != 0) {
                return Err(ScalingError::ZeroOrderGrade {
                    group: g.name(),
                    grade: bad,
                });
            }
        }
    }
    Ok(scaled)
}

/// Grade at which each nonempty group first contributes.
pub fn leading_grades(h: &Hamiltonian) -> BTreeMap<Group, i32> {
    h.groups
        .iter()
        .filter_map(|(g, e)| e.grades().iter().next().map(|k| (*g, *k)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_constraint() {
        let s = solve_scaling(&ScalingConstraint::standard()).unwrap();
        assert_eq!(s.mu, rational(1, 1));
        assert_eq!(s.eta, rational(2, 1));
        assert_eq!(s.eta_grade().unwrap(), 2);
    }

    #[test]
    fn cubic_constraint() {
        let c = ScalingConstraint {
            equations: vec![
                (Power::new(3, 0, 0), Power::new(1, 0, 2)),
                (Power::new(2, 0, 0), Power::new(0, 1, 0)),
            ],
        };
        let s = solve_scaling(&c).unwrap();
        assert_eq!((s.mu, s.eta), (rational(1, 1), rational(2, 1)));
    }

    #[test]
    fn rank_deficiency() {
        let c = ScalingConstraint {
            equations: vec![(Power::new(1, 0, 0), Power::new(0, 1, 0))],
        };
        assert_eq!(
            solve_scaling(&c),
            Err(ScalingError::Underdetermined { rank: 1 })
        );
    }

    #[test]
    fn inconsistency() {
        let c = ScalingConstraint {
            equations: vec![
                (Power::new(1, 0, 0), Power::new(0, 0, 1)),
                (Power::new(1, 0, 0), Power::new(0, 0, 2)),
                (Power::new(0, 1, 0), Power::new(0, 0, 2)),
            ],
        };
        assert!(matches!(
            solve_scaling(&c),
            Err(ScalingError::Inconsistent { .. })
        ));
    }
}
