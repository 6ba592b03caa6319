//! Lab-frame Hamiltonians of a neutral particle system: zero order,
//! multipolar (PZW) and minimal coupling.

use std::fmt;

use crate::fields::{field_vec, FieldKind, FREE_FIELD_ATOM, SELF_ENERGY_ATOM};
use crate::symkernel::{
    Frame, KernelError, OpExpr, ScalarExpr, SymbolKind, SymbolTable, VecExpr, LAMBDA, LAMBDA_PRIME,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SystemError {
    #[error("system needs at least one particle")]
    Empty,
    #[error("{field} lists {got} entries for {n} particles")]
    Length {
        field: &'static str,
        got: usize,
        n: usize,
    },
    #[error("nucleus index {0} is out of range")]
    Nucleus(usize),
    #[error("total charge is {0}; the multipolar Hamiltonian needs a neutral system")]
    NotNeutral(i64),
    #[error("Z must be positive")]
    ZeroZ,
    #[error("invalid mass symbol `{0}`")]
    MassName(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Scheme {
    Multipolar,
    Minimal,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Multipolar => "mp",
            Scheme::Minimal => "mc",
        })
    }
}

/// Particles are numbered from 1. Equal mass symbols encode equal masses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParticleSystem {
    pub name: String,
    /// Charges in units of `e`.
    pub charges: Vec<i64>,
    pub masses: Vec<String>,
    pub nucleus: usize,
    pub z: u32,
    /// Whether each particle carries a spin magnetic moment.
    pub spins: Vec<bool>,
}

impl ParticleSystem {
    pub fn validate(&self) -> Result<(), SystemError> {
        let n = self.charges.len();
        if n == 0 {
            return Err(SystemError::Empty);
        }
        if self.masses.len() != n {
            return Err(SystemError::Length {
                field: "masses",
                got: self.masses.len(),
                n,
            });
        }
        if self.spins.len() != n {
            return Err(SystemError::Length {
                field: "spins",
                got: self.spins.len(),
                n,
            });
        }
        if self.nucleus == 0 || self.nucleus > n {
            return Err(SystemError::Nucleus(self.nucleus));
        }
        if self.z == 0 {
            return Err(SystemError::ZeroZ);
        }
        let reserved = SymbolTable::standard();
        for m in &self.masses {
            let ok = m.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
                && m.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !ok || reserved.kind(m).is_some() {
                return Err(SystemError::MassName(m.clone()));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.charges.len()
    }

    pub fn total_charge(&self) -> i64 {
        self.charges.iter().sum()
    }

    pub fn is_neutral(&self) -> bool {
        self.total_charge() == 0
    }

    pub fn symbol_table(&self) -> SymbolTable {
        let mut t = SymbolTable::standard();
        for m in &self.masses {
            t.insert(m, SymbolKind::Mass);
        }
        t
    }

    pub fn mass(&self, a: usize) -> ScalarExpr {
        ScalarExpr::symbol(&self.masses[a - 1])
    }

    pub fn total_mass(&self) -> ScalarExpr {
        (1..=self.n()).fold(ScalarExpr::zero(), |acc, a| acc.add(&self.mass(a)))
    }

    /// `e_a` as a scalar.
    pub fn charge(&self, a: usize) -> ScalarExpr {
        ScalarExpr::int(self.charges[a - 1]).mul(&ScalarExpr::symbol("e"))
    }

    pub fn position(&self, a: usize) -> VecExpr {
        VecExpr::position(Frame::Lab, a as u8)
    }

    pub fn momentum(&self, a: usize) -> VecExpr {
        VecExpr::momentum(Frame::Lab, a as u8)
    }

    /// `R = Σ m_a r_a / M`.
    pub fn center_of_mass(&self) -> VecExpr {
        let m = self.total_mass();
        let mut out = VecExpr::zero();
        for a in 1..=self.n() {
            out = out.add(
                &self
                    .position(a)
                    .scale(&self.mass(a).div(&m).expect("nonzero mass")),
            );
        }
        out
    }

    /// `r_a − R`.
    pub fn relative(&self, a: usize) -> VecExpr {
        self.position(a).sub(&self.center_of_mass())
    }

    fn has_moment(&self, a: usize) -> bool {
        self.spins[a - 1] && self.charges[a - 1] != 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Group {
    Kinetic,
    NucleusCoulomb,
    FreeField,
    ElectronCoulomb,
    Electric,
    Paramagnetic,
    Spin,
    Diamagnetic,
    SelfEnergy,
    MinimalCross,
    MinimalSquare,
}

impl Group {
    pub fn name(self) -> &'static str {
        match self {
            Group::Kinetic => "kinetic",
            Group::NucleusCoulomb => "nucleus-coulomb",
            Group::FreeField => "free-field",
            Group::ElectronCoulomb => "electron-coulomb",
            Group::Electric => "electric",
            Group::Paramagnetic => "paramagnetic",
            Group::Spin => "spin",
            Group::Diamagnetic => "diamagnetic",
            Group::SelfEnergy => "self-energy",
            Group::MinimalCross => "p-dot-a",
            Group::MinimalSquare => "a-squared",
        }
    }

    /// Groups that make up the unperturbed Hamiltonian.
    pub fn is_zero_order(self) -> bool {
        matches!(
            self,
            Group::Kinetic | Group::NucleusCoulomb | Group::FreeField | Group::ElectronCoulomb
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hamiltonian {
    pub scheme: Scheme,
    pub groups: Vec<(Group, OpExpr)>,
}

impl Hamiltonian {
    pub fn total(&self) -> OpExpr {
        self.groups
            .iter()
            .fold(OpExpr::zero(), |acc, (_, e)| acc.add(e))
    }

    pub fn group(&self, g: Group) -> OpExpr {
        self.groups
            .iter()
            .filter(|(h, _)| *h == g)
            .fold(OpExpr::zero(), |acc, (_, e)| acc.add(e))
    }

    pub fn map(
        &self,
        mut f: impl FnMut(&OpExpr) -> Result<OpExpr, KernelError>,
    ) -> Result<Hamiltonian, KernelError> {
        let groups = self
            .groups
            .iter()
            .map(|(g, e)| Ok((*g, f(e)?)))
            .collect::<Result<_, KernelError>>()?;
        Ok(Hamiltonian {
            scheme: self.scheme,
            groups,
        })
    }
}

fn coulomb_coefficient(qa: i64, qb: i64) -> ScalarExpr {
    let k = ScalarExpr::symbol("alpha")
        .mul(&ScalarExpr::symbol("hbar"))
        .mul(&ScalarExpr::symbol("c"));
    k.mul(&ScalarExpr::int(qa * qb))
}

fn coulomb(s: &ParticleSystem, a: usize, b: usize) -> Result<OpExpr, KernelError> {
    let d = s.position(a).sub(&s.position(b));
    Ok(OpExpr::inverse_norm(&d)?.scale(&coulomb_coefficient(s.charges[a - 1], s.charges[b - 1])))
}

fn half_over_mass(s: &ParticleSystem, a: usize) -> ScalarExpr {
    ScalarExpr::one()
        .div(&s.mass(a).mul(&ScalarExpr::int(2)))
        .expect("nonzero mass")
}

fn kinetic(s: &ParticleSystem) -> OpExpr {
    let mut out = OpExpr::zero();
    for a in 1..=s.n() {
        let p = s.momentum(a);
        out = out.add(&OpExpr::dot(&p, &p).scale(&half_over_mass(s, a)));
    }
    out
}

fn nucleus_coulomb(s: &ParticleSystem) -> Result<OpExpr, KernelError> {
    let mut out = OpExpr::zero();
    for a in 1..=s.n() {
        if a != s.nucleus && s.charges[a - 1] != 0 && s.charges[s.nucleus - 1] != 0 {
            out = out.add(&coulomb(s, a, s.nucleus)?);
        }
    }
    Ok(out)
}

fn electron_coulomb(s: &ParticleSystem) -> Result<OpExpr, KernelError> {
    let mut out = OpExpr::zero();
    for a in 1..=s.n() {
        for b in a + 1..=s.n() {
            if a != s.nucleus && b != s.nucleus && s.charges[a - 1] * s.charges[b - 1] != 0 {
                out = out.add(&coulomb(s, a, b)?);
            }
        }
    }
    Ok(out)
}

fn spin(s: &ParticleSystem) -> OpExpr {
    let mut out = OpExpr::zero();
    for a in 1..=s.n() {
        if s.has_moment(a) {
            let b = field_vec(FieldKind::B, 0, &s.position(a), &[]);
            out = out.sub(&OpExpr::dot(&VecExpr::moment(a as u8), &b));
        }
    }
    out
}

/// `∑ p_a²/2m_a + nucleus Coulomb + H_f`.
pub fn build_zero_order(s: &ParticleSystem) -> Result<Hamiltonian, SystemError> {
    s.validate()?;
    Ok(Hamiltonian {
        scheme: Scheme::Multipolar,
        groups: vec![
            (Group::Kinetic, kinetic(s)),
            (Group::NucleusCoulomb, nucleus_coulomb(s)?),
            (Group::FreeField, OpExpr::named(FREE_FIELD_ATOM)),
        ],
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coupling {
    Electric { a: usize },
    Magnetic { a: usize, b: usize },
}

/// A coupling kept under `∫₀¹dλ`: `weight(λ) · vector` contracted with a
/// field evaluated at `point(λ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LambdaTerm {
    pub coupling: Coupling,
    pub weight: ScalarExpr,
    pub vector: VecExpr,
    pub point: VecExpr,
}

fn lambda_point(s: &ParticleSystem, b: usize, lambda: &str) -> VecExpr {
    s.center_of_mass()
        .add(&s.relative(b).scale(&ScalarExpr::symbol(lambda)))
}

/// `λδ_ab − (m_a/M)(λ − 1)`.
pub fn magnetic_weight(s: &ParticleSystem, a: usize, b: usize, lambda: &str) -> ScalarExpr {
    let l = ScalarExpr::symbol(lambda);
    let ratio = s.mass(a).div(&s.total_mass()).expect("nonzero mass");
    let base = ratio.mul(&l.sub(&ScalarExpr::one())).neg();
    if a == b {
        base.add(&l)
    } else {
        base
    }
}

/// λ-parameterized electric and magnetic couplings: one electric term per
/// charged particle, one magnetic term per ordered pair `(a, b)`.
pub fn interaction_lambda_terms(s: &ParticleSystem) -> Result<Vec<LambdaTerm>, SystemError> {
    s.validate()?;
    if !s.is_neutral() {
        return Err(SystemError::NotNeutral(s.total_charge()));
    }
    let mut out = Vec::new();
    for a in 1..=s.n() {
        if s.charges[a - 1] != 0 {
            out.push(LambdaTerm {
                coupling: Coupling::Electric { a },
                weight: ScalarExpr::one(),
                vector: s.relative(a).scale(&s.charge(a)),
                point: lambda_point(s, a, LAMBDA),
            });
        }
    }
    for a in 1..=s.n() {
        for b in 1..=s.n() {
            if s.charges[b - 1] != 0 {
                out.push(LambdaTerm {
                    coupling: Coupling::Magnetic { a, b },
                    weight: magnetic_weight(s, a, b, LAMBDA),
                    vector: s.relative(b).scale(&s.charge(b)),
                    point: lambda_point(s, b, LAMBDA),
                });
            }
        }
    }
    Ok(out)
}

/// `∫dλ Σ_b w_ab(λ) e_b (r_b − R) ∧ B(R + λ(r_b − R))` with integration
/// variable `lambda`.
fn magnetization(s: &ParticleSystem, a: usize, lambda: &str) -> VecExpr {
    let mut out = VecExpr::zero();
    for b in 1..=s.n() {
        if s.charges[b - 1] == 0 {
            continue;
        }
        let field = field_vec(FieldKind::B, 0, &lambda_point(s, b, lambda), &[]);
        let arm = s.relative(b).scale(&s.charge(b));
        out = out.add(&arm.cross(&field).scale(&magnetic_weight(s, a, b, lambda)));
    }
    out
}

/// Expanded PZW Hamiltonian. λ-dependent coefficients and evaluation points
/// are understood under `∫₀¹dλ` (and `∫₀¹dλ'` for the diamagnetic square).
pub fn build_multipolar(
    s: &ParticleSystem,
    include_self_energy: bool,
) -> Result<Hamiltonian, SystemError> {
    s.validate()?;
    if !s.is_neutral() {
        return Err(SystemError::NotNeutral(s.total_charge()));
    }
    let inv_eps0 = ScalarExpr::one()
        .div(&ScalarExpr::symbol("eps0"))
        .expect("nonzero");
    let mut electric = OpExpr::zero();
    for t in interaction_lambda_terms(s)? {
        if let Coupling::Electric { .. } = t.coupling {
            let pi = field_vec(FieldKind::Pi, 0, &t.point, &[]);
            electric = electric.add(&OpExpr::dot(&t.vector, &pi).scale(&inv_eps0.mul(&t.weight)));
        }
    }
    let mut para = OpExpr::zero();
    let mut dia = OpExpr::zero();
    for a in 1..=s.n() {
        let v = magnetization(s, a, LAMBDA);
        let k = half_over_mass(s, a);
        para = para.add(&OpExpr::dot(&s.momentum(a), &v).scale(&k).mark_hc());
        let w = magnetization(s, a, LAMBDA_PRIME);
        dia = dia.add(&OpExpr::dot(&v, &w).scale(&k));
    }
    let mut groups = vec![
        (Group::Kinetic, kinetic(s)),
        (Group::NucleusCoulomb, nucleus_coulomb(s)?),
        (Group::FreeField, OpExpr::named(FREE_FIELD_ATOM)),
        (Group::ElectronCoulomb, electron_coulomb(s)?),
        (Group::Electric, electric),
        (Group::Paramagnetic, para),
        (Group::Spin, spin(s)),
        (Group::Diamagnetic, dia),
    ];
    if include_self_energy {
        groups.push((Group::SelfEnergy, OpExpr::named(SELF_ENERGY_ATOM)));
    }
    Ok(Hamiltonian {
        scheme: Scheme::Multipolar,
        groups,
    })
}

/// `Σ (p_a − e_a A(r_a))²/2m_a` expanded, plus Coulomb, spin and `H_f`.
pub fn build_minimal_coupling(s: &ParticleSystem) -> Result<Hamiltonian, SystemError> {
    s.validate()?;
    let mut cross = OpExpr::zero();
    let mut square = OpExpr::zero();
    for a in 1..=s.n() {
        if s.charges[a - 1] == 0 {
            continue;
        }
        let field = field_vec(FieldKind::A, 0, &s.position(a), &[]);
        let k = half_over_mass(s, a);
        let ea = s.charge(a);
        cross = cross.sub(
            &OpExpr::dot(&s.momentum(a), &field)
                .scale(&k.mul(&ea))
                .mark_hc(),
        );
        square = square.add(&OpExpr::dot(&field, &field).scale(&k.mul(&ea).mul(&ea)));
    }
    Ok(Hamiltonian {
        scheme: Scheme::Minimal,
        groups: vec![
            (Group::Kinetic, kinetic(s)),
            (Group::NucleusCoulomb, nucleus_coulomb(s)?),
            (Group::FreeField, OpExpr::named(FREE_FIELD_ATOM)),
            (Group::ElectronCoulomb, electron_coulomb(s)?),
            (Group::MinimalCross, cross),
            (Group::Spin, spin(s)),
            (Group::MinimalSquare, square),
        ],
    })
}
