//! Build → scale → Jacobi → expand, shared by the CLI and the tests.

use crate::jacobi::{
    build_scheme, transform_hamiltonian, Direction, JacobiError, JacobiScheme, PartitionTree,
};
use crate::multipole::{assemble_hierarchy, Family, GradedFamily, Hierarchy, MultipoleError};
use crate::pzw::{
    build_minimal_coupling, build_multipolar, Hamiltonian, ParticleSystem, Scheme, SystemError,
};
use crate::scaling::{
    scale_hamiltonian, solve_scaling, ScalingConstraint, ScalingError, ScalingSolution,
};
use crate::symkernel::{Frame, OpExpr, VecExpr};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Scaling(#[from] ScalingError),
    #[error(transparent)]
    Jacobi(#[from] JacobiError),
    #[error(transparent)]
    Multipole(#[from] MultipoleError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunSpec {
    pub system: ParticleSystem,
    pub partition: Option<PartitionTree>,
    pub scheme: Scheme,
    pub order: u32,
    pub include_self_energy: bool,
}

#[derive(Clone, Debug)]
pub struct Expansion {
    pub solution: ScalingSolution,
    pub jacobi: Option<JacobiScheme>,
    /// Scaled Hamiltonian in the output frame, couplings still in λ form.
    pub scaled: Hamiltonian,
    pub h0: OpExpr,
    pub families: Vec<GradedFamily>,
    pub hierarchy: Hierarchy,
}

pub fn build(spec: &RunSpec) -> Result<Hamiltonian, PipelineError> {
    Ok(match spec.scheme {
        Scheme::Multipolar => build_multipolar(&spec.system, spec.include_self_energy)?,
        Scheme::Minimal => build_minimal_coupling(&spec.system)?,
    })
}

/// Scaled Hamiltonian, moved to Jacobi coordinates when a partition is given.
pub fn scaled(
    spec: &RunSpec,
) -> Result<(ScalingSolution, Option<JacobiScheme>, Hamiltonian), PipelineError> {
    let h = build(spec)?;
    let solution = solve_scaling(&ScalingConstraint::standard())?;
    let h = scale_hamiltonian(&h, &solution, spec.system.z)?;
    match &spec.partition {
        Some(tree) => {
            let scheme = build_scheme(tree, &spec.system)?;
            let h = transform_hamiltonian(&h, &scheme, Direction::ToJacobi)?;
            Ok((solution, Some(scheme), h))
        }
        None => Ok((solution, None, h)),
    }
}

pub fn expand(spec: &RunSpec) -> Result<Expansion, PipelineError> {
    let (solution, jacobi, h) = scaled(spec)?;
    let base = match jacobi {
        Some(_) => VecExpr::position(Frame::Jacobi, 1),
        None => spec.system.center_of_mass(),
    };
    let order = spec.order as i32;
    let mut h0 = OpExpr::zero();
    let mut families = Vec::new();
    for (g, e) in &h.groups {
        if g.is_zero_order() {
            h0 = h0.add(e);
            continue;
        }
        let Some(tag) = Family::of_group(*g) else {
            continue;
        };
        let nmax = order - tag.offset();
        if nmax >= 0 {
            families.push(GradedFamily::from_group(tag, e, &base, nmax as u32)?);
        }
    }
    let hierarchy = assemble_hierarchy(&families, order);
    Ok(Expansion {
        solution,
        jacobi,
        scaled: h,
        h0,
        families,
        hierarchy,
    })
}
