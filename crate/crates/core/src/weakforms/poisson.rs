//! Coarse-scale Poisson form with fine-scale closures:
//!
//! ```text
//! (∇w̄,∇ū) − ⟨⟦w̄⟧,⟪∇ū⟫⟩ − ⟨⟪∇w̄⟫,⟦ū⟧⟩ − (Δw̄,u′) − ⟨⟦w̄⟧,⟪∇u′⟫⟩ + ⟨⟦∇w̄⟧,⟪u′⟫⟩ = (w̄,f)
//! ```

use crate::error::{mismatch, Result};
use crate::mesh::DGSpace;

use super::facet::{add_outer, add_vec, facet_operators, facet_points};
use super::volume::{add_load, add_stiffness, strong_endpoints};
use super::{
    BcMode, DirichletData, FineScaleInterfaceModel, LinearSystem, Operator, ProblemSpec, VolumetricFineScaleModel,
};

pub(crate) fn check_volumetric(space: &DGSpace, model: VolumetricFineScaleModel) -> Result<()> {
    if let VolumetricFineScaleModel::ResidualBased { .. } = model {
        if space.order() > 1 {
            return Err(mismatch("the residual-based volumetric model is derived for linear elements only"));
        }
    }
    Ok(())
}

pub(crate) fn check_1d_strong(space: &DGSpace, problem: &ProblemSpec) -> Result<(f64, f64)> {
    let mesh = space.mesh_1d().ok_or_else(|| mismatch("expected a 1-D space"))?;
    let (x0, x1) = problem.domain;
    let nodes = mesh.nodes();
    let tol = 1e-12 * (x1 - x0).abs().max(1.0);
    if (nodes[0] - x0).abs() > tol || (nodes[nodes.len() - 1] - x1).abs() > tol {
        return Err(mismatch("mesh does not cover the problem domain"));
    }
    match (&problem.dirichlet, problem.bc_mode) {
        (DirichletData::Endpoints(u0, u1), BcMode::Strong) => Ok((*u0, *u1)),
        _ => Err(mismatch("1-D problems use strong end-point Dirichlet data")),
    }
}

/// Assemble the Poisson coarse-scale system.
///
/// 1-D accepts every interface model except the upwind variants and uses strong
/// boundary conditions. 2-D accepts only the interior-penalty model with weak
/// boundary conditions, where the boundary fine scales are closed by
/// u′ = u_D − ū and ∇u′·n = (η_∂Ω/h_f) u′.
pub fn assemble_poisson_vms(
    space: &DGSpace,
    problem: &ProblemSpec,
    interface_model: &FineScaleInterfaceModel,
    volumetric_model: VolumetricFineScaleModel,
) -> Result<LinearSystem> {
    problem.validate()?;
    let forcing = match &problem.operator {
        Operator::Poisson { forcing } => forcing,
        _ => return Err(mismatch("assemble_poisson_vms needs a Poisson operator")),
    };
    if interface_model.is_upwind() {
        return Err(mismatch("upwind interface models need an advective operator"));
    }
    interface_model.validate(space.facets())?;
    check_volumetric(space, volumetric_model)?;
    if space.dim() == 2 {
        match interface_model {
            FineScaleInterfaceModel::InteriorPenalty { .. } => {}
            FineScaleInterfaceModel::Explicit(_) => {
                return Err(mismatch("explicit fine-scale data is only supported in 1-D"))
            }
            _ => return Err(mismatch("2-D problems use the interior-penalty interface model")),
        }
    }

    let mut sys = LinearSystem::zeros(space.total_dofs());
    add_stiffness(&mut sys, space, 1.0);
    add_load(&mut sys, space, forcing);

    for (fi, f) in space.facets().iter().enumerate().filter(|(_, f)| f.is_interior()) {
        for pt in facet_points(space, f) {
            let ops = facet_operators(&pt, f.normal);
            let w = pt.weight;
            add_outer(&mut sys.matrix, -w, &ops.jump, &ops.grad_avg);
            add_outer(&mut sys.matrix, -w, &ops.grad_avg, &ops.jump);
            match interface_model {
                FineScaleInterfaceModel::InteriorPenalty { eta } => {
                    // ⟪∇u′⟫ = −(η/h)⟦ū⟧ in −⟨⟦w̄⟧,⟪∇u′⟫⟩; ⟪u′⟫ = 0
                    add_outer(&mut sys.matrix, w * eta / f.h, &ops.jump, &ops.jump);
                }
                FineScaleInterfaceModel::Explicit(data) => {
                    let v = data.get(fi)?;
                    add_vec(&mut sys.rhs, w * v.avg_grad_uprime, &ops.jump);
                    add_vec(&mut sys.rhs, -w * v.avg_uprime, &ops.grad_jump);
                }
                _ => {}
            }
        }
    }

    // (Δw̄, u′) vanishes for linear elements, the only case the residual model admits
    match space.dim() {
        1 => {
            let (u0, u1) = check_1d_strong(space, problem)?;
            strong_endpoints(&mut sys, space, u0, u1);
        }
        _ => {
            let (eta_b, g) = match (&problem.bc_mode, &problem.dirichlet) {
                (BcMode::Weak { eta_boundary }, DirichletData::Function(g)) => (*eta_boundary, g),
                _ => return Err(mismatch("2-D problems need weak boundary conditions with a boundary function")),
            };
            for f in space.facets().iter().filter(|f| !f.is_interior()) {
                let n = f.normal;
                for pt in facet_points(space, f) {
                    let s = &pt.left;
                    let w = pt.weight;
                    let ud = g.eval(&pt.x);
                    let gn: Vec<f64> = s.grads.iter().map(|g| g[0] * n[0] + g[1] * n[1]).collect();
                    for (i, di) in s.dofs.clone().enumerate() {
                        for (j, dj) in s.dofs.clone().enumerate() {
                            // −⟨w̄, ∇ū·n⟩
                            let mut v = -s.values[i] * gn[j];
                            // ⟨∇w̄·n, u′⟩ with u′ = u_D − ū
                            v -= gn[i] * s.values[j];
                            // −⟨w̄, ∇u′·n⟩ with ∇u′·n = (η/h)(u_D − ū)
                            v += eta_b / f.h * s.values[i] * s.values[j];
                            sys.add(di, dj, w * v);
                        }
                        sys.rhs[di] += w * (-gn[i] * ud + eta_b / f.h * s.values[i] * ud);
                    }
                }
            }
        }
    }
    Ok(sys)
}
