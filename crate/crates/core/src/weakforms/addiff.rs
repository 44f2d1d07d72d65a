//! Coarse-scale advection-diffusion form in 1-D:
//!
//! ```text
//! −(a∂ₓw̄, ū) + ⟨⟦w̄⟧a, ⟪ū⟫⟩ + ⟨⟦w̄⟧a, ⟪u′⟫⟩ + ν(∂ₓw̄, ∂ₓū) − ν⟨⟦w̄⟧,⟪∂ₓū⟫⟩ − ν⟨⟪∂ₓw̄⟫,⟦ū⟧⟩
//!   + (ℒ*w̄, u′) − ν⟨⟦w̄⟧,⟪∂ₓu′⟫⟩ + ν⟨⟦∂ₓw̄⟧,⟪u′⟫⟩ = (w̄, f)
//! ```
//!
//! For linear elements ℒ*w̄ = −a∂ₓw̄ is constant per element, so the volumetric
//! term only needs the element mean of u′, which the Green's function gives as
//! τ R + νγ₀ u′(x_j) − νγ₁ u′(x_{j+1}).

use crate::error::{mismatch, Result};
use crate::greens::{green_quantities, ADParams};
use crate::mesh::DGSpace;

use super::facet::{add_outer, add_vec, facet_operators, facet_points};
use super::poisson::{check_1d_strong, check_volumetric};
use super::volume::{add_advection, add_load, add_stiffness, strong_endpoints};
use super::{FineScaleInterfaceModel, LinearSystem, Operator, ProblemSpec, VolumetricFineScaleModel};

/// u′ trace of one element at one of its nodes, affine in the coarse dofs.
struct Affine {
    terms: Vec<(usize, f64)>,
    constant: f64,
}

/// The fine-scale trace of element `k` at node `node` implied by the interface model.
fn uprime_trace(space: &DGSpace, model: &FineScaleInterfaceModel, a: f64, k: usize, node: usize) -> Result<Affine> {
    let facet = &space.facets()[node];
    let zero = Affine { terms: vec![], constant: 0.0 };
    let Some(right) = facet.right else {
        // fine scales vanish where the Dirichlet data is imposed strongly
        return Ok(zero);
    };
    let left = facet.left;
    let own_is_left = left == k;
    if let Some(data) = model.explicit_data() {
        let v = data.get(node)?;
        let c = if own_is_left { v.uprime_left } else { v.uprime_right };
        return Ok(Affine { terms: vec![], constant: c });
    }
    // linear nodal basis: the element's end values are its two dofs
    let dl = space.dof_range(left).end - 1;
    let dr = space.dof_range(right).start;
    let (own, other) = if own_is_left { (dl, dr) } else { (dr, dl) };
    let terms = match model {
        FineScaleInterfaceModel::Upwind { diffusive: None } => {
            // u at the node is the upstream trace
            let an = a * facet.normal[0];
            let up = if an > 0.0 {
                vec![(dl, 1.0)]
            } else if an < 0.0 {
                vec![(dr, 1.0)]
            } else {
                vec![(dl, 0.5), (dr, 0.5)]
            };
            let mut t = up;
            t.push((own, -1.0));
            t
        }
        // ⟪u′⟫ = 0, so u = ⟪ū⟫ at the node
        _ => vec![(other, 0.5), (own, -0.5)],
    };
    Ok(Affine { terms, constant: 0.0 })
}

/// Assemble the 1-D advection-diffusion coarse-scale system with strong boundary conditions.
pub fn assemble_addiff_vms(
    space: &DGSpace,
    problem: &ProblemSpec,
    interface_model: &FineScaleInterfaceModel,
    volumetric_model: VolumetricFineScaleModel,
) -> Result<LinearSystem> {
    problem.validate()?;
    let (a, nu, forcing) = match &problem.operator {
        Operator::AdvectionDiffusion { a, nu, forcing } => (*a, *nu, forcing),
        _ => return Err(mismatch("assemble_addiff_vms needs an advection-diffusion operator")),
    };
    if space.dim() != 1 {
        return Err(mismatch("advection-diffusion is implemented in 1-D only"));
    }
    interface_model.validate(space.facets())?;
    check_volumetric(space, volumetric_model)?;
    let (u0, u1) = check_1d_strong(space, problem)?;

    let mut sys = LinearSystem::zeros(space.total_dofs());
    add_advection(&mut sys, space, a);
    add_stiffness(&mut sys, space, nu);
    add_load(&mut sys, space, forcing);

    for (fi, f) in space.facets().iter().enumerate().filter(|(_, f)| f.is_interior()) {
        let an = a * f.normal[0];
        for pt in facet_points(space, f) {
            let ops = facet_operators(&pt, f.normal);
            let w = pt.weight;
            add_outer(&mut sys.matrix, w * an, &ops.jump, &ops.avg);
            let data = interface_model.explicit_data().map(|d| d.get(fi)).transpose()?;
            if interface_model.is_upwind() {
                add_outer(&mut sys.matrix, w * 0.5 * an.abs(), &ops.jump, &ops.jump);
            } else if let Some(v) = data {
                add_vec(&mut sys.rhs, -w * an * v.avg_uprime, &ops.jump);
            }
            add_outer(&mut sys.matrix, -w * nu, &ops.jump, &ops.grad_avg);
            add_outer(&mut sys.matrix, -w * nu, &ops.grad_avg, &ops.jump);
            if let Some(eta) = interface_model.penalty() {
                add_outer(&mut sys.matrix, w * nu * eta / f.h, &ops.jump, &ops.jump);
            } else if let Some(v) = data {
                add_vec(&mut sys.rhs, w * nu * v.avg_grad_uprime, &ops.jump);
                add_vec(&mut sys.rhs, -w * nu * v.avg_uprime, &ops.grad_jump);
            }
        }
    }

    if let VolumetricFineScaleModel::ResidualBased { use_tau, use_gammas } = volumetric_model {
        let mesh = space.mesh_1d().expect("checked 1-D");
        for k in 0..space.n_elements() {
            let h = mesh.element_size(k);
            let q = green_quantities(ADParams::new(a, nu, h)?)?;
            let xm = 0.5 * (mesh.nodes()[k] + mesh.nodes()[k + 1]);
            let dofs = space.dof_range(k);
            let (_, g) = space.basis_at(k, &[xm]);
            // ℒ*w̄ = −a ∂ₓw̄ per test function, times |K| from integrating the mean of u′
            let lw: Vec<f64> = g.iter().map(|gi| -a * gi[0] * h).collect();
            if use_tau {
                let f_mid = forcing.eval(&[xm]);
                for (i, di) in dofs.clone().enumerate() {
                    for (j, dj) in dofs.clone().enumerate() {
                        sys.add(di, dj, lw[i] * q.tau * (-a * g[j][0]));
                    }
                    sys.rhs[di] -= lw[i] * q.tau * f_mid;
                }
            }
            if use_gammas {
                let left = uprime_trace(space, interface_model, a, k, k)?;
                let right = uprime_trace(space, interface_model, a, k, k + 1)?;
                for (tr, c) in [(left, nu * q.gamma0), (right, -nu * q.gamma1)] {
                    for (i, di) in dofs.clone().enumerate() {
                        for &(dj, t) in &tr.terms {
                            sys.add(di, dj, lw[i] * c * t);
                        }
                        sys.rhs[di] -= lw[i] * c * tr.constant;
                    }
                }
            }
        }
    }

    strong_endpoints(&mut sys, space, u0, u1);
    Ok(sys)
}
