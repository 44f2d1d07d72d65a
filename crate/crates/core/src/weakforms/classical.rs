//! Classical DG formulations, written side by side over the two traces of each
//! facet rather than through jump/average operators.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, mismatch, Result};
use crate::mesh::DGSpace;

use super::facet::facet_points;
use super::poisson::check_1d_strong;
use super::volume::{add_advection, add_load, add_stiffness, strong_endpoints};
use super::{BcMode, DirichletData, LinearSystem, Operator, ProblemSpec};

/// Classical bilinear forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassicalFormulation {
    /// Symmetric interior penalty.
    InteriorPenalty { eta: f64 },
    /// Non-symmetric interior penalty.
    Nipg { eta: f64 },
    /// Non-symmetric form without penalty.
    BaumannOden,
    /// Penalty only, no consistency terms.
    BabuskaZlamal { eta: f64 },
    /// Upwind advective flux plus symmetric interior penalty for the diffusion.
    UpwindAdvectionIp { eta: f64 },
}

impl ClassicalFormulation {
    /// (consistency on, symmetry sign, penalty)
    fn coefficients(self) -> (bool, f64, f64) {
        match self {
            ClassicalFormulation::InteriorPenalty { eta } | ClassicalFormulation::UpwindAdvectionIp { eta } => {
                (true, -1.0, eta)
            }
            ClassicalFormulation::Nipg { eta } => (true, 1.0, eta),
            ClassicalFormulation::BaumannOden => (true, 1.0, 0.0),
            ClassicalFormulation::BabuskaZlamal { eta } => (false, 0.0, eta),
        }
    }
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Assemble a classical DG system.
///
/// 1-D problems use strong end-point conditions. In 2-D only the symmetric
/// interior penalty form is available, with Nitsche boundary terms and the
/// boundary penalty taken from the problem's weak boundary mode.
pub fn assemble_classical(
    space: &DGSpace,
    problem: &ProblemSpec,
    formulation: ClassicalFormulation,
) -> Result<LinearSystem> {
    problem.validate()?;
    let (consistency, symmetry, eta) = formulation.coefficients();
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(invalid(format!("penalty must be non-negative, got {eta}")));
    }
    let (kappa, advection, forcing) = match (&problem.operator, formulation) {
        (Operator::AdvectionDiffusion { a, nu, forcing }, ClassicalFormulation::UpwindAdvectionIp { .. }) => {
            (*nu, Some(*a), forcing)
        }
        (Operator::Poisson { forcing }, f) if !matches!(f, ClassicalFormulation::UpwindAdvectionIp { .. }) => {
            (1.0, None, forcing)
        }
        _ => return Err(mismatch("formulation does not match the operator")),
    };
    if space.dim() == 2 && !matches!(formulation, ClassicalFormulation::InteriorPenalty { .. }) {
        return Err(mismatch("only the interior penalty form is available in 2-D"));
    }

    let mut sys = LinearSystem::zeros(space.total_dofs());
    add_stiffness(&mut sys, space, kappa);
    if let Some(a) = advection {
        add_advection(&mut sys, space, a);
    }
    add_load(&mut sys, space, forcing);

    for f in space.facets().iter().filter(|f| f.is_interior()) {
        let n = f.normal;
        let sigma = kappa * eta / f.h;
        for pt in facet_points(space, f) {
            let r = pt.right.as_ref().unwrap();
            let sides = [(&pt.left, n, 1.0), (r, [-n[0], -n[1]], -1.0)];
            let upstream_weight = |sgn: f64| -> f64 {
                let an = advection.unwrap_or(0.0) * n[0];
                match (an > 0.0, an < 0.0) {
                    (true, _) => f64::from(sgn > 0.0),
                    (_, true) => f64::from(sgn < 0.0),
                    _ => 0.5,
                }
            };
            for &(sw, nw, sgn_w) in &sides {
                for &(su, nu, sgn_u) in &sides {
                    for (i, di) in sw.dofs.clone().enumerate() {
                        for (j, dj) in su.dofs.clone().enumerate() {
                            let mut v = 0.0;
                            if consistency {
                                // −⟨w n_w, ½∇u⟩
                                v -= kappa * sw.values[i] * 0.5 * dot(nw, su.grads[j]);
                            }
                            // symmetry · ⟨½∇w, u n_u⟩
                            v += symmetry * kappa * 0.5 * dot(sw.grads[i], nu) * su.values[j];
                            v += sigma * sw.values[i] * su.values[j] * dot(nw, nu);
                            if let Some(a) = advection {
                                v += a * n[0] * sgn_w * sw.values[i] * upstream_weight(sgn_u) * su.values[j];
                            }
                            sys.add(di, dj, pt.weight * v);
                        }
                    }
                }
            }
        }
    }

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
                let sigma = eta_b / f.h;
                for pt in facet_points(space, f) {
                    let s = &pt.left;
                    let ud = g.eval(&pt.x);
                    for (i, di) in s.dofs.clone().enumerate() {
                        let gi = dot(s.grads[i], f.normal);
                        for (j, dj) in s.dofs.clone().enumerate() {
                            let gj = dot(s.grads[j], f.normal);
                            let v = sigma * s.values[i] * s.values[j] - gi * s.values[j] - s.values[i] * gj;
                            sys.add(di, dj, pt.weight * v);
                        }
                        sys.rhs[di] += pt.weight * (sigma * s.values[i] - gi) * ud;
                    }
                }
            }
        }
    }
    Ok(sys)
}
