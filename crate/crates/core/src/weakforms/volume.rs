//! Element integrals shared by all assemblers.

use crate::mesh::{DGSpace, Mesh};
use crate::quadrature::{gauss_rule_1d, triangle_rule};

use super::{LinearSystem, ScalarFn};

/// Gauss points for integrals of non-polynomial data in 1-D.
pub(crate) const LOAD_GAUSS_1D: usize = 24;
/// Triangle rule degree for integrals of non-polynomial data.
pub(crate) const LOAD_DEGREE_2D: usize = 20;

/// Physical quadrature points and weights of element `k`, exact to `degree`.
pub(crate) fn element_points(space: &DGSpace, k: usize, degree: usize) -> Vec<([f64; 2], f64)> {
    match space.mesh() {
        Mesh::OneD(m) => {
            let rule = gauss_rule_1d(degree.div_ceil(2).max(1)).expect("rule size in range");
            let (a, b) = (m.nodes()[k], m.nodes()[k + 1]);
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            rule.points.iter().zip(&rule.weights).map(|(&t, &w)| ([mid + half * t, 0.0], w * half)).collect()
        }
        Mesh::TwoD(m) => {
            let rule = triangle_rule(degree.clamp(1, 20)).expect("degree in range");
            let map = m.map(k);
            rule.points.iter().zip(&rule.weights).map(|(&r, &w)| (map.to_physical(r), w * map.det)).collect()
        }
    }
}

/// Exactness degree used for integrands with non-polynomial data.
pub(crate) fn load_degree(space: &DGSpace) -> usize {
    if space.dim() == 1 {
        2 * LOAD_GAUSS_1D - 1
    } else {
        LOAD_DEGREE_2D
    }
}

pub(crate) fn point_slice(space: &DGSpace, x: &[f64; 2]) -> usize {
    space.dim().min(x.len())
}

/// coef · (∇w̄, ∇ū)
pub(crate) fn add_stiffness(sys: &mut LinearSystem, space: &DGSpace, coef: f64) {
    let p = space.order();
    for k in 0..space.n_elements() {
        let dofs = space.dof_range(k);
        for (x, w) in element_points(space, k, 2 * p) {
            let (_, g) = space.basis_at(k, &x[..point_slice(space, &x)]);
            for (i, di) in dofs.clone().enumerate() {
                for (j, dj) in dofs.clone().enumerate() {
                    sys.add(di, dj, coef * w * (g[i][0] * g[j][0] + g[i][1] * g[j][1]));
                }
            }
        }
    }
}

/// −(a ∂ₓw̄, ū) in 1-D.
pub(crate) fn add_advection(sys: &mut LinearSystem, space: &DGSpace, a: f64) {
    let p = space.order();
    for k in 0..space.n_elements() {
        let dofs = space.dof_range(k);
        for (x, w) in element_points(space, k, 2 * p) {
            let (v, g) = space.basis_at(k, &x[..1]);
            for (i, di) in dofs.clone().enumerate() {
                for (j, dj) in dofs.clone().enumerate() {
                    sys.add(di, dj, -a * w * g[i][0] * v[j]);
                }
            }
        }
    }
}

/// (w̄, f)
pub(crate) fn add_load(sys: &mut LinearSystem, space: &DGSpace, f: &ScalarFn) {
    let deg = load_degree(space);
    for k in 0..space.n_elements() {
        let dofs = space.dof_range(k);
        for (x, w) in element_points(space, k, deg) {
            let xs = &x[..point_slice(space, &x)];
            let fx = f.eval(xs);
            let (v, _) = space.basis_at(k, xs);
            for (i, di) in dofs.clone().enumerate() {
                sys.rhs[di] += w * v[i] * fx;
            }
        }
    }
}

/// Strong end-point constraints on the first and last nodal dofs (1-D).
pub(crate) fn strong_endpoints(sys: &mut LinearSystem, space: &DGSpace, u0: f64, u1: f64) {
    let last = space.total_dofs() - 1;
    sys.constraints = vec![(0, u0), (last, u1)];
}
