//! Exact solutions, the projections that define reference coarse scales, and
//! explicit fine-scale models built from them.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, mismatch, Result};
use crate::linsolve::{solve, DenseMatrix};
use crate::mesh::{CoarseField, DGSpace};
use crate::weakforms::{
    jump_average_traces, ExplicitFacetValues, ExplicitInterfaceData, FineScaleInterfaceModel, LinearSystem, ScalarFn,
};

type GradFn = Arc<dyn Fn(&[f64]) -> [f64; 2] + Send + Sync>;

/// A closed-form solution with its gradient.
#[derive(Clone)]
pub struct ExactSolution {
    value: ScalarFn,
    gradient: GradFn,
}

impl fmt::Debug for ExactSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ExactSolution")
    }
}

impl ExactSolution {
    pub fn new(
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64]) -> [f64; 2] + Send + Sync + 'static,
    ) -> Self {
        ExactSolution { value: ScalarFn::new(value), gradient: Arc::new(gradient) }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.value.eval(x)
    }

    pub fn gradient(&self, x: &[f64]) -> [f64; 2] {
        (self.gradient)(x)
    }

    /// The value callable, usable as Dirichlet data.
    pub fn as_scalar_fn(&self) -> ScalarFn {
        self.value.clone()
    }

    /// Largest mismatch between the gradient and centered differences of the value.
    pub fn gradient_check(&self, points: &[Vec<f64>], eps: f64) -> f64 {
        let mut worst = 0.0f64;
        for x in points {
            let g = self.gradient(x);
            for d in 0..x.len().min(2) {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[d] += eps;
                xm[d] -= eps;
                let fd = (self.value(&xp) - self.value(&xm)) / (2.0 * eps);
                worst = worst.max((fd - g[d]).abs() / (1.0 + g[d].abs()));
            }
        }
        worst
    }
}

/// Nodal interpolant of a 1-D exact solution in a linear space.
pub fn h1_interpolant(exact: &ExactSolution, space: &DGSpace) -> Result<CoarseField> {
    let mesh = space.mesh_1d().ok_or_else(|| mismatch("the interpolant is defined for 1-D spaces"))?;
    if space.order() != 1 {
        return Err(mismatch("the nodal interpolant is defined for linear elements"));
    }
    let nodes = mesh.nodes();
    let coeffs =
        (0..mesh.n_elements()).flat_map(|k| [exact.value(&[nodes[k]]), exact.value(&[nodes[k + 1]])]).collect();
    CoarseField::new(space.clone(), coeffs)
}

/// Element-wise L² projection with the end-point values fixed to the exact ones (1-D).
pub fn l2_projection(exact: &ExactSolution, space: &DGSpace) -> Result<CoarseField> {
    let mesh = space.mesh_1d().ok_or_else(|| mismatch("the constrained projection is defined for 1-D spaces"))?;
    let nd = space.dofs_per_element();
    let ne = mesh.n_elements();
    let mut coeffs = Vec::with_capacity(space.total_dofs());
    let mass_rule = crate::quadrature::gauss_rule_1d(space.order() + 1)?;
    let load_rule = crate::quadrature::gauss_rule_1d(24)?;
    for k in 0..ne {
        let (a, b) = (mesh.nodes()[k], mesh.nodes()[k + 1]);
        let mut m = DenseMatrix::zeros(nd, nd);
        let mut rhs = vec![0.0; nd];
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        for (&t, &w) in mass_rule.points.iter().zip(&mass_rule.weights) {
            let (v, _) = space.basis_at(k, &[mid + half * t]);
            for i in 0..nd {
                for j in 0..nd {
                    m[(i, j)] += w * half * v[i] * v[j];
                }
            }
        }
        for (&t, &w) in load_rule.points.iter().zip(&load_rule.weights) {
            let x = mid + half * t;
            let (v, _) = space.basis_at(k, &[x]);
            let u = exact.value(&[x]);
            for i in 0..nd {
                rhs[i] += w * half * v[i] * u;
            }
        }
        let mut sys = LinearSystem::new(m, rhs)?;
        if k == 0 {
            sys.constraints.push((0, exact.value(&[a])));
        }
        if k == ne - 1 {
            sys.constraints.push((nd - 1, exact.value(&[b])));
        }
        coeffs.extend(solve(&sys)?.coefficients);
    }
    CoarseField::new(space.clone(), coeffs)
}

/// Where the coarse scale of an explicit model comes from.
#[derive(Debug, Clone, Copy)]
pub enum ModelReference<'a> {
    /// ⟪∇ū⟫ from the centred difference of nodal exact values (uniform mesh), ⟪u′⟫ = 0, u′ = 0 at nodes.
    DifferenceRule,
    /// ū is a given coarse field (for example a projection of the exact solution).
    Field(&'a CoarseField),
}

/// Explicit fine-scale facet data for a 1-D space.
pub fn explicit_data_from(
    exact: &ExactSolution,
    space: &DGSpace,
    reference: ModelReference<'_>,
) -> Result<ExplicitInterfaceData> {
    let mesh = space.mesh_1d().ok_or_else(|| mismatch("explicit models are built in 1-D"))?;
    let mut data = ExplicitInterfaceData::default();
    for (fi, f) in space.facets().iter().enumerate().filter(|(_, f)| f.is_interior()) {
        let x = f.midpoint[0];
        let u = exact.value(&[x]);
        let du = exact.gradient(&[x])[0];
        let v = match reference {
            ModelReference::DifferenceRule => {
                if !mesh.is_uniform() {
                    return Err(invalid("the difference rule needs a uniform mesh"));
                }
                let h = mesh.element_size(0);
                let slope = (exact.value(&[x + h]) - exact.value(&[x - h])) / (2.0 * h);
                ExplicitFacetValues {
                    avg_uprime: 0.0,
                    avg_grad_uprime: du - slope,
                    uprime_left: 0.0,
                    uprime_right: 0.0,
                }
            }
            ModelReference::Field(field) => {
                if field.space().dim() != 1 || field.space().total_dofs() != space.total_dofs() {
                    return Err(mismatch("reference field lives on a different space"));
                }
                let t = jump_average_traces(field, f)?;
                ExplicitFacetValues {
                    avg_uprime: u - t.avg,
                    avg_grad_uprime: (du - t.grad_avg[0]) * f.normal[0],
                    uprime_left: u - t.left,
                    uprime_right: u - t.right,
                }
            }
        };
        data.values.insert(fi, v);
    }
    Ok(data)
}

/// Explicit interface model Φᴱ, Θᴱ (plus one-sided u′) from an exact solution.
pub fn explicit_model_from(
    exact: &ExactSolution,
    space: &DGSpace,
    reference: ModelReference<'_>,
) -> Result<FineScaleInterfaceModel> {
    Ok(FineScaleInterfaceModel::Explicit(explicit_data_from(exact, space, reference)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{uniform_mesh_1d, Mesh, Mesh1D};

    fn space(nodes: Vec<f64>, p: usize) -> DGSpace {
        DGSpace::new(Mesh::OneD(Mesh1D::from_nodes(nodes).unwrap()), p).unwrap()
    }

    fn poly(c: Vec<f64>) -> ExactSolution {
        let c2 = c.clone();
        ExactSolution::new(
            move |x| c.iter().rev().fold(0.0, |acc, a| acc * x[0] + a),
            move |x| [c2.iter().enumerate().skip(1).map(|(k, a)| k as f64 * a * x[0].powi(k as i32 - 1)).sum(), 0.0],
        )
    }

    #[test]
    fn interpolant_examples() {
        let s = space(vec![0.0, 1.0, 2.0], 1);
        let u = h1_interpolant(&poly(vec![0.0, 0.0, 1.0]), &s).unwrap();
        assert_eq!(u.coefficients(), &[0.0, 1.0, 1.0, 4.0]);
        let u = h1_interpolant(&poly(vec![1.0, -2.0]), &s).unwrap();
        assert!((u.value(0, &[0.5]) - 0.0).abs() < 1e-15);
    }

    #[test]
    fn projection_of_member_is_itself() {
        let s = space(vec![0.0, 0.4, 1.0], 2);
        let exact = poly(vec![1.0, 0.5, -2.0]);
        let u = l2_projection(&exact, &s).unwrap();
        for k in 0..2 {
            for x in [0.0, 0.2, 0.4, 0.7, 1.0] {
                if (k == 0 && x <= 0.4) || (k == 1 && x >= 0.4) {
                    assert!((u.value(k, &[x]) - exact.value(&[x])).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn constrained_projection_single_linear_element() {
        let s = space(vec![0.0, 1.0], 1);
        let u = l2_projection(&poly(vec![0.0, 0.0, 1.0]), &s).unwrap();
        assert!((u.coefficients()[0]).abs() < 1e-15 && (u.coefficients()[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn projection_is_stationary() {
        let exact = ExactSolution::new(|x| (3.0 * x[0]).sin(), |x| [3.0 * (3.0 * x[0]).cos(), 0.0]);
        let s = DGSpace::new(Mesh::OneD(uniform_mesh_1d(0.0, 1.0, 4).unwrap()), 2).unwrap();
        let u = l2_projection(&exact, &s).unwrap();
        let rule = crate::quadrature::gauss_rule_1d(24).unwrap();
        let err = |c: &[f64]| {
            let f = CoarseField::new(s.clone(), c.to_vec()).unwrap();
            let m = s.mesh_1d().unwrap();
            (0..4)
                .map(|k| {
                    rule.integrate(m.nodes()[k], m.nodes()[k + 1], |x| (f.value(k, &[x]) - exact.value(&[x])).powi(2))
                })
                .sum::<f64>()
        };
        let base = err(u.coefficients());
        let last = s.total_dofs() - 1;
        for i in 1..last {
            for d in [1e-4, -1e-4] {
                let mut c = u.coefficients().to_vec();
                c[i] += d;
                assert!(err(&c) > base, "coefficient {i}");
            }
        }
    }

    #[test]
    fn difference_rule_on_parabola_gives_zero_theta() {
        let s = DGSpace::new(Mesh::OneD(uniform_mesh_1d(0.0, 5.0, 3).unwrap()), 1).unwrap();
        let exact = poly(vec![1.0, 27.0 / 5.0, -1.0]);
        let d = explicit_data_from(&exact, &s, ModelReference::DifferenceRule).unwrap();
        assert!(d.values.values().all(|v| v.avg_grad_uprime.abs() < 1e-13 && v.avg_uprime == 0.0));
    }

    #[test]
    fn interpolant_reference_gives_zero_phi() {
        let s = DGSpace::new(Mesh::OneD(uniform_mesh_1d(0.0, 1.0, 3).unwrap()), 1).unwrap();
        let exact = ExactSolution::new(|x| x[0].exp(), |x| [x[0].exp(), 0.0]);
        let ui = h1_interpolant(&exact, &s).unwrap();
        let d = explicit_data_from(&exact, &s, ModelReference::Field(&ui)).unwrap();
        assert!(d.values.values().all(|v| v.avg_uprime.abs() < 1e-15 && v.uprime_left.abs() < 1e-15));
        // the centred difference agrees with the interpolant on a uniform mesh
        let dd = explicit_data_from(&exact, &s, ModelReference::DifferenceRule).unwrap();
        for (a, b) in d.values.values().zip(dd.values.values()) {
            assert!((a.avg_grad_uprime - b.avg_grad_uprime).abs() < 1e-13);
        }
    }

    #[test]
    fn exact_member_gives_zero_model() {
        let s = DGSpace::new(Mesh::OneD(uniform_mesh_1d(0.0, 1.0, 3).unwrap()), 2).unwrap();
        let exact = poly(vec![0.3, -1.0, 2.0]);
        let u = l2_projection(&exact, &s).unwrap();
        let d = explicit_data_from(&exact, &s, ModelReference::Field(&u)).unwrap();
        for v in d.values.values() {
            for x in [v.avg_uprime, v.avg_grad_uprime, v.uprime_left, v.uprime_right] {
                assert!(x.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn difference_rule_rejects_graded_mesh() {
        let s = space(vec![0.0, 0.3, 1.0], 1);
        assert!(explicit_data_from(&poly(vec![0.0, 1.0]), &s, ModelReference::DifferenceRule).is_err());
    }

    #[test]
    fn gradient_self_check() {
        let exact =
            ExactSolution::new(|x| (x[0] * x[1]).sin(), |x| [x[1] * (x[0] * x[1]).cos(), x[0] * (x[0] * x[1]).cos()]);
        assert!(exact.gradient_check(&[vec![0.3, 0.7], vec![0.9, 0.1]], 1e-6) < 1e-6);
    }
}
