//! Coarse-scale weak forms with pluggable fine-scale closures, and the
//! classical DG formulations they are compared against.
//!
//! Notation on a facet with left element L, right element R and normal n⁺ out
//! of L: ⟦v⟧ = (v_L − v_R) n⁺, ⟪v⟫ = ½(v_L + v_R). Scalar jumps reported by this
//! module are the coefficient of n⁺.

mod addiff;
mod classical;
mod facet;
mod poisson;
mod volume;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

pub use addiff::assemble_addiff_vms;
pub use classical::{assemble_classical, ClassicalFormulation};
pub use facet::{
    consistency_block_jump_average, consistency_block_side_sums, jump_average_traces, jump_average_traces_at,
    upwind_block_penalty, upwind_block_trace_selection, FacetTraces,
};
pub use poisson::assemble_poisson_vms;

use crate::error::{invalid, Result};
use crate::linsolve::DenseMatrix;

/// A scalar function of a 1-D or 2-D point.
#[derive(Clone)]
pub struct ScalarFn(Arc<PointFn>);

type PointFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

impl ScalarFn {
    pub fn new(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        ScalarFn(Arc::new(f))
    }

    pub fn constant(c: f64) -> Self {
        ScalarFn::new(move |_| c)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.0)(x)
    }
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ScalarFn")
    }
}

/// Differential operator with its forcing.
#[derive(Debug, Clone)]
pub enum Operator {
    /// −Δu = f
    Poisson { forcing: ScalarFn },
    /// a u′ − ν u″ = f
    AdvectionDiffusion { a: f64, nu: f64, forcing: ScalarFn },
}

impl Operator {
    pub fn forcing(&self) -> &ScalarFn {
        match self {
            Operator::Poisson { forcing } | Operator::AdvectionDiffusion { forcing, .. } => forcing,
        }
    }
}

/// Dirichlet data: endpoint values in 1-D, a boundary function in 2-D.
#[derive(Debug, Clone)]
pub enum DirichletData {
    Endpoints(f64, f64),
    Function(ScalarFn),
}

/// How Dirichlet data is imposed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BcMode {
    /// Row replacement on the end-point nodal dofs (1-D).
    Strong,
    /// Nitsche-type boundary terms with their own penalty (2-D).
    Weak { eta_boundary: f64 },
}

/// Boundary value problem handed to the assemblers.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub operator: Operator,
    /// Interval in 1-D; ignored for the unit square.
    pub domain: (f64, f64),
    pub dirichlet: DirichletData,
    pub bc_mode: BcMode,
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        if let Operator::AdvectionDiffusion { a, nu, .. } = self.operator {
            if !(nu > 0.0 && nu.is_finite()) || !a.is_finite() {
                return Err(invalid(format!("need finite a and positive ν, got a={a}, ν={nu}")));
            }
        }
        if let DirichletData::Endpoints(u0, u1) = self.dirichlet {
            if !(u0.is_finite() && u1.is_finite()) {
                return Err(invalid("Dirichlet values must be finite"));
            }
        }
        if let BcMode::Weak { eta_boundary } = self.bc_mode {
            if !(eta_boundary > 0.0 && eta_boundary.is_finite()) {
                return Err(invalid("boundary penalty must be positive"));
            }
        }
        Ok(())
    }
}

/// Fine-scale values supplied for one interior facet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExplicitFacetValues {
    /// Φᴱ ≈ ⟪u′⟫
    pub avg_uprime: f64,
    /// Θᴱ ≈ ⟪∇u′⟫ (coefficient of n⁺ in 1-D)
    pub avg_grad_uprime: f64,
    /// u′ trace from the left element
    pub uprime_left: f64,
    /// u′ trace from the right element
    pub uprime_right: f64,
}

/// Explicit fine-scale data keyed by interior facet index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExplicitInterfaceData {
    pub values: BTreeMap<usize, ExplicitFacetValues>,
}

impl ExplicitInterfaceData {
    pub(crate) fn get(&self, facet: usize) -> Result<&ExplicitFacetValues> {
        self.values.get(&facet).ok_or(crate::Error::MissingFacetData(facet))
    }

    /// Every interior facet must be present, every value finite, and no extra keys.
    pub fn validate(&self, facets: &[crate::mesh::Facet]) -> Result<()> {
        for (i, f) in facets.iter().enumerate() {
            if f.is_interior() {
                let v = self.get(i)?;
                let all = [v.avg_uprime, v.avg_grad_uprime, v.uprime_left, v.uprime_right];
                if all.iter().any(|x| !x.is_finite()) {
                    return Err(invalid(format!("explicit data for facet {i} is not finite")));
                }
            }
        }
        if let Some((&k, _)) = self.values.iter().find(|(&k, _)| facets.get(k).is_none_or(|f| !f.is_interior())) {
            return Err(invalid(format!("explicit data given for facet {k}, which is not an interior facet")));
        }
        Ok(())
    }
}

/// Closure for the facet terms ⟪u′⟫ and ⟪∇u′⟫.
#[derive(Debug, Clone, PartialEq)]
pub enum FineScaleInterfaceModel {
    /// All fine-scale facet terms dropped.
    NoModel,
    /// Prescribed values Φᴱ, Θᴱ and one-sided traces.
    Explicit(ExplicitInterfaceData),
    /// ⟪u′⟫ = 0 and ⟪∇u′⟫ = −(η/h_f)⟦ū⟧.
    InteriorPenalty { eta: f64 },
    /// Advective facet terms by upwinding, written as ½|a·n|⟦w̄⟧·⟦ū⟧.
    /// Diffusive fine-scale terms come from `diffusive` when given, otherwise they are dropped.
    Upwind { diffusive: Option<ExplicitInterfaceData> },
    /// Upwinding for advection plus the interior-penalty model for diffusion.
    InteriorPenaltyUpwind { eta: f64 },
}

impl FineScaleInterfaceModel {
    pub fn validate(&self, facets: &[crate::mesh::Facet]) -> Result<()> {
        match self {
            FineScaleInterfaceModel::InteriorPenalty { eta }
            | FineScaleInterfaceModel::InteriorPenaltyUpwind { eta } => {
                if !(*eta > 0.0 && eta.is_finite()) {
                    return Err(invalid(format!("penalty must be positive, got {eta}")));
                }
            }
            FineScaleInterfaceModel::Explicit(d) | FineScaleInterfaceModel::Upwind { diffusive: Some(d) } => {
                d.validate(facets)?
            }
            _ => {}
        }
        Ok(())
    }

    pub fn is_upwind(&self) -> bool {
        matches!(self, FineScaleInterfaceModel::Upwind { .. } | FineScaleInterfaceModel::InteriorPenaltyUpwind { .. })
    }

    /// Explicit data driving the diffusive facet terms, if any.
    pub(crate) fn explicit_data(&self) -> Option<&ExplicitInterfaceData> {
        match self {
            FineScaleInterfaceModel::Explicit(d) | FineScaleInterfaceModel::Upwind { diffusive: Some(d) } => Some(d),
            _ => None,
        }
    }

    pub(crate) fn penalty(&self) -> Option<f64> {
        match self {
            FineScaleInterfaceModel::InteriorPenalty { eta }
            | FineScaleInterfaceModel::InteriorPenaltyUpwind { eta } => Some(*eta),
            _ => None,
        }
    }
}

/// Closure for the element term (ℒ*w̄, u′).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VolumetricFineScaleModel {
    /// (ℒ*w̄, u′) = 0.
    Zero,
    /// Element Green's function averages: τ times the coarse residual plus γ₀/γ₁ times the fine-scale traces.
    ResidualBased { use_tau: bool, use_gammas: bool },
}

/// Dense system with strongly constrained dofs.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub matrix: DenseMatrix,
    pub rhs: Vec<f64>,
    /// (dof, prescribed value)
    pub constraints: Vec<(usize, f64)>,
}

impl LinearSystem {
    pub fn new(matrix: DenseMatrix, rhs: Vec<f64>) -> Result<Self> {
        if matrix.rows() != matrix.cols() || matrix.rows() != rhs.len() {
            return Err(invalid("system matrix must be square and match the right-hand side"));
        }
        Ok(LinearSystem { matrix, rhs, constraints: Vec::new() })
    }

    pub fn zeros(n: usize) -> Self {
        LinearSystem { matrix: DenseMatrix::zeros(n, n), rhs: vec![0.0; n], constraints: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    /// Move constrained columns to the right-hand side and replace constrained rows by identity rows.
    ///
    /// Applying twice is the same as applying once.
    pub fn apply_constraints(&mut self) {
        let n = self.dim();
        let constrained: Vec<bool> = {
            let mut c = vec![false; n];
            for &(d, _) in &self.constraints {
                c[d] = true;
            }
            c
        };
        for &(c, g) in &self.constraints {
            for i in (0..n).filter(|&i| !constrained[i]) {
                let a = self.matrix[(i, c)];
                if a != 0.0 {
                    self.rhs[i] -= a * g;
                    self.matrix[(i, c)] = 0.0;
                }
            }
        }
        for &(c, g) in &self.constraints {
            self.matrix.row_mut(c).iter_mut().for_each(|v| *v = 0.0);
            self.matrix[(c, c)] = 1.0;
            self.rhs[c] = g;
        }
    }

    /// Copy with constraints applied.
    pub fn constrained(&self) -> Self {
        let mut s = self.clone();
        s.apply_constraints();
        s
    }

    pub(crate) fn add(&mut self, i: usize, j: usize, v: f64) {
        self.matrix[(i, j)] += v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constraint_application_is_idempotent() {
        let m = DenseMatrix::from_rows(&[vec![2.0, 1.0, 0.0], vec![1.0, 2.0, 1.0], vec![0.0, 1.0, 2.0]]).unwrap();
        let mut s = LinearSystem::new(m, vec![1.0, 1.0, 1.0]).unwrap();
        s.constraints = vec![(0, 3.0)];
        let once = s.constrained();
        let twice = once.constrained();
        assert_eq!(once, twice);
        assert_eq!(once.matrix.row(0), &[1.0, 0.0, 0.0]);
        assert_eq!(once.rhs, vec![3.0, 1.0 - 3.0, 1.0]);
    }

    #[test]
    fn explicit_data_must_cover_interior_facets() {
        let mesh = crate::mesh::uniform_mesh_1d(0.0, 1.0, 3).unwrap();
        let mut d = ExplicitInterfaceData::default();
        let v = ExplicitFacetValues { avg_uprime: 0.0, avg_grad_uprime: 0.0, uprime_left: 0.0, uprime_right: 0.0 };
        d.values.insert(1, v);
        assert_eq!(d.validate(mesh.facets()), Err(crate::Error::MissingFacetData(2)));
        d.values.insert(2, v);
        assert!(d.validate(mesh.facets()).is_ok());
        d.values.insert(3, v);
        assert!(d.validate(mesh.facets()).is_err());
    }
}
