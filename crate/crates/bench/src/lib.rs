//! Problem builders shared by the benchmarks.

use vmsdg_core::{
    triangulate_unit_square, uniform_mesh_1d, BcMode, DGSpace, Diagonal, DirichletData, Mesh, Operator, ProblemSpec,
    Result, ScalarFn,
};

/// Sinusoidal Poisson problem on [0, 1] over `n` elements of order `p`.
pub fn poisson_1d(n: usize, p: usize) -> Result<(DGSpace, ProblemSpec)> {
    let space = DGSpace::new(Mesh::OneD(uniform_mesh_1d(0.0, 1.0, n)?), p)?;
    let problem = ProblemSpec {
        operator: Operator::Poisson { forcing: ScalarFn::new(|x| (std::f64::consts::PI * x[0]).sin()) },
        domain: (0.0, 1.0),
        dirichlet: DirichletData::Endpoints(0.0, 0.0),
        bc_mode: BcMode::Strong,
    };
    Ok((space, problem))
}

/// Laplace problem on the unit square split into 2m² triangles of order `p`.
pub fn laplace_2d(m: usize, p: usize) -> Result<(DGSpace, ProblemSpec)> {
    let space = DGSpace::new(Mesh::TwoD(triangulate_unit_square(m, Diagonal::LowerLeftUpperRight)?), p)?;
    let pi = std::f64::consts::PI;
    let problem = ProblemSpec {
        operator: Operator::Poisson { forcing: ScalarFn::constant(0.0) },
        domain: (0.0, 1.0),
        dirichlet: DirichletData::Function(ScalarFn::new(move |x| {
            ((pi * (1.0 - x[1])).sinh() / pi.sinh()) * (pi * x[0]).sin()
        })),
        bc_mode: BcMode::Weak { eta_boundary: 8.0 },
    };
    Ok((space, problem))
}
