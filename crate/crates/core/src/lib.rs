//! Discontinuous Galerkin methods read as variational multiscale methods.
//!
//! The coarse scale ū is the broken polynomial field the method computes and
//! u′ = u − ū is the fine scale. Each DG flux corresponds to a closure of the
//! fine-scale interface terms, and the element Green's function of the
//! advection-diffusion operator closes the volumetric term.

// `!(x > y)` is used deliberately so that NaN is rejected along with the ordinary failures.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod diagnostics;
pub mod error;
pub mod greens;
pub mod linsolve;
pub mod mesh;
pub mod projection;
pub mod quadrature;
pub mod runner;
pub mod weakforms;

pub use diagnostics::{fine_scale_diagnostics, DiagnosticsParams, DiagnosticsReport};
pub use error::{Error, Result};
pub use greens::{green_quantities, ADParams, GreenQuantities};
pub use linsolve::{solve, DenseMatrix, Solution};
pub use mesh::{triangulate_unit_square, uniform_mesh_1d, CoarseField, DGSpace, Diagonal, Mesh, Mesh1D, TriMesh2D};
pub use projection::{explicit_model_from, h1_interpolant, l2_projection, ExactSolution, ModelReference};
pub use weakforms::{
    assemble_addiff_vms, assemble_classical, assemble_poisson_vms, BcMode, ClassicalFormulation, DirichletData,
    FineScaleInterfaceModel, LinearSystem, Operator, ProblemSpec, ScalarFn, VolumetricFineScaleModel,
};
