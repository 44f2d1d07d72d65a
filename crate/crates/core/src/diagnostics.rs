//! Fine-scale diagnostics: u′ = u − ū is reconstructed from the exact solution
//! and the identities implied by each fine-scale model are evaluated.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::mesh::{CoarseField, Facet, Mesh};
use crate::projection::ExactSolution;
use crate::quadrature::{gauss_rule_1d, triangle_rule};

/// Gauss points per element in 1-D and per edge in 2-D.
const DIAG_GAUSS: usize = 24;
/// Triangle rule degree for element integrals.
const DIAG_DEGREE_2D: usize = 20;

/// Model parameters the identities are checked against.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct DiagnosticsParams {
    /// Penalty on interior facets.
    pub eta_interior: Option<f64>,
    /// Penalty on boundary facets (2-D).
    pub eta_boundary: Option<f64>,
    /// Taylor distance d.
    pub distance: Option<f64>,
    /// (a, ν) when the identities involve an advective flux.
    pub advection: Option<(f64, f64)>,
}

/// Values on one interior facet, evaluated at its midpoint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FacetDiagnostics {
    pub facet: usize,
    pub x: [f64; 2],
    /// ⟪u′⟫
    pub avg_uprime: f64,
    /// ⟪∇u′⟫·n⁺
    pub avg_grad_uprime: f64,
    /// ⟦ū⟧·n⁺
    pub jump_ubar: f64,
    /// ν⟪∇u′⟫·n⁺ + (½|a·n| + νη/h)⟦ū⟧·n⁺, with ν = 1 and a = 0 for pure diffusion
    pub ip_residual: Option<f64>,
    /// |(u′⁺ − d n⁺·∇u′⁺) − (u′⁻ − d n⁻·∇u′⁻)|
    pub taylor_residual: Option<f64>,
}

/// Values on one element.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElementDiagnostics {
    pub element: usize,
    /// ∫_K u′ xⁿ⁻¹ for n = 1..max(p−1, 1) (1-D), or ∫_K u′ (2-D)
    pub moments: Vec<f64>,
    /// ∫_K u′
    pub mean_uprime: f64,
    /// Largest |u − ū| at the element's vertices.
    pub nodal_error: f64,
    /// ∮(⟪∇u′⟫·n_K − η/h ⟦u′⟧·n_K), equivalently ∮(⟪∇u′⟫·n_K + η/h ⟦ū⟧·n_K) (2-D)
    pub loop_identity: Option<f64>,
    /// The same loop with the opposite sign on the penalty term.
    pub loop_identity_alt_sign: Option<f64>,
    /// ∮(|⟪∇u′⟫·n_K| + η/h |⟦u′⟧·n_K|), the size of the terms that cancel in the loop.
    pub flux_scale: Option<f64>,
    /// ∫_{∂K∩Γ}⟪u′⟫, the loop over the element's interior facets
    pub loop_avg_uprime: Option<f64>,
    /// ∮_{∂K}⟪u′⟫ with ⟪u′⟫ ≡ u′ on the domain boundary
    pub loop_avg_uprime_with_boundary: Option<f64>,
}

/// The three Table-4 columns plus the companion values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LoopSummary {
    /// max_K |∮(⟪∇u′⟫·n + η h⁻¹⟦ū⟧)|
    pub max_loop_identity: f64,
    /// (1/#K) Σ_K |∫_{∂K∩Γ}⟪u′⟫|
    pub mean_abs_loop_avg_uprime: f64,
    /// (1/#K) Σ_K |∮_{∂K}⟪u′⟫| with ⟪u′⟫ ≡ u′ on the domain boundary
    pub mean_abs_loop_avg_uprime_with_boundary: f64,
    /// (1/#K) Σ_K |∫_K u′|
    pub mean_abs_element_uprime: f64,
    /// max_K of the loop with the opposite penalty sign
    pub max_loop_identity_alt_sign: f64,
    /// max_K of the per-element flux scale
    pub max_flux_scale: f64,
}

/// Aggregates over the whole mesh.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsSummary {
    pub max_nodal_error: f64,
    pub l2_error: f64,
    pub max_abs_u: f64,
    pub max_abs_avg_uprime: f64,
    pub max_abs_avg_grad_uprime: f64,
    pub max_abs_jump_ubar: f64,
    pub max_ip_residual: Option<f64>,
    pub max_taylor_residual: Option<f64>,
    pub loops: Option<LoopSummary>,
}

/// Everything measured about a coarse field against an exact solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub params: DiagnosticsParams,
    pub facets: Vec<FacetDiagnostics>,
    pub elements: Vec<ElementDiagnostics>,
    pub summary: DiagnosticsSummary,
}

impl DiagnosticsReport {
    /// True when every number in the report is finite.
    pub fn all_finite(&self) -> bool {
        let opt = |v: Option<f64>| v.is_none_or(f64::is_finite);
        self.facets.iter().all(|f| {
            [f.avg_uprime, f.avg_grad_uprime, f.jump_ubar].iter().all(|v| v.is_finite())
                && opt(f.ip_residual)
                && opt(f.taylor_residual)
        }) && self.elements.iter().all(|e| {
            e.moments.iter().all(|v| v.is_finite())
                && e.mean_uprime.is_finite()
                && e.nodal_error.is_finite()
                && opt(e.loop_identity)
                && opt(e.loop_identity_alt_sign)
                && opt(e.flux_scale)
                && opt(e.loop_avg_uprime)
                && opt(e.loop_avg_uprime_with_boundary)
        }) && [self.summary.max_nodal_error, self.summary.l2_error, self.summary.max_abs_u]
            .iter()
            .all(|v| v.is_finite())
    }
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn point(dim: usize, x: &[f64; 2]) -> &[f64] {
    &x[..dim]
}

/// u′ and ∇u′ of element `k` at `x`.
fn uprime(exact: &ExactSolution, coarse: &CoarseField, k: usize, x: &[f64]) -> (f64, [f64; 2]) {
    let g = exact.gradient(x);
    let gb = coarse.gradient(k, x);
    let dim = x.len();
    let g = if dim == 1 { [g[0] - gb[0], 0.0] } else { [g[0] - gb[0], g[1] - gb[1]] };
    (exact.value(x) - coarse.value(k, x), g)
}

fn facet_diagnostics(
    exact: &ExactSolution,
    coarse: &CoarseField,
    params: &DiagnosticsParams,
    fi: usize,
    f: &Facet,
) -> FacetDiagnostics {
    let dim = coarse.space().dim();
    let x = point(dim, &f.midpoint);
    let r = f.right.expect("interior facet");
    let (ul, gl) = uprime(exact, coarse, f.left, x);
    let (ur, gr) = uprime(exact, coarse, r, x);
    let n = f.normal;
    let avg_grad = 0.5 * (dot(gl, n) + dot(gr, n));
    let jump_ubar = coarse.value(f.left, x) - coarse.value(r, x);
    let ip_residual = params.eta_interior.map(|eta| {
        let (a, nu) = params.advection.unwrap_or((0.0, 1.0));
        nu * avg_grad + (0.5 * (a * n[0]).abs() + nu * eta / f.h) * jump_ubar
    });
    // n⁻ = −n⁺, so the right-hand extrapolation is u′⁻ + d n⁺·∇u′⁻
    let taylor_residual = params.distance.map(|d| ((ul - d * dot(n, gl)) - (ur + d * dot(n, gr))).abs());
    FacetDiagnostics {
        facet: fi,
        x: f.midpoint,
        avg_uprime: 0.5 * (ul + ur),
        avg_grad_uprime: avg_grad,
        jump_ubar,
        ip_residual,
        taylor_residual,
    }
}

/// Evaluate all fine-scale diagnostics of `coarse` against `exact`.
pub fn fine_scale_diagnostics(
    exact: &ExactSolution,
    coarse: &CoarseField,
    params: DiagnosticsParams,
) -> Result<DiagnosticsReport> {
    let space = coarse.space();
    let dim = space.dim();
    for v in [params.eta_interior, params.eta_boundary, params.distance].into_iter().flatten() {
        if !(v.is_finite() && v >= 0.0) {
            return Err(invalid(format!("diagnostic parameters must be finite and non-negative, got {v}")));
        }
    }
    if let Some((a, nu)) = params.advection {
        if !(a.is_finite() && nu.is_finite() && nu > 0.0) {
            return Err(invalid("advection parameters need finite a and positive ν"));
        }
    }
    if dim == 2 && (params.eta_interior.is_none() || params.eta_boundary.is_none()) {
        return Err(invalid("2-D diagnostics need a penalty for both interior and boundary facets"));
    }

    let facets: Vec<FacetDiagnostics> = space
        .facets()
        .iter()
        .enumerate()
        .filter(|(_, f)| f.is_interior())
        .map(|(fi, f)| facet_diagnostics(exact, coarse, &params, fi, f))
        .collect();

    let mut elements = Vec::with_capacity(space.n_elements());
    let mut l2 = 0.0;
    let mut max_abs_u = 0.0f64;
    match space.mesh() {
        Mesh::OneD(m) => {
            let rule = gauss_rule_1d(DIAG_GAUSS)?;
            let n_moments = space.order().saturating_sub(1).max(1);
            for k in 0..m.n_elements() {
                let (a, b) = (m.nodes()[k], m.nodes()[k + 1]);
                let mut moments = vec![0.0; n_moments];
                for (&t, &w) in rule.points.iter().zip(&rule.weights) {
                    let x = 0.5 * (a + b) + 0.5 * (b - a) * t;
                    let w = 0.5 * (b - a) * w;
                    let u = exact.value(&[x]);
                    let up = u - coarse.value(k, &[x]);
                    for (n, mo) in moments.iter_mut().enumerate() {
                        *mo += w * up * x.powi(n as i32);
                    }
                    l2 += w * up * up;
                    max_abs_u = max_abs_u.max(u.abs());
                }
                let nodal_error =
                    [a, b].iter().map(|&x| (exact.value(&[x]) - coarse.value(k, &[x])).abs()).fold(0.0, f64::max);
                elements.push(ElementDiagnostics {
                    element: k,
                    mean_uprime: moments[0],
                    moments,
                    nodal_error,
                    loop_identity: None,
                    loop_identity_alt_sign: None,
                    flux_scale: None,
                    loop_avg_uprime: None,
                    loop_avg_uprime_with_boundary: None,
                });
            }
        }
        Mesh::TwoD(m) => {
            let rule = triangle_rule(DIAG_DEGREE_2D)?;
            for k in 0..m.n_elements() {
                let map = m.map(k);
                let mut mean = 0.0;
                for (&r, &w) in rule.points.iter().zip(&rule.weights) {
                    let x = map.to_physical(r);
                    let u = exact.value(&x);
                    let up = u - coarse.value(k, &x);
                    mean += w * map.det * up;
                    l2 += w * map.det * up * up;
                    max_abs_u = max_abs_u.max(u.abs());
                }
                let nodal_error = m.triangles()[k]
                    .iter()
                    .map(|&v| {
                        let x = m.vertices()[v];
                        (exact.value(&x) - coarse.value(k, &x)).abs()
                    })
                    .fold(0.0, f64::max);
                elements.push(ElementDiagnostics {
                    element: k,
                    moments: vec![mean],
                    mean_uprime: mean,
                    nodal_error,
                    loop_identity: Some(0.0),
                    loop_identity_alt_sign: Some(0.0),
                    flux_scale: Some(0.0),
                    loop_avg_uprime: Some(0.0),
                    loop_avg_uprime_with_boundary: Some(0.0),
                });
            }
            let eta_i = params.eta_interior.expect("checked");
            let eta_b = params.eta_boundary.expect("checked");
            let edge = gauss_rule_1d(DIAG_GAUSS)?;
            for f in space.facets() {
                let [p0, p1] = f.endpoints;
                let n = f.normal;
                let mut acc_l = [0.0; 5];
                let mut acc_r = [0.0; 5];
                for (&t, &w) in edge.points.iter().zip(&edge.weights) {
                    let s = 0.5 * (t + 1.0);
                    let x = [p0[0] + s * (p1[0] - p0[0]), p0[1] + s * (p1[1] - p0[1])];
                    let w = 0.5 * w * f.measure;
                    let (ul, gl) = uprime(exact, coarse, f.left, &x);
                    match f.right {
                        Some(r) => {
                            let (ur, gr) = uprime(exact, coarse, r, &x);
                            let gavg_n = 0.5 * (dot(gl, n) + dot(gr, n));
                            let pen = eta_i / f.h * (ul - ur);
                            let avg = 0.5 * (ul + ur);
                            // the right element sees −n and the opposite jump
                            acc_l[0] += w * (gavg_n - pen);
                            acc_l[1] += w * (gavg_n + pen);
                            acc_l[2] += w * (gavg_n.abs() + pen.abs());
                            acc_l[3] += w * avg;
                            acc_l[4] += w * avg;
                            acc_r[0] -= w * (gavg_n - pen);
                            acc_r[1] -= w * (gavg_n + pen);
                            acc_r[2] += w * (gavg_n.abs() + pen.abs());
                            acc_r[3] += w * avg;
                            acc_r[4] += w * avg;
                        }
                        None => {
                            let gn = dot(gl, n);
                            let pen = eta_b / f.h * ul;
                            acc_l[0] += w * (gn - pen);
                            acc_l[1] += w * (gn + pen);
                            acc_l[2] += w * (gn.abs() + pen.abs());
                            acc_l[4] += w * ul;
                        }
                    }
                }
                let mut add = |k: usize, acc: [f64; 5]| {
                    let e = &mut elements[k];
                    let slots = [
                        &mut e.loop_identity,
                        &mut e.loop_identity_alt_sign,
                        &mut e.flux_scale,
                        &mut e.loop_avg_uprime,
                        &mut e.loop_avg_uprime_with_boundary,
                    ];
                    for (slot, v) in slots.into_iter().zip(acc) {
                        *slot = Some(slot.unwrap_or(0.0) + v);
                    }
                };
                add(f.left, acc_l);
                if let Some(r) = f.right {
                    add(r, acc_r);
                }
            }
        }
    }

    let fmax = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0f64, |m, v| m.max(v.abs()));
    let opt_max = |v: Vec<Option<f64>>| -> Option<f64> {
        if v.iter().all(Option::is_some) && !v.is_empty() {
            Some(v.into_iter().flatten().fold(0.0f64, |m, x| m.max(x.abs())))
        } else {
            None
        }
    };
    let loops = (dim == 2).then(|| {
        let ne = elements.len() as f64;
        let abs_max = |g: fn(&ElementDiagnostics) -> f64| elements.iter().map(g).fold(0.0f64, |m, v| m.max(v.abs()));
        let abs_mean = |g: fn(&ElementDiagnostics) -> f64| elements.iter().map(|e| g(e).abs()).sum::<f64>() / ne;
        LoopSummary {
            max_loop_identity: abs_max(|e| e.loop_identity.unwrap_or(0.0)),
            mean_abs_loop_avg_uprime: abs_mean(|e| e.loop_avg_uprime.unwrap_or(0.0)),
            mean_abs_loop_avg_uprime_with_boundary: abs_mean(|e| e.loop_avg_uprime_with_boundary.unwrap_or(0.0)),
            mean_abs_element_uprime: abs_mean(|e| e.mean_uprime),
            max_loop_identity_alt_sign: abs_max(|e| e.loop_identity_alt_sign.unwrap_or(0.0)),
            max_flux_scale: abs_max(|e| e.flux_scale.unwrap_or(0.0)),
        }
    });
    let summary = DiagnosticsSummary {
        max_nodal_error: fmax(&mut elements.iter().map(|e| e.nodal_error)),
        l2_error: l2.sqrt(),
        max_abs_u,
        max_abs_avg_uprime: fmax(&mut facets.iter().map(|f| f.avg_uprime)),
        max_abs_avg_grad_uprime: fmax(&mut facets.iter().map(|f| f.avg_grad_uprime)),
        max_abs_jump_ubar: fmax(&mut facets.iter().map(|f| f.jump_ubar)),
        max_ip_residual: opt_max(facets.iter().map(|f| f.ip_residual).collect()),
        max_taylor_residual: opt_max(facets.iter().map(|f| f.taylor_residual).collect()),
        loops,
    };
    Ok(DiagnosticsReport { params, facets, elements, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{triangulate_unit_square, uniform_mesh_1d, DGSpace, Diagonal};
    use crate::projection::h1_interpolant;

    fn quad() -> ExactSolution {
        ExactSolution::new(|x| x[0] * x[0], |x| [2.0 * x[0], 0.0])
    }

    #[test]
    fn interpolant_has_zero_jumps_and_average() {
        let s = DGSpace::new(Mesh::OneD(uniform_mesh_1d(0.0, 1.0, 4).unwrap()), 1).unwrap();
        let u = h1_interpolant(&quad(), &s).unwrap();
        let r = fine_scale_diagnostics(&quad(), &u, DiagnosticsParams::default()).unwrap();
        assert_eq!(r.facets.len(), 3);
        assert!(r.summary.max_nodal_error < 1e-15);
        assert!(r.summary.max_abs_jump_ubar < 1e-15 && r.summary.max_abs_avg_uprime < 1e-15);
        // ⟪∇u′⟫ = 2x − ½(slopes) = 0 for a parabola
        assert!(r.summary.max_abs_avg_grad_uprime < 1e-13);
        // ∫_K (x² − interpolant) = −h³/6
        for e in &r.elements {
            assert!((e.mean_uprime + 0.25f64.powi(3) / 6.0).abs() < 1e-15);
        }
        assert!(r.all_finite());
    }

    #[test]
    fn zero_coarse_field_diagnostics() {
        let s = DGSpace::new(Mesh::OneD(uniform_mesh_1d(0.0, 2.0, 2).unwrap()), 3).unwrap();
        let u = CoarseField::zeros(s);
        let p = DiagnosticsParams { eta_interior: Some(2.0), distance: Some(0.25), ..Default::default() };
        let r = fine_scale_diagnostics(&quad(), &u, p).unwrap();
        let f = &r.facets[0];
        assert_eq!((f.avg_uprime, f.avg_grad_uprime, f.jump_ubar), (1.0, 2.0, 0.0));
        assert_eq!(f.ip_residual, Some(2.0));
        assert_eq!(f.taylor_residual, Some(1.0));
        // moments ∫ x²·xⁿ over [0,1] and [1,2]
        let m = &r.elements[1].moments;
        assert_eq!(m.len(), 2);
        assert!((m[0] - 7.0 / 3.0).abs() < 1e-13 && (m[1] - 15.0 / 4.0).abs() < 1e-13);
        assert!((r.summary.l2_error - (32.0f64 / 5.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn two_d_requires_both_penalties() {
        let s =
            DGSpace::new(Mesh::TwoD(triangulate_unit_square(2, Diagonal::LowerLeftUpperRight).unwrap()), 1).unwrap();
        let u = CoarseField::zeros(s);
        let e = ExactSolution::new(|x| x[0], |_| [1.0, 0.0]);
        let p = DiagnosticsParams { eta_interior: Some(3.0), ..Default::default() };
        assert!(fine_scale_diagnostics(&e, &u, p).is_err());
    }

    #[test]
    fn two_d_loops_of_linear_function_against_zero() {
        // u′ = x₁: ∮∇u′·n = 0 by the divergence theorem, interior penalties cancel in pairs of
        // equal traces, so only boundary terms −η/h·x₁ remain
        let mesh = triangulate_unit_square(1, Diagonal::LowerLeftUpperRight).unwrap();
        let s = DGSpace::new(Mesh::TwoD(mesh), 1).unwrap();
        let u = CoarseField::zeros(s);
        let e = ExactSolution::new(|x| x[0], |_| [1.0, 0.0]);
        let p = DiagnosticsParams { eta_interior: Some(3.0), eta_boundary: Some(8.0), ..Default::default() };
        let r = fine_scale_diagnostics(&e, &u, p).unwrap();
        // the lower triangle owns the bottom edge (∫x₁ = ½) and the right edge (∫x₁ = 1)
        let lower = &r.elements[0];
        let h = 2f64.sqrt();
        assert!((lower.loop_identity.unwrap() + 8.0 / h * 1.5).abs() < 1e-13);
        assert!((lower.loop_identity_alt_sign.unwrap() - 8.0 / h * 1.5).abs() < 1e-13);
        // ⟪u′⟫ over the diagonal is √2·½, the two boundary edges add ½ + 1
        assert!((lower.loop_avg_uprime.unwrap() - h / 2.0).abs() < 1e-13);
        assert!((lower.loop_avg_uprime_with_boundary.unwrap() - (1.5 + h / 2.0)).abs() < 1e-13);
        // ∫_K x₁ over the lower triangle = 1/3
        assert!((lower.mean_uprime - 1.0 / 3.0).abs() < 1e-14);
        let l = r.summary.loops.unwrap();
        assert!((l.mean_abs_element_uprime - 0.5 * (1.0 / 3.0 + 1.0 / 6.0)).abs() < 1e-14);
    }
}
