//! Facet traces, jump/average operators and the facet blocks that are checked
//! against an alternative code path.

use std::ops::Range;

use crate::error::{invalid, Result};
use crate::linsolve::DenseMatrix;
use crate::mesh::{CoarseField, DGSpace, Facet};
use crate::quadrature::gauss_rule_1d;

/// Gauss points per 2-D facet; exact for the degree-12 polynomial products at p = 6
/// and accurate for smooth boundary data.
pub(crate) const FACET_GAUSS: usize = 12;

/// Basis traces of one element at a facet point.
#[derive(Debug, Clone)]
pub(crate) struct Side {
    pub dofs: Range<usize>,
    pub values: Vec<f64>,
    pub grads: Vec<[f64; 2]>,
}

/// One quadrature point on a facet with both one-sided traces.
#[derive(Debug, Clone)]
pub(crate) struct FacetPoint {
    pub x: [f64; 2],
    pub weight: f64,
    pub left: Side,
    pub right: Option<Side>,
}

fn side(space: &DGSpace, k: usize, x: &[f64]) -> Side {
    let (values, grads) = space.basis_at(k, x);
    Side { dofs: space.dof_range(k), values, grads }
}

/// Quadrature points of a facet (a single unit-weight point in 1-D).
pub(crate) fn facet_points(space: &DGSpace, facet: &Facet) -> Vec<FacetPoint> {
    let make = |x: [f64; 2], weight: f64| {
        let xs: &[f64] = if space.dim() == 1 { &x[..1] } else { &x[..] };
        FacetPoint { x, weight, left: side(space, facet.left, xs), right: facet.right.map(|r| side(space, r, xs)) }
    };
    if space.dim() == 1 {
        return vec![make(facet.midpoint, 1.0)];
    }
    let rule = gauss_rule_1d(FACET_GAUSS).expect("valid rule size");
    let [a, b] = facet.endpoints;
    rule.points
        .iter()
        .zip(&rule.weights)
        .map(|(&t, &w)| {
            let s = 0.5 * (t + 1.0);
            make([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])], 0.5 * w * facet.measure)
        })
        .collect()
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Sparse coefficient vectors of the facet operators applied to the basis.
///
/// Entries are (global dof, coefficient); left-side entries come first.
#[derive(Debug, Clone, Default)]
pub(crate) struct FacetOperators {
    /// ⟦w⟧·n⁺
    pub jump: Vec<(usize, f64)>,
    /// ⟪w⟫
    pub avg: Vec<(usize, f64)>,
    /// ⟪∇w⟫·n⁺
    pub grad_avg: Vec<(usize, f64)>,
    /// ⟦∇w⟧ = ∇w_L·n⁺ − ∇w_R·n⁺
    pub grad_jump: Vec<(usize, f64)>,
}

pub(crate) fn facet_operators(pt: &FacetPoint, n: [f64; 2]) -> FacetOperators {
    let mut ops = FacetOperators::default();
    let r = pt.right.as_ref().expect("facet operators need an interior facet");
    for (sgn, s) in [(1.0, &pt.left), (-1.0, r)] {
        for (i, d) in s.dofs.clone().enumerate() {
            let gn = dot(s.grads[i], n);
            ops.jump.push((d, sgn * s.values[i]));
            ops.avg.push((d, 0.5 * s.values[i]));
            ops.grad_avg.push((d, 0.5 * gn));
            ops.grad_jump.push((d, sgn * gn));
        }
    }
    ops
}

/// M += c · u ⊗ v over sparse vectors.
pub(crate) fn add_outer(m: &mut DenseMatrix, c: f64, u: &[(usize, f64)], v: &[(usize, f64)]) {
    for &(i, a) in u {
        if a == 0.0 {
            continue;
        }
        for &(j, b) in v {
            m[(i, j)] += c * a * b;
        }
    }
}

/// b += c · u
pub(crate) fn add_vec(b: &mut [f64], c: f64, u: &[(usize, f64)]) {
    for &(i, a) in u {
        b[i] += c * a;
    }
}

/// Averages and jumps of a field at a point of an interior facet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FacetTraces {
    pub left: f64,
    pub right: f64,
    /// ⟪v⟫
    pub avg: f64,
    /// ⟦v⟧·n⁺ = v_L − v_R
    pub jump: f64,
    /// ⟪∇v⟫
    pub grad_avg: [f64; 2],
    /// ⟦∇v⟧ = (∇v_L − ∇v_R)·n⁺
    pub grad_jump: f64,
}

/// Traces at a given point of an interior facet.
pub fn jump_average_traces_at(field: &CoarseField, facet: &Facet, x: &[f64]) -> Result<FacetTraces> {
    if !facet.is_interior() {
        return Err(invalid("jump and average are only defined on interior facets"));
    }
    let (vl, gl) = field.trace_left(facet, x);
    let (vr, gr) = field.trace_right(facet, x).expect("interior facet has a right element");
    let n = facet.normal;
    Ok(FacetTraces {
        left: vl,
        right: vr,
        avg: 0.5 * (vl + vr),
        jump: vl - vr,
        grad_avg: [0.5 * (gl[0] + gr[0]), 0.5 * (gl[1] + gr[1])],
        grad_jump: dot(gl, n) - dot(gr, n),
    })
}

/// Traces at the facet midpoint (the facet itself in 1-D).
pub fn jump_average_traces(field: &CoarseField, facet: &Facet) -> Result<FacetTraces> {
    let x = if field.space().dim() == 1 { &facet.midpoint[..1] } else { &facet.midpoint[..] };
    jump_average_traces_at(field, facet, x)
}

/// −⟨⟦w̄⟧, ⟪∇ū⟫⟩ over interior facets, assembled from jump and average operators.
pub fn consistency_block_jump_average(space: &DGSpace) -> DenseMatrix {
    let n = space.total_dofs();
    let mut m = DenseMatrix::zeros(n, n);
    for f in space.facets().iter().filter(|f| f.is_interior()) {
        for pt in facet_points(space, f) {
            let ops = facet_operators(&pt, f.normal);
            add_outer(&mut m, -pt.weight, &ops.jump, &ops.grad_avg);
        }
    }
    m
}

/// ⟨⟪w̄⟫, ⟦∇ū⟧⟩ − Σ_K ⟨w̄, ∇ū·n_K⟩ over interior facets, assembled side by side.
pub fn consistency_block_side_sums(space: &DGSpace) -> DenseMatrix {
    let n = space.total_dofs();
    let mut m = DenseMatrix::zeros(n, n);
    for f in space.facets().iter().filter(|f| f.is_interior()) {
        for pt in facet_points(space, f) {
            let r = pt.right.as_ref().unwrap();
            let nl = f.normal;
            let nr = [-nl[0], -nl[1]];
            let sides = [(&pt.left, nl), (r, nr)];
            for (sw, n_own) in sides {
                for (su, nu) in sides {
                    for (i, di) in sw.dofs.clone().enumerate() {
                        for (j, dj) in su.dofs.clone().enumerate() {
                            // average of w times the jump of the normal gradient
                            let avg_jump = 0.5 * sw.values[i] * dot(su.grads[j], nu);
                            m[(di, dj)] += pt.weight * avg_jump;
                        }
                    }
                }
                for (i, di) in sw.dofs.clone().enumerate() {
                    for (j, dj) in sw.dofs.clone().enumerate() {
                        m[(di, dj)] -= pt.weight * sw.values[i] * dot(sw.grads[j], n_own);
                    }
                }
            }
        }
    }
    m
}

/// Advective facet terms ⟨⟦w̄⟧·a, ⟪ū⟫⟩ + ½⟨|a·n|⟦w̄⟧, ⟦ū⟧⟩ over interior facets (1-D).
pub fn upwind_block_penalty(space: &DGSpace, a: f64) -> DenseMatrix {
    let n = space.total_dofs();
    let mut m = DenseMatrix::zeros(n, n);
    for f in space.facets().iter().filter(|f| f.is_interior()) {
        let an = a * f.normal[0];
        for pt in facet_points(space, f) {
            let ops = facet_operators(&pt, f.normal);
            add_outer(&mut m, pt.weight * an, &ops.jump, &ops.avg);
            add_outer(&mut m, pt.weight * 0.5 * an.abs(), &ops.jump, &ops.jump);
        }
    }
    m
}

/// Advective facet terms ⟨⟦w̄⟧·a, ū_up⟩ with the upstream trace picked directly (1-D).
pub fn upwind_block_trace_selection(space: &DGSpace, a: f64) -> DenseMatrix {
    let n = space.total_dofs();
    let mut m = DenseMatrix::zeros(n, n);
    for f in space.facets().iter().filter(|f| f.is_interior()) {
        let an = a * f.normal[0];
        for pt in facet_points(space, f) {
            let r = pt.right.as_ref().unwrap();
            // upstream side: the left element when the flow crosses along n⁺
            let upstream: Vec<(&Side, f64)> = if an > 0.0 {
                vec![(&pt.left, 1.0)]
            } else if an < 0.0 {
                vec![(r, 1.0)]
            } else {
                vec![(&pt.left, 0.5), (r, 0.5)]
            };
            for (sw, sgn) in [(&pt.left, 1.0), (r, -1.0)] {
                for (i, di) in sw.dofs.clone().enumerate() {
                    for &(su, frac) in &upstream {
                        for (j, dj) in su.dofs.clone().enumerate() {
                            m[(di, dj)] += pt.weight * an * sgn * sw.values[i] * frac * su.values[j];
                        }
                    }
                }
            }
        }
    }
    m
}
