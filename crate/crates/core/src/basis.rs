//! Reference-element bases: Lagrange polynomials on Gauss–Lobatto–Legendre nodes
//! in 1-D, and an orthonormal (Dubiner) modal basis on the reference triangle.

use crate::error::{invalid, Result};
use crate::quadrature::gll_nodes;

/// Highest polynomial order supported by either basis.
pub const MAX_ORDER: usize = 6;

/// Which family a [`BasisSet`] belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    Nodal1D,
    ModalTriangle,
}

/// Lightweight description of a basis: order, family and function count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisSet {
    pub order: usize,
    pub kind: BasisKind,
    pub count: usize,
}

impl BasisSet {
    pub fn nodal_1d(order: usize) -> Self {
        BasisSet { order, kind: BasisKind::Nodal1D, count: order + 1 }
    }

    pub fn modal_triangle(order: usize) -> Self {
        BasisSet { order, kind: BasisKind::ModalTriangle, count: (order + 1) * (order + 2) / 2 }
    }
}

fn check_order(p: usize) -> Result<()> {
    if (1..=MAX_ORDER).contains(&p) {
        Ok(())
    } else {
        Err(invalid(format!("polynomial order must be 1..={MAX_ORDER}, got {p}")))
    }
}

/// Lagrange basis on the GLL nodes of order `p`, with cached nodes and denominators.
#[derive(Debug, Clone)]
pub struct NodalBasis1D {
    nodes: Vec<f64>,
    denom: Vec<f64>,
}

impl NodalBasis1D {
    pub fn new(p: usize) -> Result<Self> {
        check_order(p)?;
        let nodes = gll_nodes(p)?;
        let denom = (0..=p).map(|i| (0..=p).filter(|&l| l != i).map(|l| nodes[i] - nodes[l]).product()).collect();
        Ok(NodalBasis1D { nodes, denom })
    }

    pub fn order(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Values of all basis functions at `xi`.
    pub fn values(&self, xi: f64) -> Vec<f64> {
        let n = self.nodes.len();
        (0..n)
            .map(|i| (0..n).filter(|&l| l != i).map(|l| xi - self.nodes[l]).product::<f64>() / self.denom[i])
            .collect()
    }

    /// First derivatives with respect to `xi`.
    pub fn first_derivatives(&self, xi: f64) -> Vec<f64> {
        let n = self.nodes.len();
        (0..n)
            .map(|i| {
                let mut s = 0.0;
                for m in (0..n).filter(|&m| m != i) {
                    s += (0..n).filter(|&l| l != i && l != m).map(|l| xi - self.nodes[l]).product::<f64>();
                }
                s / self.denom[i]
            })
            .collect()
    }

    /// Second derivatives with respect to `xi`.
    pub fn second_derivatives(&self, xi: f64) -> Vec<f64> {
        let n = self.nodes.len();
        (0..n)
            .map(|i| {
                let mut s = 0.0;
                for m in (0..n).filter(|&m| m != i) {
                    for k in (0..n).filter(|&k| k != i && k != m) {
                        s +=
                            (0..n).filter(|&l| l != i && l != m && l != k).map(|l| xi - self.nodes[l]).product::<f64>();
                    }
                }
                s / self.denom[i]
            })
            .collect()
    }
}

/// Values (`deriv = 0`), first or second derivatives of the order-`p` GLL Lagrange basis at `xi`.
pub fn nodal_basis_1d(p: usize, xi: f64, deriv: usize) -> Result<Vec<f64>> {
    if !(-1.0..=1.0).contains(&xi) {
        return Err(invalid(format!("reference coordinate {xi} outside [-1, 1]")));
    }
    let b = NodalBasis1D::new(p)?;
    match deriv {
        0 => Ok(b.values(xi)),
        1 => Ok(b.first_derivatives(xi)),
        2 => Ok(b.second_derivatives(xi)),
        _ => Err(invalid(format!("derivative order {deriv} not supported"))),
    }
}

/// Number of modes of the triangle basis of order `p`.
pub fn triangle_mode_count(p: usize) -> usize {
    (p + 1) * (p + 2) / 2
}

/// (i, j) degrees of each triangle mode, ordered by total degree.
pub fn triangle_mode_degrees(p: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(triangle_mode_count(p));
    for d in 0..=p {
        for i in 0..=d {
            out.push((i, d - i));
        }
    }
    out
}

/// Jacobi P_n^{(alpha,0)} and derivatives for n = 0..=m at x.
fn jacobi_alpha0(alpha: f64, m: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let mut p = vec![1.0; m + 1];
    let mut d = vec![0.0; m + 1];
    if m >= 1 {
        p[1] = (alpha + 1.0) + 0.5 * (alpha + 2.0) * (x - 1.0);
        d[1] = 0.5 * (alpha + 2.0);
    }
    for n in 2..=m {
        let nf = n as f64;
        let s = 2.0 * nf + alpha;
        let a1 = 2.0 * nf * (nf + alpha) * (s - 2.0);
        let ca = (s - 1.0) * s * (s - 2.0) / a1;
        let cb = (s - 1.0) * alpha * alpha / a1;
        let cc = 2.0 * (nf + alpha - 1.0) * (nf - 1.0) * s / a1;
        p[n] = (ca * x + cb) * p[n - 1] - cc * p[n - 2];
        d[n] = ca * p[n - 1] + (ca * x + cb) * d[n - 1] - cc * d[n - 2];
    }
    (p, d)
}

/// Values and gradients of the orthonormal triangle basis at a reference point.
fn triangle_eval(p: usize, point: [f64; 2]) -> (Vec<f64>, Vec<[f64; 2]>) {
    let [x, y] = point;
    // Q_i = P_i(collapsed a) (1 - y)^i, built by a recurrence that stays regular at y = 1
    let s = 1.0 - y;
    let t = 2.0 * x + y - 1.0;
    let mut q = vec![1.0; p + 1];
    let mut dq = vec![[0.0, 0.0]; p + 1];
    if p >= 1 {
        q[1] = t;
        dq[1] = [2.0, 1.0];
    }
    for i in 1..p {
        let fi = i as f64;
        let c1 = (2.0 * fi + 1.0) / (fi + 1.0);
        let c2 = fi / (fi + 1.0);
        q[i + 1] = c1 * t * q[i] - c2 * s * s * q[i - 1];
        dq[i + 1] = [
            c1 * (2.0 * q[i] + t * dq[i][0]) - c2 * s * s * dq[i - 1][0],
            c1 * (q[i] + t * dq[i][1]) - c2 * (s * s * dq[i - 1][1] - 2.0 * s * q[i - 1]),
        ];
    }
    let b = 2.0 * y - 1.0;
    let modes = triangle_mode_degrees(p);
    let jac: Vec<_> = (0..=p).map(|i| jacobi_alpha0(2.0 * i as f64 + 1.0, p - i, b)).collect();
    let mut vals = Vec::with_capacity(modes.len());
    let mut grads = Vec::with_capacity(modes.len());
    for &(i, j) in &modes {
        let c = (2.0 * (2.0 * i as f64 + 1.0) * (i + j + 1) as f64).sqrt();
        let (pj, dpj) = (jac[i].0[j], 2.0 * jac[i].1[j]);
        vals.push(c * q[i] * pj);
        grads.push([c * dq[i][0] * pj, c * (dq[i][1] * pj + q[i] * dpj)]);
    }
    (vals, grads)
}

fn check_triangle_point(point: [f64; 2]) -> Result<()> {
    let tol = 1e-12;
    if point[0] < -tol || point[1] < -tol || point[0] + point[1] > 1.0 + tol {
        return Err(invalid(format!("point {point:?} outside the reference triangle")));
    }
    Ok(())
}

/// Orthonormal modal basis values on the reference triangle {(0,0), (1,0), (0,1)}.
///
/// Mode 0 is the constant √2 (normalized on area 1/2). Modes are ordered by total degree.
pub fn modal_basis_triangle(p: usize, point: [f64; 2]) -> Result<Vec<f64>> {
    check_order(p)?;
    check_triangle_point(point)?;
    Ok(triangle_eval(p, point).0)
}

/// Reference gradients of [`modal_basis_triangle`].
pub fn modal_basis_triangle_gradients(p: usize, point: [f64; 2]) -> Result<Vec<[f64; 2]>> {
    check_order(p)?;
    check_triangle_point(point)?;
    Ok(triangle_eval(p, point).1)
}

/// Values and gradients together, without range checks (internal hot path).
pub(crate) fn triangle_values_gradients(p: usize, point: [f64; 2]) -> (Vec<f64>, Vec<[f64; 2]>) {
    triangle_eval(p, point)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::triangle_rule;

    #[test]
    fn linear_lagrange_examples() {
        assert_eq!(nodal_basis_1d(1, 0.0, 0).unwrap(), vec![0.5, 0.5]);
        assert_eq!(nodal_basis_1d(1, -1.0, 0).unwrap(), vec![1.0, 0.0]);
        for xi in [-1.0, -0.3, 0.7] {
            assert_eq!(nodal_basis_1d(1, xi, 1).unwrap(), vec![-0.5, 0.5]);
        }
    }

    #[test]
    fn kronecker_and_partition_of_unity() {
        for p in 1..=MAX_ORDER {
            let b = NodalBasis1D::new(p).unwrap();
            for (j, &xj) in b.nodes().iter().enumerate() {
                for (i, v) in b.values(xj).iter().enumerate() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((v - want).abs() < 1e-13);
                }
            }
            for k in 0..=20 {
                let xi = -1.0 + 0.1 * k as f64;
                let s: f64 = b.values(xi).iter().sum();
                assert!((s - 1.0).abs() < 1e-13);
                let ds: f64 = b.first_derivatives(xi).iter().sum();
                assert!(ds.abs() < 1e-11);
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let eps = 1e-6;
        for p in 1..=MAX_ORDER {
            let b = NodalBasis1D::new(p).unwrap();
            for k in 0..20 {
                let xi = -0.95 + 0.1 * k as f64 - 0.003 * k as f64;
                let fd: Vec<f64> =
                    b.values(xi + eps).iter().zip(b.values(xi - eps)).map(|(a, c)| (a - c) / (2.0 * eps)).collect();
                let fd2: Vec<f64> = b
                    .first_derivatives(xi + eps)
                    .iter()
                    .zip(b.first_derivatives(xi - eps))
                    .map(|(a, c)| (a - c) / (2.0 * eps))
                    .collect();
                for ((d, f), (d2, f2)) in
                    b.first_derivatives(xi).iter().zip(&fd).zip(b.second_derivatives(xi).iter().zip(&fd2))
                {
                    assert!((d - f).abs() < 1e-6, "p={p}");
                    assert!((d2 - f2).abs() < 1e-6 * (1.0 + d2.abs()), "p={p}");
                }
            }
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(nodal_basis_1d(0, 0.0, 0).is_err());
        assert!(nodal_basis_1d(7, 0.0, 0).is_err());
        assert!(nodal_basis_1d(2, 1.5, 0).is_err());
        assert!(nodal_basis_1d(2, 0.0, 3).is_err());
        assert!(modal_basis_triangle(2, [0.8, 0.8]).is_err());
    }

    #[test]
    fn triangle_mode_zero_is_normalized_constant() {
        for pt in [[0.1, 0.2], [1.0, 0.0], [0.0, 1.0], [0.3, 0.3]] {
            let v = modal_basis_triangle(1, pt).unwrap();
            assert!((v[0] - 2f64.sqrt()).abs() < 1e-14);
            let g = modal_basis_triangle_gradients(1, pt).unwrap();
            assert_eq!(g[0], [0.0, 0.0]);
        }
    }

    #[test]
    fn triangle_basis_is_orthonormal() {
        let rule = triangle_rule(12).unwrap();
        let p = MAX_ORDER;
        let n = triangle_mode_count(p);
        let mut gram = vec![0.0; n * n];
        for (pt, w) in rule.points.iter().zip(&rule.weights) {
            let v = modal_basis_triangle(p, *pt).unwrap();
            for i in 0..n {
                for j in 0..n {
                    gram[i * n + j] += w * v[i] * v[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((gram[i * n + j] - want).abs() < 1e-12, "({i},{j}) = {}", gram[i * n + j]);
            }
        }
    }

    #[test]
    fn triangle_gradients_match_finite_differences() {
        let eps = 1e-6;
        for p in 1..=MAX_ORDER {
            for pt in [[0.2, 0.3], [0.05, 0.9], [0.6, 0.1]] {
                let g = modal_basis_triangle_gradients(p, pt).unwrap();
                let xp = modal_basis_triangle(p, [pt[0] + eps, pt[1]]).unwrap();
                let xm = modal_basis_triangle(p, [pt[0] - eps, pt[1]]).unwrap();
                let yp = modal_basis_triangle(p, [pt[0], pt[1] + eps]).unwrap();
                let ym = modal_basis_triangle(p, [pt[0], pt[1] - eps]).unwrap();
                for k in 0..g.len() {
                    let fx = (xp[k] - xm[k]) / (2.0 * eps);
                    let fy = (yp[k] - ym[k]) / (2.0 * eps);
                    assert!((g[k][0] - fx).abs() < 1e-6 * (1.0 + fx.abs()), "p={p} k={k}");
                    assert!((g[k][1] - fy).abs() < 1e-6 * (1.0 + fy.abs()), "p={p} k={k}");
                }
            }
        }
    }

    #[test]
    fn triangle_basis_regular_at_top_vertex() {
        let v = modal_basis_triangle(MAX_ORDER, [0.0, 1.0]).unwrap();
        assert!(v.iter().all(|x| x.is_finite()));
    }
}
