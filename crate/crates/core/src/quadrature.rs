//! Gauss–Legendre rules on [-1, 1], Gauss–Lobatto–Legendre nodes, and
//! collapsed-coordinate rules on the reference triangle {(0,0), (1,0), (0,1)}.

use crate::error::{invalid, Result};

/// Points and weights on the reference interval [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    /// Highest polynomial degree integrated exactly.
    pub degree: usize,
}

/// Points and weights on the reference triangle of area 1/2.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

/// Legendre polynomial P_n and its derivative at `x`.
pub(crate) fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, x);
    let (mut d_prev, mut d) = (0.0, 1.0);
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        let d_next = d_prev + (2.0 * kf + 1.0) * p;
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
    }
    (p, d)
}

/// Gauss–Legendre rule with `n` points, exact up to degree 2n − 1.
///
/// # Arguments
///
/// * `n` - Number of points, 1 to 64.
pub fn gauss_rule_1d(n: usize) -> Result<QuadratureRule> {
    if !(1..=64).contains(&n) {
        return Err(invalid(format!("gauss rule needs 1..=64 points, got {n}")));
    }
    let mut points = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // roots come out descending; store mirrored pairs so the rule is symmetric
        points[i] = -x;
        points[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        points[n / 2] = 0.0;
    }
    Ok(QuadratureRule { points, weights, degree: 2 * n - 1 })
}

/// Gauss–Lobatto–Legendre nodes for polynomial order `p` (p + 1 nodes, ascending).
pub fn gll_nodes(p: usize) -> Result<Vec<f64>> {
    if p == 0 {
        return Err(invalid("GLL nodes need order >= 1"));
    }
    let mut nodes = vec![0.0; p + 1];
    nodes[0] = -1.0;
    nodes[p] = 1.0;
    let pf = p as f64;
    for (i, node) in nodes.iter_mut().enumerate().take(p).skip(1) {
        // interior nodes are the roots of P_p'
        let mut x = -(std::f64::consts::PI * i as f64 / pf).cos();
        for _ in 0..100 {
            let (lp, dlp) = legendre_with_derivative(p, x);
            let d2 = (2.0 * x * dlp - pf * (pf + 1.0) * lp) / (1.0 - x * x);
            let dx = dlp / d2;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        *node = x;
    }
    for i in 1..p {
        if 2 * i == p {
            nodes[i] = 0.0;
        } else if 2 * i > p {
            nodes[i] = -nodes[p - i];
        }
    }
    Ok(nodes)
}

/// Collapsed-coordinate (Duffy) rule on the reference triangle.
///
/// # Arguments
///
/// * `degree` - Required polynomial exactness, 1 to 20.
pub fn triangle_rule(degree: usize) -> Result<TriangleRule> {
    if !(1..=20).contains(&degree) {
        return Err(invalid(format!("triangle rule degree must be 1..=20, got {degree}")));
    }
    // the collapse adds one power of (1 - b), hence degree + 1 in b
    let n = (degree + 2).div_ceil(2);
    let g = gauss_rule_1d(n)?;
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (&b, &wb) in g.points.iter().zip(&g.weights) {
        for (&a, &wa) in g.points.iter().zip(&g.weights) {
            let xi = 0.25 * (1.0 + a) * (1.0 - b);
            let eta = 0.5 * (1.0 + b);
            points.push([xi, eta]);
            weights.push(wa * wb * (1.0 - b) / 8.0);
        }
    }
    Ok(TriangleRule { points, weights, degree })
}

impl QuadratureRule {
    /// Integrate `f` over the physical interval [x0, x1].
    pub fn integrate(&self, x0: f64, x1: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (x1 - x0);
        let mid = 0.5 * (x1 + x0);
        self.points.iter().zip(&self.weights).map(|(&p, &w)| w * f(mid + half * p)).sum::<f64>() * half
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_and_two_point_rules() {
        let r = gauss_rule_1d(1).unwrap();
        assert_eq!(r.points, vec![0.0]);
        assert_eq!(r.weights, vec![2.0]);
        let r = gauss_rule_1d(2).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert!((r.points[0] + s).abs() < 1e-15 && (r.points[1] - s).abs() < 1e-15);
        assert!((r.weights[0] - 1.0).abs() < 1e-15 && (r.weights[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn three_points_integrate_x4() {
        let r = gauss_rule_1d(3).unwrap();
        let v: f64 = r.points.iter().zip(&r.weights).map(|(x, w)| w * x.powi(4)).sum();
        assert!((v - 0.4).abs() < 1e-14);
    }

    #[test]
    fn weights_sum_to_two_for_all_sizes() {
        for n in 1..=64 {
            let r = gauss_rule_1d(n).unwrap();
            let s: f64 = r.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-14, "n={n} sum={s}");
            assert!(r.weights.iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn rejects_out_of_range_sizes() {
        assert!(gauss_rule_1d(0).is_err());
        assert!(gauss_rule_1d(65).is_err());
        assert!(triangle_rule(0).is_err());
        assert!(triangle_rule(21).is_err());
    }

    #[test]
    fn gll_nodes_match_known_values() {
        let n = gll_nodes(2).unwrap();
        assert_eq!(n, vec![-1.0, 0.0, 1.0]);
        let n = gll_nodes(3).unwrap();
        let s = 1.0 / 5f64.sqrt();
        assert!((n[1] + s).abs() < 1e-15 && (n[2] - s).abs() < 1e-15);
    }

    #[test]
    fn triangle_area_and_xy_moment() {
        let r = triangle_rule(2).unwrap();
        let area: f64 = r.weights.iter().sum();
        assert!((area - 0.5).abs() < 1e-14);
        let xy: f64 = r.points.iter().zip(&r.weights).map(|(p, w)| w * p[0] * p[1]).sum();
        assert!((xy - 1.0 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn triangle_monomials_up_to_degree() {
        // ∫ x^i y^j over the reference triangle = i! j! / (i + j + 2)!
        let fact = |n: usize| (1..=n).map(|k| k as f64).product::<f64>();
        for d in 1..=20 {
            let r = triangle_rule(d).unwrap();
            for i in 0..=d {
                for j in 0..=(d - i) {
                    let q: f64 = r
                        .points
                        .iter()
                        .zip(&r.weights)
                        .map(|(p, w)| w * p[0].powi(i as i32) * p[1].powi(j as i32))
                        .sum();
                    let exact = fact(i) * fact(j) / fact(i + j + 2);
                    assert!(((q - exact) / exact).abs() < 1e-12, "d={d} i={i} j={j}");
                }
            }
        }
    }
}
