//! Meshes, oriented facets, broken polynomial spaces and coarse-scale fields.
//!
//! Orientation: every facet carries a "left" element and a unit normal n⁺
//! pointing out of it. In 1-D the interior facet at node j has left element
//! j − 1, right element j and n⁺ = +1.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::basis::{triangle_mode_count, triangle_values_gradients, NodalBasis1D};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FacetKind {
    Interior,
    Boundary,
}

/// An element boundary piece shared by one (boundary) or two (interior) elements.
#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    pub kind: FacetKind,
    pub left: usize,
    pub right: Option<usize>,
    /// Unit normal pointing out of `left`. 1-D meshes use only the first component.
    pub normal: [f64; 2],
    /// Edge length in 2-D, 1 in 1-D.
    pub measure: f64,
    pub midpoint: [f64; 2],
    /// Penalty length: mean of the incident element sizes (diameters in 2-D).
    pub h: f64,
    /// End points in the counter-clockwise order of `left` (both equal in 1-D).
    pub endpoints: [[f64; 2]; 2],
}

impl Facet {
    pub fn is_interior(&self) -> bool {
        self.kind == FacetKind::Interior
    }
}

/// Interval mesh with ascending nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    nodes: Vec<f64>,
    facets: Vec<Facet>,
}

/// Uniform partition of [x0, x1] into `n` elements.
pub fn uniform_mesh_1d(x0: f64, x1: f64, n: usize) -> Result<Mesh1D> {
    if n == 0 {
        return Err(invalid("a mesh needs at least one element"));
    }
    if !(x0.is_finite() && x1.is_finite()) || x1 <= x0 {
        return Err(invalid(format!("degenerate interval [{x0}, {x1}]")));
    }
    let h = (x1 - x0) / n as f64;
    let mut nodes: Vec<f64> = (0..=n).map(|j| x0 + h * j as f64).collect();
    nodes[n] = x1;
    Mesh1D::from_nodes(nodes)
}

impl Mesh1D {
    /// Mesh from explicit node coordinates (strictly increasing, at least two).
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(invalid("a mesh needs at least two nodes"));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) || nodes.iter().any(|x| !x.is_finite()) {
            return Err(invalid("mesh nodes must be finite and strictly increasing"));
        }
        let n = nodes.len() - 1;
        let size = |j: usize| nodes[j + 1] - nodes[j];
        let mut facets = Vec::with_capacity(n + 1);
        for (j, &x) in nodes.iter().enumerate() {
            let f = if j == 0 {
                Facet {
                    kind: FacetKind::Boundary,
                    left: 0,
                    right: None,
                    normal: [-1.0, 0.0],
                    measure: 1.0,
                    midpoint: [x, 0.0],
                    h: size(0),
                    endpoints: [[x, 0.0]; 2],
                }
            } else if j == n {
                Facet {
                    kind: FacetKind::Boundary,
                    left: n - 1,
                    right: None,
                    normal: [1.0, 0.0],
                    measure: 1.0,
                    midpoint: [x, 0.0],
                    h: size(n - 1),
                    endpoints: [[x, 0.0]; 2],
                }
            } else {
                Facet {
                    kind: FacetKind::Interior,
                    left: j - 1,
                    right: Some(j),
                    normal: [1.0, 0.0],
                    measure: 1.0,
                    midpoint: [x, 0.0],
                    h: 0.5 * (size(j - 1) + size(j)),
                    endpoints: [[x, 0.0]; 2],
                }
            };
            facets.push(f);
        }
        Ok(Mesh1D { nodes, facets })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn n_elements(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn element_size(&self, j: usize) -> f64 {
        self.nodes[j + 1] - self.nodes[j]
    }

    /// Facets ordered by node index, so facet j sits at node j.
    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    /// True when all element sizes agree to relative 1e-12.
    pub fn is_uniform(&self) -> bool {
        let h0 = self.element_size(0);
        (0..self.n_elements()).all(|j| (self.element_size(j) - h0).abs() <= 1e-12 * h0)
    }

    /// Element containing `x`; points on a node go to the element on the right.
    pub fn locate(&self, x: f64) -> Option<usize> {
        if x < self.nodes[0] || x > *self.nodes.last().unwrap() {
            return None;
        }
        let j = self.nodes.partition_point(|&v| v <= x);
        Some(j.saturating_sub(1).min(self.n_elements() - 1))
    }
}

/// Diagonal used to split each square cell into two triangles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Diagonal {
    /// From the lower-left to the upper-right corner.
    LowerLeftUpperRight,
    /// From the upper-left to the lower-right corner.
    UpperLeftLowerRight,
}

/// Affine map x = v0 + J ξ from the reference triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleMap {
    pub origin: [f64; 2],
    pub jac: [[f64; 2]; 2],
    pub inv: [[f64; 2]; 2],
    pub det: f64,
}

impl TriangleMap {
    pub fn new(v: [[f64; 2]; 3]) -> Self {
        let jac = [[v[1][0] - v[0][0], v[2][0] - v[0][0]], [v[1][1] - v[0][1], v[2][1] - v[0][1]]];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let inv = [[jac[1][1] / det, -jac[0][1] / det], [-jac[1][0] / det, jac[0][0] / det]];
        TriangleMap { origin: v[0], jac, inv, det }
    }

    pub fn to_physical(&self, r: [f64; 2]) -> [f64; 2] {
        [
            self.origin[0] + self.jac[0][0] * r[0] + self.jac[0][1] * r[1],
            self.origin[1] + self.jac[1][0] * r[0] + self.jac[1][1] * r[1],
        ]
    }

    pub fn to_reference(&self, x: [f64; 2]) -> [f64; 2] {
        let d = [x[0] - self.origin[0], x[1] - self.origin[1]];
        [self.inv[0][0] * d[0] + self.inv[0][1] * d[1], self.inv[1][0] * d[0] + self.inv[1][1] * d[1]]
    }

    /// Physical gradient from a reference gradient (J⁻ᵀ g).
    pub fn physical_gradient(&self, g: [f64; 2]) -> [f64; 2] {
        [self.inv[0][0] * g[0] + self.inv[1][0] * g[1], self.inv[0][1] * g[0] + self.inv[1][1] * g[1]]
    }
}

/// Triangulated domain with counter-clockwise triangles and enumerated edges.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh2D {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    facets: Vec<Facet>,
    maps: Vec<TriangleMap>,
}

/// Split the unit square into m × m cells and each cell into two triangles.
pub fn triangulate_unit_square(m: usize, diagonal: Diagonal) -> Result<TriMesh2D> {
    if m == 0 {
        return Err(invalid("the square needs at least one cell per side"));
    }
    let mf = m as f64;
    let mut vertices = Vec::with_capacity((m + 1) * (m + 1));
    for j in 0..=m {
        for i in 0..=m {
            vertices.push([i as f64 / mf, j as f64 / mf]);
        }
    }
    let id = |i: usize, j: usize| j * (m + 1) + i;
    let mut triangles = Vec::with_capacity(2 * m * m);
    for j in 0..m {
        for i in 0..m {
            let (v00, v10, v01, v11) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
            match diagonal {
                Diagonal::LowerLeftUpperRight => {
                    triangles.push([v00, v10, v11]);
                    triangles.push([v00, v11, v01]);
                }
                Diagonal::UpperLeftLowerRight => {
                    triangles.push([v00, v10, v01]);
                    triangles.push([v10, v11, v01]);
                }
            }
        }
    }
    TriMesh2D::new(vertices, triangles)
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

impl TriMesh2D {
    /// Build a mesh from vertices and counter-clockwise triangles, enumerating edges.
    pub fn new(vertices: Vec<[f64; 2]>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let mut maps = Vec::with_capacity(triangles.len());
        for (k, t) in triangles.iter().enumerate() {
            if t.iter().any(|&v| v >= vertices.len()) {
                return Err(invalid(format!("triangle {k} references a missing vertex")));
            }
            let map = TriangleMap::new([vertices[t[0]], vertices[t[1]], vertices[t[2]]]);
            if !(map.det > 0.0) {
                return Err(invalid(format!("triangle {k} is not counter-clockwise")));
            }
            maps.push(map);
        }
        let diameter = |k: usize| {
            let t = triangles[k];
            let p = t.map(|v| vertices[v]);
            dist(p[0], p[1]).max(dist(p[1], p[2])).max(dist(p[2], p[0]))
        };
        let mut facets: Vec<Facet> = Vec::new();
        let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
        for (k, t) in triangles.iter().enumerate() {
            for e in 0..3 {
                let (a, b) = (t[e], t[(e + 1) % 3]);
                let key = (a.min(b), a.max(b));
                if let Some(&f) = seen.get(&key) {
                    let facet: &mut Facet = &mut facets[f];
                    if facet.right.is_some() {
                        return Err(invalid(format!("edge {key:?} shared by more than two triangles")));
                    }
                    facet.right = Some(k);
                    facet.kind = FacetKind::Interior;
                    facet.h = 0.5 * (diameter(facet.left) + diameter(k));
                } else {
                    let (pa, pb) = (vertices[a], vertices[b]);
                    let len = dist(pa, pb);
                    facets.push(Facet {
                        kind: FacetKind::Boundary,
                        left: k,
                        right: None,
                        normal: [(pb[1] - pa[1]) / len, -(pb[0] - pa[0]) / len],
                        measure: len,
                        midpoint: [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])],
                        h: diameter(k),
                        endpoints: [pa, pb],
                    });
                    seen.insert(key, facets.len() - 1);
                }
            }
        }
        Ok(TriMesh2D { vertices, triangles, facets, maps })
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn n_elements(&self) -> usize {
        self.triangles.len()
    }

    pub fn map(&self, k: usize) -> &TriangleMap {
        &self.maps[k]
    }

    pub fn area(&self, k: usize) -> f64 {
        0.5 * self.maps[k].det
    }

    /// Longest edge of triangle `k`.
    pub fn diameter(&self, k: usize) -> f64 {
        let p = self.triangles[k].map(|v| self.vertices[v]);
        dist(p[0], p[1]).max(dist(p[1], p[2])).max(dist(p[2], p[0]))
    }

    pub fn perimeter(&self, k: usize) -> f64 {
        let p = self.triangles[k].map(|v| self.vertices[v]);
        dist(p[0], p[1]) + dist(p[1], p[2]) + dist(p[2], p[0])
    }
}

/// Either kind of mesh, as held by a [`DGSpace`].
#[derive(Debug, Clone, PartialEq)]
pub enum Mesh {
    OneD(Mesh1D),
    TwoD(TriMesh2D),
}

impl Mesh {
    pub fn dim(&self) -> usize {
        match self {
            Mesh::OneD(_) => 1,
            Mesh::TwoD(_) => 2,
        }
    }

    pub fn n_elements(&self) -> usize {
        match self {
            Mesh::OneD(m) => m.n_elements(),
            Mesh::TwoD(m) => m.n_elements(),
        }
    }

    pub fn facets(&self) -> &[Facet] {
        match self {
            Mesh::OneD(m) => m.facets(),
            Mesh::TwoD(m) => m.facets(),
        }
    }

    /// Element size: length in 1-D, diameter in 2-D.
    pub fn element_size(&self, k: usize) -> f64 {
        match self {
            Mesh::OneD(m) => m.element_size(k),
            Mesh::TwoD(m) => m.diameter(k),
        }
    }
}

/// Facet list of either mesh kind.
pub fn build_facets(mesh: &Mesh) -> Vec<Facet> {
    mesh.facets().to_vec()
}

/// Broken polynomial space of order `p` over a mesh, with contiguous per-element dofs.
#[derive(Debug, Clone)]
pub struct DGSpace {
    mesh: Arc<Mesh>,
    order: usize,
    dofs_per_element: usize,
    nodal: Option<Arc<NodalBasis1D>>,
}

impl DGSpace {
    pub fn new(mesh: Mesh, order: usize) -> Result<Self> {
        let (dofs_per_element, nodal) = match &mesh {
            Mesh::OneD(_) => (order + 1, Some(Arc::new(NodalBasis1D::new(order)?))),
            Mesh::TwoD(_) => {
                if !(1..=crate::basis::MAX_ORDER).contains(&order) {
                    return Err(invalid(format!("polynomial order must be 1..=6, got {order}")));
                }
                (triangle_mode_count(order), None)
            }
        };
        Ok(DGSpace { mesh: Arc::new(mesh), order, dofs_per_element, nodal })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn mesh_1d(&self) -> Option<&Mesh1D> {
        match self.mesh.as_ref() {
            Mesh::OneD(m) => Some(m),
            Mesh::TwoD(_) => None,
        }
    }

    pub fn mesh_2d(&self) -> Option<&TriMesh2D> {
        match self.mesh.as_ref() {
            Mesh::TwoD(m) => Some(m),
            Mesh::OneD(_) => None,
        }
    }

    pub fn dim(&self) -> usize {
        self.mesh.dim()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dofs_per_element(&self) -> usize {
        self.dofs_per_element
    }

    pub fn n_elements(&self) -> usize {
        self.mesh.n_elements()
    }

    pub fn total_dofs(&self) -> usize {
        self.n_elements() * self.dofs_per_element
    }

    pub fn dof_range(&self, k: usize) -> std::ops::Range<usize> {
        k * self.dofs_per_element..(k + 1) * self.dofs_per_element
    }

    pub fn facets(&self) -> &[Facet] {
        self.mesh.facets()
    }

    /// The 1-D nodal basis (None for triangle spaces).
    pub fn nodal_basis(&self) -> Option<&NodalBasis1D> {
        self.nodal.as_deref()
    }

    /// Basis values and physical gradients of element `k` at physical point `x`.
    pub fn basis_at(&self, k: usize, x: &[f64]) -> (Vec<f64>, Vec<[f64; 2]>) {
        match self.mesh.as_ref() {
            Mesh::OneD(m) => {
                let b = self.nodal.as_ref().expect("1-D space has a nodal basis");
                let (a, h) = (m.nodes()[k], m.element_size(k));
                let xi = (2.0 * (x[0] - a) / h - 1.0).clamp(-1.0, 1.0);
                let g = b.first_derivatives(xi).into_iter().map(|d| [2.0 * d / h, 0.0]).collect();
                (b.values(xi), g)
            }
            Mesh::TwoD(m) => {
                let map = m.map(k);
                let r = map.to_reference([x[0], x[1]]);
                let (v, g) = triangle_values_gradients(self.order, r);
                (v, g.into_iter().map(|g| map.physical_gradient(g)).collect())
            }
        }
    }

    /// Second x-derivatives of the 1-D basis of element `k` at physical `x`.
    pub fn basis_second_derivatives_1d(&self, k: usize, x: f64) -> Vec<f64> {
        let m = self.mesh_1d().expect("1-D space");
        let b = self.nodal.as_ref().expect("1-D space has a nodal basis");
        let (a, h) = (m.nodes()[k], m.element_size(k));
        let xi = (2.0 * (x - a) / h - 1.0).clamp(-1.0, 1.0);
        b.second_derivatives(xi).into_iter().map(|d| 4.0 * d / (h * h)).collect()
    }
}

/// A coefficient vector over a [`DGSpace`].
#[derive(Debug, Clone)]
pub struct CoarseField {
    space: DGSpace,
    coeffs: Vec<f64>,
}

impl CoarseField {
    pub fn new(space: DGSpace, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.total_dofs() {
            return Err(invalid(format!(
                "coefficient vector has length {}, space has {} dofs",
                coeffs.len(),
                space.total_dofs()
            )));
        }
        Ok(CoarseField { space, coeffs })
    }

    pub fn zeros(space: DGSpace) -> Self {
        let n = space.total_dofs();
        CoarseField { space, coeffs: vec![0.0; n] }
    }

    pub fn space(&self) -> &DGSpace {
        &self.space
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn element_coefficients(&self, k: usize) -> &[f64] {
        &self.coeffs[self.space.dof_range(k)]
    }

    /// Value of the restriction to element `k` at physical point `x`.
    pub fn value(&self, k: usize, x: &[f64]) -> f64 {
        let (v, _) = self.space.basis_at(k, x);
        v.iter().zip(self.element_coefficients(k)).map(|(a, b)| a * b).sum()
    }

    /// Physical gradient of the restriction to element `k` at `x`.
    pub fn gradient(&self, k: usize, x: &[f64]) -> [f64; 2] {
        let (_, g) = self.space.basis_at(k, x);
        let mut out = [0.0; 2];
        for (gi, c) in g.iter().zip(self.element_coefficients(k)) {
            out[0] += gi[0] * c;
            out[1] += gi[1] * c;
        }
        out
    }

    /// Trace from the left element of `facet` at `x`.
    pub fn trace_left(&self, facet: &Facet, x: &[f64]) -> (f64, [f64; 2]) {
        (self.value(facet.left, x), self.gradient(facet.left, x))
    }

    /// Trace from the right element of an interior facet at `x`.
    pub fn trace_right(&self, facet: &Facet, x: &[f64]) -> Option<(f64, [f64; 2])> {
        facet.right.map(|r| (self.value(r, x), self.gradient(r, x)))
    }
}
