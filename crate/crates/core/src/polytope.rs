//! Integral polytopes in three dimensions: exact hulls, polar duals, faces,
//! lattice points, reflexivity and GL(3,Z) equivalence.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_integer::Integer;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolytopeError {
    #[error("no input points")]
    EmptyInput,
    #[error("points span an affine subspace of dimension {dim}, expected 3")]
    DegenerateInput { dim: usize },
    #[error("origin is not an interior point")]
    OriginNotInterior,
    #[error("polytope is not reflexive")]
    NotReflexive,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticePoint3(pub [i64; 3]);

impl LatticePoint3 {
    pub const ORIGIN: LatticePoint3 = LatticePoint3([0, 0, 0]);

    pub fn new(x: i64, y: i64, z: i64) -> Self {
        LatticePoint3([x, y, z])
    }

    pub fn dot(self, o: Self) -> i64 {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    pub fn cross(self, o: Self) -> Self {
        let [a, b, c] = self.0;
        let [x, y, z] = o.0;
        LatticePoint3([b * z - c * y, c * x - a * z, a * y - b * x])
    }

    pub fn is_zero(self) -> bool {
        self.0 == [0, 0, 0]
    }

    /// gcd of the coordinates (0 for the origin).
    pub fn content(self) -> i64 {
        self.0[0].gcd(&self.0[1]).gcd(&self.0[2])
    }

    pub fn primitive(self) -> Self {
        let g = self.content();
        if g == 0 {
            self
        } else {
            LatticePoint3(self.0.map(|x| x / g))
        }
    }

    pub fn scale(self, k: i64) -> Self {
        LatticePoint3(self.0.map(|x| x * k))
    }
}

impl Add for LatticePoint3 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        LatticePoint3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for LatticePoint3 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        LatticePoint3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for LatticePoint3 {
    type Output = Self;
    fn neg(self) -> Self {
        LatticePoint3(self.0.map(|x| -x))
    }
}

impl fmt::Display for LatticePoint3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.0[0], self.0[1], self.0[2])
    }
}

impl From<[i64; 3]> for LatticePoint3 {
    fn from(a: [i64; 3]) -> Self {
        LatticePoint3(a)
    }
}

/// det[a b c] with rows a, b, c, widened to avoid overflow.
pub fn det3(a: LatticePoint3, b: LatticePoint3, c: LatticePoint3) -> i128 {
    let w = |p: LatticePoint3| p.0.map(i128::from);
    let ([a0, a1, a2], [b0, b1, b2], [c0, c1, c2]) = (w(a), w(b), w(c));
    a0 * (b1 * c2 - b2 * c1) - a1 * (b0 * c2 - b2 * c0) + a2 * (b0 * c1 - b1 * c0)
}

/// Supporting half-space ⟨normal, x⟩ ≥ −offset with a primitive inward normal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Facet {
    pub normal: LatticePoint3,
    pub offset: i64,
    /// Sorted indices into the polytope's vertex list.
    pub vertices: Vec<usize>,
}

impl Facet {
    /// ⟨normal, x⟩ + offset; zero on the facet, positive inside.
    pub fn slack(&self, x: LatticePoint3) -> i64 {
        self.normal.dot(x) + self.offset
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    /// The two facets meeting along the edge, ascending.
    pub facets: [usize; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointKind {
    Vertex,
    EdgeInterior,
    FacetInterior,
    BodyInterior,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassifiedPoint {
    pub point: LatticePoint3,
    pub kind: PointKind,
    /// Facets whose hyperplane contains the point, ascending.
    pub facets: Vec<usize>,
}

/// A face of a polytope, identified by its vertices and the facets containing it.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Face {
    pub dim: usize,
    pub vertices: Vec<usize>,
    pub facets: Vec<usize>,
}

/// Full-dimensional lattice polytope with vertex and facet descriptions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Polytope3 {
    vertices: Vec<LatticePoint3>,
    facets: Vec<Facet>,
    edges: Vec<Edge>,
}

fn affine_dim(pts: &[LatticePoint3]) -> usize {
    let Some(&p0) = pts.first() else { return 0 };
    let Some(&p1) = pts.iter().find(|&&p| p != p0) else { return 0 };
    let d1 = p1 - p0;
    let Some(&p2) = pts.iter().find(|&&p| !d1.cross(p - p0).is_zero()) else { return 1 };
    let n = d1.cross(p2 - p0);
    if pts.iter().any(|&p| n.dot(p - p0) != 0) {
        3
    } else {
        2
    }
}

/// Primitive inward normal of the plane through a, b, c, oriented by a point off the plane.
fn oriented_plane(a: LatticePoint3, b: LatticePoint3, c: LatticePoint3, inside: LatticePoint3) -> (LatticePoint3, i64) {
    let mut n = (b - a).cross(c - a).primitive();
    if n.dot(inside - a) < 0 {
        n = -n;
    }
    (n, -n.dot(a))
}

/// Corners of the convex polygon formed by coplanar points, in cyclic order.
pub(crate) fn polygon_corners(pts: &[LatticePoint3], normal: LatticePoint3) -> Vec<LatticePoint3> {
    let start = *pts.iter().min().expect("nonempty facet");
    let orient = |a: LatticePoint3, b: LatticePoint3, c: LatticePoint3| (b - a).cross(c - a).dot(normal);
    let dist = |a: LatticePoint3, b: LatticePoint3| (b - a).dot(b - a);
    let mut corners = vec![start];
    let mut cur = start;
    loop {
        let mut cand = *pts.iter().find(|&&p| p != cur).expect("facet has several points");
        for &q in pts {
            if q == cur || q == cand {
                continue;
            }
            let o = orient(cur, cand, q);
            if o < 0 || (o == 0 && dist(cur, q) > dist(cur, cand)) {
                cand = q;
            }
        }
        if cand == start {
            break;
        }
        corners.push(cand);
        cur = cand;
    }
    corners
}

impl Polytope3 {
    /// Convex hull by gift wrapping over facets with exact integer predicates.
    pub fn hull(points: &[LatticePoint3]) -> Result<Self, PolytopeError> {
        let pts: Vec<LatticePoint3> = points.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        if pts.is_empty() {
            return Err(PolytopeError::EmptyInput);
        }
        let dim = affine_dim(&pts);
        if dim < 3 {
            return Err(PolytopeError::DegenerateInput { dim });
        }
        let first = Self::initial_plane(&pts);
        let mut planes: BTreeMap<LatticePoint3, i64> = BTreeMap::new();
        let mut queue = VecDeque::from([first]);
        planes.insert(first.0, first.1);
        while let Some((n, off)) = queue.pop_front() {
            let on: Vec<LatticePoint3> = pts.iter().copied().filter(|&p| n.dot(p) + off == 0).collect();
            let corners = polygon_corners(&on, n);
            for k in 0..corners.len() {
                let a = corners[k];
                let b = corners[(k + 1) % corners.len()];
                let f = corners[(k + 2) % corners.len()];
                let next = Self::wrap(&pts, a, b, f, n, off);
                if let std::collections::btree_map::Entry::Vacant(e) = planes.entry(next.0) {
                    e.insert(next.1);
                    queue.push_back(next);
                }
            }
        }
        Ok(Self::from_planes(&pts, &planes))
    }

    fn initial_plane(pts: &[LatticePoint3]) -> (LatticePoint3, i64) {
        let p0 = pts[0];
        for (i, &a) in pts.iter().enumerate().skip(1) {
            for &b in &pts[i + 1..] {
                let n = (a - p0).cross(b - p0).primitive();
                if n.is_zero() {
                    continue;
                }
                for n in [n, -n] {
                    let off = -n.dot(p0);
                    if pts.iter().all(|&p| n.dot(p) + off >= 0) {
                        return (n, off);
                    }
                }
            }
        }
        unreachable!("the lexicographic minimum of a full-dimensional set lies on a facet")
    }

    /// Rotates the plane of the current facet about edge ab to the neighbouring facet.
    /// `f` is a point of the current facet off the line ab.
    fn wrap(
        pts: &[LatticePoint3],
        a: LatticePoint3,
        b: LatticePoint3,
        f: LatticePoint3,
        n: LatticePoint3,
        off: i64,
    ) -> (LatticePoint3, i64) {
        let e = b - a;
        let rot = |x: LatticePoint3, y: LatticePoint3| det3(e, x - a, y - a).signum();
        let mut c = *pts.iter().find(|&&p| n.dot(p) + off > 0).expect("full-dimensional");
        let sigma = rot(f, c);
        for &q in pts {
            if sigma * rot(c, q) > 0 {
                c = q;
            }
        }
        let plane = oriented_plane(a, b, c, f);
        debug_assert!(pts.iter().all(|&p| plane.0.dot(p) + plane.1 >= 0));
        plane
    }

    fn from_planes(pts: &[LatticePoint3], planes: &BTreeMap<LatticePoint3, i64>) -> Self {
        let normals: Vec<(LatticePoint3, i64)> = planes.iter().map(|(&n, &o)| (n, o)).collect();
        let vertices: Vec<LatticePoint3> = pts
            .iter()
            .copied()
            .filter(|&p| {
                let tight: Vec<LatticePoint3> = normals.iter().filter(|(n, o)| n.dot(p) + o == 0).map(|x| x.0).collect();
                normal_rank(&tight) == 3
            })
            .collect();
        let facets: Vec<Facet> = normals
            .iter()
            .map(|&(normal, offset)| Facet {
                normal,
                offset,
                vertices: (0..vertices.len()).filter(|&i| normal.dot(vertices[i]) + offset == 0).collect(),
            })
            .collect();
        let mut edges = Vec::new();
        for a in 0..vertices.len() {
            for b in a + 1..vertices.len() {
                let shared: Vec<usize> =
                    (0..facets.len()).filter(|&k| facets[k].vertices.contains(&a) && facets[k].vertices.contains(&b)).collect();
                if shared.len() >= 2 {
                    debug_assert_eq!(shared.len(), 2);
                    edges.push(Edge { a, b, facets: [shared[0], shared[1]] });
                }
            }
        }
        Polytope3 { vertices, facets, edges }
    }

    pub fn vertices(&self) -> &[LatticePoint3] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_index(&self, p: LatticePoint3) -> Option<usize> {
        self.vertices.binary_search(&p).ok()
    }

    pub fn contains(&self, p: LatticePoint3) -> bool {
        self.facets.iter().all(|f| f.slack(p) >= 0)
    }

    pub fn origin_is_interior(&self) -> bool {
        self.facets.iter().all(|f| f.offset > 0)
    }

    /// Facet indices whose hyperplane passes through p.
    pub fn tight_facets(&self, p: LatticePoint3) -> Vec<usize> {
        (0..self.facets.len()).filter(|&k| self.facets[k].slack(p) == 0).collect()
    }

    pub fn polar_dual(&self) -> Result<PolarDual, PolytopeError> {
        if !self.origin_is_interior() {
            return Err(PolytopeError::OriginNotInterior);
        }
        let mut vertices: Vec<[Rational64; 3]> =
            self.facets.iter().map(|f| f.normal.0.map(|x| Rational64::new(x, f.offset))).collect();
        vertices.sort();
        let integral = if self.facets.iter().all(|f| f.offset == 1) {
            let pts: Vec<LatticePoint3> = self.facets.iter().map(|f| f.normal).collect();
            Some(Polytope3::hull(&pts).expect("dual of a full-dimensional polytope is full-dimensional"))
        } else {
            None
        };
        Ok(PolarDual { vertices, integral })
    }

    /// Polar dual of a reflexive polytope.
    pub fn reflexive_dual(&self) -> Result<Polytope3, PolytopeError> {
        self.polar_dual()?.integral.ok_or(PolytopeError::NotReflexive)
    }

    /// With primitive normals, reflexivity is exactly "every facet at lattice distance one".
    pub fn is_reflexive(&self) -> bool {
        self.facets.iter().all(|f| f.offset == 1)
    }

    /// Bounding-box scan with exact facet-inequality membership.
    pub fn lattice_points(&self) -> Vec<ClassifiedPoint> {
        let lo: [i64; 3] = std::array::from_fn(|i| self.vertices.iter().map(|v| v.0[i]).min().unwrap());
        let hi: [i64; 3] = std::array::from_fn(|i| self.vertices.iter().map(|v| v.0[i]).max().unwrap());
        let mut out = Vec::new();
        for x in lo[0]..=hi[0] {
            for y in lo[1]..=hi[1] {
                for z in lo[2]..=hi[2] {
                    let p = LatticePoint3::new(x, y, z);
                    if self.contains(p) {
                        out.push(self.classify(p));
                    }
                }
            }
        }
        out
    }

    pub fn classify(&self, p: LatticePoint3) -> ClassifiedPoint {
        let facets = self.tight_facets(p);
        let normals: Vec<LatticePoint3> = facets.iter().map(|&k| self.facets[k].normal).collect();
        let kind = match normal_rank(&normals) {
            0 => PointKind::BodyInterior,
            1 => PointKind::FacetInterior,
            2 => PointKind::EdgeInterior,
            _ => PointKind::Vertex,
        };
        ClassifiedPoint { point: p, kind, facets }
    }

    /// The face whose relative interior contains a boundary point, or `None` for interior points.
    pub fn minimal_face(&self, p: LatticePoint3) -> Option<Face> {
        let facets = self.tight_facets(p);
        if facets.is_empty() {
            return None;
        }
        Some(self.face_from_facets(facets))
    }

    fn face_from_facets(&self, facets: Vec<usize>) -> Face {
        let vertices: Vec<usize> =
            (0..self.vertices.len()).filter(|&i| facets.iter().all(|&k| self.facets[k].vertices.contains(&i))).collect();
        let dim = match vertices.len() {
            1 => 0,
            2 => 1,
            _ => 2,
        };
        let facets = if dim == 2 { facets } else { self.facets_containing(&vertices) };
        Face { dim, vertices, facets }
    }

    fn facets_containing(&self, vertices: &[usize]) -> Vec<usize> {
        (0..self.facets.len()).filter(|&k| vertices.iter().all(|i| self.facets[k].vertices.contains(i))).collect()
    }

    pub fn faces(&self, dim: usize) -> Vec<Face> {
        match dim {
            0 => (0..self.vertices.len())
                .map(|i| Face { dim: 0, vertices: vec![i], facets: self.facets_containing(&[i]) })
                .collect(),
            1 => self
                .edges
                .iter()
                .map(|e| Face { dim: 1, vertices: vec![e.a, e.b], facets: e.facets.to_vec() })
                .collect(),
            2 => (0..self.facets.len())
                .map(|k| Face { dim: 2, vertices: self.facets[k].vertices.clone(), facets: vec![k] })
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Lattice points in the relative interior of a face.
    pub fn interior_count(&self, face: &Face) -> usize {
        match face.dim {
            0 => 0,
            1 => edge_interior(self.vertices[face.vertices[0]], self.vertices[face.vertices[1]]),
            _ => {
                let k = face.facets[0];
                let on = self.lattice_points().iter().filter(|c| c.facets.contains(&k)).count();
                let boundary: usize = self
                    .edges
                    .iter()
                    .filter(|e| e.facets.contains(&k))
                    .map(|e| edge_interior(self.vertices[e.a], self.vertices[e.b]) + 1)
                    .sum();
                on - boundary
            }
        }
    }

    /// Dimension-reversing correspondence between faces of `self` and of its polar dual
    /// `dual` (which must be `self.reflexive_dual()`).
    pub fn dual_face(&self, face: &Face, dual: &Polytope3) -> Face {
        let dual_vertices: Vec<usize> = face
            .facets
            .iter()
            .map(|&k| dual.vertex_index(self.facets[k].normal).expect("dual vertex for every facet"))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let dual_facets: Vec<usize> = face
            .vertices
            .iter()
            .map(|&i| {
                (0..dual.facets.len()).find(|&k| dual.facets[k].normal == self.vertices[i]).expect("dual facet for every vertex")
            })
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        Face { dim: 2 - face.dim, vertices: dual_vertices, facets: dual_facets }
    }

    /// Σ over edges of l(Γ)·l(Γ*), the dual edge joining the normals of the two facets at Γ.
    pub fn toric_contribution(&self) -> Result<usize, PolytopeError> {
        if !self.is_reflexive() {
            return Err(PolytopeError::NotReflexive);
        }
        Ok(self
            .edges
            .iter()
            .map(|e| {
                let own = edge_interior(self.vertices[e.a], self.vertices[e.b]);
                let dual = edge_interior(self.facets[e.facets[0]].normal, self.facets[e.facets[1]].normal);
                own * dual
            })
            .sum())
    }

    /// A unimodular U (acting on column vectors) with U·vert(self) = vert(other).
    pub fn iso_gl3z(&self, other: &Polytope3) -> Option<[[i64; 3]; 3]> {
        if self.vertices.len() != other.vertices.len()
            || self.facets.len() != other.facets.len()
            || self.edges.len() != other.edges.len()
        {
            return None;
        }
        let v = &self.vertices;
        let n = v.len();
        let base = (0..n)
            .flat_map(|i| (i + 1..n).flat_map(move |j| (j + 1..n).map(move |k| (i, j, k))))
            .find(|&(i, j, k)| det3(v[i], v[j], v[k]) != 0)?;
        let (a1, a2, a3) = (v[base.0], v[base.1], v[base.2]);
        let targets: HashSet<LatticePoint3> = other.vertices.iter().copied().collect();
        let w = &other.vertices;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if i == j || j == k || i == k {
                        continue;
                    }
                    let Some(u) = solve_map([a1, a2, a3], [w[i], w[j], w[k]]) else { continue };
                    if v.iter().all(|&p| targets.contains(&apply(u, p))) {
                        return Some(u);
                    }
                }
            }
        }
        None
    }
}

/// Result of polar duality: rational vertices always, the lattice polytope when integral.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolarDual {
    pub vertices: Vec<[Rational64; 3]>,
    pub integral: Option<Polytope3>,
}

impl PolarDual {
    pub fn is_integral(&self) -> bool {
        self.integral.is_some()
    }
}

pub fn edge_interior(a: LatticePoint3, b: LatticePoint3) -> usize {
    ((b - a).content() - 1).max(0) as usize
}

pub fn apply(u: [[i64; 3]; 3], p: LatticePoint3) -> LatticePoint3 {
    LatticePoint3(std::array::from_fn(|r| u[r][0] * p.0[0] + u[r][1] * p.0[1] + u[r][2] * p.0[2]))
}

/// Rank of a small set of normal vectors.
fn normal_rank(v: &[LatticePoint3]) -> usize {
    let Some(&a) = v.iter().find(|p| !p.is_zero()) else { return 0 };
    let Some(&b) = v.iter().find(|&&p| !a.cross(p).is_zero()) else { return 1 };
    let n = a.cross(b);
    if v.iter().any(|&p| n.dot(p) != 0) {
        3
    } else {
        2
    }
}

/// Integral unimodular U with U·a_i = b_i, if one exists.
fn solve_map(a: [LatticePoint3; 3], b: [LatticePoint3; 3]) -> Option<[[i64; 3]; 3]> {
    // Columns of A are a_i; U = B·adj(A)/det(A).
    let cols = |c: [LatticePoint3; 3]| -> [[i128; 3]; 3] { std::array::from_fn(|r| std::array::from_fn(|k| i128::from(c[k].0[r]))) };
    let am = cols(a);
    let bm = cols(b);
    let d = det3(LatticePoint3(a[0].0), a[1], a[2]);
    let d_b = det3(b[0], b[1], b[2]);
    if d == 0 || d.abs() != d_b.abs() {
        return None;
    }
    let cof = |r: usize, c: usize| -> i128 {
        let rs: Vec<usize> = (0..3).filter(|&x| x != r).collect();
        let cs: Vec<usize> = (0..3).filter(|&x| x != c).collect();
        let m = am[rs[0]][cs[0]] * am[rs[1]][cs[1]] - am[rs[0]][cs[1]] * am[rs[1]][cs[0]];
        if (r + c).is_multiple_of(2) {
            m
        } else {
            -m
        }
    };
    // adj(A)[i][j] = cof(j, i)
    let mut u = [[0i64; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            let num: i128 = (0..3).map(|k| bm[r][k] * cof(c, k)).sum();
            if num % d != 0 {
                return None;
            }
            u[r][c] = i64::try_from(num / d).ok()?;
        }
    }
    Some(u)
}
