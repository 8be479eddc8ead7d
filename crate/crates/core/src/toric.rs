//! Fans from maximal triangulations of reflexive polytopes and intersection
//! numbers of toric divisors restricted to the anticanonical K3 surface.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{IntMatrix, RatMatrix};
use crate::polytope::{det3, polygon_corners, LatticePoint3, PointKind, Polytope3, PolytopeError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ToricError {
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
    #[error("polytope is not reflexive")]
    NotReflexive,
    #[error("fan is not smooth")]
    NotSimplicialOrSmooth,
    #[error("ray {0} is facet-interior; its divisor misses the generic K3")]
    FacetInteriorRay(usize),
    #[error("toric contribution L0 = {0} is nonzero")]
    NontrivialToricContribution(usize),
    #[error("no three rays form a unimodular complement")]
    NoUnimodularComplement,
    #[error("ray index {0} out of range")]
    RayOutOfRange(usize),
}

/// Complete simplicial fan in three dimensions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Fan3 {
    rays: Vec<LatticePoint3>,
    cones2: BTreeSet<[usize; 2]>,
    cones3: BTreeSet<[usize; 3]>,
    #[serde(skip)]
    cones_at: Vec<Vec<[usize; 3]>>,
}

fn sorted3(mut t: [usize; 3]) -> [usize; 3] {
    t.sort_unstable();
    t
}

impl Fan3 {
    /// Fan generated by the given maximal cones; 2-cones are their faces.
    pub fn new(rays: Vec<LatticePoint3>, cones3: impl IntoIterator<Item = [usize; 3]>) -> Self {
        let cones3: BTreeSet<[usize; 3]> = cones3.into_iter().map(sorted3).collect();
        let mut cones2 = BTreeSet::new();
        let mut cones_at = vec![Vec::new(); rays.len()];
        for &[a, b, c] in &cones3 {
            cones2.extend([[a, b], [a, c], [b, c]]);
            for r in [a, b, c] {
                cones_at[r].push([a, b, c]);
            }
        }
        Fan3 { rays, cones2, cones3, cones_at }
    }

    pub fn rays(&self) -> &[LatticePoint3] {
        &self.rays
    }

    pub fn cones2(&self) -> &BTreeSet<[usize; 2]> {
        &self.cones2
    }

    pub fn cones3(&self) -> &BTreeSet<[usize; 3]> {
        &self.cones3
    }

    pub fn ray_index(&self, p: LatticePoint3) -> Option<usize> {
        self.rays.iter().position(|&r| r == p)
    }

    pub fn is_cone2(&self, i: usize, j: usize) -> bool {
        self.cones2.contains(&[i.min(j), i.max(j)])
    }

    pub fn is_cone3(&self, i: usize, j: usize, k: usize) -> bool {
        self.cones3.contains(&sorted3([i, j, k]))
    }

    /// Every 3-cone spanned by a lattice basis.
    pub fn check_smooth(&self) -> bool {
        self.cones3.iter().all(|&[a, b, c]| det3(self.rays[a], self.rays[b], self.rays[c]).abs() == 1)
    }

    /// Each 2-cone is a face of exactly two 3-cones.
    pub fn is_closed_surface(&self) -> bool {
        let mut count: BTreeMap<[usize; 2], usize> = BTreeMap::new();
        for &[a, b, c] in &self.cones3 {
            for e in [[a, b], [a, c], [b, c]] {
                *count.entry(e).or_default() += 1;
            }
        }
        count.values().all(|&n| n == 2)
    }

    /// Coefficients of Σᵢ ⟨vᵢ, eⱼ⟩ Dᵢ = 0 for j = 1, 2, 3.
    pub fn divisor_relations(&self) -> [Vec<i64>; 3] {
        std::array::from_fn(|j| self.rays.iter().map(|r| r.0[j]).collect())
    }

    /// Covector m with ⟨m, v_i⟩ = 1 and vanishing on the other rays of a smooth cone through i.
    fn dual_covector(&self, cone: [usize; 3], i: usize) -> LatticePoint3 {
        let others: Vec<usize> = cone.iter().copied().filter(|&r| r != i).collect();
        let m = self.rays[others[0]].cross(self.rays[others[1]]);
        let d = m.dot(self.rays[i]);
        debug_assert_eq!(d.abs(), 1);
        m.scale(d)
    }

    fn check_index(&self, i: usize) -> Result<(), ToricError> {
        if i < self.rays.len() {
            Ok(())
        } else {
            Err(ToricError::RayOutOfRange(i))
        }
    }

    /// Triple intersection DᵢDⱼDₖ on the smooth toric 3-fold, repeated indices
    /// reduced through the linear relations.
    pub fn triple_product(&self, i: usize, j: usize, k: usize) -> Result<i64, ToricError> {
        for x in [i, j, k] {
            self.check_index(x)?;
        }
        if !self.check_smooth() {
            return Err(ToricError::NotSimplicialOrSmooth);
        }
        Ok(self.triple_unchecked(i, j, k))
    }

    fn triple_unchecked(&self, i: usize, j: usize, k: usize) -> i64 {
        let mut t = [i, j, k];
        t.sort_unstable();
        match t {
            [a, b, c] if a != b && b != c => i64::from(self.is_cone3(a, b, c)),
            [a, b, c] if a == b && b == c => {
                // D_a^3 = -Σ_{l≠a} ⟨m,v_l⟩ D_a^2 D_l
                let Some(&cone) = self.cones_at[a].first() else { return 0 };
                let m = self.dual_covector(cone, a);
                -(0..self.rays.len())
                    .filter(|&l| l != a)
                    .map(|l| {
                        let w = m.dot(self.rays[l]);
                        if w == 0 {
                            0
                        } else {
                            w * self.square_times(a, l)
                        }
                    })
                    .sum::<i64>()
            }
            [a, b, c] => {
                let (rep, other) = if a == b { (a, c) } else { (b, a) };
                self.square_times(rep, other)
            }
        }
    }

    /// D_a² D_b for a ≠ b.
    fn square_times(&self, a: usize, b: usize) -> i64 {
        if !self.is_cone2(a, b) {
            return 0;
        }
        let cone = *self.cones_at[a].iter().find(|c| c.contains(&b)).expect("2-cone lies in a 3-cone");
        let m = self.dual_covector(cone, a);
        -self
            .cones_at[a]
            .iter()
            .filter(|c| c.contains(&b))
            .map(|c| {
                let l = c.iter().copied().find(|&x| x != a && x != b).unwrap();
                m.dot(self.rays[l])
            })
            .sum::<i64>()
    }

    /// Dᵢ·Dⱼ on the anticanonical surface: Σₖ DᵢDⱼDₖ over all rays.
    pub fn pairwise_intersection(&self, i: usize, j: usize) -> Result<i64, ToricError> {
        self.check_index(i)?;
        self.check_index(j)?;
        if !self.check_smooth() {
            return Err(ToricError::NotSimplicialOrSmooth);
        }
        if i != j && !self.is_cone2(i, j) {
            return Ok(0);
        }
        Ok((0..self.rays.len()).map(|k| self.triple_unchecked(i, j, k)).sum())
    }
}

/// Fan over a maximal triangulation of the boundary of the polar dual of `delta`.
/// Rays are all nonzero lattice points of the dual, in lexicographic order; each
/// dual facet is triangulated by pulling its lattice points in ray order.
pub fn mpcp_fan(delta: &Polytope3) -> Result<Fan3, ToricError> {
    let dual = delta.polar_dual()?.integral.ok_or(ToricError::NotReflexive)?;
    let points = dual.lattice_points();
    let rays: Vec<LatticePoint3> = points.iter().filter(|c| c.kind != PointKind::BodyInterior).map(|c| c.point).collect();
    let mut cones = Vec::new();
    for (k, facet) in dual.facets().iter().enumerate() {
        let on: Vec<usize> = (0..rays.len()).filter(|&r| facet.slack(rays[r]) == 0).collect();
        let corners: Vec<LatticePoint3> = facet.vertices.iter().map(|&v| dual.vertices()[v]).collect();
        let corners = polygon_corners(&corners, facet.normal);
        let corner_idx: Vec<usize> = corners.iter().map(|c| rays.iter().position(|r| r == c).unwrap()).collect();
        let tris = pulling_triangulation(&rays, &on, &corner_idx, dual.facets()[k].normal);
        cones.extend(tris);
    }
    let fan = Fan3::new(rays, cones);
    if !fan.check_smooth() {
        return Err(ToricError::NotSimplicialOrSmooth);
    }
    Ok(fan)
}

/// Pulling triangulation of a lattice polygon using every listed point.
/// `on` holds ray indices in pulling order, `corners` the polygon corners cyclically.
fn pulling_triangulation(rays: &[LatticePoint3], on: &[usize], corners: &[usize], normal: LatticePoint3) -> Vec<[usize; 3]> {
    let orient = |a: usize, b: usize, c: usize| (rays[b] - rays[a]).cross(rays[c] - rays[a]).dot(normal).signum();
    let first = on[0];
    let n = corners.len();
    let mut tris: Vec<[usize; 3]> = (0..n)
        .map(|i| (corners[i], corners[(i + 1) % n]))
        .filter(|&(a, b)| !(a == first || b == first || orient(a, b, first) == 0))
        .map(|(a, b)| [first, a, b])
        .collect();
    for &p in &on[1..] {
        let mut next = Vec::with_capacity(tris.len() + 2);
        for t in tris {
            if t.contains(&p) {
                next.push(t);
                continue;
            }
            let s = orient(t[0], t[1], t[2]);
            let sides = [orient(t[0], t[1], p), orient(t[1], t[2], p), orient(t[2], t[0], p)];
            if sides.iter().any(|&x| x == -s) {
                next.push(t);
                continue;
            }
            for (e, &side) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])].iter().zip(&sides) {
                if side != 0 {
                    next.push([p, e.0, e.1]);
                }
            }
        }
        tris = next;
    }
    tris
}

/// D² = 2·l(F) − 2 with F the face of `delta` dual to the face of its polar dual
/// whose relative interior contains the ray.
pub fn self_intersection(i: usize, fan: &Fan3, delta: &Polytope3) -> Result<i64, ToricError> {
    fan.check_index(i)?;
    let dual = delta.polar_dual()?.integral.ok_or(ToricError::NotReflexive)?;
    self_intersection_with(i, fan, delta, &dual)
}

fn self_intersection_with(i: usize, fan: &Fan3, delta: &Polytope3, dual: &Polytope3) -> Result<i64, ToricError> {
    let face = dual.minimal_face(fan.rays[i]).ok_or(ToricError::RayOutOfRange(i))?;
    if face.dim == 2 {
        return Err(ToricError::FacetInteriorRay(i));
    }
    let f = dual.dual_face(&face, delta);
    Ok(2 * delta.interior_count(&f) as i64 - 2)
}

/// Intersection form restricted to the non-facet-interior toric divisors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RestrictedIntersection {
    /// Fan indices of the divisors that meet the K3 surface.
    pub rays: Vec<usize>,
    /// Fan indices of facet-interior rays (excluded).
    pub facet_interior: Vec<usize>,
    pub gram_full: IntMatrix,
    /// Positions in `rays` of the chosen basis.
    pub basis: Vec<usize>,
    pub gram_basis: IntMatrix,
}

impl RestrictedIntersection {
    pub fn basis_rays(&self) -> Vec<usize> {
        self.basis.iter().map(|&b| self.rays[b]).collect()
    }

    /// Column j holds the class of the divisor of `rays[j]` in basis coordinates,
    /// solved from the linear relations Σ⟨m, v_i⟩ D_i = 0.
    pub fn coordinates(&self, fan: &Fan3) -> IntMatrix {
        let rest: Vec<usize> = (0..self.rays.len()).filter(|j| !self.basis.contains(j)).collect();
        let v = |pos: usize| fan.rays[self.rays[pos]].0;
        let vc_t = IntMatrix::from_fn(3, 3, |r, c| BigInt::from(v(rest[c])[r]));
        let vb_t = IntMatrix::from_fn(3, self.basis.len(), |r, c| BigInt::from(v(self.basis[c])[r]));
        let inv = RatMatrix::from_int(&vc_t).inverse().expect("complement rays are unimodular");
        let solved = inv.mul(&RatMatrix::from_int(&vb_t)).to_int().expect("unimodular inverse is integral").neg();
        IntMatrix::from_fn(self.basis.len(), self.rays.len(), |r, j| {
            if let Some(t) = self.basis.iter().position(|&b| b == j) {
                BigInt::from(u8::from(t == r))
            } else {
                let s = rest.iter().position(|&x| x == j).expect("every ray is basis or complement");
                solved.get(s, r).clone()
            }
        })
    }
}

pub fn picard_gram(fan: &Fan3, delta: &Polytope3) -> Result<RestrictedIntersection, ToricError> {
    let l0 = delta.toric_contribution().map_err(|_| ToricError::NotReflexive)?;
    if l0 != 0 {
        return Err(ToricError::NontrivialToricContribution(l0));
    }
    if !fan.check_smooth() {
        return Err(ToricError::NotSimplicialOrSmooth);
    }
    let dual = delta.polar_dual()?.integral.ok_or(ToricError::NotReflexive)?;
    let (mut rays, mut facet_interior) = (Vec::new(), Vec::new());
    for (i, &r) in fan.rays.iter().enumerate() {
        match dual.classify(r).kind {
            PointKind::FacetInterior => facet_interior.push(i),
            _ => rays.push(i),
        }
    }
    let n = rays.len();
    let mut gram_full = IntMatrix::zeros(n, n);
    for a in 0..n {
        gram_full.set(a, a, BigInt::from(self_intersection_with(rays[a], fan, delta, &dual)?));
        for b in a + 1..n {
            let v = BigInt::from(fan.pairwise_intersection(rays[a], rays[b])?);
            gram_full.set(a, b, v.clone());
            gram_full.set(b, a, v);
        }
    }
    let basis = unimodular_basis(&rays.iter().map(|&i| fan.rays[i]).collect::<Vec<_>>())?;
    let gram_basis = gram_full.submatrix(&basis, &basis);
    Ok(RestrictedIntersection { rays, facet_interior, gram_full, basis, gram_basis })
}

/// Lexicographically first index subset whose complement is three rays forming a lattice basis.
pub fn unimodular_basis(rays: &[LatticePoint3]) -> Result<Vec<usize>, ToricError> {
    let n = rays.len();
    let mut best: Option<Vec<usize>> = None;
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                if det3(rays[a], rays[b], rays[c]).abs() != 1 {
                    continue;
                }
                let keep: Vec<usize> = (0..n).filter(|&x| x != a && x != b && x != c).collect();
                if best.as_ref().is_none_or(|cur| keep < *cur) {
                    best = Some(keep);
                }
            }
        }
    }
    best.ok_or(ToricError::NoUnimodularComplement)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PicardNumberCheck {
    /// Non-facet-interior rays − 3 + L0.
    pub rho_rays: usize,
    /// Σ_edges l(Γ) + #vertices + L0 − 3 evaluated on the given polytope as printed.
    pub rho_formula: i64,
    pub l0: usize,
}

pub fn picard_number_check(fan: &Fan3, delta: &Polytope3) -> Result<PicardNumberCheck, ToricError> {
    let dual = delta.polar_dual()?.integral.ok_or(ToricError::NotReflexive)?;
    let l0 = delta.toric_contribution().map_err(|_| ToricError::NotReflexive)?;
    let non_fi = fan.rays.iter().filter(|&&r| dual.classify(r).kind != PointKind::FacetInterior).count();
    let edge_points: usize = delta.faces(1).iter().map(|e| delta.interior_count(e)).sum();
    Ok(PicardNumberCheck {
        rho_rays: non_fi + l0 - 3,
        rho_formula: (edge_points + delta.vertices().len() + l0) as i64 - 3,
        l0,
    })
}
