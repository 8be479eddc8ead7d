#![allow(dead_code)]

use toricdual::duality::{builtin_pairs, find_pairs, CouplingPair, Side};
use toricdual::polytope::{LatticePoint3, Polytope3};
use toricdual::toric::{mpcp_fan, self_intersection, Fan3};

pub fn pair(id: &str) -> CouplingPair {
    let pairs = builtin_pairs();
    let found = find_pairs(&pairs, id);
    assert_eq!(found.len(), 1, "{id}");
    found[0].clone()
}

/// Newton polytope whose polar dual is the hull of `rays`, with its fan.
pub fn ray_list_fan(rays: &[LatticePoint3]) -> (Polytope3, Fan3) {
    let mut unique = rays.to_vec();
    unique.sort();
    unique.dedup();
    let newton = Polytope3::hull(&unique).unwrap().reflexive_dual().unwrap();
    let fan = mpcp_fan(&newton).unwrap();
    (newton, fan)
}

/// D² for each listed ray, in list order; `None` for facet-interior rays.
pub fn listed_self_intersections(pair: &CouplingPair, side: Side) -> Vec<Option<i64>> {
    let rays = pair.side(side).rays.as_ref().expect("ray list");
    let (newton, fan) = ray_list_fan(rays);
    rays.iter().map(|r| self_intersection(fan.ray_index(*r).expect("listed ray is a fan ray"), &fan, &newton).ok()).collect()
}

/// Newton polytopes of every builtin side, labelled `id Δ` / `id Δ′`.
pub fn builtin_newton_polytopes() -> Vec<(String, Polytope3)> {
    let mut out = Vec::new();
    for p in builtin_pairs() {
        for side in [Side::Delta, Side::DeltaPrime] {
            out.push((format!("{} {side}", p.id), p.side(side).polytope().unwrap()));
        }
    }
    out
}
