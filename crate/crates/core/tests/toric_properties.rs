mod common;

use common::{builtin_newton_polytopes, listed_self_intersections, pair};
use toricdual::duality::Side;
use toricdual::lattice::IntLattice;
use toricdual::toric::{mpcp_fan, picard_gram, self_intersection};

#[test]
fn self_intersection_agrees_with_triple_products() {
    for (label, delta) in builtin_newton_polytopes() {
        let fan = mpcp_fan(&delta).unwrap();
        for i in 0..fan.rays().len() {
            match self_intersection(i, &fan, &delta) {
                Ok(d2) => assert_eq!(d2, fan.pairwise_intersection(i, i).unwrap(), "{label} ray {}", fan.rays()[i]),
                Err(_) => {
                    // Facet-interior divisors miss the K3 entirely.
                    for j in 0..fan.rays().len() {
                        assert_eq!(fan.pairwise_intersection(i, j).unwrap(), 0, "{label} ray {}", fan.rays()[i]);
                    }
                }
            }
        }
    }
}

#[test]
fn distinct_divisors_meet_nonnegatively_and_only_along_cones() {
    for (label, delta) in builtin_newton_polytopes() {
        let fan = mpcp_fan(&delta).unwrap();
        let restricted = picard_gram(&fan, &delta).unwrap();
        for (a, &i) in restricted.rays.iter().enumerate() {
            for (b, &j) in restricted.rays.iter().enumerate().skip(a + 1) {
                let x = restricted.gram_full.get(a, b);
                assert_eq!(x, restricted.gram_full.get(b, a));
                if fan.is_cone2(i, j) {
                    assert!(x >= &0.into(), "{label}: adjacent rays {} {}", fan.rays()[i], fan.rays()[j]);
                } else {
                    assert_eq!(x, &0.into(), "{label}");
                }
            }
        }
    }
}

#[test]
fn fans_are_smooth_closed_surfaces() {
    for (label, delta) in builtin_newton_polytopes() {
        let fan = mpcp_fan(&delta).unwrap();
        assert!(fan.check_smooth() && fan.is_closed_surface(), "{label}");
    }
}

#[test]
fn polar_dual_is_an_involution() {
    for (label, delta) in builtin_newton_polytopes() {
        let dual = delta.reflexive_dual().unwrap();
        let back = dual.reflexive_dual().unwrap();
        assert_eq!(back.vertices(), delta.vertices(), "{label}");
    }
}

#[test]
fn picard_lattices_are_even_hyperbolic() {
    for (label, delta) in builtin_newton_polytopes() {
        let fan = mpcp_fan(&delta).unwrap();
        let r = picard_gram(&fan, &delta).unwrap();
        let l = IntLattice::new(r.gram_basis.clone()).unwrap();
        let sig = l.signature();
        assert!(l.is_even(), "{label}");
        assert_eq!((sig.pos, sig.neg, sig.zero), (1, l.rank() - 1, 0), "{label}");
    }
}

#[test]
fn printed_self_intersections() {
    let d2 = listed_self_intersections(&pair("11-14/c1"), Side::Delta);
    let mut expected = vec![Some(0), Some(2), Some(8)];
    expected.extend([Some(-2); 11]);
    assert_eq!(d2, expected);

    let d2 = listed_self_intersections(&pair("15-18"), Side::Delta);
    let mut expected = vec![Some(2), Some(-2), Some(-2), Some(0), Some(4)];
    expected.extend([Some(-2); 10]);
    assert_eq!(d2, expected);

    let d2 = listed_self_intersections(&pair("35-37"), Side::Delta);
    assert_eq!(d2[0], Some(2));

    let d2 = listed_self_intersections(&pair("26/c2"), Side::Delta);
    assert_eq!(d2[6], Some(2));
}
