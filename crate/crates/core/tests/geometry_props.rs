use std::collections::HashSet;

use hhfd::geometry::{distance, Domain, NodeSet};
use proptest::prelude::*;

fn domain(kind: bool, d: usize) -> Domain {
    if kind {
        Domain::ball(vec![0.5; d], 2.0).unwrap()
    } else {
        Domain::cuboid((0..d).map(|i| -1.0 - i as f64).collect(), (0..d).map(|i| 0.5 + i as f64).collect()).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn nodes_respect_the_domain(kind in any::<bool>(), d in 1usize..8, n in 1usize..200, nb in 1usize..100, seed in any::<u64>()) {
        let nb = if d == 1 { nb.min(2) } else { nb };
        let dom = domain(kind, d);
        let nodes = NodeSet::generate(&dom, n, nb, seed).unwrap();
        prop_assert_eq!(nodes.interior_len(), n);
        prop_assert_eq!(nodes.boundary_len(), nb);
        for x in nodes.interior() {
            prop_assert!(dom.contains_strictly(x));
        }
        for x in nodes.boundary() {
            prop_assert!(dom.on_boundary(x, 1e-12));
        }
        let keys: HashSet<Vec<u64>> = nodes.points().map(|p| p.iter().map(|v| v.to_bits()).collect()).collect();
        prop_assert_eq!(keys.len(), nodes.len());
    }

    #[test]
    fn generation_is_reproducible(kind in any::<bool>(), d in 1usize..6, seed in any::<u64>()) {
        let dom = domain(kind, d);
        let nb = if d == 1 { 2 } else { 20 };
        let a = NodeSet::generate(&dom, 50, nb, seed).unwrap();
        let b = NodeSet::generate(&dom, 50, nb, seed).unwrap();
        prop_assert_eq!(&a, &b);
        let c = NodeSet::generate(&dom, 50, nb, seed.wrapping_add(1)).unwrap();
        prop_assert!(a != c);
    }
}

#[test]
fn small_sets_have_no_near_duplicates() {
    let nodes = NodeSet::generate(&Domain::cube(1, 0.0, 1.0).unwrap(), 500, 2, 9).unwrap();
    let pts: Vec<&[f64]> = nodes.points().collect();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            assert!(distance(pts[i], pts[j]) > 1e-12);
        }
    }
}

#[test]
fn one_dimensional_boundary_has_two_points() {
    let dom = Domain::cube(1, 0.0, 1.0).unwrap();
    assert!(NodeSet::generate(&dom, 10, 3, 0).is_err());
    let nodes = NodeSet::generate(&dom, 10, 2, 0).unwrap();
    let mut ends: Vec<f64> = nodes.boundary().map(|p| p[0]).collect();
    ends.sort_by(f64::total_cmp);
    assert_eq!(ends, vec![0.0, 1.0]);
}
