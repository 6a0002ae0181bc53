use std::collections::BTreeSet;

use hhfd::index_set::{cardinality_bound, max_hdmr_order, order_number, IndexSet, MultiIndex};
use proptest::prelude::*;

/// Every lattice point with all exponents below `k_max`, paired with its
/// order number.
fn lattice(d: usize, c: f64, k_max: u64) -> Vec<(Vec<u32>, f64)> {
    let side = k_max as u32;
    let total = (side as usize).pow(d as u32);
    let mut out = Vec::with_capacity(total);
    let mut m = vec![0u32; d];
    for _ in 0..total {
        let k: f64 = m.iter().map(|&e| e as f64 + c).product();
        out.push((m.clone(), k));
        for slot in m.iter_mut() {
            *slot += 1;
            if *slot < side {
                break;
            }
            *slot = 0;
        }
    }
    out
}

fn dense_members(set: &IndexSet) -> BTreeSet<Vec<u32>> {
    set.members().iter().map(|m| m.index.to_dense()).collect()
}

#[test]
fn matches_lattice_scan() {
    for d in 1..=4 {
        for &c in &[1.0, 1.5, 2.0] {
            let points = lattice(d, c, 30);
            for k in 1..=30u64 {
                let expected: BTreeSet<Vec<u32>> = points
                    .iter()
                    .filter(|(_, order)| *order < k as f64)
                    .map(|(m, _)| m.clone())
                    .collect();
                let set = IndexSet::enumerate(d, c, k).unwrap();
                assert_eq!(set.len(), expected.len(), "d={d} c={c} K={k}");
                assert_eq!(dense_members(&set), expected, "d={d} c={c} K={k}");
                assert!((set.len() as f64) < cardinality_bound(k, d), "d={d} c={c} K={k}");
                assert!(set.max_support() <= max_hdmr_order(k, c), "d={d} c={c} K={k}");
            }
        }
    }
}

#[test]
fn members_are_sorted() {
    let set = IndexSet::enumerate(4, 1.0, 30).unwrap();
    for pair in set.members().windows(2) {
        let a = (&pair[0].order, pair[0].index.support_size(), pair[0].index.support());
        let b = (&pair[1].order, pair[1].index.support_size(), pair[1].index.support());
        assert!(a < b, "{} before {}", pair[0].index, pair[1].index);
    }
}

#[test]
fn stored_orders_match_products() {
    let set = IndexSet::enumerate(6, 1.5, 40).unwrap();
    for m in set.members() {
        assert_eq!(m.order, order_number(&m.index, 1.5));
        assert!(m.order < 40.0);
    }
}

#[test]
fn high_dimension_stays_sparse() {
    let set = IndexSet::enumerate(30, 1.0, 20).unwrap();
    assert!((set.len() as f64) < cardinality_bound(20, 30));
    assert!(set.max_support() <= max_hdmr_order(20, 1.0));
    assert!(set.contains(&MultiIndex::zero(30)));
}

proptest! {
    #[test]
    fn nested_in_truncation(d in 1usize..6, k in 1u64..60, ci in 0usize..3) {
        let c = [1.0, 1.5, 2.0][ci];
        let small = IndexSet::enumerate(d, c, k).unwrap();
        let large = IndexSet::enumerate(d, c, k + 1).unwrap();
        for m in small.members() {
            prop_assert!(large.contains(&m.index));
        }
    }

    #[test]
    fn downward_closed(d in 1usize..6, k in 2u64..80) {
        let set = IndexSet::enumerate(d, 1.0, k).unwrap();
        for m in set.members() {
            let mut dense = m.index.to_dense();
            for j in 0..d {
                if dense[j] > 0 {
                    dense[j] -= 1;
                    prop_assert!(set.contains(&MultiIndex::from_dense(&dense).unwrap()));
                    dense[j] += 1;
                }
            }
        }
    }

    #[test]
    fn enumeration_is_deterministic(d in 1usize..8, k in 1u64..50) {
        prop_assert_eq!(IndexSet::enumerate(d, 1.0, k).unwrap(), IndexSet::enumerate(d, 1.0, k).unwrap());
    }
}
