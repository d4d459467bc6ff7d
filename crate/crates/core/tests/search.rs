use std::collections::BTreeSet;

use polynet::bounds::{ambient_dim, SegmentBounds};
use polynet::search::{check_set_unimodality, find_minimal_filling, Evidence, SearchSpec};
use polynet::{dimension, naive_bound, Architecture, DimensionConfig, FillingVerdict, Method};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dominates(a: &[usize], b: &[usize]) -> bool {
    a.iter().zip(b).all(|(x, y)| x >= y)
}

#[test]
fn result_is_a_certified_antichain() {
    for h in 3..=7 {
        let set = find_minimal_filling(&SearchSpec::new(h, 2, 1, 2)).unwrap();
        assert!(!set.partial);
        let ws: Vec<&Vec<usize>> = set.architectures.iter().map(|a| &a.widths).collect();
        for (i, a) in ws.iter().enumerate() {
            for (j, b) in ws.iter().enumerate() {
                assert!(i == j || !dominates(a, b), "{a:?} dominates {b:?}");
            }
        }
        for m in &set.architectures {
            assert_eq!(m.certification, FillingVerdict::Proved);
            assert_eq!(m.dim, set.ambient);
            let internal_decrements = m.widths[1..h].iter().filter(|&&w| w > 1).count();
            assert_eq!(m.decrements.len(), internal_decrements);
            for n in &m.decrements {
                match &n.evidence {
                    Evidence::Bound { bound } => assert!(*bound < set.ambient),
                    Evidence::Oracle { verdict, ranks, .. } => {
                        assert_eq!(*verdict, FillingVerdict::ProbablyNot);
                        assert_eq!(ranks.len(), 3);
                    }
                }
            }
        }
    }
}

#[test]
fn traversal_order_does_not_change_the_result() {
    for h in [5usize, 6, 7] {
        let base = find_minimal_filling(&SearchSpec::new(h, 2, 1, 2)).unwrap().widths();
        for t in 1..=3u64 {
            let spec = SearchSpec { traversal_seed: Some(t * 977), ..SearchSpec::new(h, 2, 1, 2) };
            assert_eq!(find_minimal_filling(&spec).unwrap().widths(), base, "depth {h}, traversal {t}");
        }
    }
}

#[test]
fn engines_find_the_same_minimal_sets() {
    for h in [3usize, 4, 5] {
        let stacked = find_minimal_filling(&SearchSpec::new(h, 2, 1, 2)).unwrap().widths();
        let spec = SearchSpec { method: Method::FiniteFieldInterpolated, ..SearchSpec::new(h, 2, 1, 2) };
        assert_eq!(find_minimal_filling(&spec).unwrap().widths(), stacked);
    }
}

#[test]
fn pruned_candidates_never_fill() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = BTreeSet::new();
    let mut naive_pruned = 0;
    while checked.len() < 20 {
        let h = rng.gen_range(3..=6);
        let caps = SearchSpec::new(h, 2, 1, 2).caps().unwrap();
        let mut widths = vec![2];
        widths.extend(caps.iter().map(|&c| rng.gen_range(1..=c.min(9))));
        widths.push(1);
        let arch = Architecture::new(widths.clone(), 2).unwrap();
        let ambient = ambient_dim(&arch).unwrap();
        if SegmentBounds::new(&arch).total() >= ambient || !checked.insert(widths) {
            continue;
        }
        naive_pruned += usize::from(naive_bound(&arch) < ambient);
        let est = dimension(&arch, &DimensionConfig { seed: 1, ..DimensionConfig::default() }).unwrap();
        assert!(est.dim < ambient, "{arch} was pruned but fills");
        assert!(est.dim <= SegmentBounds::new(&arch).total());
    }
    assert!(naive_pruned > 0);
}

#[test]
fn depth_seven_has_a_minimal_element_with_a_valley() {
    let set = find_minimal_filling(&SearchSpec::new(7, 2, 1, 2)).unwrap();
    assert!(set.widths().contains(&vec![2, 3, 4, 5, 6, 4, 2, 1]));
    assert!(set.widths().contains(&vec![2, 3, 4, 5, 4, 6, 4, 1]));
    let v = check_set_unimodality(&set);
    assert_eq!(v.len(), 1);
    assert_eq!((v[0].widths.clone(), v[0].index), (vec![2, 3, 4, 5, 4, 6, 4, 1], 4));
}

#[test]
fn other_end_widths_and_degrees() {
    // d_0 = 3, d_h = 1, r = 2: minimal elements fill and are minimal
    let set = find_minimal_filling(&SearchSpec::new(3, 3, 1, 2)).unwrap();
    assert!(!set.architectures.is_empty());
    let deep = find_minimal_filling(&SearchSpec::new(3, 2, 2, 3)).unwrap();
    assert!(!deep.architectures.is_empty());
    for m in set.architectures.iter().chain(&deep.architectures) {
        assert!(m.decrements.iter().all(|n| !n.evidence.fills()));
    }
}
