use std::collections::BTreeSet;

use dmlab_core::marks::{self, MarkSet};
use dmlab_core::trees::{count_trees, normalize, enumerate_trees, smooth_tree, MarkedTree, OEdge};
use dmlab_core::Error;
use proptest::prelude::*;

#[path = "common/census.rs"]
mod census;

use census::{census, library_keys};

/// The 11-marked tree of the standard example: `v` carries 1,2,3; `v′` is
/// bare; `a` carries 4,5; `b` carries 6; `c` carries 7,8; `d` carries
/// 9,10,11. Vertices are numbered `v=0, v′=1, a=2, b=3, c=4, d=5`.
fn example_tree() -> MarkedTree {
    MarkedTree::new(11, false, 6, vec![(0, 1), (1, 2), (1, 3), (3, 4), (3, 5)], vec![0, 0, 0, 2, 2, 3, 4, 4, 5, 5, 5], None)
        .unwrap()
}

fn split_tree(l: usize, left: &[usize]) -> MarkedTree {
    let mu = (1..=l).map(|m| usize::from(!left.contains(&m))).collect();
    MarkedTree::new(l, false, 2, vec![(0, 1)], mu, None).unwrap()
}

#[test]
fn census_matches_enumeration() {
    let expected = [(3, 1), (4, 4), (5, 26), (6, 236), (7, 2752)];
    for (l, n) in expected {
        let c = census(l);
        assert_eq!(c.len(), n, "census l={l}");
        assert_eq!(count_trees(l, false).unwrap(), n);
        assert_eq!(library_keys(l, false), c, "split families l={l}");
    }
}

#[test]
fn real_census_is_conjugation_invariant_families() {
    for (l, n) in [(2, 4), (3, 36)] {
        let nm = 2 * l;
        let all = marks::full(nm);
        let invariant = census(nm)
            .into_iter()
            .filter(|k| {
                let set: BTreeSet<MarkSet> = k.iter().copied().collect();
                set.iter().all(|&s| set.contains(&normalize(marks::conj_set(s), all)))
            })
            .count();
        assert_eq!(invariant, n);
        assert_eq!(count_trees(l, true).unwrap(), n);
        assert_eq!(library_keys(l, true).len(), n);
    }
}

#[test]
fn below_threshold() {
    assert_eq!(enumerate_trees(2, false).unwrap_err(), Error::TooFewMarks(2));
    assert_eq!(enumerate_trees(1, true).unwrap_err(), Error::TooFewMarks(1));
}

#[test]
fn canonical_form_examples() {
    let one = smooth_tree(4, false).unwrap();
    assert_eq!(one.canonical_form(), "C4[]");
    let a = split_tree(4, &[1, 2]);
    let b = MarkedTree::new(4, false, 2, vec![(0, 1)], vec![1, 1, 0, 0], None).unwrap();
    assert_eq!(a.canonical_form(), b.canonical_form());
    assert_ne!(a.canonical_form(), split_tree(4, &[1, 3]).canonical_form());
    for (l, real) in [(5, false), (6, false), (3, true)] {
        let forms: BTreeSet<String> = enumerate_trees(l, real).unwrap().iter().map(MarkedTree::canonical_form).collect();
        assert_eq!(forms.len(), count_trees(l, real).unwrap());
    }
}

#[test]
fn example_tree_splits_and_pivot() {
    let t = example_tree();
    let e = OEdge::new(0, 1);
    let (side, rest) = t.subtree_split(e).unwrap();
    assert_eq!(side, vec![0]);
    assert_eq!(rest, vec![1, 2, 3, 4, 5]);
    assert_eq!(t.side_marks(e), marks::set([1, 2, 3]));
    assert_eq!(t.pivot(1, 4, 8).unwrap(), 1);
    assert_eq!(t.pivot(7, 9, 6).unwrap(), 3);
    assert!(smooth_tree(4, false).unwrap().subtree_split(OEdge::new(0, 1)).is_err());
    let s = split_tree(5, &[1, 2]);
    assert_eq!(s.side_marks(OEdge::new(0, 1)), marks::set([1, 2]));
}

#[test]
fn independence_examples() {
    let t = split_tree(4, &[1, 2]);
    assert!(t.independent(0, 1, 3));
    assert!(!t.independent(0, 3, 4));
    assert!(t.independent(1, 3, 4));
}

#[test]
fn independence_locus_is_the_path() {
    for t in enumerate_trees(6, false).unwrap() {
        for i in 1..=6 {
            for j in 1..=6 {
                if i == j {
                    continue;
                }
                let locus: Vec<usize> = (0..t.vertex_count()).filter(|&v| t.independent(v, i, j)).collect();
                let mut path = t.path(t.mu(i), t.mu(j));
                path.sort_unstable();
                assert_eq!(locus, path);
            }
        }
    }
}

#[test]
fn pivot_is_unique() {
    for t in enumerate_trees(6, false).unwrap() {
        for (i, j, k) in [(1, 2, 3), (1, 4, 6), (2, 5, 6), (3, 4, 5)] {
            let all: Vec<usize> = (0..t.vertex_count())
                .filter(|&v| t.independent(v, i, j) && t.independent(v, j, k) && t.independent(v, i, k))
                .collect();
            assert_eq!(all, vec![t.pivot(i, j, k).unwrap()]);
        }
    }
}

#[test]
fn contractions() {
    assert_eq!(smooth_tree(4, false).unwrap().contractions().len(), 1);
    let two = split_tree(4, &[1, 2]).contractions();
    assert_eq!(two.len(), 2);
    assert_eq!(two[0].tree.canonical_form(), "C4[{1,2}]");
    assert_eq!(two[1].tree.canonical_form(), "C4[]");
    for l in [5, 6] {
        let forms: BTreeSet<String> = enumerate_trees(l, false).unwrap().iter().map(MarkedTree::canonical_form).collect();
        for t in enumerate_trees(l, false).unwrap() {
            let cs = t.contractions();
            assert_eq!(cs.len(), 1 << t.edges().len());
            for c in cs {
                assert!(forms.contains(&c.tree.canonical_form()));
                for (k, &(u, w)) in t.edges().iter().enumerate() {
                    let collapsed = c.mask >> k & 1 == 1;
                    assert_eq!(c.kappa[u] == c.kappa[w], collapsed);
                }
                for m in 1..=l {
                    assert_eq!(c.tree.mu(m), c.kappa[t.mu(m)]);
                }
            }
        }
    }
}

#[test]
fn real_contractions_stay_real() {
    let forms: BTreeSet<String> = enumerate_trees(3, true).unwrap().iter().map(MarkedTree::canonical_form).collect();
    for t in enumerate_trees(3, true).unwrap() {
        for c in t.real_contractions() {
            assert!(c.tree.phi().is_some());
            assert!(forms.contains(&c.tree.canonical_form()));
        }
    }
}

#[test]
fn attachments() {
    let one = smooth_tree(3, false).unwrap().attach_point(0).unwrap();
    assert_eq!(one.canonical_form(), "C4[]");
    let path = split_tree(4, &[1, 2]).attach_at_edge(0).unwrap();
    assert_eq!(path.vertex_count(), 3);
    let mid = path.mu(5);
    assert_eq!(path.vertex_marks(mid), vec![5]);
    assert_eq!(path.deg(mid), 2);
    assert!(path.is_trivalent());

    let h = enumerate_trees(2, true)
        .unwrap()
        .into_iter()
        .find(|t| t.edges().len() == 1 && t.is_fixed(0) && t.is_fixed(1))
        .unwrap();
    let r = h.attach_at_edge(0).unwrap();
    let x = r.mu(marks::plus(3));
    assert_eq!(r.mu(marks::minus(3)), x);
    assert!(r.is_fixed(x));
}

#[test]
fn real_splits_commute_with_phi() {
    for l in [2, 3] {
        for t in enumerate_trees(l, true).unwrap() {
            let p = t.phi().unwrap().to_vec();
            for e in t.oriented_edges() {
                let (side, _) = t.subtree_split(e).unwrap();
                let mut image: Vec<usize> = side.iter().map(|&v| p[v]).collect();
                image.sort_unstable();
                let (img_side, _) = t.subtree_split(OEdge::new(p[e.tail], p[e.head])).unwrap();
                assert_eq!(image, img_side);
                for v in 0..t.vertex_count() {
                    assert_eq!(marks::conj_set(t.vertex_mark_set(v)), t.vertex_mark_set(p[v]));
                }
            }
        }
    }
}

#[test]
fn json_round_trip() {
    for (l, real) in [(5, false), (3, true)] {
        for t in enumerate_trees(l, real).unwrap() {
            assert_eq!(MarkedTree::from_json(&t.to_json()).unwrap(), t);
        }
    }
    let bad = serde_json::json!({"l": 4, "real": false, "edges": [], "mu": {"1": 0, "2": 0, "3": 0}});
    assert!(MarkedTree::from_json(&bad).is_err());
}

#[test]
fn validation_rejects_unstable_and_bad_phi() {
    assert!(MarkedTree::new(4, false, 2, vec![(0, 1)], vec![0, 1, 1, 1], None).is_err());
    assert!(MarkedTree::new(4, false, 3, vec![(0, 1), (0, 2)], vec![1, 1, 2, 2], None).is_err());
    assert!(MarkedTree::new(2, true, 1, vec![], vec![0; 4], Some(vec![0])).is_ok());
    assert!(MarkedTree::new(2, true, 2, vec![(0, 1)], vec![0, 1, 0, 1], Some(vec![0, 1])).is_err());
}

proptest! {
    #[test]
    fn sides_partition_marks(idx in 0usize..236) {
        let trees = enumerate_trees(6, false).unwrap();
        let t = &trees[idx % trees.len()];
        for e in t.oriented_edges() {
            let a = t.side_marks(e);
            let b = t.side_marks(e.rev());
            prop_assert_eq!(a & b, 0);
            prop_assert_eq!(a | b, t.all_marks());
        }
    }
}
