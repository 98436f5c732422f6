use dmlab_core::charts::{
    basis_values, extended_basis, gamma_basis, labels_above, real_slice_check, reconstruct_all, reconstruct_cr,
    v_gamma, MarkingMap,
};
use dmlab_core::curves::sample_curve;
use dmlab_core::exec::Exec;
use dmlab_core::exactfield::{GaussRat, ProjPoint, Rat};
use dmlab_core::marks::{self, MarkSet};
use dmlab_core::strata::stratum_edge;
use dmlab_core::trees::{enumerate_trees, smooth_tree, EdgeKind, MarkedTree, OEdge};
use dmlab_core::verify::{case_rng, ordered_quads, verify_basis, verify_real_slice};
use dmlab_core::Error;

/// Vertices `v=0, v′=1, a=2, b=3, c=4, d=5` of the standard 11-marked tree.
fn example_tree() -> MarkedTree {
    MarkedTree::new(11, false, 6, vec![(0, 1), (1, 2), (1, 3), (3, 4), (3, 5)], vec![0, 0, 0, 2, 2, 3, 4, 4, 5, 5, 5], None)
        .unwrap()
}

fn example_eta() -> MarkingMap {
    MarkingMap::from_entries([
        ((0, 1), 6),
        ((1, 0), 2),
        ((1, 2), 4),
        ((2, 1), 2),
        ((1, 3), 6),
        ((3, 1), 4),
        ((3, 4), 8),
        ((4, 3), 6),
        ((3, 5), 9),
        ((5, 3), 8),
    ])
}

#[test]
fn example_marking_map() {
    let t = example_tree();
    let eta = example_eta();
    assert!(eta.is_systematic(&t));
    let want: [&[usize]; 6] = [&[1, 2, 3, 6], &[2, 4, 6], &[2, 4, 5], &[4, 6, 8, 9], &[6, 7, 8], &[8, 9, 10, 11]];
    for (v, w) in want.iter().enumerate() {
        assert_eq!(eta.gamma_v(&t, v), w.to_vec());
    }
    let basis = gamma_basis(&t, &eta).unwrap();
    assert_eq!(basis.len(), 8);
    let c = sample_curve(&t, 10, &mut case_rng(21, 0)).unwrap();
    let values = basis_values(&c, &basis).unwrap();
    let table = reconstruct_all(&t, &eta, &basis, &values).unwrap();
    for q in ordered_quads(11).into_iter().step_by(13) {
        assert_eq!(table.get(q).unwrap(), c.cross_ratio_q(q).unwrap());
    }
    let broken = MarkingMap::from_entries((0..6).flat_map(|v| t.neighbors(v).iter().map(move |&w| ((v, w), 1))).collect::<Vec<_>>());
    assert!(!broken.is_marking_map(&t));
}

#[test]
fn min_rule_examples() {
    let t = MarkedTree::new(5, false, 2, vec![(0, 1)], vec![0, 0, 1, 1, 1], None).unwrap();
    let eta = MarkingMap::systematic(&t);
    assert_eq!(eta.get(0, 1), 3);
    assert_eq!(eta.get(1, 0), 1);
    assert!(eta.is_systematic(&t));
    assert!(MarkingMap::systematic(&smooth_tree(5, false).unwrap()).is_empty());
    for l in 4..=7 {
        for t in enumerate_trees(l, false).unwrap() {
            assert!(MarkingMap::systematic(&t).is_systematic(&t));
        }
    }
}

#[test]
fn basis_sizes() {
    let one = gamma_basis(&smooth_tree(5, false).unwrap(), &MarkingMap::systematic(&smooth_tree(5, false).unwrap())).unwrap();
    assert_eq!(one.quads(), vec![[1, 2, 3, 4], [1, 2, 3, 5]]);
    let t = MarkedTree::new(4, false, 2, vec![(0, 1)], vec![0, 0, 1, 1], None).unwrap();
    let b = gamma_basis(&t, &MarkingMap::systematic(&t)).unwrap();
    assert_eq!(b.len(), 1);
    assert!(b.vertex_quads.iter().all(Vec::is_empty));
    for l in 4..=7 {
        for t in enumerate_trees(l, false).unwrap() {
            assert_eq!(gamma_basis(&t, &MarkingMap::systematic(&t)).unwrap().len(), l - 3);
        }
    }
    for l in 2..=4 {
        for t in enumerate_trees(l, true).unwrap() {
            assert_eq!(gamma_basis(&t, &MarkingMap::systematic(&t)).unwrap().len(), 2 * l - 3);
        }
    }
}

#[test]
fn non_systematic_maps_are_rejected() {
    let t = MarkedTree::new(5, false, 2, vec![(0, 1)], vec![0, 0, 1, 1, 1], None).unwrap();
    let eta = MarkingMap::from_entries([((0, 1), 3), ((1, 0), 4)]);
    assert!(!eta.is_marking_map(&t));
    assert_eq!(gamma_basis(&t, &eta), Err(Error::NotSystematic));
}

#[test]
fn reconstruction_on_one_vertex() {
    let t = smooth_tree(5, false).unwrap();
    let eta = MarkingMap::systematic(&t);
    let c = sample_curve(&t, 10, &mut case_rng(22, 0)).unwrap();
    let basis = gamma_basis(&t, &eta).unwrap();
    let values = basis_values(&c, &basis).unwrap();
    assert_eq!(reconstruct_cr(&values, &t, &eta, [1, 2, 3, 4]).unwrap(), values[0]);
    for q in [[2, 1, 3, 5], [5, 3, 2, 1], [4, 5, 1, 2], [3, 4, 5, 1]] {
        assert_eq!(reconstruct_cr(&values, &t, &eta, q).unwrap(), c.cross_ratio_q(q).unwrap());
    }
}

#[test]
fn reconstruction_matches_curves() {
    for l in 4..=6 {
        let r = verify_basis(l, false, 20, 10, 23, Exec::Sequential).unwrap();
        assert!(r.passed(), "{}", r.to_json());
        assert!(r.comparisons > 0);
    }
    for l in 2..=3 {
        let r = verify_basis(l, true, 10, 10, 24, Exec::Sequential).unwrap();
        assert!(r.passed(), "{}", r.to_json());
    }
}

#[test]
fn edge_coordinate_vanishes_on_the_divisor() {
    for t in enumerate_trees(6, false).unwrap() {
        let eta = MarkingMap::systematic(&t);
        let basis = gamma_basis(&t, &eta).unwrap();
        let c = sample_curve(&t, 10, &mut case_rng(25, t.edges().len() as u64)).unwrap();
        for (e, q) in &basis.edge_quads {
            assert!(c.in_divisor(t.side_marks(*e)));
            assert_eq!(c.cross_ratio_q(*q).unwrap(), ProjPoint::zero());
        }
    }
}

/// `V_Γ(ρ*)` by brute force over vertices and labels above `ρ*`.
fn v_gamma_oracle(t: &MarkedTree, rho_star: Option<MarkSet>) -> Vec<usize> {
    let above = labels_above(t.l(), t.is_real_labeled(), rho_star);
    (0..t.vertex_count())
        .filter(|&v| {
            above.iter().all(|&rho| match stratum_edge(t, rho) {
                None => true,
                Some(e) => {
                    let (side, _) = t.subtree_split(e).unwrap();
                    side.contains(&v)
                }
            })
        })
        .collect()
}

#[test]
fn v_gamma_brute_force() {
    for (l, real) in [(5, false), (6, false), (3, true)] {
        let stars: Vec<Option<MarkSet>> = std::iter::once(None).chain(labels_above(l, real, None).into_iter().map(Some)).collect();
        for t in enumerate_trees(l, real).unwrap() {
            for &s in &stars {
                let v = v_gamma(&t, s);
                assert!(!v.is_empty());
                assert_eq!(v, v_gamma_oracle(&t, s));
            }
        }
    }
}

#[test]
fn v_gamma_examples() {
    let t = MarkedTree::new(5, false, 2, vec![(0, 1)], vec![0, 0, 1, 1, 1], None).unwrap();
    let last = *labels_above(5, false, None).last().unwrap();
    assert_eq!(v_gamma(&t, Some(last)), vec![0, 1]);
    assert_eq!(v_gamma(&t, None), vec![0]);
    let fig = example_tree();
    let e = stratum_edge(&fig, marks::set([1, 2, 3])).unwrap();
    let (side, _) = fig.subtree_split(e).unwrap();
    assert_eq!(side, vec![0]);
    assert_eq!(v_gamma(&fig, None), vec![0]);
}

#[test]
fn extension() {
    let t = MarkedTree::new(5, false, 2, vec![(0, 1)], vec![0, 0, 1, 1, 1], None).unwrap();
    let eta = MarkingMap::systematic(&t);
    let b = extended_basis(&t, &eta, 0, None).unwrap();
    assert_eq!(b.extension, vec![[1, 2, 3, 6]]);
    assert_eq!(b.all_quads().len(), 3);
    assert_eq!(extended_basis(&t, &eta, 1, None), Err(Error::NotInVGamma(1)));
    let r = enumerate_trees(2, true).unwrap().into_iter().find(|t| t.edges().len() == 1).unwrap();
    let er = MarkingMap::systematic(&r);
    let v = v_gamma(&r, None)[0];
    let b = extended_basis(&r, &er, v, None).unwrap();
    assert_eq!(b.extension.len(), 2);
    assert_eq!(b.extension[1], b.extension[0].map(marks::conj));
    assert!(b.extension[0].contains(&marks::plus(3)));
}

fn perturbed(z: &ProjPoint) -> ProjPoint {
    let d = GaussRat::new(Rat::frac(1, 7).unwrap(), Rat::frac(1, 5).unwrap());
    match z.value() {
        Some(x) => ProjPoint::finite(x.add(&d)),
        None => ProjPoint::finite(d),
    }
}

#[test]
fn real_slice_examples() {
    let mut perturbations = 0;
    for (k, t) in enumerate_trees(3, true).unwrap().iter().enumerate() {
        let eta = MarkingMap::systematic(t);
        let basis = gamma_basis(t, &eta).unwrap();
        let c = sample_curve(t, 10, &mut case_rng(26, k as u64)).unwrap();
        let values = basis_values(&c, &basis).unwrap();
        assert!(real_slice_check(&values, t, &eta).unwrap());
        for (e, q) in &basis.edge_quads {
            let idx = t.edge_index(e.tail, e.head).unwrap();
            if t.edge_kind(idx) == Some(EdgeKind::H) {
                let pos = basis.quads().iter().position(|x| x == q).unwrap();
                let mut bad = values.clone();
                bad[pos] = perturbed(&bad[pos]);
                assert!(!real_slice_check(&bad, t, &eta).unwrap_or(false));
                perturbations += 1;
            }
        }
    }
    assert!(perturbations > 0);
    let one = smooth_tree(3, true).unwrap();
    let eta = MarkingMap::systematic(&one);
    let c = sample_curve(&one, 10, &mut case_rng(27, 0)).unwrap();
    let values = basis_values(&c, &gamma_basis(&one, &eta).unwrap()).unwrap();
    assert!(real_slice_check(&values, &one, &eta).unwrap());
    let plain = smooth_tree(5, false).unwrap();
    assert_eq!(real_slice_check(&[], &plain, &MarkingMap::systematic(&plain)), Err(Error::NotReal));
}

#[test]
fn real_slice_suite() {
    for l in [2, 3] {
        let r = verify_real_slice(l, 6, 10, 28, Exec::Sequential).unwrap();
        assert!(r.passed(), "{}", r.to_json());
    }
}

#[test]
fn edge_quads_follow_the_marking_map() {
    for t in enumerate_trees(6, false).unwrap() {
        let eta = MarkingMap::systematic(&t);
        let b = gamma_basis(&t, &eta).unwrap();
        for (e, q) in &b.edge_quads {
            let OEdge { tail: u, head: w } = *e;
            assert_eq!(q[0], eta.get(w, u));
            assert_eq!(q[1], eta.get(u, w));
            assert!(b.vertex_sets[u].contains(&q[2]));
            assert!(b.vertex_sets[w].contains(&q[3]));
        }
    }
}
