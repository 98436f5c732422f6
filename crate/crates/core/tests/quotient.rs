use std::collections::BTreeMap;

use dmlab_core::curves::{sample_curve, Bullet, StableCurve};
use dmlab_core::exec::Exec;
use dmlab_core::exactfield::ProjPoint;
use dmlab_core::marks::{self, MarkSet};
use dmlab_core::quotient::{
    all_rho_stars, boundary_representative, class_key, equivalent, relation_closure, verify_injectivity,
    verify_y_identities, y_membership, InjectivityConfig,
};
use dmlab_core::strata::{self, Kind};
use dmlab_core::trees::{enumerate_trees, MarkedTree};
use dmlab_core::verify::case_rng;

fn p(s: &str) -> ProjPoint {
    s.parse().unwrap()
}

/// `ℓ = 5` base with `1, 2` on component 0 and `3, 4, 5` on component 1.
fn base() -> StableCurve {
    let t = MarkedTree::new(5, false, 2, vec![(0, 1)], vec![0, 0, 1, 1, 1], None).unwrap();
    let nodes = BTreeMap::from([((0, 1), ProjPoint::infinity()), ((1, 0), ProjPoint::zero())]);
    let mk = vec![p("[1:1]"), p("[2:1]"), p("[1:1]"), p("[2+i:1]"), p("[-3:1]")];
    StableCurve::new(t, mk, nodes, vec![false; 2]).unwrap()
}

fn s(v: &[usize]) -> MarkSet {
    marks::set(v.iter().copied())
}

#[test]
fn equivalence_examples() {
    let b = base();
    let far1 = b.add_free_point(1, p("[5:1]")).unwrap();
    let far2 = b.add_free_point(1, p("[1/2-i:1]")).unwrap();
    assert!(equivalent(&far1, &far1, s(&[1, 2]), false));
    assert!(far1.in_divisor(s(&[1, 2])) && far2.in_divisor(s(&[1, 2])));
    assert!(equivalent(&far1, &far2, s(&[1, 2]), false));
    assert!(!equivalent(&far1, &far2, s(&[1, 3]), false));
    let near1 = b.add_free_point(0, p("[5:1]")).unwrap();
    let near2 = b.add_free_point(0, p("[-1:1]")).unwrap();
    assert!(!equivalent(&near1, &near2, s(&[1, 2]), false));
    assert!(!equivalent(&near1, &far1, s(&[1, 2]), false));
}

#[test]
fn closure_examples() {
    let b = base();
    let far: Vec<StableCurve> =
        ["[5:1]", "[1/2-i:1]", "[7/3:1]", "inf"].iter().map(|z| b.add_free_point(1, p(z)).unwrap()).collect();
    assert_eq!(relation_closure(&far[..1], None, false), vec![0]);
    assert_eq!(relation_closure(&far, None, false), vec![0; 4]);
    let last = *all_rho_stars(5, false).last().unwrap();
    assert_eq!(relation_closure(&far, last, false), vec![0, 1, 2, 3]);
    let mut mixed = far.clone();
    mixed.push(b.add_free_point(0, p("[5:1]")).unwrap());
    mixed.push(b.add_free_point(0, p("[-1:1]")).unwrap());
    assert_eq!(relation_closure(&mixed, None, false), vec![0, 0, 0, 0, 4, 5]);
}

#[test]
fn class_key_examples() {
    let b = base();
    let far1 = b.add_free_point(1, p("[5:1]")).unwrap();
    let far2 = b.add_free_point(1, p("[1/2-i:1]")).unwrap();
    assert_eq!(class_key(&far1, None).unwrap(), class_key(&far2, None).unwrap());
    let near1 = b.add_free_point(0, p("[5:1]")).unwrap();
    let near2 = b.add_free_point(0, p("[-1:1]")).unwrap();
    assert_ne!(class_key(&near1, None).unwrap(), class_key(&near2, None).unwrap());
    assert_ne!(class_key(&near1, None).unwrap(), class_key(&far1, None).unwrap());

    let smooth = StableCurve::smooth(4, false, (0..4).map(ProjPoint::int).collect(), false).unwrap();
    let keys: Vec<_> = ["[7:1]", "[1/2:1]", "[i:1]", "inf"]
        .iter()
        .map(|z| class_key(&smooth.add_free_point(0, p(z)).unwrap(), None).unwrap())
        .collect();
    for i in 0..keys.len() {
        for j in 0..i {
            assert_ne!(keys[i], keys[j]);
        }
    }
}

#[test]
fn y_membership_examples() {
    for (k, t) in enumerate_trees(5, false).unwrap().iter().enumerate() {
        let b = sample_curve(t, 10, &mut case_rng(31, k as u64)).unwrap();
        for rho in strata::build_a_ell(5).into_iter().map(|l| l.rho) {
            if !b.in_divisor(rho) {
                continue;
            }
            let c = boundary_representative(&b, rho, &mut case_rng(32, k as u64), 10).unwrap();
            assert!(y_membership(&c, rho, Bullet::Zero).unwrap());
            assert!(y_membership(&c, rho, Bullet::Plus).unwrap());
        }
    }
}

#[test]
fn real_coincidences_on_representatives() {
    let (_, labels) = strata::build_a_ell_real(3);
    let all = marks::full(6);
    let mut d1_seen = 0;
    for (k, t) in enumerate_trees(3, true).unwrap().iter().enumerate() {
        let b = sample_curve(t, 10, &mut case_rng(33, k as u64)).unwrap();
        for lab in &labels {
            if !b.in_divisor(lab.rho) {
                continue;
            }
            let c = boundary_representative(&b, lab.rho, &mut case_rng(34, k as u64), 10).unwrap();
            assert!(y_membership(&c, lab.rho, Bullet::Zero).unwrap());
            match lab.kind {
                Kind::D1 => {
                    let partner = all ^ marks::conj_set(lab.rho);
                    assert!(y_membership(&c, partner, Bullet::Plus).unwrap());
                    d1_seen += 1;
                }
                Kind::H => {
                    assert_eq!(
                        y_membership(&c, lab.rho, Bullet::Minus).unwrap(),
                        y_membership(&c, lab.rho, Bullet::Zero).unwrap()
                    );
                }
                _ => {}
            }
        }
    }
    assert!(d1_seen > 0);
}

fn cfg(l: usize, real: bool, rho_star: Option<MarkSet>, random: usize) -> InjectivityConfig {
    InjectivityConfig { l, real, rho_star, bases_per_tree: 1, reps: 2, random, bound: 10, seed: 35 }
}

#[test]
fn injectivity_small() {
    for rho_star in all_rho_stars(4, false) {
        let r = verify_injectivity(&cfg(4, false, rho_star, 100), Exec::Sequential).unwrap();
        assert!(r.passed(), "{}", r.to_json());
        assert!(r.in_domain > 0);
    }
    for rho_star in all_rho_stars(2, true) {
        let r = verify_injectivity(&cfg(2, true, rho_star, 100), Exec::Sequential).unwrap();
        assert!(r.passed(), "{}", r.to_json());
    }
}

#[test]
fn identity_quotient_at_the_top() {
    let last = *all_rho_stars(4, false).last().unwrap();
    let r = verify_injectivity(&cfg(4, false, last, 50), Exec::Sequential).unwrap();
    assert!(r.passed());
    assert!(r.classes <= r.samples);
}

#[test]
fn y_identities_small() {
    for (l, real) in [(4, false), (2, true)] {
        let mut checks = 0;
        for rho_star in all_rho_stars(l, real) {
            let r = verify_y_identities(&cfg(l, real, rho_star, 0), Exec::Sequential).unwrap();
            assert!(r.passed(), "{}", r.to_json());
            checks += r.checks;
        }
        assert!(checks > 0);
    }
}
