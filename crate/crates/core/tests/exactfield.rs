use dmlab_core::exactfield::{cross_ratio, GaussRat, Mobius, ProjPoint, Rat};
use dmlab_core::Error;
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn g(s: &str) -> GaussRat {
    s.parse().unwrap()
}

fn p(s: &str) -> ProjPoint {
    s.parse().unwrap()
}

fn gauss() -> impl Strategy<Value = GaussRat> {
    (-40i64..=40, 1i64..=30, -40i64..=40, 1i64..=30).prop_map(|(a, b, c, d)| GaussRat::from_fracs(a, b, c, d).unwrap())
}

fn point() -> impl Strategy<Value = ProjPoint> {
    prop_oneof![1 => Just(ProjPoint::infinity()), 12 => gauss().prop_map(ProjPoint::finite)]
}

fn distinct(n: usize) -> impl Strategy<Value = Vec<ProjPoint>> {
    prop::collection::vec(point(), n).prop_filter("distinct", |v| (0..v.len()).all(|i| (0..i).all(|j| v[i] != v[j])))
}

/// Complex fractions as plain `(re, im)` pairs of big rationals.
type C = (BigRational, BigRational);

fn big(r: &Rat) -> BigRational {
    BigRational::new(r.numer(), r.denom())
}

fn to_c(z: &GaussRat) -> C {
    let s = z.to_string();
    let (re, im) = split_parts(&s);
    (re, im)
}

fn parse_rat(s: &str) -> BigRational {
    match s.split_once('/') {
        Some((n, d)) => BigRational::new(n.parse::<BigInt>().unwrap(), d.parse::<BigInt>().unwrap()),
        None => BigRational::from_integer(s.parse::<BigInt>().unwrap()),
    }
}

/// Splits the printed form `a/b+c/d*i` without the library parser.
fn split_parts(s: &str) -> (BigRational, BigRational) {
    let body = s.strip_suffix("*i").unwrap();
    let k = body.char_indices().skip(1).filter(|&(_, c)| c == '+' || c == '-').map(|(k, _)| k).last().unwrap();
    let (re, im) = body.split_at(k);
    (parse_rat(re), parse_rat(im.trim_start_matches('+')))
}

fn c_sub(a: &C, b: &C) -> C {
    (&a.0 - &b.0, &a.1 - &b.1)
}

fn c_mul(a: &C, b: &C) -> C {
    (&a.0 * &b.0 - &a.1 * &b.1, &a.0 * &b.1 + &a.1 * &b.0)
}

fn c_div(a: &C, b: &C) -> C {
    let n = &b.0 * &b.0 + &b.1 * &b.1;
    let conj = (b.0.clone(), -b.1.clone());
    let p = c_mul(a, &conj);
    (p.0 / &n, p.1 / n)
}

fn oracle_cr(z: &[C]) -> C {
    let num = c_mul(&c_sub(&z[0], &z[2]), &c_sub(&z[1], &z[3]));
    let den = c_mul(&c_sub(&z[0], &z[3]), &c_sub(&z[1], &z[2]));
    c_div(&num, &den)
}

#[test]
fn field_examples() {
    assert_eq!(g("1+2*i").conj(), g("1-2*i"));
    assert_eq!(g("1/2").mul(&g("2/3")), g("1/3"));
    assert_eq!(g("3/4+i").div(&g("-i")).unwrap(), g("-1+3/4*i"));
    assert_eq!(g("5").div(&GaussRat::zero()), Err(Error::DivisionByZero));
    assert_eq!(Rat::frac(1, 0), Err(Error::DivisionByZero));
    assert_eq!(Rat::frac(6, -4).unwrap(), Rat::frac(-3, 2).unwrap());
    assert_eq!(Rat::frac(6, -4).unwrap().denom(), BigInt::from(2));
}

#[test]
fn cross_ratio_examples() {
    let n = ProjPoint::int;
    assert_eq!(cross_ratio(&n(0), &n(1), &n(2), &n(3)).unwrap(), p("[4/3:1]"));
    assert_eq!(cross_ratio(&n(0), &n(1), &ProjPoint::infinity(), &n(2)).unwrap(), p("[1/2:1]"));
    let (z, w, w2) = (p("[1+i:1]"), p("[2/3:1]"), p("[-5*i:1]"));
    assert_eq!(cross_ratio(&z, &w, &z, &w2).unwrap(), ProjPoint::zero());
    assert_eq!(cross_ratio(&z, &w, &w2, &z).unwrap(), ProjPoint::infinity());
    assert_eq!(cross_ratio(&z, &z, &w, &w2).unwrap(), ProjPoint::one());
    assert_eq!(cross_ratio(&z, &z, &z, &w), Err(Error::Unstable));
    assert_eq!(cross_ratio(&z, &w, &z, &w).unwrap(), ProjPoint::zero());
    assert_eq!(cross_ratio(&z, &w, &w, &z).unwrap(), ProjPoint::infinity());
    assert_eq!(cross_ratio(&z, &z, &w, &w).unwrap(), ProjPoint::one());
    assert_eq!(cross_ratio(&w, &z, &z, &z), Err(Error::Unstable));
}

#[test]
fn text_format() {
    assert_eq!(g("1/2-3/4*i").to_string(), "1/2-3/4*i");
    assert_eq!(ProjPoint::infinity().to_string(), "inf");
    assert_eq!(p("[2:4]"), p("[1/2:1]"));
    assert_eq!(p("[1:0]"), ProjPoint::infinity());
    assert!(matches!("[0:0]".parse::<ProjPoint>(), Err(Error::ZeroPair)));
    assert!("1/0".parse::<GaussRat>().is_err());
    assert!(matches!("[1,2]".parse::<ProjPoint>(), Err(Error::Parse(_))));
}

#[test]
fn product_indeterminacy() {
    assert_eq!(ProjPoint::zero().mul(&ProjPoint::infinity()), Err(Error::Indeterminate));
    assert_eq!(ProjPoint::int(3).mul(&ProjPoint::infinity()).unwrap(), ProjPoint::infinity());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn gauss_round_trip(z in gauss()) {
        prop_assert_eq!(z.to_string().parse::<GaussRat>().unwrap(), z);
    }

    #[test]
    fn point_round_trip(z in point()) {
        prop_assert_eq!(z.to_string().parse::<ProjPoint>().unwrap(), z);
    }

    #[test]
    fn rat_matches_bigrational(a in -10_000i64..10_000, b in 1i64..10_000, c in -10_000i64..10_000, d in 1i64..10_000) {
        let x = Rat::frac(a, b).unwrap();
        let y = Rat::frac(c, d).unwrap();
        prop_assert_eq!(big(&x.add(&y)), big(&x) + big(&y));
        prop_assert_eq!(big(&x.mul(&y)), big(&x) * big(&y));
        prop_assert_eq!(big(&x.sub(&y)), big(&x) - big(&y));
        if !y.is_zero() {
            prop_assert_eq!(big(&x.div(&y).unwrap()), big(&x) / big(&y));
        }
    }

    #[test]
    fn field_axioms(x in gauss(), y in gauss(), z in gauss()) {
        prop_assert_eq!(x.add(&y).add(&z), x.add(&y.add(&z)));
        prop_assert_eq!(x.mul(&y).mul(&z), x.mul(&y.mul(&z)));
        prop_assert_eq!(x.mul(&y.add(&z)), x.mul(&y).add(&x.mul(&z)));
        prop_assert_eq!(x.mul(&y), y.mul(&x));
        prop_assert_eq!(x.sub(&x), GaussRat::zero());
        prop_assert_eq!(x.conj().conj(), x.clone());
        prop_assert_eq!(x.mul(&y).conj(), x.conj().mul(&y.conj()));
        if !y.is_zero() {
            prop_assert_eq!(x.div(&y).unwrap().mul(&y), x.clone());
            prop_assert_eq!(y.inv().unwrap().mul(&y), GaussRat::one());
        }
    }

    #[test]
    fn cross_ratio_matches_oracle(z in prop::collection::vec(gauss(), 4)
        .prop_filter("distinct", |v| (0..4).all(|i| (0..i).all(|j| v[i] != v[j])))) {
        let pts: Vec<ProjPoint> = z.iter().cloned().map(ProjPoint::finite).collect();
        let got = cross_ratio(&pts[0], &pts[1], &pts[2], &pts[3]).unwrap();
        let want = oracle_cr(&z.iter().map(to_c).collect::<Vec<_>>());
        prop_assert_eq!(to_c(got.value().unwrap()), want);
    }

    #[test]
    fn symmetry_relations(z in distinct(4)) {
        let cr = |a: usize, b: usize, c: usize, d: usize| cross_ratio(&z[a], &z[b], &z[c], &z[d]).unwrap();
        let x = cr(0, 1, 2, 3);
        prop_assert_eq!(cr(2, 3, 0, 1), x.clone());
        prop_assert_eq!(cr(1, 0, 2, 3), x.recip());
        prop_assert_eq!(cr(0, 1, 3, 2), x.recip());
        prop_assert_eq!(cr(3, 1, 2, 0), x.one_minus());
        prop_assert_eq!(cr(0, 2, 1, 3), x.one_minus());
        prop_assert_eq!(cr(2, 1, 0, 3), x.neg_over_one_minus());
        prop_assert_eq!(cr(0, 3, 2, 1), x.neg_over_one_minus());
    }

    #[test]
    fn cocycle(z in distinct(5)) {
        let cr = |a: usize, b: usize, c: usize, d: usize| cross_ratio(&z[a], &z[b], &z[c], &z[d]).unwrap();
        prop_assert_eq!(cr(0, 1, 2, 3).mul(&cr(0, 1, 3, 4)).unwrap(), cr(0, 1, 2, 4));
    }

    #[test]
    fn mobius_invariance(z in distinct(4), a in gauss(), b in gauss(), c in gauss(), d in gauss()) {
        prop_assume!(!a.mul(&d).sub(&b.mul(&c)).is_zero());
        let m = Mobius::new(a, b, c, d).unwrap();
        let w: Vec<ProjPoint> = z.iter().map(|x| m.apply(x)).collect();
        prop_assert_eq!(cross_ratio(&w[0], &w[1], &w[2], &w[3]).unwrap(), cross_ratio(&z[0], &z[1], &z[2], &z[3]).unwrap());
    }

    #[test]
    fn conjugation_commutes(z in distinct(4)) {
        let zc: Vec<ProjPoint> = z.iter().map(ProjPoint::conj).collect();
        prop_assert_eq!(cross_ratio(&z[0], &z[1], &z[2], &z[3]).unwrap().conj(), cross_ratio(&zc[0], &zc[1], &zc[2], &zc[3]).unwrap());
    }

    #[test]
    fn normalizing_map(z in distinct(3)) {
        let m = Mobius::to_inf_one_zero(&z[0], &z[1], &z[2]).unwrap();
        prop_assert!(m.apply(&z[0]).is_infinity());
        prop_assert!(m.apply(&z[1]).is_one());
        prop_assert!(m.apply(&z[2]).is_zero());
    }
}
