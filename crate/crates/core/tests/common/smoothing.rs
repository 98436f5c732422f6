use std::collections::BTreeMap;

use dmlab_core::curves::StableCurve;
use dmlab_core::exactfield::ProjPoint;
use dmlab_core::trees::MarkedTree;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;


pub fn q(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// `α + βt` with integer data.
pub type Lin = (BigRational, BigRational);

pub fn lin_mul(a: &Lin, b: &Lin) -> [BigRational; 3] {
    [&a.0 * &b.0, &a.0 * &b.1 + &a.1 * &b.0, &a.1 * &b.1]
}

/// Limit at `t = 0` of a ratio of polynomials in `t`: `None` for `∞`.
pub fn limit(num: &[BigRational; 3], den: &[BigRational; 3]) -> Option<BigRational> {
    let lead = |p: &[BigRational; 3]| p.iter().position(|c| !c.is_zero()).unwrap();
    let (a, b) = (lead(num), lead(den));
    match a.cmp(&b) {
        std::cmp::Ordering::Greater => Some(BigRational::zero()),
        std::cmp::Ordering::Less => None,
        std::cmp::Ordering::Equal => Some(&num[a] / &den[b]),
    }
}

/// Limit of `CR(z₁,z₂,z₃,z₄)` as the marks in `bubble` collide: those
/// marks sit at `t·x`, the others at `x`.
pub fn smoothing_limit(x: [i64; 4], bubble: [bool; 4]) -> Option<BigRational> {
    let z: Vec<Lin> = (0..4)
        .map(|k| if bubble[k] { (q(0), q(x[k])) } else { (q(x[k]), q(0)) })
        .collect();
    let d = |i: usize, j: usize| (&z[i].0 - &z[j].0, &z[i].1 - &z[j].1);
    let num = lin_mul(&d(0, 2), &d(1, 3));
    let den = lin_mul(&d(0, 3), &d(1, 2));
    limit(&num, &den)
}

/// Nodal `ℓ = 4` curve: marks `a, b` on component 0 at `x_a, x_b` with the
/// node at `∞`, the other two on component 1 with the node at `0`.
pub fn nodal4(pair: [usize; 2], x: [i64; 4]) -> StableCurve {
    let mu: Vec<usize> = (1..=4).map(|m| usize::from(!pair.contains(&m))).collect();
    let t = MarkedTree::new(4, false, 2, vec![(0, 1)], mu, None).unwrap();
    let mk = (0..4).map(|k| ProjPoint::int(x[k])).collect();
    let nodes = BTreeMap::from([((0, 1), ProjPoint::infinity()), ((1, 0), ProjPoint::zero())]);
    StableCurve::new(t, mk, nodes, vec![false, false]).unwrap()
}

pub fn as_point(v: Option<BigRational>) -> ProjPoint {
    match v {
        None => ProjPoint::infinity(),
        Some(r) => format!("[{}:1]", r).parse().unwrap(),
    }
}

