//! Exact arithmetic over the Gaussian rationals and the projective line.
//!
//! [`Rat`] is an exact rational that stays on machine integers while the
//! values fit and promotes to arbitrary precision otherwise. [`GaussRat`]
//! pairs two of them, and [`ProjPoint`] is a normalized homogeneous pair.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
enum Repr {
    Small(Ratio<i64>),
    Big(BigRational),
}

/// Exact rational number in lowest terms with positive denominator.
#[derive(Clone, Debug)]
pub struct Rat(Repr);

fn small_ok(r: &Ratio<i64>) -> bool {
    *r.numer() != i64::MIN && *r.denom() != i64::MIN
}

impl Rat {
    pub fn zero() -> Self {
        Rat(Repr::Small(Ratio::from_integer(0)))
    }

    pub fn one() -> Self {
        Rat(Repr::Small(Ratio::from_integer(1)))
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_small(Ratio::from_integer(n))
    }

    /// `n/d` reduced. Fails on `d = 0`.
    pub fn frac(n: i64, d: i64) -> Result<Self> {
        if d == 0 {
            return Err(Error::DivisionByZero);
        }
        if n == i64::MIN || d == i64::MIN {
            return Ok(Self::from_big(BigRational::new(BigInt::from(n), BigInt::from(d))));
        }
        Ok(Self::from_small(Ratio::new(n, d)))
    }

    pub fn from_big(b: BigRational) -> Self {
        match (b.numer().to_i64(), b.denom().to_i64()) {
            (Some(n), Some(d)) if n != i64::MIN && d != i64::MIN => {
                Rat(Repr::Small(Ratio::new_raw(n, d)))
            }
            _ => Rat(Repr::Big(b)),
        }
    }

    pub fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small(r) => BigRational::new_raw(BigInt::from(*r.numer()), BigInt::from(*r.denom())),
            Repr::Big(b) => b.clone(),
        }
    }

    fn from_small(r: Ratio<i64>) -> Self {
        if small_ok(&r) {
            Rat(Repr::Small(r))
        } else {
            Self::from_big(BigRational::new_raw(BigInt::from(*r.numer()), BigInt::from(*r.denom())))
        }
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small(r) => BigInt::from(*r.numer()),
            Repr::Big(b) => b.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small(r) => BigInt::from(*r.denom()),
            Repr::Big(b) => b.denom().clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.0 {
            Repr::Small(r) => r.numer() == &0,
            Repr::Big(b) => b.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match &self.0 {
            Repr::Small(r) => r.numer() == &1 && r.denom() == &1,
            Repr::Big(b) => b.is_one(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small(r) => *r.numer() < 0,
            Repr::Big(b) => b.is_negative(),
        }
    }

    pub fn neg(&self) -> Self {
        match &self.0 {
            Repr::Small(r) => Rat(Repr::Small(-r)),
            Repr::Big(b) => Self::from_big(-b),
        }
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if let (Repr::Small(a), Repr::Small(b)) = (&self.0, &o.0) {
            if let Some(r) = a.checked_add(b) {
                return Self::from_small(r);
            }
        }
        Self::from_big(self.to_big() + o.to_big())
    }

    pub fn sub(&self, o: &Self) -> Self {
        if o.is_zero() {
            return self.clone();
        }
        if let (Repr::Small(a), Repr::Small(b)) = (&self.0, &o.0) {
            if let Some(r) = a.checked_sub(b) {
                return Self::from_small(r);
            }
        }
        Self::from_big(self.to_big() - o.to_big())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        if self.is_one() {
            return o.clone();
        }
        if o.is_one() {
            return self.clone();
        }
        if let (Repr::Small(a), Repr::Small(b)) = (&self.0, &o.0) {
            if let Some(r) = a.checked_mul(b) {
                return Self::from_small(r);
            }
        }
        Self::from_big(self.to_big() * o.to_big())
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        if o.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if o.is_one() {
            return Ok(self.clone());
        }
        if let (Repr::Small(a), Repr::Small(b)) = (&self.0, &o.0) {
            if let Some(r) = a.checked_div(b) {
                return Ok(Self::from_small(r));
            }
        }
        Ok(Self::from_big(self.to_big() / o.to_big()))
    }
}

impl PartialEq for Rat {
    fn eq(&self, o: &Self) -> bool {
        match (&self.0, &o.0) {
            (Repr::Small(a), Repr::Small(b)) => a.numer() == b.numer() && a.denom() == b.denom(),
            (Repr::Big(a), Repr::Big(b)) => a.numer() == b.numer() && a.denom() == b.denom(),
            _ => false,
        }
    }
}

impl Eq for Rat {}

impl Hash for Rat {
    fn hash<H: Hasher>(&self, h: &mut H) {
        match &self.0 {
            Repr::Small(r) => {
                0u8.hash(h);
                r.numer().hash(h);
                r.denom().hash(h);
            }
            Repr::Big(b) => {
                1u8.hash(h);
                b.numer().hash(h);
                b.denom().hash(h);
            }
        }
    }
}

impl PartialOrd for Rat {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Rat {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        match (&self.0, &o.0) {
            (Repr::Small(a), Repr::Small(b)) => {
                let l = *a.numer() as i128 * *b.denom() as i128;
                let r = *b.numer() as i128 * *a.denom() as i128;
                l.cmp(&r)
            }
            _ => self.to_big().cmp(&o.to_big()),
        }
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, d) = (self.numer(), self.denom());
        if d.is_one() {
            write!(f, "{n}")
        } else {
            write!(f, "{n}/{d}")
        }
    }
}

impl FromStr for Rat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("rational {s:?}"));
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let n: BigInt = n.parse().map_err(|_| bad())?;
        let d: BigInt = d.parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::from_big(BigRational::new(n, d)))
    }
}

/// Gaussian rational `re + im·i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GaussRat {
    pub re: Rat,
    pub im: Rat,
}

impl GaussRat {
    pub fn new(re: Rat, im: Rat) -> Self {
        GaussRat { re, im }
    }

    pub fn zero() -> Self {
        Self::new(Rat::zero(), Rat::zero())
    }

    pub fn one() -> Self {
        Self::new(Rat::one(), Rat::zero())
    }

    pub fn i() -> Self {
        Self::new(Rat::zero(), Rat::one())
    }

    pub fn from_int(n: i64) -> Self {
        Self::new(Rat::from_int(n), Rat::zero())
    }

    pub fn real(r: Rat) -> Self {
        Self::new(r, Rat::zero())
    }

    /// `(a/b) + (c/d)·i`.
    pub fn from_fracs(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        Ok(Self::new(Rat::frac(a, b)?, Rat::frac(c, d)?))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(self.re.add(&o.re), self.im.add(&o.im))
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::new(self.re.sub(&o.re), self.im.sub(&o.im))
    }

    pub fn neg(&self) -> Self {
        Self::new(self.re.neg(), self.im.neg())
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), self.im.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.im.is_zero() && o.im.is_zero() {
            return Self::real(self.re.mul(&o.re));
        }
        if self.im.is_zero() {
            return Self::new(self.re.mul(&o.re), self.re.mul(&o.im));
        }
        if o.im.is_zero() {
            return Self::new(self.re.mul(&o.re), self.im.mul(&o.re));
        }
        let re = self.re.mul(&o.re).sub(&self.im.mul(&o.im));
        let im = self.re.mul(&o.im).add(&self.im.mul(&o.re));
        Self::new(re, im)
    }

    /// `re² + im²`.
    pub fn norm_sq(&self) -> Rat {
        self.re.mul(&self.re).add(&self.im.mul(&self.im))
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.im.is_zero() {
            return Ok(Self::real(Rat::one().div(&self.re)?));
        }
        let n = self.norm_sq();
        Ok(Self::new(self.re.div(&n)?, self.im.neg().div(&n)?))
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        if o.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if o.im.is_zero() {
            return Ok(Self::new(self.re.div(&o.re)?, self.im.div(&o.re)?));
        }
        let n = o.norm_sq();
        let p = self.mul(&o.conj());
        Ok(Self::new(p.re.div(&n)?, p.im.div(&n)?))
    }
}

impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.im.is_negative() { '-' } else { '+' };
        write!(f, "{}{}{}*i", self.re, sign, self.im.abs())
    }
}

impl FromStr for GaussRat {
    type Err = Error;

    /// Accepts `a/b+c/d*i` as printed, plus the shorthands `3/4`, `2*i`,
    /// `-i`, `1-i`.
    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t.is_empty() {
            return Err(Error::Parse(format!("gaussian rational {s:?}")));
        }
        let Some(body) = t.strip_suffix('i') else {
            return Ok(Self::real(t.parse()?));
        };
        let body = body.strip_suffix('*').unwrap_or(body);
        let split = body
            .char_indices()
            .skip(1)
            .filter(|&(_, c)| c == '+' || c == '-')
            .map(|(k, _)| k)
            .last();
        let (re, im) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("", body),
        };
        let im = match im {
            "" | "+" => Rat::one(),
            "-" => Rat::one().neg(),
            x => x.strip_prefix('+').unwrap_or(x).parse()?,
        };
        let re = if re.is_empty() { Rat::zero() } else { re.parse()? };
        Ok(Self::new(re, im))
    }
}

/// Point `[a:b]` of the projective line, stored in normal form:
/// `b = 1`, or `[1:0]` for the point at infinity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProjPoint {
    a: GaussRat,
    b: GaussRat,
}

impl ProjPoint {
    pub fn from_pair(a: GaussRat, b: GaussRat) -> Result<Self> {
        if b.is_zero() {
            if a.is_zero() {
                return Err(Error::ZeroPair);
            }
            return Ok(Self::infinity());
        }
        Ok(ProjPoint { a: a.div(&b)?, b: GaussRat::one() })
    }

    pub fn finite(z: GaussRat) -> Self {
        ProjPoint { a: z, b: GaussRat::one() }
    }

    pub fn infinity() -> Self {
        ProjPoint { a: GaussRat::one(), b: GaussRat::zero() }
    }

    pub fn zero() -> Self {
        Self::finite(GaussRat::zero())
    }

    pub fn one() -> Self {
        Self::finite(GaussRat::one())
    }

    pub fn int(n: i64) -> Self {
        Self::finite(GaussRat::from_int(n))
    }

    pub fn a(&self) -> &GaussRat {
        &self.a
    }

    pub fn b(&self) -> &GaussRat {
        &self.b
    }

    pub fn is_infinity(&self) -> bool {
        self.b.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero()
    }

    pub fn is_one(&self) -> bool {
        !self.is_infinity() && self.a.is_one()
    }

    /// Affine value, `None` at infinity.
    pub fn value(&self) -> Option<&GaussRat> {
        if self.is_infinity() {
            None
        } else {
            Some(&self.a)
        }
    }

    pub fn conj(&self) -> Self {
        ProjPoint { a: self.a.conj(), b: self.b.clone() }
    }

    /// Fixed by `z ↦ z̄`.
    pub fn is_real(&self) -> bool {
        self.a.is_real()
    }

    /// `a·b' − b·a'`.
    pub fn det(&self, o: &Self) -> GaussRat {
        self.a.mul(&o.b).sub(&self.b.mul(&o.a))
    }

    /// Product on the projective line; `0·∞` is indeterminate.
    pub fn mul(&self, o: &Self) -> Result<Self> {
        if (self.is_zero() && o.is_infinity()) || (self.is_infinity() && o.is_zero()) {
            return Err(Error::Indeterminate);
        }
        Self::from_pair(self.a.mul(&o.a), self.b.mul(&o.b))
    }

    /// `1/x`.
    pub fn recip(&self) -> Self {
        Mobius::recip().apply(self)
    }

    /// `1 − x`.
    pub fn one_minus(&self) -> Self {
        Mobius::one_minus().apply(self)
    }

    /// `−x/(1 − x)`.
    pub fn neg_over_one_minus(&self) -> Self {
        Mobius::neg_over_one_minus().apply(self)
    }
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinity() {
            write!(f, "inf")
        } else {
            write!(f, "[{}:{}]", self.a, self.b)
        }
    }
}

impl FromStr for ProjPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t == "inf" {
            return Ok(Self::infinity());
        }
        let inner = t
            .strip_prefix('[')
            .and_then(|x| x.strip_suffix(']'))
            .ok_or_else(|| Error::Parse(format!("projective point {s:?}")))?;
        let (a, b) = inner
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("projective point {s:?}")))?;
        Self::from_pair(a.parse()?, b.parse()?)
    }
}

/// Cross ratio `(z1−z3)(z2−z4) / ((z1−z4)(z2−z3))` on homogeneous pairs.
///
/// A single coincident pair yields the limit value 0, 1 or ∞; a
/// configuration with numerator and denominator both zero is unstable.
pub fn cross_ratio(z1: &ProjPoint, z2: &ProjPoint, z3: &ProjPoint, z4: &ProjPoint) -> Result<ProjPoint> {
    let num = z1.det(z3).mul(&z2.det(z4));
    let den = z1.det(z4).mul(&z2.det(z3));
    if num.is_zero() && den.is_zero() {
        return Err(Error::Unstable);
    }
    ProjPoint::from_pair(num, den)
}

/// Cross ratio of `(p[0],p[1],p[2],p[3])` given `x`, the cross ratio of
/// `(q[0],q[1],q[2],q[3])`, where `p` is a reordering of `q`.
///
/// Works by realizing `x` at the points `(∞, 1, 0, 1−x)`, so the special
/// values 0, 1, ∞ are handled by the coincidence rule of [`cross_ratio`].
pub fn reorder_cr<T: PartialEq + Copy>(x: &ProjPoint, q: [T; 4], p: [T; 4]) -> Result<ProjPoint> {
    if q == p {
        return Ok(x.clone());
    }
    let pts = [ProjPoint::infinity(), ProjPoint::one(), ProjPoint::zero(), x.one_minus()];
    let mut sel: [&ProjPoint; 4] = [&pts[0]; 4];
    for (slot, m) in sel.iter_mut().zip(p) {
        let k = q.iter().position(|&y| y == m).ok_or(Error::NotAPermutation)?;
        *slot = &pts[k];
    }
    cross_ratio(sel[0], sel[1], sel[2], sel[3])
}

/// Projective transformation `z ↦ (αz + β)/(γz + δ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mobius {
    pub m: [[GaussRat; 2]; 2],
}

impl Mobius {
    pub fn new(a: GaussRat, b: GaussRat, c: GaussRat, d: GaussRat) -> Result<Self> {
        let det = a.mul(&d).sub(&b.mul(&c));
        if det.is_zero() {
            return Err(Error::Singular);
        }
        Ok(Mobius { m: [[a, b], [c, d]] })
    }

    fn ints(a: i64, b: i64, c: i64, d: i64) -> Self {
        let g = GaussRat::from_int;
        Mobius { m: [[g(a), g(b)], [g(c), g(d)]] }
    }

    pub fn identity() -> Self {
        Self::ints(1, 0, 0, 1)
    }

    pub fn recip() -> Self {
        Self::ints(0, 1, 1, 0)
    }

    pub fn one_minus() -> Self {
        Self::ints(-1, 1, 0, 1)
    }

    pub fn neg_over_one_minus() -> Self {
        Self::ints(-1, 0, -1, 1)
    }

    pub fn apply(&self, z: &ProjPoint) -> ProjPoint {
        let [[a, b], [c, d]] = &self.m;
        let x = a.mul(&z.a).add(&b.mul(&z.b));
        let y = c.mul(&z.a).add(&d.mul(&z.b));
        ProjPoint::from_pair(x, y).expect("invertible map sends nonzero pairs to nonzero pairs")
    }

    /// `self ∘ o`.
    pub fn compose(&self, o: &Self) -> Self {
        let mut m: [[GaussRat; 2]; 2] = Default::default();
        for (r, row) in m.iter_mut().enumerate() {
            for (c, e) in row.iter_mut().enumerate() {
                *e = self.m[r][0].mul(&o.m[0][c]).add(&self.m[r][1].mul(&o.m[1][c]));
            }
        }
        Mobius { m }
    }

    /// The map sending `z1, z2, z3` to `∞, 1, 0`.
    pub fn to_inf_one_zero(z1: &ProjPoint, z2: &ProjPoint, z3: &ProjPoint) -> Result<Self> {
        // z ↦ (z − z3)(z2 − z1) / ((z − z1)(z2 − z3))
        let r1 = z2.det(z1);
        let r2 = z2.det(z3);
        if r1.is_zero() || r2.is_zero() || z1.det(z3).is_zero() {
            return Err(Error::Unstable);
        }
        let a = r1.mul(&z3.b);
        let b = r1.mul(&z3.a).neg();
        let c = r2.mul(&z1.b);
        let d = r2.mul(&z1.a).neg();
        Self::new(a, b, c, d)
    }
}

impl Default for GaussRat {
    fn default() -> Self {
        Self::zero()
    }
}

/// Random rational `p/q` with `|p| ≤ bound`, `1 ≤ q ≤ bound`.
pub fn random_rat<R: Rng + ?Sized>(rng: &mut R, bound: i64) -> Rat {
    let b = bound.max(1);
    let p = rng.gen_range(-b..=b);
    let q = rng.gen_range(1..=b);
    Rat::frac(p, q).expect("positive denominator")
}

/// Random Gaussian rational with both parts drawn by [`random_rat`].
pub fn random_gauss<R: Rng + ?Sized>(rng: &mut R, bound: i64) -> GaussRat {
    GaussRat::new(random_rat(rng, bound), random_rat(rng, bound))
}

/// Random point of the projective line; infinity with probability 1/16.
pub fn random_point<R: Rng + ?Sized>(rng: &mut R, bound: i64) -> ProjPoint {
    if rng.gen_range(0..16) == 0 {
        ProjPoint::infinity()
    } else {
        ProjPoint::finite(random_gauss(rng, bound))
    }
}
