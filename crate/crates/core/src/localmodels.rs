//! Local models of the standard (real and complex) and augmented blowups
//! of `𝔽^c × ℝ^m` along `0 × ℝ^m`, as exact chart atlases.
//!
//! Every chart point also has a chart-free form: a line `L` with a
//! vector in it (standard and `γ¹`), or a line in `ℝ^{c₁+1}` with a
//! `c₂`-vector `λ` (`γ²`). The free form drives transitions and serves as
//! the oracle for the relation tables.

use std::collections::HashMap;

use rand::Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exactfield::{random_gauss, random_rat, GaussRat};
use crate::exec::Exec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Model {
    Real { c: usize, m: usize },
    Complex { c: usize, m: usize },
    Augmented { c: usize, c1: usize, m: usize },
}

impl Model {
    pub fn preset(name: &str) -> Result<Model> {
        match name {
            "real3" => Ok(Model::Real { c: 3, m: 1 }),
            "complex2" => Ok(Model::Complex { c: 2, m: 1 }),
            "aug31" => Ok(Model::Augmented { c: 3, c1: 1, m: 1 }),
            _ => Err(Error::Parse(format!("unknown preset {name:?}"))),
        }
    }

    pub fn c(self) -> usize {
        match self {
            Model::Real { c, .. } | Model::Complex { c, .. } | Model::Augmented { c, .. } => c,
        }
    }

    pub fn m(self) -> usize {
        match self {
            Model::Real { m, .. } | Model::Complex { m, .. } | Model::Augmented { m, .. } => m,
        }
    }

    pub fn is_complex(self) -> bool {
        matches!(self, Model::Complex { .. })
    }

    /// Chart ids `(k, i)`: `(1, i)` for `i ∈ [c]` (standard) or
    /// `i ∈ [c₁]` (augmented), and `(2, i)` for `i ∈ {0} ⊔ [c₁]`.
    pub fn charts(self) -> Vec<ChartId> {
        match self {
            Model::Real { c, .. } | Model::Complex { c, .. } => (1..=c).map(|i| ChartId { k: 1, i }).collect(),
            Model::Augmented { c1, .. } => {
                let mut v: Vec<ChartId> = (1..=c1).map(|i| ChartId { k: 1, i }).collect();
                v.extend((0..=c1).map(|i| ChartId { k: 2, i }));
                v
            }
        }
    }

    fn valid(self) -> Result<()> {
        let ok = match self {
            Model::Real { c, .. } | Model::Complex { c, .. } => c >= 1,
            Model::Augmented { c, c1, .. } => c1 >= 1 && c1 < c,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidPoint(format!("invalid model {self:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChartId {
    pub k: usize,
    pub i: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BlowupPoint {
    pub model: Model,
    pub chart: ChartId,
    pub coords: Vec<GaussRat>,
}

impl BlowupPoint {
    pub fn new(model: Model, chart: ChartId, coords: Vec<GaussRat>) -> Result<Self> {
        model.valid()?;
        if !model.charts().contains(&chart) {
            return Err(Error::InvalidPoint(format!("no chart {chart:?}")));
        }
        if coords.len() != model.c() + model.m() {
            return Err(Error::InvalidPoint(format!("{} coordinates", coords.len())));
        }
        if !model.is_complex() && coords.iter().any(|z| !z.is_real()) {
            return Err(Error::InvalidPoint("nonreal coordinate in a real model".into()));
        }
        Ok(BlowupPoint { model, chart, coords })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "chart": [self.chart.k, self.chart.i],
            "coords": self.coords.iter().map(|z| z.to_string()).collect::<Vec<_>>(),
        })
    }
}

/// Chart-free form, normalized so the first nonzero line entry is 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FreeForm {
    /// `(L = [r], t·r)`, the standard tautological line and `γ¹`.
    Line { r: Vec<GaussRat>, t: GaussRat, s: Vec<GaussRat> },
    /// `([r₀, …, r_{c₁}], (r_i λ_j))` on `γ²` outside the image of `γ^{2;1}`.
    Pair { r: Vec<GaussRat>, lam: Vec<GaussRat>, s: Vec<GaussRat> },
}

fn norm_sq(v: &[GaussRat]) -> GaussRat {
    v.iter().fold(GaussRat::zero(), |a, x| a.add(&x.mul(x)))
}

fn scale(v: &[GaussRat], a: &GaussRat) -> Vec<GaussRat> {
    v.iter().map(|x| x.mul(a)).collect()
}

fn first_nonzero(v: &[GaussRat]) -> Option<usize> {
    v.iter().position(|x| !x.is_zero())
}

fn line(r: Vec<GaussRat>, t: GaussRat, s: Vec<GaussRat>) -> FreeForm {
    let f = first_nonzero(&r).expect("nonzero line");
    let a = r[f].clone();
    let inv = a.inv().expect("nonzero");
    FreeForm::Line { r: scale(&r, &inv), t: t.mul(&a), s }
}

/// `γ²` data in free form, passing to `γ¹` whenever both `(r_1..r_{c₁})`
/// and `λ` are nonzero.
fn pair(r: Vec<GaussRat>, lam: Vec<GaussRat>, s: Vec<GaussRat>) -> FreeForm {
    let l2 = norm_sq(&lam);
    if first_nonzero(&r[1..]).is_some() && !l2.is_zero() {
        let mut big: Vec<GaussRat> = r[1..].iter().map(|x| x.mul(&l2)).collect();
        big.extend(lam.iter().cloned());
        return line(big, r[0].clone(), s);
    }
    let f = first_nonzero(&r).expect("nonzero line");
    let a = r[f].clone();
    let inv = a.inv().expect("nonzero");
    FreeForm::Pair { r: scale(&r, &inv), lam: scale(&lam, &a), s }
}

pub fn free_form(p: &BlowupPoint) -> FreeForm {
    let c = p.model.c();
    let x = &p.coords;
    let s = x[c..].to_vec();
    let ChartId { k, i } = p.chart;
    if k == 1 {
        let mut r: Vec<GaussRat> = x[..c].to_vec();
        r[i - 1] = GaussRat::one();
        return line(r, x[i - 1].clone(), s);
    }
    let c1 = match p.model {
        Model::Augmented { c1, .. } => c1,
        _ => unreachable!("γ² charts are augmented"),
    };
    let mut r = vec![GaussRat::zero(); c1 + 1];
    r[i] = GaussRat::one();
    for j in 1..=c1 {
        if j <= i {
            r[j - 1] = x[j - 1].clone();
        } else {
            r[j] = x[j - 1].clone();
        }
    }
    pair(r, x[c1..c].to_vec(), s)
}

fn to_pair_data(f: &FreeForm, c1: usize) -> Option<(Vec<GaussRat>, Vec<GaussRat>)> {
    match f {
        FreeForm::Pair { r, lam, .. } => Some((r.clone(), lam.clone())),
        FreeForm::Line { r, t, .. } => {
            let lam = r[c1..].to_vec();
            let l2 = norm_sq(&lam);
            let inv = l2.inv().ok()?;
            let mut rr = vec![t.clone()];
            rr.extend(r[..c1].iter().map(|x| x.mul(&inv)));
            Some((rr, lam))
        }
    }
}

/// Coordinates of a free-form point in a chart.
pub fn chart_coords(model: Model, f: &FreeForm, chart: ChartId) -> Result<Vec<GaussRat>> {
    let c = model.c();
    let s = match f {
        FreeForm::Line { s, .. } | FreeForm::Pair { s, .. } => s.clone(),
    };
    let ChartId { k, i } = chart;
    let mut out = if k == 1 {
        let (r, t) = match f {
            FreeForm::Line { r, t, .. } => (r, t),
            FreeForm::Pair { .. } => return Err(Error::OutOfDomain),
        };
        let ri = &r[i - 1];
        let inv = ri.inv().map_err(|_| Error::OutOfDomain)?;
        (0..c).map(|j| if j == i - 1 { t.mul(ri) } else { r[j].mul(&inv) }).collect::<Vec<_>>()
    } else {
        let c1 = match model {
            Model::Augmented { c1, .. } => c1,
            _ => return Err(Error::OutOfDomain),
        };
        let (r, lam) = to_pair_data(f, c1).ok_or(Error::OutOfDomain)?;
        let ri = r[i].clone();
        let inv = ri.inv().map_err(|_| Error::OutOfDomain)?;
        let mut o = Vec::with_capacity(c);
        for j in 1..=c1 {
            let idx = if j <= i { j - 1 } else { j };
            o.push(r[idx].mul(&inv));
        }
        o.extend(lam.iter().map(|x| x.mul(&ri)));
        o
    };
    out.extend(s);
    Ok(out)
}

/// Blowdown of the free form.
pub fn project_free(f: &FreeForm) -> Vec<GaussRat> {
    match f {
        FreeForm::Line { r, t, s } => {
            let mut x = scale(r, t);
            x.extend(s.iter().cloned());
            x
        }
        FreeForm::Pair { r, lam, s } => {
            let l2 = norm_sq(lam);
            let mut x: Vec<GaussRat> = r[1..].iter().map(|rj| r[0].mul(rj).mul(&l2)).collect();
            x.extend(lam.iter().map(|lj| r[0].mul(lj)));
            x.extend(s.iter().cloned());
            x
        }
    }
}

/// Blowdown by the chart formulas.
pub fn blowdown(p: &BlowupPoint) -> Vec<GaussRat> {
    let c = p.model.c();
    let y = &p.coords;
    let ChartId { k, i } = p.chart;
    let mut x: Vec<GaussRat> = if k == 1 {
        (0..c).map(|j| if j == i - 1 { y[j].clone() } else { y[j].mul(&y[i - 1]) }).collect()
    } else {
        let c1 = match p.model {
            Model::Augmented { c1, .. } => c1,
            _ => unreachable!("γ² charts are augmented"),
        };
        let sig = norm_sq(&y[c1..c]);
        let mut x = Vec::with_capacity(c);
        for j in 1..=c1 {
            x.push(if i == 0 {
                sig.mul(&y[j - 1])
            } else if i < j {
                sig.mul(&y[0]).mul(&y[j - 1])
            } else if i == j {
                sig.mul(&y[0])
            } else {
                sig.mul(&y[0]).mul(&y[j])
            });
        }
        for j in c1 + 1..=c {
            x.push(if i == 0 { y[j - 1].clone() } else { y[j - 1].mul(&y[0]) });
        }
        x
    };
    x.extend(y[c..].iter().cloned());
    x
}

/// Transition to another chart. Standard models use the reindexing
/// formulas of the line coordinates; augmented ones pass through the free
/// form, which realizes the gluing `γ^{2;1} → γ¹`.
pub fn transition(p: &BlowupPoint, target: ChartId) -> Result<BlowupPoint> {
    if target == p.chart {
        return Ok(p.clone());
    }
    if !p.model.charts().contains(&target) {
        return Err(Error::InvalidPoint(format!("no chart {target:?}")));
    }
    let coords = match p.model {
        Model::Real { c, .. } | Model::Complex { c, .. } => {
            let (i, k) = (p.chart.i - 1, target.i - 1);
            let y = &p.coords;
            let inv = y[k].inv().map_err(|_| Error::OutOfDomain)?;
            let mut out: Vec<GaussRat> = (0..c)
                .map(|j| {
                    if j == k {
                        y[k].mul(&y[i])
                    } else if j == i {
                        inv.clone()
                    } else {
                        y[j].mul(&inv)
                    }
                })
                .collect();
            out.extend(y[c..].iter().cloned());
            out
        }
        Model::Augmented { .. } => chart_coords(p.model, &free_form(p), target)?,
    };
    Ok(BlowupPoint { model: p.model, chart: target, coords })
}

/// `φ̃_{αα″} = φ̃_{αα′} ∘ φ̃_{α′α″}` at `p` (in chart `α″`).
pub fn cocycle_check(p: &BlowupPoint, a: ChartId, a1: ChartId) -> Result<bool> {
    let direct = transition(p, a)?;
    let via = transition(&transition(p, a1)?, a)?;
    Ok(direct == via)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Locus {
    Off,
    /// Exceptional divisor of a standard blowup.
    E,
    ZeroOnly,
    MinusOnly,
    Both,
}

impl Locus {
    pub fn name(self) -> &'static str {
        match self {
            Locus::Off => "off",
            Locus::E => "E",
            Locus::ZeroOnly => "E0",
            Locus::MinusOnly => "E-",
            Locus::Both => "E0&E-",
        }
    }
}

pub fn exceptional_classify(p: &BlowupPoint) -> Locus {
    let aug = matches!(p.model, Model::Augmented { .. });
    match free_form(p) {
        FreeForm::Line { t, .. } if t.is_zero() => {
            if aug {
                Locus::MinusOnly
            } else {
                Locus::E
            }
        }
        FreeForm::Line { .. } => Locus::Off,
        FreeForm::Pair { r, lam, .. } => {
            if lam.iter().any(|x| !x.is_zero()) {
                Locus::Off
            } else if r[0].is_zero() {
                Locus::Both
            } else {
                Locus::ZeroOnly
            }
        }
    }
}

/// Displayed relations between `φ_j ∘ π′` and the chart coordinates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LemmaCheck {
    pub relations: usize,
    pub failed: usize,
}

impl LemmaCheck {
    pub fn passed(&self) -> bool {
        self.failed == 0
    }
}

/// Checks the relation table at `p` with `x` from the free form. `corrupt`
/// swaps two chart coordinates first.
pub fn lemma_hypothesis_check(p: &BlowupPoint, corrupt: Option<(usize, usize)>) -> LemmaCheck {
    let x = project_free(&free_form(p));
    let mut y = p.coords.clone();
    if let Some((a, b)) = corrupt {
        y.swap(a, b);
    }
    let c = p.model.c();
    let ChartId { k, i } = p.chart;
    let mut rels: Vec<(GaussRat, GaussRat)> = (c..c + p.model.m()).map(|j| (x[j].clone(), y[j].clone())).collect();
    if k == 1 {
        rels.push((x[i - 1].clone(), y[i - 1].clone()));
        for j in (0..c).filter(|&j| j != i - 1) {
            rels.push((x[j].clone(), y[j].mul(&y[i - 1])));
        }
    } else {
        let c1 = match p.model {
            Model::Augmented { c1, .. } => c1,
            _ => unreachable!("γ² charts are augmented"),
        };
        let sig = norm_sq(&y[c1..c]);
        for j in c1 + 1..=c {
            let f = if i == 0 { GaussRat::one() } else { y[0].clone() };
            rels.push((x[j - 1].clone(), y[j - 1].mul(&f)));
        }
        for j in 1..=c1 {
            let rhs = if i == 0 {
                y[j - 1].clone()
            } else if i < j {
                y[0].mul(&y[j - 1])
            } else if i == j {
                y[0].clone()
            } else {
                y[0].mul(&y[j])
            };
            rels.push((x[j - 1].clone(), sig.mul(&rhs)));
        }
    }
    LemmaCheck { relations: rels.len(), failed: rels.iter().filter(|(a, b)| a != b).count() }
}

fn random_scalar<R: Rng + ?Sized>(model: Model, rng: &mut R, bound: i64) -> GaussRat {
    if model.is_complex() {
        random_gauss(rng, bound)
    } else {
        GaussRat::real(random_rat(rng, bound))
    }
}

fn random_nonzero<R: Rng + ?Sized>(model: Model, rng: &mut R, bound: i64) -> GaussRat {
    loop {
        let z = random_scalar(model, rng, bound);
        if !z.is_zero() {
            return z;
        }
    }
}

/// Random point of a chart. With probability `p_exc` the coordinates
/// cutting out the exceptional locus in that chart are set to zero.
pub fn random_point<R: Rng + ?Sized>(model: Model, chart: ChartId, p_exc: f64, rng: &mut R, bound: i64) -> BlowupPoint {
    let n = model.c() + model.m();
    let mut coords: Vec<GaussRat> = (0..n).map(|_| random_scalar(model, rng, bound)).collect();
    if rng.gen_bool(p_exc) {
        let c = model.c();
        match (model, chart.k) {
            (Model::Augmented { c1, .. }, 2) => {
                if chart.i == 0 || rng.gen_bool(0.5) {
                    for z in &mut coords[c1..c] {
                        *z = GaussRat::zero();
                    }
                }
                if chart.i > 0 && rng.gen_bool(0.5) {
                    coords[0] = GaussRat::zero();
                }
            }
            _ => coords[chart.i - 1] = GaussRat::zero(),
        }
    }
    BlowupPoint { model, chart, coords }
}

/// Random point of the overlap of all charts in `model` (every line
/// coordinate nonzero), in the given chart.
pub fn random_overlap_point<R: Rng + ?Sized>(model: Model, chart: ChartId, p_exc: f64, rng: &mut R, bound: i64) -> BlowupPoint {
    let c = model.c();
    let mut coords: Vec<GaussRat> = (0..c).map(|_| random_nonzero(model, rng, bound)).collect();
    coords.extend((0..model.m()).map(|_| random_scalar(model, rng, bound)));
    if rng.gen_bool(p_exc) {
        match (model, chart.k, chart.i) {
            (Model::Augmented { c1, .. }, 2, 0) => {
                for z in &mut coords[c1..c] {
                    *z = GaussRat::zero();
                }
            }
            _ => coords[chart.i - 1] = GaussRat::zero(),
        }
    }
    BlowupPoint { model, chart, coords }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LocalModelReport {
    pub preset: String,
    pub points: usize,
    pub cocycle_checked: usize,
    pub cocycle_failed: usize,
    pub transitions_checked: usize,
    pub transition_failures: usize,
    pub lemma_relations: usize,
    pub lemma_failed: usize,
    pub negative_control_points: usize,
    pub negative_control_detected: usize,
    pub image_groups: usize,
    pub injectivity_violations: usize,
    pub loci: HashMap<String, usize>,
}

impl LocalModelReport {
    pub fn passed(&self) -> bool {
        self.cocycle_failed == 0
            && self.transition_failures == 0
            && self.lemma_failed == 0
            && self.negative_control_points > 0
            && self.negative_control_detected == self.negative_control_points
            && self.injectivity_violations == 0
    }

    pub fn to_json(&self) -> Value {
        let mut loci: Vec<(&String, &usize)> = self.loci.iter().collect();
        loci.sort();
        json!({
            "preset": self.preset,
            "points": self.points,
            "cocycle": {"checked": self.cocycle_checked, "failed": self.cocycle_failed},
            "transitions": {"checked": self.transitions_checked, "failed": self.transition_failures},
            "lemma": {"relations": self.lemma_relations, "failed": self.lemma_failed},
            "negative_control": {"points": self.negative_control_points, "detected": self.negative_control_detected},
            "injectivity": {"image_groups": self.image_groups, "violations": self.injectivity_violations},
            "loci": loci.into_iter().map(|(k, v)| json!([k, v])).collect::<Vec<_>>(),
            "passed": self.passed(),
        })
    }
}

/// Preimage of an off-center point in a standard chart, by inverting the
/// blowdown formulas directly.
fn standard_preimage(model: Model, x: &[GaussRat], chart: ChartId) -> Option<BlowupPoint> {
    let c = model.c();
    if chart.k != 1 || matches!(model, Model::Augmented { c1, .. } if chart.i > c1) {
        return None;
    }
    let xi = &x[chart.i - 1];
    let inv = xi.inv().ok()?;
    let coords = (0..x.len()).map(|j| if j == chart.i - 1 || j >= c { x[j].clone() } else { x[j].mul(&inv) }).collect();
    Some(BlowupPoint { model, chart, coords })
}

struct PointResult {
    cocycle: (usize, usize),
    transitions: (usize, usize),
    lemma: LemmaCheck,
    control: Option<bool>,
    locus: Locus,
    images: Vec<(String, FreeForm)>,
}

fn check_point(p: &BlowupPoint, overlap: &BlowupPoint, charts: &[ChartId]) -> PointResult {
    let mut cocycle = (0, 0);
    if p.model.charts().len() >= 2 && !matches!(p.model, Model::Augmented { .. }) {
        for &a in charts {
            for &a1 in charts {
                cocycle.0 += 1;
                if !cocycle_check(overlap, a, a1).unwrap_or(false) {
                    cocycle.1 += 1;
                }
            }
        }
    }
    let x = blowdown(p);
    let f = free_form(p);
    let mut transitions = (0, 0);
    for &a in charts {
        if let Ok(q) = transition(p, a) {
            transitions.0 += 1;
            if blowdown(&q) != x || free_form(&q) != f || project_free(&f) != x {
                transitions.1 += 1;
            }
        }
    }
    let lemma = lemma_hypothesis_check(p, None);
    let visible = overlap.coords[0] != overlap.coords[1] && exceptional_classify(overlap) == Locus::Off;
    let control = visible.then(|| !lemma_hypothesis_check(overlap, Some((0, 1))).passed());
    let locus = exceptional_classify(p);
    let mut images = Vec::new();
    if locus == Locus::Off {
        let key = format!("{x:?}");
        for &a in charts {
            if let Ok(q) = transition(p, a) {
                images.push((format!("{:?}", blowdown(&q)), free_form(&q)));
            }
            if let Some(q) = standard_preimage(p.model, &x, a) {
                images.push((format!("{:?}", blowdown(&q)), free_form(&q)));
            }
        }
        images.push((key, f));
    }
    PointResult { cocycle, transitions, lemma, control, locus, images }
}

/// Cocycle, transition, relation-table, negative-control, and injectivity
/// checks on `n` points per chart.
pub fn verify_model(preset: &str, n: usize, bound: i64, seed: u64, exec: Exec) -> Result<LocalModelReport> {
    use rand::SeedableRng;
    let model = Model::preset(preset)?;
    let charts = model.charts();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut pts = Vec::with_capacity(n * charts.len());
    for &ch in &charts {
        for _ in 0..n {
            let p = random_point(model, ch, 0.2, &mut rng, bound);
            let o = match model {
                Model::Augmented { .. } => p.clone(),
                _ => random_overlap_point(model, ch, 0.2, &mut rng, bound),
            };
            pts.push((p, o));
        }
    }
    let results = exec.map(&pts, |(p, o)| check_point(p, o, &charts));
    let mut rep = LocalModelReport { preset: preset.to_string(), points: pts.len(), ..Default::default() };
    let mut groups: HashMap<String, Vec<FreeForm>> = HashMap::new();
    for r in results {
        rep.cocycle_checked += r.cocycle.0;
        rep.cocycle_failed += r.cocycle.1;
        rep.transitions_checked += r.transitions.0;
        rep.transition_failures += r.transitions.1;
        rep.lemma_relations += r.lemma.relations;
        rep.lemma_failed += r.lemma.failed;
        if let Some(d) = r.control {
            rep.negative_control_points += 1;
            rep.negative_control_detected += usize::from(d);
        }
        *rep.loci.entry(r.locus.name().to_string()).or_default() += 1;
        for (k, f) in r.images {
            groups.entry(k).or_default().push(f);
        }
    }
    rep.image_groups = groups.len();
    rep.injectivity_violations = groups.values().filter(|fs| fs.iter().any(|f| f != &fs[0])).count();
    Ok(rep)
}
