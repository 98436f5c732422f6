//! The relations `∼_ρ` on curves with one extra mark (or conjugate pair),
//! class keys from extended charts, and the injectivity oracle.

use std::collections::{BTreeSet, HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::charts::{self, MarkingMap, Quad};
use crate::curves::{random_circle_point, random_nonreal, sample_curve, Bullet, StableCurve};
use crate::error::{Error, Result};
use crate::exactfield::{random_point, random_rat, GaussRat, ProjPoint, Rat};
use crate::exec::Exec;
use crate::marks::{self, MarkSet};
use crate::strata::{self, Kind};
use crate::trees::{enumerate_trees, MarkedTree};

/// `c̃ ∈ D_{ℓ+1;ρ}` (complex) or `c̃ ∈ D̃_ρ″` (real).
pub fn in_relation_locus(c: &StableCurve, rho: MarkSet, real: bool) -> bool {
    if real {
        c.in_d_tilde(rho, Bullet::DoublePrime).unwrap_or(false)
    } else {
        c.in_divisor(rho)
    }
}

/// `c̃₁ ∼_ρ c̃₂`.
pub fn equivalent(c1: &StableCurve, c2: &StableCurve, rho: MarkSet, real: bool) -> bool {
    if c1.canonical_key() == c2.canonical_key() {
        return true;
    }
    if !(in_relation_locus(c1, rho, real) && in_relation_locus(c2, rho, real)) {
        return false;
    }
    match (c1.forget_last(), c2.forget_last()) {
        (Ok(a), Ok(b)) => a.canonical_key() == b.canonical_key(),
        _ => false,
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Class of each sample under the union of `∼_ρ` over `ρ > ρ*`, as the
/// smallest sample index in the class.
pub fn relation_closure(samples: &[StableCurve], rho_star: Option<MarkSet>, real: bool) -> Vec<usize> {
    let n = samples.len();
    let mut uf = UnionFind::new(n);
    if n == 0 {
        return Vec::new();
    }
    let l = samples[0].l() - 1;
    let keys: Vec<String> = samples.iter().map(StableCurve::canonical_key).collect();
    let bases: Vec<Option<String>> = samples.iter().map(|c| c.forget_last().ok().map(|b| b.canonical_key())).collect();
    let mut first: HashMap<&str, usize> = HashMap::new();
    for (i, k) in keys.iter().enumerate() {
        let j = *first.entry(k).or_insert(i);
        uf.union(i, j);
    }
    for rho in charts::labels_above(l, real, rho_star) {
        let mut first: HashMap<&str, usize> = HashMap::new();
        for (i, c) in samples.iter().enumerate() {
            if let Some(b) = &bases[i] {
                if in_relation_locus(c, rho, real) {
                    let j = *first.entry(b).or_insert(i);
                    uf.union(i, j);
                }
            }
        }
    }
    (0..n).map(|i| uf.find(i)).collect()
}

/// Extended chart of a base: `Γ` its dual graph, `v₊` the vertex of
/// `V_Γ(ρ*)` with the smallest signature, and `𝒬̃_{Γ,v₊}`.
#[derive(Clone, Debug)]
pub struct BaseChart {
    pub base: StableCurve,
    pub v_plus: usize,
    pub quads: Vec<Quad>,
    pub excluded: Vec<MarkSet>,
}

pub fn base_chart(base: &StableCurve, rho_star: Option<MarkSet>) -> Result<BaseChart> {
    let t = base.tree();
    let v_plus = choose_v_plus(t, rho_star);
    let eta = MarkingMap::systematic(t);
    let basis = charts::extended_basis(t, &eta, v_plus, rho_star)?;
    let values = charts::basis_values(base, &basis)?;
    charts::reconstruct_all(t, &eta, &basis, &values)?;
    let above = charts::a_gamma(t, rho_star);
    let excluded = charts::a_gamma_v(t, v_plus).into_iter().filter(|r| !above.contains(r)).collect();
    Ok(BaseChart { base: base.clone(), v_plus, quads: basis.all_quads(), excluded })
}

pub fn choose_v_plus(t: &MarkedTree, rho_star: Option<MarkSet>) -> usize {
    charts::v_gamma(t, rho_star)
        .into_iter()
        .min_by_key(|&v| {
            let mut s: Vec<(usize, Vec<usize>)> = t.signature(v).into_iter().map(marks::order_key).collect();
            s.sort();
            s
        })
        .expect("V_Γ(ρ*) is nonempty")
}

/// Tree, `v₊`, and chart values; the base enters through its canonical key.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ClassKey {
    pub base: String,
    pub tree: String,
    pub v_plus: Vec<MarkSet>,
    pub chart: Vec<ProjPoint>,
}

impl ClassKey {
    pub fn to_json(&self) -> Value {
        json!({
            "base": self.base,
            "tree": self.tree,
            "v_plus": self.v_plus,
            "chart": self.chart.iter().map(|z| z.to_string()).collect::<Vec<_>>(),
        })
    }
}

/// Chart-domain test: no excluded `D_{ℓ+1;ρ}` (or `D̃_ρ″`) contains `c̃`.
pub fn check_domain(c: &StableCurve, chart: &BaseChart, real: bool) -> Result<()> {
    for &rho in &chart.excluded {
        if in_relation_locus(c, rho, real) {
            return Err(Error::ChartDomain(marks::fmt_set(rho, real)));
        }
    }
    Ok(())
}

pub fn class_key(c: &StableCurve, rho_star: Option<MarkSet>) -> Result<ClassKey> {
    let base = c.forget_last()?;
    let chart = base_chart(&base, rho_star)?;
    class_key_with(c, &chart)
}

pub fn class_key_with(c: &StableCurve, chart: &BaseChart) -> Result<ClassKey> {
    check_domain(c, chart, c.is_real())?;
    let t = chart.base.tree();
    let values = chart.quads.iter().map(|&q| c.cross_ratio_q(q)).collect::<Result<Vec<_>>>()?;
    Ok(ClassKey {
        base: chart.base.canonical_key(),
        tree: t.canonical_form(),
        v_plus: t.signature(chart.v_plus),
        chart: values,
    })
}

/// `c̃ ∈ D̃_ρ^•`, read on a representative.
pub fn y_membership(c: &StableCurve, rho: MarkSet, bullet: Bullet) -> Result<bool> {
    c.in_d_tilde(rho, bullet)
}

fn random_real_point<R: Rng + ?Sized>(rng: &mut R, bound: i64) -> ProjPoint {
    if rng.gen_range(0..8) == 0 {
        ProjPoint::infinity()
    } else {
        ProjPoint::finite(GaussRat::real(random_rat(rng, bound)))
    }
}

/// Point of the E-edge bubble away from `±i` and the real line.
fn random_e_bubble_point<R: Rng + ?Sized>(rng: &mut R, bound: i64) -> ProjPoint {
    if rng.gen_bool(0.5) {
        let s = random_rat(rng, bound).abs().add(&Rat::one());
        let s = if rng.gen_bool(0.5) { s } else { Rat::one().div(&s).expect("positive") };
        if s.is_one() {
            return ProjPoint::finite(GaussRat::new(Rat::one(), Rat::one()));
        }
        ProjPoint::finite(GaussRat::new(Rat::zero(), s))
    } else {
        ProjPoint::finite(random_nonreal(rng, bound))
    }
}

/// Placement of the new mark (pair) on a base curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Placement {
    Free(usize),
    BubbleMark(usize),
    BubbleNode(usize),
    PairBubble(usize),
}

fn placements(base: &StableCurve) -> Vec<Placement> {
    let t = base.tree();
    let mut out: Vec<Placement> = (0..t.vertex_count()).map(Placement::Free).collect();
    out.extend((1..=t.n_marks()).map(Placement::BubbleMark));
    out.extend((0..t.edges().len()).map(Placement::BubbleNode));
    if base.is_real() {
        out.extend((0..t.vertex_count()).filter(|&v| t.is_fixed(v) && !base.is_antipodal(v)).map(Placement::PairBubble));
    }
    out
}

/// Realizes a placement with random parameters; `Err` on coincidences.
pub fn place<R: Rng + ?Sized>(base: &StableCurve, p: Placement, rng: &mut R, bound: i64) -> Result<StableCurve> {
    let t = base.tree();
    match p {
        Placement::Free(v) => {
            let z = if base.is_real() && t.is_fixed(v) && !base.is_antipodal(v) {
                ProjPoint::finite(random_nonreal(rng, bound))
            } else {
                random_point(rng, bound)
            };
            base.add_free_point(v, z)
        }
        Placement::BubbleMark(m) => base.bubble_mark(m),
        Placement::BubbleNode(idx) => {
            let z = match (base.is_real(), t.phi_edge(idx)) {
                (true, Some(j)) if j == idx => {
                    let (u, _) = t.edges()[idx];
                    if t.is_fixed(u) {
                        Some(random_circle_point(rng, bound))
                    } else {
                        Some(random_e_bubble_point(rng, bound))
                    }
                }
                _ => None,
            };
            base.bubble_node(idx, z)
        }
        Placement::PairBubble(v) => base.pair_bubble(v, random_real_point(rng, bound)),
    }
}

/// Every placement over `base`, each realized `reps` times.
pub fn engineered_fiber<R: Rng + ?Sized>(base: &StableCurve, reps: usize, rng: &mut R, bound: i64) -> Vec<StableCurve> {
    let mut out = Vec::new();
    for p in placements(base) {
        for _ in 0..reps {
            if let Ok(c) = place(base, p, rng, bound) {
                out.push(c);
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InjectivityReport {
    pub l: usize,
    pub real: bool,
    pub rho_star: Option<MarkSet>,
    pub samples: usize,
    pub engineered: usize,
    pub in_domain: usize,
    pub classes: usize,
    pub key_collisions_across_classes: usize,
    pub intra_class_key_splits: usize,
    /// Classes with members on both sides of the chart-domain boundary.
    pub saturation_violations: usize,
    pub cases: Vec<Value>,
}

impl InjectivityReport {
    pub fn passed(&self) -> bool {
        self.key_collisions_across_classes == 0 && self.intra_class_key_splits == 0 && self.saturation_violations == 0
    }

    pub fn to_json(&self) -> Value {
        json!({
            "l": self.l,
            "real": self.real,
            "rho_star": self.rho_star.map(|r| marks::labels(r, self.real)),
            "samples": self.samples,
            "engineered": self.engineered,
            "in_domain": self.in_domain,
            "classes": self.classes,
            "key_collisions_across_classes": self.key_collisions_across_classes,
            "intra_class_key_splits": self.intra_class_key_splits,
            "saturation_violations": self.saturation_violations,
            "cases": self.cases,
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct InjectivityConfig {
    pub l: usize,
    pub real: bool,
    pub rho_star: Option<MarkSet>,
    pub bases_per_tree: usize,
    pub reps: usize,
    pub random: usize,
    pub bound: i64,
    pub seed: u64,
}

/// Samples over shared bases (every tree, engineered placements plus
/// random ones) and compares key equality with the relation closure.
pub fn verify_injectivity(cfg: &InjectivityConfig, exec: Exec) -> Result<InjectivityReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut bases = Vec::new();
    for t in enumerate_trees(cfg.l, cfg.real)? {
        for _ in 0..cfg.bases_per_tree {
            bases.push(sample_curve(&t, cfg.bound, &mut rng)?);
        }
    }
    let mut samples = Vec::new();
    let labels = charts::labels_above(cfg.l, cfg.real, None);
    for b in &bases {
        samples.extend(engineered_fiber(b, cfg.reps, &mut rng, cfg.bound));
        for &rho in &labels {
            if b.in_divisor(rho) {
                samples.push(boundary_representative(b, rho, &mut rng, cfg.bound)?);
            }
        }
    }
    let engineered = samples.len();
    let pool: Vec<(usize, Placement)> =
        bases.iter().enumerate().flat_map(|(i, b)| placements(b).into_iter().map(move |p| (i, p))).collect();
    let mut added = 0;
    while added < cfg.random {
        let (i, p) = pool[rng.gen_range(0..pool.len())];
        if let Ok(c) = place(&bases[i], p, &mut rng, cfg.bound) {
            samples.push(c);
            added += 1;
        }
    }
    let charts: Vec<Result<BaseChart>> = exec.map(&bases, |b| base_chart(b, cfg.rho_star));
    let chart_of: HashMap<String, usize> = bases.iter().enumerate().map(|(i, b)| (b.canonical_key(), i)).collect();
    let keys: Vec<Option<ClassKey>> = exec.map(&samples, |c| {
        let base = c.forget_last().ok()?;
        let ch = charts[*chart_of.get(&base.canonical_key())?].as_ref().ok()?;
        class_key_with(c, ch).ok()
    });
    let class = relation_closure(&samples, cfg.rho_star, cfg.real);
    let mut key_classes: HashMap<&ClassKey, BTreeSet<usize>> = HashMap::new();
    let mut class_keys: HashMap<usize, HashSet<&ClassKey>> = HashMap::new();
    let mut class_domain: HashMap<usize, (bool, bool)> = HashMap::new();
    for (i, k) in keys.iter().enumerate() {
        let e = class_domain.entry(class[i]).or_default();
        match k {
            Some(k) => {
                e.0 = true;
                key_classes.entry(k).or_default().insert(class[i]);
                class_keys.entry(class[i]).or_default().insert(k);
            }
            None => e.1 = true,
        }
    }
    let mut cases = Vec::new();
    let mut collisions = 0;
    for (k, cs) in &key_classes {
        if cs.len() > 1 {
            collisions += 1;
            if cases.len() < 10 {
                let reps: Vec<Value> = cs.iter().map(|&c| samples[c].to_json()).collect();
                cases.push(json!({"type": "key_collision", "key": k.to_json(), "representatives": reps}));
            }
        }
    }
    let mut splits = 0;
    for (&c, ks) in &class_keys {
        if ks.len() > 1 {
            splits += 1;
            if cases.len() < 10 {
                cases.push(json!({"type": "class_split", "representative": samples[c].to_json(), "keys": ks.len()}));
            }
        }
    }
    let saturation = class_domain.values().filter(|(a, b)| *a && *b).count();
    Ok(InjectivityReport {
        l: cfg.l,
        real: cfg.real,
        rho_star: cfg.rho_star,
        samples: samples.len(),
        engineered,
        in_domain: keys.iter().filter(|k| k.is_some()).count(),
        classes: class_domain.len(),
        key_collisions_across_classes: collisions,
        intra_class_key_splits: splits,
        saturation_violations: saturation,
        cases,
    })
}

/// `{0} ⊔ 𝒜` (or `{0} ⊔ 𝒜^ℝ`) in schedule order.
pub fn all_rho_stars(l: usize, real: bool) -> Vec<Option<MarkSet>> {
    std::iter::once(None).chain(charts::labels_above(l, real, None).into_iter().map(Some)).collect()
}

/// A curve in `D̃_ρ^+ ∩ D̃_ρ^0` over a base in `D_{ℓ;ρ}`: the new mark
/// (pair) on bubbles at the `ρ` node.
pub fn boundary_representative<R: Rng + ?Sized>(base: &StableCurve, rho: MarkSet, rng: &mut R, bound: i64) -> Result<StableCurve> {
    let t = base.tree();
    let e = strata::stratum_edge(t, rho).ok_or_else(|| Error::NotALabel(marks::fmt_set(rho, base.is_real())))?;
    if base.is_real() && strata::classify_real(rho, t.l()) == Some(Kind::E) {
        return base.chain_bubble(e);
    }
    let idx = t.edge_index(e.tail, e.head).expect("edge");
    place(base, Placement::BubbleNode(idx), rng, bound)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct YReport {
    pub l: usize,
    pub real: bool,
    pub rho_star: Option<MarkSet>,
    pub samples: usize,
    pub representatives: usize,
    pub classes: usize,
    pub checks: usize,
    pub failures: usize,
    pub cases: Vec<Value>,
}

impl YReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    pub fn to_json(&self) -> Value {
        json!({
            "l": self.l,
            "real": self.real,
            "rho_star": self.rho_star.map(|r| marks::labels(r, self.real)),
            "samples": self.samples,
            "representatives": self.representatives,
            "classes": self.classes,
            "checks": self.checks,
            "failures": self.failures,
            "cases": self.cases,
        })
    }
}

struct Tally {
    checks: usize,
    failures: usize,
    cases: Vec<Value>,
}

impl Tally {
    fn check(&mut self, ok: bool, case: impl FnOnce() -> Value) {
        self.checks += 1;
        if !ok {
            self.failures += 1;
            if self.cases.len() < 10 {
                self.cases.push(case());
            }
        }
    }
}

/// Class-level `Y` identities over engineered fibers plus boundary
/// representatives, and the pointwise `D̃` coincidences of real labels.
pub fn verify_y_identities(cfg: &InjectivityConfig, exec: Exec) -> Result<YReport> {
    let (l, real) = (cfg.l, cfg.real);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let above = charts::labels_above(l, real, cfg.rho_star);
    let mut samples = Vec::new();
    let mut reps = Vec::new();
    for t in enumerate_trees(l, real)? {
        for _ in 0..cfg.bases_per_tree {
            let b = sample_curve(&t, cfg.bound, &mut rng)?;
            samples.extend(engineered_fiber(&b, cfg.reps, &mut rng, cfg.bound));
            for &rho in &above {
                if b.in_divisor(rho) {
                    reps.push((samples.len(), rho));
                    samples.push(boundary_representative(&b, rho, &mut rng, cfg.bound)?);
                }
            }
        }
    }
    let nm = marks::n_marks(l, real);
    let all = marks::full(nm);
    let plus = |c: &StableCurve, r: MarkSet| c.in_d_tilde(r, Bullet::Plus);
    let zero = |c: &StableCurve, r: MarkSet| c.in_d_tilde(r, Bullet::Zero);
    let mut tally = Tally { checks: 0, failures: 0, cases: Vec::new() };
    for &(i, rho) in &reps {
        let c = &samples[i];
        tally.check(plus(c, rho)? && zero(c, rho)?, || {
            json!({"type": "representative", "rho": marks::labels(rho, real), "curve": c.to_json()})
        });
    }
    let class = relation_closure(&samples, cfg.rho_star, real);
    let mut members: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, &c) in class.iter().enumerate() {
        members.entry(c).or_default().push(i);
    }
    let groups: Vec<(usize, Vec<usize>)> = members.into_iter().collect();
    let per_class: Vec<Result<Vec<(bool, Value)>>> = exec.map(&groups, |(c, ms)| {
        let mut out = Vec::new();
        let any = |f: &dyn Fn(&StableCurve) -> Result<bool>| -> Result<bool> {
            for &m in ms {
                if f(&samples[m])? {
                    return Ok(true);
                }
            }
            Ok(false)
        };
        for &rho in &above {
            let y0 = any(&|s| zero(s, rho))?;
            let yp = any(&|s| plus(s, rho))?;
            let y_both = any(&|s| Ok(plus(s, rho)? && zero(s, rho)?))?;
            let case = |what: &str| json!({"type": what, "rho": marks::labels(rho, real), "class": samples[*c].to_json()});
            out.push((y0 == y_both, case("y0_vs_plus_and_zero")));
            for i in marks::members(all & !rho) {
                let yi = any(&|s| zero(s, all ^ marks::bit(i)))?;
                out.push((y0 == (yp && yi), case("y0_vs_plus_meet_point")));
            }
        }
        Ok(out)
    });
    for r in per_class {
        for (ok, case) in r? {
            tally.check(ok, || case);
        }
    }
    if real {
        let labels = strata::build_a_ell_real(l).1;
        for c in &samples {
            for s in &labels {
                let rho = s.rho;
                let b = |r: MarkSet, x: Bullet| c.in_d_tilde(r, x);
                let case = |what: &str| json!({"type": what, "rho": marks::labels(rho, true), "curve": c.to_json()});
                match s.kind {
                    Kind::D1 => {
                        let p = all ^ marks::conj_set(rho);
                        tally.check(b(rho, Bullet::Zero)? == b(p, Bullet::Plus)?, || case("d1_zero_vs_partner_plus"));
                        tally.check(b(rho, Bullet::Minus)? == b(p, Bullet::Zero)?, || case("d1_minus_vs_partner_zero"));
                        tally.check(b(p, Bullet::Zero)? == b(p, Bullet::Minus)?, || case("d2_zero_vs_minus"));
                    }
                    Kind::H | Kind::D2 | Kind::D3 => {
                        tally.check(b(rho, Bullet::Zero)? == b(rho, Bullet::Minus)?, || case("zero_vs_minus"));
                        if s.kind == Kind::D3 {
                            let p = marks::conj_set(rho);
                            tally.check(b(rho, Bullet::Plus)? == b(p, Bullet::Plus)?, || case("d3_plus_vs_conj_plus"));
                        }
                    }
                    _ => {}
                }
            }
        }
    }
    Ok(YReport {
        l,
        real,
        rho_star: cfg.rho_star,
        samples: samples.len(),
        representatives: reps.len(),
        classes: groups.len(),
        checks: tally.checks,
        failures: tally.failures,
        cases: tally.cases,
    })
}
