//! Exact stable marked rational curves.
//!
//! A curve is a [`MarkedTree`] plus coordinates: the position of each mark
//! on its component and, for every edge `{v,w}`, the position of the node
//! on each of the two components. Real curves carry the involution `φ` on
//! the tree; a component fixed by `φ` has real structure `z ↦ z̄`, or the
//! fixed-point-free `z ↦ −1/z̄` when flagged antipodal.

use std::collections::BTreeMap;

use rand::Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exactfield::{cross_ratio, random_gauss, random_point, random_rat, GaussRat, ProjPoint};
use crate::marks::{self, Mark, MarkSet};
use crate::strata::{self, Kind};
use crate::trees::{MarkedTree, OEdge};

/// A special point of a component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Special {
    Mark(Mark),
    /// Node toward the given neighbor.
    Node(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StableCurve {
    tree: MarkedTree,
    marks: Vec<ProjPoint>,
    nodes: BTreeMap<(usize, usize), ProjPoint>,
    antipodal: Vec<bool>,
}

/// `[a:b] ↦ [−b̄ : ā]`.
pub fn antipode(z: &ProjPoint) -> ProjPoint {
    ProjPoint::from_pair(z.b().conj().neg(), z.a().conj()).expect("nonzero pair")
}

/// Which `D̃_ρ^•` locus to test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Bullet {
    Plus,
    Zero,
    Minus,
    Prime,
    DoublePrime,
}

impl Bullet {
    pub fn name(self) -> &'static str {
        match self {
            Bullet::Plus => "+",
            Bullet::Zero => "0",
            Bullet::Minus => "-",
            Bullet::Prime => "'",
            Bullet::DoublePrime => "''",
        }
    }
}

impl StableCurve {
    /// Assembles a curve without validation.
    pub fn from_parts(
        tree: MarkedTree,
        marks: Vec<ProjPoint>,
        nodes: BTreeMap<(usize, usize), ProjPoint>,
        antipodal: Vec<bool>,
    ) -> Self {
        StableCurve { tree, marks, nodes, antipodal }
    }

    /// Assembles and validates a curve.
    pub fn new(
        tree: MarkedTree,
        marks: Vec<ProjPoint>,
        nodes: BTreeMap<(usize, usize), ProjPoint>,
        antipodal: Vec<bool>,
    ) -> Result<Self> {
        let c = Self::from_parts(tree, marks, nodes, antipodal);
        let v = c.validate();
        if v.is_empty() {
            Ok(c)
        } else {
            Err(Error::InvalidCurve(v.join("; ")))
        }
    }

    /// One-component curve with the given mark positions.
    pub fn smooth(l: usize, real: bool, marks: Vec<ProjPoint>, antipodal: bool) -> Result<Self> {
        let t = crate::trees::smooth_tree(l, real)?;
        Self::new(t, marks, BTreeMap::new(), vec![antipodal])
    }

    pub fn tree(&self) -> &MarkedTree {
        &self.tree
    }

    /// Dual graph.
    pub fn dual_graph(&self) -> MarkedTree {
        self.tree.clone()
    }

    pub fn l(&self) -> usize {
        self.tree.l()
    }

    pub fn is_real(&self) -> bool {
        self.tree.phi().is_some()
    }

    pub fn mark_pos(&self, m: Mark) -> &ProjPoint {
        &self.marks[m - 1]
    }

    /// Position on component `v` of the node joining `v` and `w`.
    pub fn node_pos(&self, v: usize, w: usize) -> &ProjPoint {
        &self.nodes[&(v, w)]
    }

    pub fn is_antipodal(&self, v: usize) -> bool {
        self.antipodal[v]
    }

    pub fn pos(&self, v: usize, s: Special) -> &ProjPoint {
        match s {
            Special::Mark(m) => self.mark_pos(m),
            Special::Node(w) => self.node_pos(v, w),
        }
    }

    pub fn specials(&self, v: usize) -> Vec<Special> {
        let mut s: Vec<Special> = self.tree.vertex_marks(v).into_iter().map(Special::Mark).collect();
        s.extend(self.tree.neighbors(v).iter().map(|&w| Special::Node(w)));
        s
    }

    /// The real structure `P¹_v → P¹_{φ(v)}`.
    pub fn sigma(&self, v: usize, z: &ProjPoint) -> ProjPoint {
        if self.antipodal[v] {
            antipode(z)
        } else {
            z.conj()
        }
    }

    /// Partner of a special point of `v` on `φ(v)`.
    fn partner(&self, s: Special) -> Special {
        let p = self.tree.phi().expect("real curve");
        match s {
            Special::Mark(m) => Special::Mark(marks::conj(m)),
            Special::Node(w) => Special::Node(p[w]),
        }
    }

    /// Violations of tree validity, stability, distinctness, and
    /// conjugation symmetry.
    pub fn validate(&self) -> Vec<String> {
        let t = &self.tree;
        let mut out = t.violations();
        if self.marks.len() != t.n_marks() {
            out.push(format!("{} mark positions for {} marks", self.marks.len(), t.n_marks()));
            return out;
        }
        if self.antipodal.len() != t.vertex_count() {
            out.push("antipodal flags have the wrong length".into());
            return out;
        }
        let expected = 2 * t.edges().len();
        let present = t.edges().iter().filter(|&&(u, w)| self.nodes.contains_key(&(u, w)) && self.nodes.contains_key(&(w, u))).count();
        if present != t.edges().len() || self.nodes.len() != expected {
            out.push("node coordinates do not match the edges".into());
            return out;
        }
        for v in 0..t.vertex_count() {
            let pts: Vec<&ProjPoint> = self.specials(v).into_iter().map(|s| self.pos(v, s)).collect();
            for i in 0..pts.len() {
                for j in 0..i {
                    if pts[i] == pts[j] {
                        out.push(format!("coincident special points on component {v}"));
                    }
                }
            }
        }
        match t.phi() {
            None => {
                if self.antipodal.iter().any(|&a| a) {
                    out.push("antipodal flag on a curve without real structure".into());
                }
            }
            Some(p) => {
                for v in 0..t.vertex_count() {
                    if self.antipodal[v] && p[v] != v {
                        out.push(format!("antipodal flag on non-fixed component {v}"));
                        continue;
                    }
                    for s in self.specials(v) {
                        let want = self.sigma(v, self.pos(v, s));
                        if *self.pos(p[v], self.partner(s)) != want {
                            let name = match s {
                                Special::Mark(m) => format!("mark {}", marks::label(m, true)),
                                Special::Node(w) => format!("node {v}-{w}"),
                            };
                            out.push(format!("{name} breaks conjugation symmetry"));
                        }
                    }
                }
            }
        }
        out
    }

    /// Projection of mark `m` to component `v`.
    pub fn project(&self, v: usize, m: Mark) -> &ProjPoint {
        match self.tree.dir(v, m) {
            None => self.mark_pos(m),
            Some(w) => self.node_pos(v, w),
        }
    }

    /// `CR_q` on the nodal curve, evaluated on a component where at least
    /// three of the four marks have distinct directions.
    pub fn cross_ratio_q(&self, q: [Mark; 4]) -> Result<ProjPoint> {
        if (0..4).any(|i| (0..i).any(|j| q[i] == q[j])) {
            return Err(Error::RepeatedMarks);
        }
        let t = &self.tree;
        for v in 0..t.vertex_count() {
            let d: [Option<usize>; 4] = q.map(|m| t.dir(v, m));
            let mut distinct = 0;
            for i in 0..4 {
                if d[i].is_none() || (0..i).all(|j| d[j] != d[i]) {
                    distinct += 1;
                }
            }
            if distinct >= 3 {
                let z = q.map(|m| self.project(v, m));
                return cross_ratio(z[0], z[1], z[2], z[3]);
            }
        }
        Err(Error::Unstable)
    }

    /// Some node splits the marks as `ρ | ρ^c`.
    pub fn in_divisor(&self, rho: MarkSet) -> bool {
        let all = self.tree.all_marks();
        let r = rho & all;
        self.tree.oriented_edges().into_iter().any(|e| self.tree.side_marks(e) == r)
    }

    /// Membership in `D̃_ρ^•` for a curve with `ℓ+1` marks (or pairs) and
    /// `ρ ⊂ [ℓ]` (or `[ℓ^±]`).
    pub fn in_d_tilde(&self, rho: MarkSet, bullet: Bullet) -> Result<bool> {
        let l = self.l() - 1;
        let real = self.tree.is_real_labeled();
        if !real {
            let n = marks::bit(l + 1);
            return match bullet {
                Bullet::Plus | Bullet::Prime => Ok(self.in_divisor(rho | n)),
                Bullet::Zero | Bullet::DoublePrime => Ok(self.in_divisor(rho)),
                Bullet::Minus => Err(Error::InvalidBullet("-".into())),
            };
        }
        let np = marks::bit(marks::plus(l + 1));
        let nm = marks::bit(marks::minus(l + 1));
        let d = |s: MarkSet| self.in_divisor(s);
        match bullet {
            Bullet::Prime => return Ok(d(rho | np) || d(rho | np | nm)),
            Bullet::DoublePrime => return Ok(d(rho) || d(rho | nm)),
            _ => {}
        }
        let kind = strata::tilde_kind(rho, l, true)?;
        Ok(match (kind, bullet) {
            (None, Bullet::Plus) => false,
            (None, _) => d(rho | nm),
            (Some(Kind::E | Kind::D1), Bullet::Plus) => d(rho | np),
            (Some(Kind::E | Kind::D1), Bullet::Zero) => d(rho),
            (Some(Kind::E | Kind::D1), _) => d(rho | nm),
            (Some(Kind::H), Bullet::Plus) => d(rho | np | nm),
            (Some(Kind::H), _) => d(rho),
            (Some(_), Bullet::Plus) => d(rho | np | nm),
            (Some(_), _) => d(rho | nm),
        })
    }

    /// Drops the marks outside `keep` and stabilizes; kept marks (or pairs)
    /// are relabeled densely in increasing order.
    pub fn forget(&self, keep: MarkSet) -> Result<StableCurve> {
        let t = &self.tree;
        let real = t.is_real_labeled();
        let keep = keep & t.all_marks();
        if real && marks::conj_set(keep) != keep {
            return Err(Error::KeepTooSmall);
        }
        if marks::card(keep) < if real { 4 } else { 3 } {
            return Err(Error::KeepTooSmall);
        }
        let n = t.vertex_count();
        let mut alive = vec![true; n];
        let mut adj: Vec<Vec<usize>> = (0..n).map(|v| t.neighbors(v).to_vec()).collect();
        let mut mpos: Vec<(usize, ProjPoint)> = (1..=t.n_marks()).map(|m| (t.mu(m), self.mark_pos(m).clone())).collect();
        let mut nodes = self.nodes.clone();
        let kept: Vec<Mark> = marks::members(keep);
        loop {
            let count = |v: usize, adj: &Vec<Vec<usize>>, mpos: &Vec<(usize, ProjPoint)>| {
                adj[v].len() + kept.iter().filter(|&&m| mpos[m - 1].0 == v).count()
            };
            let Some(v) = (0..n).find(|&v| alive[v] && count(v, &adj, &mpos) < 3) else {
                break;
            };
            let here: Vec<Mark> = kept.iter().copied().filter(|&m| mpos[m - 1].0 == v).collect();
            match (adj[v].len(), here.len()) {
                (2, 0) => {
                    let (a, b) = (adj[v][0], adj[v][1]);
                    let pa = nodes.remove(&(a, v)).expect("node");
                    let pb = nodes.remove(&(b, v)).expect("node");
                    nodes.remove(&(v, a));
                    nodes.remove(&(v, b));
                    nodes.insert((a, b), pa);
                    nodes.insert((b, a), pb);
                    adj[a].retain(|&x| x != v);
                    adj[b].retain(|&x| x != v);
                    adj[a].push(b);
                    adj[b].push(a);
                }
                (1, k) if k <= 1 => {
                    let a = adj[v][0];
                    let pa = nodes.remove(&(a, v)).expect("node");
                    nodes.remove(&(v, a));
                    adj[a].retain(|&x| x != v);
                    if let Some(&m) = here.first() {
                        mpos[m - 1] = (a, pa);
                    }
                }
                _ => return Err(Error::KeepTooSmall),
            }
            adj[v].clear();
            alive[v] = false;
        }
        let mut id = vec![usize::MAX; n];
        let mut next = 0;
        for v in 0..n {
            if alive[v] {
                id[v] = next;
                next += 1;
            }
        }
        let mut edges = Vec::new();
        for v in 0..n {
            for &w in &adj[v] {
                if alive[v] && v < w {
                    edges.push((id[v], id[w]));
                }
            }
        }
        let new_l = if real { marks::card(keep) / 2 } else { marks::card(keep) };
        let mut mu = Vec::with_capacity(kept.len());
        let mut mk = Vec::with_capacity(kept.len());
        for &m in &kept {
            mu.push(id[mpos[m - 1].0]);
            mk.push(mpos[m - 1].1.clone());
        }
        let phi = t.phi().map(|p| (0..n).filter(|&v| alive[v]).map(|v| id[p[v]]).collect());
        let tree = MarkedTree::new(new_l, real, next, edges, mu, phi)?;
        let nodes = nodes.into_iter().map(|((a, b), z)| ((id[a], id[b]), z)).collect();
        let antipodal = (0..n).filter(|&v| alive[v]).map(|v| self.antipodal[v]).collect();
        StableCurve::new(tree, mk, nodes, antipodal)
    }

    /// Drops the last mark (or pair).
    pub fn forget_last(&self) -> Result<StableCurve> {
        let t = &self.tree;
        let drop = if t.is_real_labeled() {
            marks::set([marks::plus(t.l()), marks::minus(t.l())])
        } else {
            marks::bit(t.l())
        };
        self.forget(t.all_marks() & !drop)
    }

    /// Conjugate curve: coordinates conjugated, labels `i⁺ ↔ i⁻` swapped.
    pub fn conjugate_curve(&self) -> Result<StableCurve> {
        let t = &self.tree;
        if !t.is_real_labeled() {
            return Err(Error::NotReal);
        }
        let mu: Vec<usize> = (1..=t.n_marks()).map(|m| t.mu(marks::conj(m))).collect();
        let tree = MarkedTree::raw(t.l(), true, t.vertex_count(), t.edges().to_vec(), mu, t.phi().map(|p| p.to_vec()))?;
        let mk = (1..=t.n_marks()).map(|m| self.mark_pos(marks::conj(m)).conj()).collect();
        let nodes = self.nodes.iter().map(|(&k, z)| (k, z.conj())).collect();
        Ok(StableCurve::from_parts(tree, mk, nodes, self.antipodal.clone()))
    }

    /// Key independent of vertex numbering: components are identified by
    /// the mark partition of their directions.
    pub fn canonical_key(&self) -> String {
        let t = &self.tree;
        let real = t.is_real_labeled();
        let fmt = |s: MarkSet| marks::fmt_set(s, real);
        let mut comps: Vec<String> = (0..t.vertex_count())
            .map(|v| {
                let sig: Vec<String> = t.signature(v).into_iter().map(fmt).collect();
                let mut pts: Vec<String> =
                    t.vertex_marks(v).into_iter().map(|m| format!("{}@{}", marks::label(m, real), self.mark_pos(m))).collect();
                pts.extend(t.neighbors(v).iter().map(|&w| format!("{}@{}", fmt(t.toward(v, w)), self.node_pos(v, w))));
                pts.sort();
                format!("<{}|{}|{}>", sig.join(""), pts.join(","), if self.antipodal[v] { "a" } else { "s" })
            })
            .collect();
        comps.sort();
        format!("{}{}:{}", if real { "R" } else { "C" }, t.l(), comps.join(""))
    }

    pub fn to_json(&self) -> Value {
        let t = &self.tree;
        let real = t.is_real_labeled();
        let mut j = t.to_json();
        let mut coords = serde_json::Map::new();
        for v in 0..t.vertex_count() {
            let mut c = serde_json::Map::new();
            for m in t.vertex_marks(v) {
                c.insert(format!("mark:{}", marks::label(m, real)), json!(self.mark_pos(m).to_string()));
            }
            for &w in t.neighbors(v) {
                c.insert(format!("edge:{}-{}", v.min(w), v.max(w)), json!(self.node_pos(v, w).to_string()));
            }
            coords.insert(v.to_string(), Value::Object(c));
        }
        j["coords"] = Value::Object(coords);
        if self.antipodal.iter().any(|&a| a) {
            j["antipodal"] = json!(self.antipodal);
        }
        j
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let tree = MarkedTree::from_json(v)?;
        let real = tree.is_real_labeled();
        let bad = |s: &str| Error::Parse(format!("curve json: {s}"));
        let coords = v["coords"].as_object().ok_or_else(|| bad("coords"))?;
        let mut mk: Vec<Option<ProjPoint>> = vec![None; tree.n_marks()];
        let mut nodes = BTreeMap::new();
        for (vs, c) in coords {
            let vx: usize = vs.parse().map_err(|_| bad("vertex id"))?;
            for (k, z) in c.as_object().ok_or_else(|| bad("vertex coords"))? {
                let z: ProjPoint = z.as_str().ok_or_else(|| bad("point"))?.parse()?;
                if let Some(lbl) = k.strip_prefix("mark:") {
                    let m = marks::parse_label(lbl, real)?;
                    *mk.get_mut(m - 1).ok_or_else(|| bad("mark"))? = Some(z);
                } else if let Some(e) = k.strip_prefix("edge:") {
                    let (a, b) = e.split_once('-').ok_or_else(|| bad("edge key"))?;
                    let a: usize = a.parse().map_err(|_| bad("edge key"))?;
                    let b: usize = b.parse().map_err(|_| bad("edge key"))?;
                    let w = if a == vx { b } else { a };
                    nodes.insert((vx, w), z);
                } else {
                    return Err(bad("coordinate key"));
                }
            }
        }
        let mk: Vec<ProjPoint> = mk.into_iter().collect::<Option<_>>().ok_or_else(|| bad("missing mark"))?;
        let antipodal = match v.get("antipodal") {
            Some(Value::Array(a)) => a.iter().map(|x| x.as_bool().unwrap_or(false)).collect(),
            _ => vec![false; tree.vertex_count()],
        };
        Self::new(tree, mk, nodes, antipodal)
    }

    /// Adds the new mark at `z` on component `v`; in the real case `(ℓ+1)⁻`
    /// goes to the conjugate point on `φ(v)`.
    pub fn add_free_point(&self, v: usize, z: ProjPoint) -> Result<StableCurve> {
        let tree = self.tree.attach_point(v)?;
        let mut mk = self.marks.clone();
        if self.is_real() {
            let zb = self.sigma(v, &z);
            mk.push(z);
            mk.push(zb);
        } else {
            mk.push(z);
        }
        StableCurve::new(tree, mk, self.nodes.clone(), self.antipodal.clone())
    }

    /// Bubbles mark `m` together with the new mark (and `m̄` with `(ℓ+1)⁻`).
    pub fn bubble_mark(&self, m: Mark) -> Result<StableCurve> {
        let tree = self.tree.attach_at_mark(m)?;
        let mut mk = self.marks.clone();
        let mut nodes = self.nodes.clone();
        let mut anti = self.antipodal.clone();
        let mut one = |mk: &mut Vec<ProjPoint>, m: Mark, x: usize| {
            let host = self.tree.mu(m);
            nodes.insert((host, x), self.mark_pos(m).clone());
            nodes.insert((x, host), ProjPoint::infinity());
            mk[m - 1] = ProjPoint::zero();
            anti.push(false);
        };
        let x = self.tree.vertex_count();
        one(&mut mk, m, x);
        mk.push(ProjPoint::one());
        if self.is_real() {
            one(&mut mk, marks::conj(m), x + 1);
            mk.push(ProjPoint::one());
        }
        StableCurve::new(tree, mk, nodes, anti)
    }

    /// Inserts a component carrying the new mark at node `idx`. For a
    /// `φ`-invariant edge of a real curve, `z` is the position of `(ℓ+1)⁺`
    /// on the new fixed component (nodes at `0, ∞` for H edges and `i, −i`
    /// for E edges).
    pub fn bubble_node(&self, idx: usize, z: Option<ProjPoint>) -> Result<StableCurve> {
        let t = &self.tree;
        let tree = t.attach_at_edge(idx)?;
        let (u, w) = t.edges()[idx];
        let x = t.vertex_count();
        let mut mk = self.marks.clone();
        let mut nodes = self.nodes.clone();
        let mut anti = self.antipodal.clone();
        let mut splice = |u: usize, w: usize, x: usize, pu: ProjPoint, pw: ProjPoint| {
            let a = nodes.remove(&(u, w)).expect("node");
            let b = nodes.remove(&(w, u)).expect("node");
            nodes.insert((u, x), a);
            nodes.insert((w, x), b);
            nodes.insert((x, u), pu);
            nodes.insert((x, w), pw);
            anti.push(false);
        };
        if !self.is_real() {
            splice(u, w, x, ProjPoint::zero(), ProjPoint::infinity());
            mk.push(ProjPoint::one());
            return StableCurve::new(tree, mk, nodes, anti);
        }
        let p = t.phi().expect("real");
        let j = t.phi_edge(idx).ok_or(Error::NotReal)?;
        if j == idx {
            let z = z.ok_or_else(|| Error::InvalidCurve("invariant node bubble needs a position".into()))?;
            if p[u] == u {
                splice(u, w, x, ProjPoint::zero(), ProjPoint::infinity());
            } else {
                let i = ProjPoint::finite(GaussRat::i());
                splice(u, w, x, i.clone(), i.conj());
            }
            let zb = z.conj();
            mk.push(z);
            mk.push(zb);
        } else {
            splice(u, w, x, ProjPoint::zero(), ProjPoint::infinity());
            let (a, b) = t.edges()[j];
            let (pa, pb) = if p[u] == a {
                (ProjPoint::zero(), ProjPoint::infinity())
            } else {
                (ProjPoint::infinity(), ProjPoint::zero())
            };
            splice(a, b, x + 1, pa, pb);
            mk.push(ProjPoint::one());
            mk.push(ProjPoint::one());
        }
        StableCurve::new(tree, mk, nodes, anti)
    }

    /// Real only: splits the E node `e` into a chain of two swapped
    /// components, `(ℓ+1)⁺` on the one next to the tail.
    pub fn chain_bubble(&self, e: OEdge) -> Result<StableCurve> {
        let tree = self.tree.attach_chain_at_edge(e)?;
        let (u, w) = (e.tail, e.head);
        let (a, b) = (self.tree.vertex_count(), self.tree.vertex_count() + 1);
        let mut nodes = self.nodes.clone();
        let pu = nodes.remove(&(u, w)).expect("node");
        let pw = nodes.remove(&(w, u)).expect("node");
        nodes.insert((u, a), pu);
        nodes.insert((w, b), pw);
        nodes.insert((a, u), ProjPoint::zero());
        nodes.insert((b, w), ProjPoint::zero());
        nodes.insert((a, b), ProjPoint::infinity());
        nodes.insert((b, a), ProjPoint::infinity());
        let mut mk = self.marks.clone();
        mk.push(ProjPoint::one());
        mk.push(ProjPoint::one());
        let mut anti = self.antipodal.clone();
        anti.extend([false, false]);
        StableCurve::new(tree, mk, nodes, anti)
    }

    /// Real only: a fixed component carrying `(ℓ+1)^±` at `i, −i`, attached
    /// at the real point `x` of the standard fixed component `v`.
    pub fn pair_bubble(&self, v: usize, x: ProjPoint) -> Result<StableCurve> {
        let tree = self.tree.attach_pair_bubble(v)?;
        let y = self.tree.vertex_count();
        let mut nodes = self.nodes.clone();
        nodes.insert((v, y), x);
        nodes.insert((y, v), ProjPoint::infinity());
        let mut mk = self.marks.clone();
        let i = ProjPoint::finite(GaussRat::i());
        mk.push(i.clone());
        mk.push(i.conj());
        let mut anti = self.antipodal.clone();
        anti.push(false);
        StableCurve::new(tree, mk, nodes, anti)
    }
}

/// Random curve with dual graph `t`; real trees get symmetric coordinates.
/// Each `φ`-fixed component without H edges is made antipodal with
/// probability 1/2.
pub fn sample_curve<R: Rng + ?Sized>(t: &MarkedTree, bound: i64, rng: &mut R) -> Result<StableCurve> {
    const ATTEMPTS: usize = 2000;
    let n = t.vertex_count();
    let mut mk: Vec<Option<ProjPoint>> = vec![None; t.n_marks()];
    let mut nodes = BTreeMap::new();
    let mut anti = vec![false; n];
    let phi = t.phi();
    let mut done = vec![false; n];
    for v in 0..n {
        if done[v] {
            continue;
        }
        let specials: Vec<Special> = {
            let mut s: Vec<Special> = t.vertex_marks(v).into_iter().map(Special::Mark).collect();
            s.extend(t.neighbors(v).iter().map(|&w| Special::Node(w)));
            s
        };
        let fixed = phi.is_some_and(|p| p[v] == v);
        let has_h = fixed && t.neighbors(v).iter().any(|&w| phi.is_some_and(|p| p[w] == w));
        if fixed && !has_h {
            anti[v] = rng.gen_bool(0.5);
        }
        let sigma = |z: &ProjPoint| if anti[v] { antipode(z) } else { z.conj() };
        let partner = |s: Special| {
            let p = phi.expect("real");
            match s {
                Special::Mark(m) => Special::Mark(marks::conj(m)),
                Special::Node(w) => Special::Node(p[w]),
            }
        };
        let mut placed: Option<Vec<(Special, ProjPoint)>> = None;
        for _ in 0..ATTEMPTS {
            let mut got: Vec<(Special, ProjPoint)> = Vec::with_capacity(specials.len());
            for &s in &specials {
                if got.iter().any(|g| g.0 == s) {
                    continue;
                }
                if fixed {
                    let ps = partner(s);
                    if ps == s {
                        let z = if rng.gen_range(0..8) == 0 {
                            ProjPoint::infinity()
                        } else {
                            ProjPoint::finite(GaussRat::real(random_rat(rng, bound)))
                        };
                        got.push((s, z));
                    } else {
                        let z = random_point(rng, bound);
                        let zb = sigma(&z);
                        got.push((s, z));
                        got.push((ps, zb));
                    }
                } else {
                    got.push((s, random_point(rng, bound)));
                }
            }
            let distinct = (0..got.len()).all(|i| (0..i).all(|j| got[i].1 != got[j].1));
            if distinct {
                placed = Some(got);
                break;
            }
        }
        let placed = placed.ok_or(Error::BoundTooSmall(bound))?;
        let w2 = phi.map(|p| p[v]).filter(|&w| w != v);
        for (s, z) in placed {
            if let Some(w2) = w2 {
                let zb = z.conj();
                match partner(s) {
                    Special::Mark(m) => mk[m - 1] = Some(zb),
                    Special::Node(x) => {
                        nodes.insert((w2, x), zb);
                    }
                }
            }
            match s {
                Special::Mark(m) => mk[m - 1] = Some(z),
                Special::Node(w) => {
                    nodes.insert((v, w), z);
                }
            }
        }
        done[v] = true;
        if let Some(w2) = w2 {
            done[w2] = true;
        }
    }
    let mk: Vec<ProjPoint> = mk.into_iter().map(|z| z.expect("all marks placed")).collect();
    StableCurve::new(t.clone(), mk, nodes, anti)
}

/// Random point of the upper half of the unit circle minus `±1`, from the
/// rational parametrization `((1−s²) + 2s·i)/(1+s²)` with `s > 0`.
pub fn random_circle_point<R: Rng + ?Sized>(rng: &mut R, bound: i64) -> ProjPoint {
    let s = loop {
        let s = random_rat(rng, bound).abs();
        if !s.is_zero() {
            break s;
        }
    };
    let s2 = s.mul(&s);
    let one = crate::exactfield::Rat::one();
    let den = one.add(&s2);
    let re = one.sub(&s2).div(&den).expect("positive");
    let im = s.add(&s).div(&den).expect("positive");
    ProjPoint::finite(GaussRat::new(re, im))
}

/// Random Gaussian rational that is not real.
pub fn random_nonreal<R: Rng + ?Sized>(rng: &mut R, bound: i64) -> GaussRat {
    loop {
        let z = random_gauss(rng, bound);
        if !z.is_real() {
            return z;
        }
    }
}
