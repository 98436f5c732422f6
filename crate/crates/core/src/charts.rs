//! Cross-ratio charts near a stratum: marking maps, `Γ`-bases, and exact
//! reconstruction of every cross ratio from the basis values.

use std::collections::{HashMap, VecDeque};

use serde_json::{json, Value};

use crate::curves::StableCurve;
use crate::error::{Error, Result};
use crate::exactfield::{reorder_cr, ProjPoint};
use crate::marks::{self, Mark, MarkSet};
use crate::strata;
use crate::trees::{MarkedTree, OEdge};

pub type Quad = [Mark; 4];

/// `η: Ẽdg → marks` with `η(ẽ)` on the head side of `ẽ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkingMap {
    map: HashMap<(usize, usize), Mark>,
}

impl MarkingMap {
    /// The min rule: `η(ẽ) = min μ⁻¹(Ver_ẽ^c)`.
    pub fn systematic(t: &MarkedTree) -> Self {
        let map = t
            .oriented_edges()
            .into_iter()
            .map(|e| ((e.tail, e.head), marks::min(t.side_marks(e.rev()))))
            .collect();
        MarkingMap { map }
    }

    pub fn from_entries<I: IntoIterator<Item = ((usize, usize), Mark)>>(it: I) -> Self {
        MarkingMap { map: it.into_iter().collect() }
    }

    pub fn get(&self, tail: usize, head: usize) -> Mark {
        self.map[&(tail, head)]
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Defined on every oriented edge, with values on the head side.
    pub fn is_marking_map(&self, t: &MarkedTree) -> bool {
        let oe = t.oriented_edges();
        self.map.len() == oe.len()
            && oe.iter().all(|e| self.map.get(&(e.tail, e.head)).is_some_and(|&m| marks::contains(t.side_marks(e.rev()), m)))
    }

    /// `η(vv′) ∈ [Γ]_{η;v′}` for every oriented edge.
    pub fn is_systematic(&self, t: &MarkedTree) -> bool {
        self.is_marking_map(t) && t.oriented_edges().iter().all(|e| self.gamma_v(t, e.head).contains(&self.get(e.tail, e.head)))
    }

    /// `[Γ]_{η;v} = μ⁻¹(v) ⊔ η(Ẽ_Γ(v))`, sorted.
    pub fn gamma_v(&self, t: &MarkedTree, v: usize) -> Vec<Mark> {
        let mut s = t.vertex_marks(v);
        s.extend(t.neighbors(v).iter().map(|&w| self.get(v, w)));
        s.sort_unstable();
        s
    }
}

/// A `Γ`-basis compatible with a systematic marking map, optionally
/// extended by `q̃_{v₊}` (and its conjugate).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChartBasis {
    pub vertex_sets: Vec<Vec<Mark>>,
    pub vertex_quads: Vec<Vec<Quad>>,
    /// Edge quadruples `(i_e, j_e, k_e, m_e)` for `ẽ = uw` with `u < w`.
    pub edge_quads: Vec<(OEdge, Quad)>,
    pub v_plus: Option<usize>,
    pub extension: Vec<Quad>,
}

impl ChartBasis {
    /// `𝒬_Γ` in a fixed order: vertex quadruples by vertex, then edges.
    pub fn quads(&self) -> Vec<Quad> {
        let mut q: Vec<Quad> = self.vertex_quads.iter().flatten().copied().collect();
        q.extend(self.edge_quads.iter().map(|e| e.1));
        q
    }

    /// `𝒬_Γ` followed by the extension quadruples.
    pub fn all_quads(&self) -> Vec<Quad> {
        let mut q = self.quads();
        q.extend(self.extension.iter().copied());
        q
    }

    pub fn len(&self) -> usize {
        self.vertex_quads.iter().map(Vec::len).sum::<usize>() + self.edge_quads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_json(&self, real: bool) -> Value {
        let lab = |q: &Quad| q.iter().map(|&m| marks::label(m, real)).collect::<Vec<_>>();
        json!({
            "vertex_sets": self.vertex_sets.iter().map(|s| s.iter().map(|&m| marks::label(m, real)).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "vertex_quads": self.vertex_quads.iter().map(|v| v.iter().map(lab).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "edge_quads": self.edge_quads.iter().map(|(e, q)| json!({"edge": [e.tail, e.head], "q": lab(q)})).collect::<Vec<_>>(),
            "v_plus": self.v_plus,
            "extension": self.extension.iter().map(lab).collect::<Vec<_>>(),
        })
    }
}

/// `𝒬_Γ` from the per-vertex triples `(i₁, i₂, i₃)` of `[Γ]_v` and the edge
/// quadruples compatible with `η`.
pub fn gamma_basis(t: &MarkedTree, eta: &MarkingMap) -> Result<ChartBasis> {
    if !t.is_trivalent() {
        return Err(Error::InvalidTree("tree is not trivalent".into()));
    }
    if !eta.is_systematic(t) {
        return Err(Error::NotSystematic);
    }
    let n = t.vertex_count();
    let vertex_sets: Vec<Vec<Mark>> = (0..n).map(|v| eta.gamma_v(t, v)).collect();
    let vertex_quads = vertex_sets
        .iter()
        .map(|g| g[3..].iter().map(|&r| [g[0], g[1], g[2], r]).collect())
        .collect();
    let mut edge_quads = Vec::with_capacity(t.edges().len());
    for &(u, w) in t.edges() {
        let ie = eta.get(w, u);
        let je = eta.get(u, w);
        let pick = |g: &[Mark]| g.iter().copied().find(|&x| x != ie && x != je).expect("valence at least 3");
        let ke = pick(&vertex_sets[u]);
        let me = pick(&vertex_sets[w]);
        edge_quads.push((OEdge::new(u, w), [ie, je, ke, me]));
    }
    Ok(ChartBasis { vertex_sets, vertex_quads, edge_quads, v_plus: None, extension: Vec::new() })
}

/// Values of `basis.quads()` on a curve.
pub fn basis_values(c: &StableCurve, basis: &ChartBasis) -> Result<Vec<ProjPoint>> {
    basis.quads().into_iter().map(|q| c.cross_ratio_q(q)).collect()
}

fn sort4(q: Quad) -> Quad {
    let mut k = q;
    k.sort_unstable();
    k
}

/// Cross ratios of all unordered 4-sets, stored for the sorted order.
#[derive(Clone, Debug, Default)]
pub struct CrTable {
    map: HashMap<Quad, ProjPoint>,
}

impl CrTable {
    pub fn get(&self, q: Quad) -> Result<ProjPoint> {
        let k = sort4(q);
        let x = self.map.get(&k).ok_or_else(|| Error::ChartDomain(format!("missing {k:?}")))?;
        reorder_cr(x, k, q)
    }

    fn set(&mut self, q: Quad, x: &ProjPoint) -> Result<()> {
        let k = sort4(q);
        if let std::collections::hash_map::Entry::Vacant(e) = self.map.entry(k) {
            e.insert(reorder_cr(x, q, k)?);
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Every cross ratio among the marks, computed from the basis values by
/// the spanning-tree recursion from `μ(1)`.
pub fn reconstruct_all(t: &MarkedTree, eta: &MarkingMap, basis: &ChartBasis, values: &[ProjPoint]) -> Result<CrTable> {
    let quads = basis.quads();
    if values.len() != quads.len() {
        return Err(Error::InvalidCurve(format!("{} basis values for {} quadruples", values.len(), quads.len())));
    }
    let val: HashMap<Quad, &ProjPoint> = quads.iter().copied().zip(values.iter()).collect();
    let mut table = CrTable::default();
    let n = t.vertex_count();
    let root = t.mu(1);
    let mut parent = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    let mut q = VecDeque::from([root]);
    let mut seen = vec![false; n];
    seen[root] = true;
    while let Some(v) = q.pop_front() {
        order.push(v);
        for &w in t.neighbors(v) {
            if !seen[w] {
                seen[w] = true;
                parent[w] = v;
                q.push_back(w);
            }
        }
    }
    let domain = |rho: MarkSet| Error::ChartDomain(marks::fmt_set(rho, t.is_real_labeled()));
    let mut known: MarkSet = 0;
    for &v in &order {
        let g = &basis.vertex_sets[v];
        let rho = if v == root { t.vertex_mark_set(v) } else { t.side_marks(OEdge::new(v, parent[v])) };
        intra(&mut table, g, &val, rho, &domain)?;
        if v == root {
            known = marks::set(g.iter().copied());
            continue;
        }
        let p = parent[v];
        let a = eta.get(p, v);
        let b = eta.get(v, p);
        let gset = marks::set(g.iter().copied());
        if known & gset != marks::set([a, b]) {
            return Err(Error::NotSystematic);
        }
        let qe = basis.edge_quads.iter().find(|(e, _)| (e.tail, e.head) == (p.min(v), p.max(v))).expect("edge").1;
        table.set(qe, val[&qe])?;
        let kk = if qe[0] == a { qe[2] } else { qe[3] };
        let mm = if qe[0] == a { qe[3] } else { qe[2] };
        let ks: Vec<Mark> = g.iter().copied().filter(|&x| x != a && x != b).collect();
        let bs: Vec<Mark> = marks::members(known & !marks::set([a, b]));
        let mul = |x: ProjPoint, y: ProjPoint| x.mul(&y).map_err(|_| domain(rho));
        for &k in &ks {
            for &m in &bs {
                let mut x = table.get([a, b, kk, mm])?;
                if k != kk {
                    x = mul(table.get([a, b, k, kk])?, x)?;
                }
                if m != mm {
                    x = mul(x, table.get([a, b, mm, m])?)?;
                }
                table.set([a, b, k, m], &x)?;
            }
        }
        for &k in &ks {
            for (i, &w) in bs.iter().enumerate() {
                for &z in &bs[i + 1..] {
                    let x = mul(table.get([a, k, w, b])?, table.get([a, k, b, z])?)?;
                    table.set([a, k, w, z], &x)?;
                }
            }
        }
        for (i, &x) in ks.iter().enumerate() {
            for &y in &ks[i + 1..] {
                for &w in &bs {
                    let r = mul(table.get([b, w, x, a])?, table.get([b, w, a, y])?)?;
                    table.set([b, w, x, y], &r)?;
                }
            }
        }
        for (i, &x) in ks.iter().enumerate() {
            for &y in &ks[i + 1..] {
                for (j, &w) in bs.iter().enumerate() {
                    for &z in &bs[j + 1..] {
                        let r = mul(table.get([w, z, x, a])?, table.get([w, z, a, y])?)?;
                        table.set([w, z, x, y], &r)?;
                    }
                }
            }
        }
        let mut aside = ks.clone();
        aside.push(a);
        for (i, &x) in aside.iter().enumerate() {
            for (j, &y) in aside.iter().enumerate().skip(i + 1) {
                for &z in &aside[j + 1..] {
                    for &w in &bs {
                        let r = mul(table.get([x, y, z, b])?, table.get([x, y, b, w])?)?;
                        table.set([x, y, z, w], &r)?;
                    }
                }
            }
        }
        let mut bside = bs.clone();
        bside.push(b);
        for &x in &ks {
            for (i, &w) in bside.iter().enumerate() {
                for (j, &y) in bside.iter().enumerate().skip(i + 1) {
                    for &z in &bside[j + 1..] {
                        let r = mul(table.get([w, y, z, a])?, table.get([w, y, a, x])?)?;
                        table.set([w, y, z, x], &r)?;
                    }
                }
            }
        }
        known |= gset;
    }
    Ok(table)
}

/// Realizes `[Γ]_v` at `(∞, 1, 0, 1 − c_r, …)` and records every 4-subset.
fn intra(
    table: &mut CrTable,
    g: &[Mark],
    val: &HashMap<Quad, &ProjPoint>,
    rho: MarkSet,
    domain: &dyn Fn(MarkSet) -> Error,
) -> Result<()> {
    if g.len() < 4 {
        return Ok(());
    }
    let mut pos = vec![ProjPoint::infinity(), ProjPoint::one(), ProjPoint::zero()];
    for &r in &g[3..] {
        let c = val[&[g[0], g[1], g[2], r]];
        let z = c.one_minus();
        if pos.contains(&z) {
            return Err(domain(rho));
        }
        pos.push(z);
    }
    let k = g.len();
    for i in 0..k {
        for j in i + 1..k {
            for s in j + 1..k {
                for u in s + 1..k {
                    let x = crate::exactfield::cross_ratio(&pos[i], &pos[j], &pos[s], &pos[u])?;
                    table.set([g[i], g[j], g[s], g[u]], &x)?;
                }
            }
        }
    }
    Ok(())
}

/// `CR_q` at the point with the given basis values.
pub fn reconstruct_cr(values: &[ProjPoint], t: &MarkedTree, eta: &MarkingMap, q: Quad) -> Result<ProjPoint> {
    let basis = gamma_basis(t, eta)?;
    reconstruct_all(t, eta, &basis, values)?.get(q)
}

/// Conjugate quadruple.
pub fn conj_quad(q: Quad) -> Quad {
    q.map(marks::conj)
}

/// Fixed-locus equations `conj(c_q) = CR_{q̄}` for every `q ∈ 𝒬_Γ`.
pub fn real_slice_check(values: &[ProjPoint], t: &MarkedTree, eta: &MarkingMap) -> Result<bool> {
    if !t.is_real_labeled() {
        return Err(Error::NotReal);
    }
    let basis = gamma_basis(t, eta)?;
    let table = reconstruct_all(t, eta, &basis, values)?;
    for (q, v) in basis.quads().into_iter().zip(values) {
        if v.conj() != table.get(conj_quad(q))? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Labels `ρ > ρ*` of the index set (`𝒜_ℓ`, or `𝒜_ℓ^ℝ` for real trees);
/// `None` stands for `ρ* = 0`.
pub fn labels_above(l: usize, real: bool, rho_star: Option<MarkSet>) -> Vec<MarkSet> {
    let all: Vec<MarkSet> = if real {
        strata::build_a_ell_real(l).1.into_iter().map(|s| s.rho).collect()
    } else {
        strata::build_a_ell(l).into_iter().map(|s| s.rho).collect()
    };
    match rho_star {
        None => all,
        Some(r) => {
            let k = marks::order_key(r);
            all.into_iter().filter(|&s| marks::order_key(s) > k).collect()
        }
    }
}

/// `𝒜_Γ(ρ*)`: the edge sides of `Γ` that are labels above `ρ*`.
pub fn a_gamma(t: &MarkedTree, rho_star: Option<MarkSet>) -> Vec<MarkSet> {
    let above = labels_above(t.l(), t.is_real_labeled(), rho_star);
    let mut out: Vec<MarkSet> =
        t.oriented_edges().into_iter().map(|e| t.side_marks(e)).filter(|s| above.contains(s)).collect();
    out.sort_by_key(|&s| marks::order_key(s));
    out.dedup();
    out
}

/// `𝒜_Γ(v)`: the edge sides containing `v`.
pub fn a_gamma_v(t: &MarkedTree, v: usize) -> Vec<MarkSet> {
    t.oriented_edges().into_iter().filter(|&e| t.in_side(e, v)).map(|e| t.side_marks(e)).collect()
}

/// `V_Γ(ρ*) = ⋂ Ver_{ẽ_ρ}` over `ρ ∈ 𝒜_Γ(ρ*)`.
pub fn v_gamma(t: &MarkedTree, rho_star: Option<MarkSet>) -> Vec<usize> {
    let edges: Vec<OEdge> =
        a_gamma(t, rho_star).into_iter().map(|r| strata::stratum_edge(t, r).expect("side of an edge")).collect();
    (0..t.vertex_count()).filter(|&v| edges.iter().all(|&e| t.in_side(e, v))).collect()
}

/// `𝒬_Γ ∪ {q̃_{v₊}}` (and `q̃̄_{v₊}` for real trees), with `i, j, k` the
/// first three elements of `[Γ]_{v₊}`.
pub fn extended_basis(t: &MarkedTree, eta: &MarkingMap, v_plus: usize, rho_star: Option<MarkSet>) -> Result<ChartBasis> {
    if !v_gamma(t, rho_star).contains(&v_plus) {
        return Err(Error::NotInVGamma(v_plus));
    }
    let mut b = gamma_basis(t, eta)?;
    let g = &b.vertex_sets[v_plus];
    let (i, j, k) = (g[0], g[1], g[2]);
    let l = t.l();
    b.v_plus = Some(v_plus);
    if t.is_real_labeled() {
        let q = [i, j, k, marks::plus(l + 1)];
        b.extension = vec![q, conj_quad(q)];
    } else {
        b.extension = vec![[i, j, k, l + 1]];
    }
    Ok(b)
}
