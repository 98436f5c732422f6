//! Marked trees: dual graphs of stable marked rational curves.
//!
//! A [`MarkedTree`] carries `ℓ` complex marks or `ℓ` conjugate pairs (see
//! [`crate::marks`]) and, for real trees, an involution `φ` on vertices.
//! A trivalent tree is determined by its set of edge splits, which drives
//! both enumeration and the canonical form.

use std::collections::VecDeque;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::marks::{self, Mark, MarkSet};

const NONE: usize = usize::MAX;

/// Oriented edge `tail → head`; `Ver_ẽ` is the component containing `tail`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OEdge {
    pub tail: usize,
    pub head: usize,
}

impl OEdge {
    pub fn new(tail: usize, head: usize) -> Self {
        OEdge { tail, head }
    }

    pub fn rev(self) -> Self {
        OEdge { tail: self.head, head: self.tail }
    }
}

/// Type of an edge of a real tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    /// Both endpoints fixed by `φ`.
    H,
    /// Endpoints swapped by `φ`.
    E,
    /// Not preserved by `φ`.
    C,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkedTree {
    l: usize,
    real: bool,
    n: usize,
    edges: Vec<(usize, usize)>,
    mu: Vec<usize>,
    phi: Option<Vec<usize>>,
    adj: Vec<Vec<usize>>,
    toward: Vec<Vec<MarkSet>>,
    hop: Vec<Vec<usize>>,
}

impl MarkedTree {
    /// Builds a tree checking only the tree structure and the range of `μ`.
    pub fn raw(
        l: usize,
        real: bool,
        n: usize,
        edges: Vec<(usize, usize)>,
        mu: Vec<usize>,
        phi: Option<Vec<usize>>,
    ) -> Result<Self> {
        let bad = |s: String| Err(Error::InvalidTree(s));
        let nm = marks::n_marks(l, real);
        if n == 0 {
            return bad("no vertices".into());
        }
        if nm > marks::MAX_MARKS {
            return bad(format!("{nm} marks exceed the supported maximum"));
        }
        if mu.len() != nm {
            return bad(format!("mu has {} entries, expected {nm}", mu.len()));
        }
        if let Some(&v) = mu.iter().find(|&&v| v >= n) {
            return bad(format!("mu maps to missing vertex {v}"));
        }
        if edges.len() + 1 != n {
            return bad(format!("{} edges on {n} vertices", edges.len()));
        }
        if let Some(p) = &phi {
            if p.len() != n {
                return bad("phi has the wrong length".into());
            }
        }
        let mut es: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        for (u, w) in edges {
            if u >= n || w >= n || u == w {
                return bad(format!("bad edge ({u},{w})"));
            }
            es.push((u.min(w), u.max(w)));
        }
        es.sort_unstable();
        if es.windows(2).any(|p| p[0] == p[1]) {
            return bad("repeated edge".into());
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, w) in &es {
            adj[u].push(w);
            adj[w].push(u);
        }
        for a in adj.iter_mut() {
            a.sort_unstable();
        }
        let mut hop = vec![vec![NONE; n]; n];
        for s in 0..n {
            let mut seen = vec![false; n];
            seen[s] = true;
            let mut q = VecDeque::new();
            for &w in &adj[s] {
                seen[w] = true;
                hop[s][w] = w;
                q.push_back(w);
            }
            while let Some(x) = q.pop_front() {
                for &y in &adj[x] {
                    if !seen[y] {
                        seen[y] = true;
                        hop[s][y] = hop[s][x];
                        q.push_back(y);
                    }
                }
            }
            if seen.iter().any(|&b| !b) {
                return bad("not connected".into());
            }
        }
        let mut toward: Vec<Vec<MarkSet>> = adj.iter().map(|a| vec![0; a.len()]).collect();
        for (k, &mv) in mu.iter().enumerate() {
            for v in 0..n {
                if v != mv {
                    let w = hop[v][mv];
                    let slot = adj[v].binary_search(&w).expect("hop is a neighbor");
                    toward[v][slot] |= marks::bit(k + 1);
                }
            }
        }
        Ok(MarkedTree { l, real, n, edges: es, mu, phi, adj, toward, hop })
    }

    /// Builds and fully validates a tree: structure, trivalence, and the
    /// involution conditions when `phi` is given.
    pub fn new(
        l: usize,
        real: bool,
        n: usize,
        edges: Vec<(usize, usize)>,
        mu: Vec<usize>,
        phi: Option<Vec<usize>>,
    ) -> Result<Self> {
        let t = Self::raw(l, real, n, edges, mu, phi)?;
        let v = t.violations();
        if v.is_empty() {
            Ok(t)
        } else {
            Err(Error::InvalidTree(v.join("; ")))
        }
    }

    /// Trivalence and involution violations.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for v in 0..self.n {
            if self.val(v) < 3 {
                out.push(format!("vertex {v} has valence {}", self.val(v)));
            }
        }
        if let Some(p) = &self.phi {
            if !self.real {
                out.push("involution on a tree without conjugate pairs".into());
            }
            if (0..self.n).any(|v| p[v] >= self.n || p[p[v]] != v) {
                out.push("phi is not an involution".into());
                return out;
            }
            for &(u, w) in &self.edges {
                if self.edge_index(p[u], p[w]).is_none() {
                    out.push(format!("phi does not map edge ({u},{w}) to an edge"));
                }
            }
            for m in 1..=self.n_marks() {
                if p[self.mu(m)] != self.mu(marks::conj(m)) {
                    out.push(format!("phi(mu({})) != mu({})", marks::label(m, true), marks::label(marks::conj(m), true)));
                }
            }
        }
        out
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn is_real_labeled(&self) -> bool {
        self.real
    }

    pub fn n_marks(&self) -> usize {
        marks::n_marks(self.l, self.real)
    }

    pub fn all_marks(&self) -> MarkSet {
        marks::full(self.n_marks())
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn mu(&self, m: Mark) -> usize {
        self.mu[m - 1]
    }

    pub fn mu_vec(&self) -> &[usize] {
        &self.mu
    }

    pub fn phi(&self) -> Option<&[usize]> {
        self.phi.as_deref()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn deg(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn vertex_marks(&self, v: usize) -> Vec<Mark> {
        (1..=self.n_marks()).filter(|&m| self.mu(m) == v).collect()
    }

    pub fn vertex_mark_set(&self, v: usize) -> MarkSet {
        marks::set(self.vertex_marks(v))
    }

    /// `|μ⁻¹(v)| + deg(v)`.
    pub fn val(&self, v: usize) -> usize {
        self.vertex_marks(v).len() + self.deg(v)
    }

    pub fn is_trivalent(&self) -> bool {
        (0..self.n).all(|v| self.val(v) >= 3)
    }

    pub fn edge_index(&self, u: usize, w: usize) -> Option<usize> {
        self.edges.binary_search(&(u.min(w), u.max(w))).ok()
    }

    /// Marks reached from `v` by leaving through the neighbor `w`.
    pub fn toward(&self, v: usize, w: usize) -> MarkSet {
        let k = self.adj[v].binary_search(&w).expect("w must be a neighbor of v");
        self.toward[v][k]
    }

    /// Neighbor of `v` on the path to `w`, for `w ≠ v`.
    pub fn next_hop(&self, v: usize, w: usize) -> usize {
        self.hop[v][w]
    }

    /// Direction of mark `m` at `v`: `None` if `m` sits at `v`, otherwise
    /// the neighbor through which it is reached.
    pub fn dir(&self, v: usize, m: Mark) -> Option<usize> {
        let mv = self.mu(m);
        if mv == v {
            None
        } else {
            Some(self.hop[v][mv])
        }
    }

    /// `μ⁻¹(Ver_ẽ)`, the marks on the tail side of `ẽ`.
    pub fn side_marks(&self, e: OEdge) -> MarkSet {
        self.toward(e.head, e.tail)
    }

    /// `(Ver_ẽ, Ver_ẽ^c)`, each sorted.
    pub fn subtree_split(&self, e: OEdge) -> Result<(Vec<usize>, Vec<usize>)> {
        if self.edge_index(e.tail, e.head).is_none() {
            return Err(Error::NoSuchEdge((e.tail, e.head)));
        }
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for v in 0..self.n {
            if self.in_side(e, v) {
                a.push(v);
            } else {
                b.push(v);
            }
        }
        Ok((a, b))
    }

    /// `v ∈ Ver_ẽ`.
    pub fn in_side(&self, e: OEdge, v: usize) -> bool {
        v != e.head && (v == e.tail || self.hop[e.head][v] == e.tail)
    }

    pub fn oriented_edges(&self) -> Vec<OEdge> {
        let mut out = Vec::with_capacity(2 * self.edges.len());
        for &(u, w) in &self.edges {
            out.push(OEdge::new(u, w));
            out.push(OEdge::new(w, u));
        }
        out
    }

    /// Unique path from `u` to `w`, inclusive.
    pub fn path(&self, u: usize, w: usize) -> Vec<usize> {
        let mut out = vec![u];
        let mut x = u;
        while x != w {
            x = self.hop[x][w];
            out.push(x);
        }
        out
    }

    /// `(Γ,v)`-independence of distinct marks.
    pub fn independent(&self, v: usize, i: Mark, j: Mark) -> bool {
        if i == j {
            return false;
        }
        match (self.dir(v, i), self.dir(v, j)) {
            (None, _) | (_, None) => true,
            (Some(a), Some(b)) => a != b,
        }
    }

    /// The unique vertex at which `i, j, k` are pairwise independent.
    pub fn pivot(&self, i: Mark, j: Mark, k: Mark) -> Result<usize> {
        if i == j || j == k || i == k {
            return Err(Error::RepeatedMarks);
        }
        (0..self.n)
            .find(|&v| self.independent(v, i, j) && self.independent(v, j, k) && self.independent(v, i, k))
            .ok_or_else(|| Error::InvalidTree("no pivot vertex".into()))
    }

    /// Split of edge `idx` normalized to the side containing mark 1.
    pub fn split(&self, idx: usize) -> MarkSet {
        let (u, w) = self.edges[idx];
        normalize(self.side_marks(OEdge::new(u, w)), self.all_marks())
    }

    /// All edge splits, normalized and sorted by order key.
    pub fn splits(&self) -> Vec<MarkSet> {
        let mut s: Vec<MarkSet> = (0..self.edges.len()).map(|k| self.split(k)).collect();
        s.sort_by_key(|&x| marks::order_key(x));
        s
    }

    pub fn is_fixed(&self, v: usize) -> bool {
        self.phi.as_ref().is_some_and(|p| p[v] == v)
    }

    pub fn edge_kind(&self, idx: usize) -> Option<EdgeKind> {
        let p = self.phi.as_ref()?;
        let (u, w) = self.edges[idx];
        Some(if p[u] == u && p[w] == w {
            EdgeKind::H
        } else if p[u] == w {
            EdgeKind::E
        } else {
            EdgeKind::C
        })
    }

    /// Image of edge `idx` under `φ`.
    pub fn phi_edge(&self, idx: usize) -> Option<usize> {
        let p = self.phi.as_ref()?;
        let (u, w) = self.edges[idx];
        self.edge_index(p[u], p[w])
    }

    /// Directions at `v` as mark sets: singletons for marks at `v`, then
    /// one set per neighbor.
    pub fn signature(&self, v: usize) -> Vec<MarkSet> {
        let mut s: Vec<MarkSet> = self.vertex_marks(v).into_iter().map(marks::bit).collect();
        s.extend(self.toward[v].iter().copied());
        s.sort_unstable();
        s
    }

    /// Canonical encoding: `C`/`R`/`P` (complex, real, pair labels without
    /// an involution), the number ℓ, then the sorted splits normalized to
    /// the side containing the first mark, e.g. `C5[{1,2},{1,2,3}]`.
    pub fn canonical_form(&self) -> String {
        let kind = match (self.real, self.phi.is_some()) {
            (false, _) => 'C',
            (true, true) => 'R',
            (true, false) => 'P',
        };
        let parts: Vec<String> = self.splits().into_iter().map(|s| marks::fmt_set(s, self.real)).collect();
        format!("{kind}{}[{}]", self.l, parts.join(","))
    }

    /// Builds the tree with the given pairwise compatible splits. For real
    /// labels, `φ` is derived and the split set must be conjugation
    /// invariant.
    pub fn from_splits(l: usize, real: bool, splits: &[MarkSet]) -> Result<Self> {
        let nm = marks::n_marks(l, real);
        let all = marks::full(nm);
        let mut adj: Vec<Vec<usize>> = vec![Vec::new()];
        let mut mu = vec![0usize; nm];
        for &s in splits {
            let s = normalize(s, all);
            if marks::card(s) < 2 || marks::card(all ^ s) < 2 {
                return Err(Error::InvalidTree(format!("split {} is not stable", marks::fmt_set(s, real))));
            }
            let n = adj.len();
            let mut placed = false;
            for v in 0..n {
                let dirs = directions(&adj, &mu, v);
                let inside = dirs.iter().filter(|d| d.1 & s == d.1).count();
                let outside = dirs.iter().filter(|d| d.1 & s == 0).count();
                if inside + outside != dirs.len() || inside < 2 || outside < 2 {
                    continue;
                }
                let x = n;
                adj.push(Vec::new());
                for (d, set) in dirs {
                    if set & s != set {
                        continue;
                    }
                    match d {
                        Direction::Mark(m) => mu[m - 1] = x,
                        Direction::Edge(w) => {
                            adj[v].retain(|&y| y != w);
                            adj[w].retain(|&y| y != v);
                            adj[w].push(x);
                            adj[x].push(w);
                        }
                    }
                }
                adj[v].push(x);
                adj[x].push(v);
                placed = true;
                break;
            }
            if !placed {
                return Err(Error::InvalidTree(format!(
                    "split {} is repeated or incompatible",
                    marks::fmt_set(s, real)
                )));
            }
        }
        let n = adj.len();
        let edges: Vec<(usize, usize)> =
            (0..n).flat_map(|u| adj[u].iter().filter(move |&&w| u < w).map(move |&w| (u, w))).collect();
        let mut t = Self::raw(l, real, n, edges, mu, None)?;
        if real {
            t.phi = Some(t.derive_phi()?);
        }
        Ok(t)
    }

    /// The involution induced by conjugation of labels, if the tree is
    /// conjugation invariant.
    pub fn derive_phi(&self) -> Result<Vec<usize>> {
        if !self.real {
            return Err(Error::NotReal);
        }
        let sigs: Vec<Vec<MarkSet>> = (0..self.n).map(|v| self.signature(v)).collect();
        let mut phi = vec![0; self.n];
        for v in 0..self.n {
            let mut c: Vec<MarkSet> = sigs[v].iter().map(|&s| marks::conj_set(s)).collect();
            c.sort_unstable();
            phi[v] = sigs.iter().position(|s| *s == c).ok_or(Error::NotReal)?;
        }
        Ok(phi)
    }

    /// Same tree with the involution replaced.
    pub fn with_phi(&self, phi: Option<Vec<usize>>) -> Result<Self> {
        Self::new(self.l, self.real, self.n, self.edges.clone(), self.mu.clone(), phi)
    }

    /// All `2^|Edg|` contractions, the identity first.
    pub fn contractions(&self) -> Vec<Contraction> {
        (0..1u64 << self.edges.len()).map(|mask| self.contract(mask)).collect()
    }

    /// Contractions along `φ`-invariant edge sets; each keeps its involution.
    pub fn real_contractions(&self) -> Vec<Contraction> {
        self.contractions().into_iter().filter(|c| c.tree.phi.is_some()).collect()
    }

    /// Contracts the edges whose indices are set in `mask`.
    pub fn contract(&self, mask: u64) -> Contraction {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let nx = p[y];
                p[y] = r;
                y = nx;
            }
            r
        }
        for (k, &(u, w)) in self.edges.iter().enumerate() {
            if mask >> k & 1 == 1 {
                let (a, b) = (find(&mut parent, u), find(&mut parent, w));
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut kappa = vec![NONE; self.n];
        let mut root_id = vec![NONE; self.n];
        let mut next = 0;
        for v in 0..self.n {
            let r = find(&mut parent, v);
            if root_id[r] == NONE {
                root_id[r] = next;
                next += 1;
            }
            kappa[v] = root_id[r];
        }
        let edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 0)
            .map(|(_, &(u, w))| (kappa[u], kappa[w]))
            .collect();
        let mu: Vec<usize> = self.mu.iter().map(|&v| kappa[v]).collect();
        let invariant = self.phi.as_ref().is_some_and(|_| {
            (0..self.edges.len()).all(|k| {
                let j = self.phi_edge(k).expect("phi maps edges to edges");
                (mask >> k & 1) == (mask >> j & 1)
            })
        });
        let phi = if invariant {
            let p = self.phi.as_ref().expect("checked");
            let mut q = vec![0; next];
            for v in 0..self.n {
                q[kappa[v]] = kappa[p[v]];
            }
            Some(q)
        } else {
            None
        };
        let tree = Self::raw(self.l, self.real, next, edges, mu, phi).expect("contraction of a tree is a tree");
        Contraction { tree, kappa, mask }
    }

    /// `Γv₊`: adds mark `ℓ+1` at `v`, or `(ℓ+1)⁺` at `v` and `(ℓ+1)⁻` at `φ(v)`.
    pub fn attach_point(&self, v: usize) -> Result<Self> {
        if v >= self.n {
            return Err(Error::NoSuchVertex(v));
        }
        let mut mu = self.mu.clone();
        mu.push(v);
        if self.real {
            let p = self.phi.as_ref().ok_or(Error::NotReal)?;
            mu.push(p[v]);
        }
        Self::new(self.l + 1, self.real, self.n, self.edges.clone(), mu, self.phi.clone())
    }

    /// `Γe₊`: subdivides edge `idx` by a vertex carrying the new mark. In the
    /// real case a `φ`-invariant edge gets one fixed vertex carrying both new
    /// marks, otherwise the edge and its conjugate are both subdivided.
    pub fn attach_at_edge(&self, idx: usize) -> Result<Self> {
        let &(u, w) = self.edges.get(idx).ok_or(Error::NoSuchEdge((idx, idx)))?;
        let mut edges = self.edges.clone();
        let mut mu = self.mu.clone();
        let x = self.n;
        edges[idx] = (u, x);
        edges.push((x, w));
        if !self.real {
            mu.push(x);
            return Self::new(self.l + 1, false, self.n + 1, edges, mu, None);
        }
        let p = self.phi.as_ref().ok_or(Error::NotReal)?;
        let j = self.phi_edge(idx).ok_or(Error::NotReal)?;
        let mut phi = p.clone();
        if j == idx {
            mu.push(x);
            mu.push(x);
            phi.push(x);
            Self::new(self.l + 1, true, self.n + 1, edges, mu, Some(phi))
        } else {
            let (a, b) = self.edges[j];
            let y = x + 1;
            edges[j] = (a, y);
            edges.push((y, b));
            mu.push(x);
            mu.push(y);
            phi.push(y);
            phi.push(x);
            Self::new(self.l + 1, true, self.n + 2, edges, mu, Some(phi))
        }
    }

    /// Real only: replaces the E edge `e` by a path `tail, a, b, head` with
    /// `(ℓ+1)⁺` on `a`, `(ℓ+1)⁻` on `b`, and `φ` swapping `a, b`.
    pub fn attach_chain_at_edge(&self, e: OEdge) -> Result<Self> {
        let p = self.phi.as_ref().ok_or(Error::NotReal)?;
        let idx = self.edge_index(e.tail, e.head).ok_or(Error::NoSuchEdge((e.tail, e.head)))?;
        if p[e.tail] != e.head {
            return Err(Error::InvalidTree(format!("edge ({},{}) is not an E edge", e.tail, e.head)));
        }
        let (a, b) = (self.n, self.n + 1);
        let mut edges = self.edges.clone();
        edges[idx] = (e.tail, a);
        edges.push((a, b));
        edges.push((b, e.head));
        let mut mu = self.mu.clone();
        mu.push(a);
        mu.push(b);
        let mut phi = p.clone();
        phi.push(b);
        phi.push(a);
        Self::new(self.l + 1, true, self.n + 2, edges, mu, Some(phi))
    }

    /// Bubbles mark `m` off onto a new vertex together with the new mark
    /// (and symmetrically `m̄` with `(ℓ+1)⁻` in the real case).
    pub fn attach_at_mark(&self, m: Mark) -> Result<Self> {
        if m == 0 || m > self.n_marks() {
            return Err(Error::InvalidTree(format!("no mark {m}")));
        }
        let mut edges = self.edges.clone();
        let mut mu = self.mu.clone();
        let x = self.n;
        edges.push((self.mu(m), x));
        mu[m - 1] = x;
        mu.push(x);
        if !self.real {
            return Self::new(self.l + 1, false, self.n + 1, edges, mu, None);
        }
        let p = self.phi.as_ref().ok_or(Error::NotReal)?;
        let mc = marks::conj(m);
        let y = x + 1;
        edges.push((self.mu(mc), y));
        mu[mc - 1] = y;
        mu.push(y);
        let mut phi = p.clone();
        phi.push(y);
        phi.push(x);
        Self::new(self.l + 1, true, self.n + 2, edges, mu, Some(phi))
    }

    /// Real only: a new fixed vertex carrying both `(ℓ+1)^±`, attached to
    /// the fixed vertex `v`.
    pub fn attach_pair_bubble(&self, v: usize) -> Result<Self> {
        let p = self.phi.as_ref().ok_or(Error::NotReal)?;
        if v >= self.n || p[v] != v {
            return Err(Error::InvalidTree(format!("vertex {v} is not fixed by phi")));
        }
        let x = self.n;
        let mut edges = self.edges.clone();
        edges.push((v, x));
        let mut mu = self.mu.clone();
        mu.push(x);
        mu.push(x);
        let mut phi = p.clone();
        phi.push(x);
        Self::new(self.l + 1, true, self.n + 1, edges, mu, Some(phi))
    }

    pub fn to_json(&self) -> Value {
        let mu: serde_json::Map<String, Value> =
            (1..=self.n_marks()).map(|m| (marks::label(m, self.real), json!(self.mu(m)))).collect();
        json!({
            "l": self.l,
            "real": self.real,
            "vertices": self.n,
            "edges": self.edges.iter().map(|&(u, w)| json!([u, w])).collect::<Vec<_>>(),
            "mu": mu,
            "phi": self.phi,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |s: &str| Error::Parse(format!("tree json: {s}"));
        let l = v["l"].as_u64().ok_or_else(|| bad("l"))? as usize;
        let real = v["real"].as_bool().unwrap_or(false);
        let edges: Vec<(usize, usize)> = v["edges"]
            .as_array()
            .ok_or_else(|| bad("edges"))?
            .iter()
            .map(|e| match (e[0].as_u64(), e[1].as_u64()) {
                (Some(a), Some(b)) => Ok((a as usize, b as usize)),
                _ => Err(bad("edge")),
            })
            .collect::<Result<_>>()?;
        let n = match v["vertices"].as_u64() {
            Some(n) => n as usize,
            None => edges.len() + 1,
        };
        let obj = v["mu"].as_object().ok_or_else(|| bad("mu"))?;
        let mut mu = vec![NONE; marks::n_marks(l, real)];
        for (k, x) in obj {
            let m = marks::parse_label(k, real)?;
            let slot = mu.get_mut(m - 1).ok_or_else(|| bad("mark out of range"))?;
            *slot = x.as_u64().ok_or_else(|| bad("mu value"))? as usize;
        }
        if mu.contains(&NONE) {
            return Err(bad("mu is not total"));
        }
        let phi = match &v["phi"] {
            Value::Null => None,
            Value::Array(a) => Some(
                a.iter().map(|x| x.as_u64().map(|y| y as usize).ok_or_else(|| bad("phi"))).collect::<Result<_>>()?,
            ),
            _ => return Err(bad("phi")),
        };
        Self::new(l, real, n, edges, mu, phi)
    }
}

/// Result of contracting an edge set: the tree `Γ′` and the collapse map
/// `κ: Ver(Γ) → Ver(Γ′)`.
#[derive(Clone, Debug)]
pub struct Contraction {
    pub tree: MarkedTree,
    pub kappa: Vec<usize>,
    pub mask: u64,
}

#[derive(Clone, Copy, Debug)]
enum Direction {
    Mark(Mark),
    Edge(usize),
}

fn directions(adj: &[Vec<usize>], mu: &[usize], v: usize) -> Vec<(Direction, MarkSet)> {
    let mut out: Vec<(Direction, MarkSet)> = mu
        .iter()
        .enumerate()
        .filter(|(_, &x)| x == v)
        .map(|(k, _)| (Direction::Mark(k + 1), marks::bit(k + 1)))
        .collect();
    for &w in &adj[v] {
        let mut stack = vec![(w, v)];
        let mut verts = Vec::new();
        while let Some((x, from)) = stack.pop() {
            verts.push(x);
            for &y in &adj[x] {
                if y != from {
                    stack.push((y, x));
                }
            }
        }
        let s = mu
            .iter()
            .enumerate()
            .filter(|(_, x)| verts.contains(x))
            .fold(0, |acc, (k, _)| acc | marks::bit(k + 1));
        out.push((Direction::Edge(w), s));
    }
    out
}

/// Side of a split containing mark 1.
pub fn normalize(s: MarkSet, all: MarkSet) -> MarkSet {
    if s & 1 == 1 {
        s
    } else {
        all ^ s
    }
}

/// Splits `S ∋ 1` with both sides of size ≥ 2, sorted by order key.
pub fn candidate_splits(n_marks: usize) -> Vec<MarkSet> {
    let all = marks::full(n_marks);
    let mut out: Vec<MarkSet> = (0..1u64 << (n_marks - 1))
        .map(|x| (x << 1) | 1)
        .filter(|&s| marks::card(s) >= 2 && marks::card(all ^ s) >= 2)
        .collect();
    out.sort_by_key(|&s| marks::order_key(s));
    out
}

/// Compatibility of two splits normalized to contain mark 1.
pub fn compatible(a: MarkSet, b: MarkSet, all: MarkSet) -> bool {
    a & !b == 0 || b & !a == 0 || a | b == all
}

fn min_marks(real: bool) -> usize {
    if real {
        2
    } else {
        3
    }
}

/// Split families of all isomorphism classes: every compatible family for
/// complex labels, every conjugation invariant one for real labels.
fn families(l: usize, real: bool, mut visit: impl FnMut(&[MarkSet])) -> Result<()> {
    if l < min_marks(real) {
        return Err(Error::TooFewMarks(l));
    }
    let nm = marks::n_marks(l, real);
    let all = marks::full(nm);
    let cand = candidate_splits(nm);
    let groups: Vec<Vec<MarkSet>> = if real {
        let mut g: Vec<Vec<MarkSet>> = Vec::new();
        for &s in &cand {
            let c = normalize(marks::conj_set(s), all);
            if c == s {
                g.push(vec![s]);
            } else if c > s && compatible(s, c, all) {
                g.push(vec![s, c]);
            }
        }
        g
    } else {
        cand.iter().map(|&s| vec![s]).collect()
    };
    fn rec(
        groups: &[Vec<MarkSet>],
        start: usize,
        chosen: &mut Vec<MarkSet>,
        all: MarkSet,
        visit: &mut dyn FnMut(&[MarkSet]),
    ) {
        visit(chosen);
        for k in start..groups.len() {
            if groups[k].iter().all(|&s| chosen.iter().all(|&c| compatible(s, c, all))) {
                let before = chosen.len();
                chosen.extend_from_slice(&groups[k]);
                rec(groups, k + 1, chosen, all, visit);
                chosen.truncate(before);
            }
        }
    }
    rec(&groups, 0, &mut Vec::new(), all, &mut visit);
    Ok(())
}

/// Number of isomorphism classes of stable trees.
pub fn count_trees(l: usize, real: bool) -> Result<usize> {
    let mut n = 0;
    families(l, real, |_| n += 1)?;
    Ok(n)
}

/// One representative per isomorphism class (label preserving, commuting
/// with `φ` in the real case), ordered by edge count then canonical form.
pub fn enumerate_trees(l: usize, real: bool) -> Result<Vec<MarkedTree>> {
    let mut fams: Vec<Vec<MarkSet>> = Vec::new();
    families(l, real, |f| fams.push(f.to_vec()))?;
    let mut trees: Vec<MarkedTree> =
        fams.iter().map(|f| MarkedTree::from_splits(l, real, f)).collect::<Result<_>>()?;
    let mut keyed: Vec<(usize, String, MarkedTree)> =
        trees.drain(..).map(|t| (t.edges.len(), t.canonical_form(), t)).collect();
    keyed.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    Ok(keyed.into_iter().map(|k| k.2).collect())
}

/// The one-vertex tree.
pub fn smooth_tree(l: usize, real: bool) -> Result<MarkedTree> {
    let phi = if real { Some(vec![0]) } else { None };
    MarkedTree::new(l, real, 1, Vec::new(), vec![0; marks::n_marks(l, real)], phi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_round_trip() {
        let t = MarkedTree::from_splits(5, false, &[marks::set([1, 2]), marks::set([1, 2, 3])]).unwrap();
        assert_eq!(t.vertex_count(), 3);
        assert_eq!(t.splits(), vec![marks::set([1, 2]), marks::set([1, 2, 3])]);
        assert_eq!(t.canonical_form(), "C5[{1,2},{1,2,3}]");
        assert!(MarkedTree::from_splits(4, false, &[marks::set([1, 2]), marks::set([1, 3])]).is_err());
    }

    #[test]
    fn real_phi_derived() {
        let t = MarkedTree::from_splits(2, true, &[marks::set([1, 3])]).unwrap();
        assert_eq!(t.phi(), Some(&[1, 0][..]));
        assert_eq!(t.edge_kind(0), Some(EdgeKind::E));
        assert!(MarkedTree::from_splits(3, true, &[marks::set([1, 3])]).is_err());
    }
}
