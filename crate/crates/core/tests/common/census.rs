use std::collections::BTreeSet;

use dmlab_core::marks::MarkSet;
use dmlab_core::trees::enumerate_trees;

/// Plain tree for the census: adjacency lists and the vertex of each mark.
#[derive(Clone)]
pub struct Census {
    adj: Vec<Vec<usize>>,
    mu: Vec<usize>,
}

impl Census {
    fn add_vertex(&mut self) -> usize {
        self.adj.push(Vec::new());
        self.adj.len() - 1
    }

    fn link(&mut self, a: usize, b: usize) {
        self.adj[a].push(b);
        self.adj[b].push(a);
    }

    fn unlink(&mut self, a: usize, b: usize) {
        self.adj[a].retain(|&x| x != b);
        self.adj[b].retain(|&x| x != a);
    }

    /// Marks reachable from `w` without passing through `v`.
    fn beyond(&self, v: usize, w: usize) -> MarkSet {
        let mut seen = vec![false; self.adj.len()];
        seen[v] = true;
        let mut stack = vec![w];
        let mut out = 0;
        while let Some(x) = stack.pop() {
            if seen[x] {
                continue;
            }
            seen[x] = true;
            for (k, &m) in self.mu.iter().enumerate() {
                if m == x {
                    out |= 1u64 << k;
                }
            }
            stack.extend(self.adj[x].iter().copied());
        }
        out
    }

    /// Sorted splits, each as the side containing the first mark.
    fn key(&self) -> Vec<MarkSet> {
        let n = self.mu.len();
        let all = (1u64 << n) - 1;
        let mut out = Vec::new();
        for v in 0..self.adj.len() {
            for &w in &self.adj[v] {
                if v < w {
                    let s = self.beyond(v, w);
                    out.push(if s & 1 == 1 { s } else { all ^ s });
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Every way to insert one more mark keeping all valences at least 3.
    fn insertions(&self) -> Vec<Census> {
        let mut out = Vec::new();
        for v in 0..self.adj.len() {
            let mut t = self.clone();
            t.mu.push(v);
            out.push(t);
        }
        for v in 0..self.adj.len() {
            for &w in &self.adj[v] {
                if v < w {
                    let mut t = self.clone();
                    t.unlink(v, w);
                    let x = t.add_vertex();
                    t.link(v, x);
                    t.link(x, w);
                    t.mu.push(x);
                    out.push(t);
                }
            }
        }
        for m in 0..self.mu.len() {
            let mut t = self.clone();
            let x = t.add_vertex();
            t.link(self.mu[m], x);
            t.mu[m] = x;
            t.mu.push(x);
            out.push(t);
        }
        out
    }
}

/// Isomorphism classes of stable trees on `l` marks, by split sets.
pub fn census(l: usize) -> BTreeSet<Vec<MarkSet>> {
    let mut level = vec![Census { adj: vec![Vec::new()], mu: vec![0, 0, 0] }];
    for _ in 3..l {
        let mut seen = BTreeSet::new();
        let mut next = Vec::new();
        for t in &level {
            for u in t.insertions() {
                if seen.insert(u.key()) {
                    next.push(u);
                }
            }
        }
        level = next;
    }
    level.iter().map(Census::key).collect()
}

pub fn library_keys(l: usize, real: bool) -> BTreeSet<Vec<MarkSet>> {
    enumerate_trees(l, real)
        .unwrap()
        .iter()
        .map(|t| {
            let mut k = t.splits();
            k.sort_unstable();
            k
        })
        .collect()
}
