//! Seeded verification suites shared by the command line and the test
//! harness. Every case draws from its own ChaCha stream of the master seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::charts::{self, MarkingMap, Quad};
use crate::curves::sample_curve;
use crate::error::{Error, Result};
use crate::exactfield::{cross_ratio, random_point, GaussRat, ProjPoint, Rat};
use crate::exec::Exec;
use crate::trees::{enumerate_trees, MarkedTree};

/// Generator for case `id` under `seed`.
pub fn case_rng(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn distinct_points<R: Rng + ?Sized>(rng: &mut R, n: usize, bound: i64) -> Vec<ProjPoint> {
    let mut out: Vec<ProjPoint> = Vec::with_capacity(n);
    while out.len() < n {
        let z = random_point(rng, bound);
        if !out.contains(&z) {
            out.push(z);
        }
    }
    out
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CrReport {
    pub quadruples: usize,
    pub quintuples: usize,
    pub checks: usize,
    pub failures: usize,
    /// Cocycle instances skipped because the product is `0·∞`.
    pub indeterminate: usize,
    pub cases: Vec<Value>,
}

impl CrReport {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.checks > 0
    }

    pub fn to_json(&self) -> Value {
        json!({
            "quadruples": self.quadruples,
            "quintuples": self.quintuples,
            "checks": self.checks,
            "failures": self.failures,
            "indeterminate": self.indeterminate,
            "cases": self.cases,
        })
    }
}

/// The symmetry relations on `n` random quadruples and the cocycle
/// relation on `n` random quintuples.
pub fn verify_cr_relations(n: usize, bound: i64, seed: u64, exec: Exec) -> Result<CrReport> {
    let quad = exec.map_range(n, |id| -> Result<Vec<(bool, Value)>> {
        let mut rng = case_rng(seed, id as u64);
        let z = distinct_points(&mut rng, 4, bound);
        let cr = |a: usize, b: usize, c: usize, d: usize| cross_ratio(&z[a], &z[b], &z[c], &z[d]);
        let x = cr(0, 1, 2, 3)?;
        let rels = [
            ("kmij", cr(2, 3, 0, 1)?, x.clone()),
            ("jikm", cr(1, 0, 2, 3)?, x.recip()),
            ("ijmk", cr(0, 1, 3, 2)?, x.recip()),
            ("mjki", cr(3, 1, 2, 0)?, x.one_minus()),
            ("ikjm", cr(0, 2, 1, 3)?, x.one_minus()),
            ("kjim", cr(2, 1, 0, 3)?, x.neg_over_one_minus()),
            ("imkj", cr(0, 3, 2, 1)?, x.neg_over_one_minus()),
        ];
        let pts: Vec<String> = z.iter().map(|p| p.to_string()).collect();
        Ok(rels.into_iter().map(|(name, got, want)| (got == want, json!({"relation": name, "points": pts}))).collect())
    });
    let quint = exec.map_range(n, |id| -> Result<Option<(bool, Value)>> {
        let mut rng = case_rng(seed, (n + id) as u64);
        let z = distinct_points(&mut rng, 5, bound);
        let cr = |a: usize, b: usize, c: usize, d: usize| cross_ratio(&z[a], &z[b], &z[c], &z[d]);
        let (i, j, k, m, q) = (0, 1, 2, 3, 4);
        let lhs = cr(i, j, k, q)?;
        let pts: Vec<String> = z.iter().map(|p| p.to_string()).collect();
        match cr(i, j, k, m)?.mul(&cr(i, j, m, q)?) {
            Ok(rhs) => Ok(Some((lhs == rhs, json!({"relation": "cocycle", "points": pts})))),
            Err(Error::Indeterminate) => Ok(None),
            Err(e) => Err(e),
        }
    });
    let mut r = CrReport { quadruples: n, quintuples: n, ..Default::default() };
    let record = |ok: bool, case: Value, r: &mut CrReport| {
        r.checks += 1;
        if !ok {
            r.failures += 1;
            if r.cases.len() < 10 {
                r.cases.push(case);
            }
        }
    };
    for v in quad {
        for (ok, case) in v? {
            record(ok, case, &mut r);
        }
    }
    for v in quint {
        match v? {
            Some((ok, case)) => record(ok, case, &mut r),
            None => r.indeterminate += 1,
        }
    }
    Ok(r)
}

/// Ordered quadruples of distinct marks among `n`.
pub fn ordered_quads(n: usize) -> Vec<Quad> {
    let mut out = Vec::new();
    for a in 1..=n {
        for b in 1..=n {
            for c in 1..=n {
                for d in 1..=n {
                    if a != b && a != c && a != d && b != c && b != d && c != d {
                        out.push([a, b, c, d]);
                    }
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BasisReport {
    pub l: usize,
    pub real: bool,
    pub trees: usize,
    pub curves: usize,
    /// Trees whose basis size differs from `ℓ−3` (complex) or `2ℓ−3` (real).
    pub size_violations: usize,
    pub comparisons: usize,
    pub mismatches: usize,
    pub errors: usize,
    pub cases: Vec<Value>,
}

impl BasisReport {
    pub fn passed(&self) -> bool {
        self.size_violations == 0 && self.mismatches == 0 && self.errors == 0 && self.comparisons > 0
    }

    pub fn to_json(&self) -> Value {
        json!({
            "l": self.l,
            "real": self.real,
            "trees": self.trees,
            "curves": self.curves,
            "size_violations": self.size_violations,
            "comparisons": self.comparisons,
            "mismatches": self.mismatches,
            "errors": self.errors,
            "vertex_quad_pattern": "(i1,i2,i3,ir)",
            "cases": self.cases,
        })
    }
}

struct TreeOutcome {
    size_ok: bool,
    curves: usize,
    comparisons: usize,
    mismatches: usize,
    errors: usize,
    cases: Vec<Value>,
}

fn basis_tree(t: &MarkedTree, samples: usize, bound: i64, seed: u64, id: u64) -> TreeOutcome {
    let mut out = TreeOutcome { size_ok: true, curves: 0, comparisons: 0, mismatches: 0, errors: 0, cases: Vec::new() };
    let eta = MarkingMap::systematic(t);
    let basis = match charts::gamma_basis(t, &eta) {
        Ok(b) => b,
        Err(e) => {
            out.errors += 1;
            out.cases.push(json!({"tree": t.canonical_form(), "error": e.to_string()}));
            return out;
        }
    };
    out.size_ok = basis.len() + 3 == t.n_marks();
    let quads = ordered_quads(t.n_marks());
    let mut rng = case_rng(seed, id);
    for _ in 0..samples {
        let c = match sample_curve(t, bound, &mut rng) {
            Ok(c) => c,
            Err(e) => {
                out.errors += 1;
                out.cases.push(json!({"tree": t.canonical_form(), "error": e.to_string()}));
                continue;
            }
        };
        out.curves += 1;
        let table = charts::basis_values(&c, &basis).and_then(|v| charts::reconstruct_all(t, &eta, &basis, &v));
        let table = match table {
            Ok(tb) => tb,
            Err(e) => {
                out.errors += 1;
                if out.cases.len() < 5 {
                    out.cases.push(json!({"curve": c.to_json(), "error": e.to_string()}));
                }
                continue;
            }
        };
        for &q in &quads {
            out.comparisons += 1;
            let ok = matches!((table.get(q), c.cross_ratio_q(q)), (Ok(a), Ok(b)) if a == b);
            if !ok {
                out.mismatches += 1;
                if out.cases.len() < 5 {
                    out.cases.push(json!({"curve": c.to_json(), "q": q}));
                }
            }
        }
    }
    out
}

/// Reconstruction from the `Γ`-basis against direct evaluation, for every
/// tree, `samples` curves per tree, and every ordered quadruple.
pub fn verify_basis(l: usize, real: bool, samples: usize, bound: i64, seed: u64, exec: Exec) -> Result<BasisReport> {
    let trees = enumerate_trees(l, real)?;
    let outcomes = exec.map_range(trees.len(), |i| basis_tree(&trees[i], samples, bound, seed, i as u64));
    let mut r = BasisReport { l, real, trees: trees.len(), ..Default::default() };
    for o in outcomes {
        r.size_violations += usize::from(!o.size_ok);
        r.curves += o.curves;
        r.comparisons += o.comparisons;
        r.mismatches += o.mismatches;
        r.errors += o.errors;
        for c in o.cases {
            if r.cases.len() < 10 {
                r.cases.push(c);
            }
        }
    }
    Ok(r)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RealSliceReport {
    pub l: usize,
    pub trees: usize,
    pub real_curves: usize,
    pub accepted: usize,
    pub perturbed: usize,
    /// Perturbed assignments off the fixed locus by the all-quadruple test.
    pub perturbed_nonreal: usize,
    pub perturbed_rejected: usize,
    /// Curves sampled without real structure that are not real points.
    pub nonreal_curves: usize,
    pub nonreal_rejected: usize,
    /// Verdicts that disagree with the all-quadruple test.
    pub disagreements: usize,
    pub errors: usize,
    pub cases: Vec<Value>,
}

impl RealSliceReport {
    pub fn passed(&self) -> bool {
        self.real_curves > 0
            && self.perturbed_nonreal > 0
            && self.accepted == self.real_curves
            && self.perturbed_rejected == self.perturbed_nonreal
            && self.nonreal_rejected == self.nonreal_curves
            && self.disagreements == 0
            && self.errors == 0
    }

    pub fn to_json(&self) -> Value {
        json!({
            "l": self.l,
            "trees": self.trees,
            "real_curves": self.real_curves,
            "accepted": self.accepted,
            "perturbed": self.perturbed,
            "perturbed_nonreal": self.perturbed_nonreal,
            "perturbed_rejected": self.perturbed_rejected,
            "nonreal_curves": self.nonreal_curves,
            "nonreal_rejected": self.nonreal_rejected,
            "disagreements": self.disagreements,
            "errors": self.errors,
            "cases": self.cases,
        })
    }

    fn absorb(&mut self, o: RealSliceReport) {
        self.real_curves += o.real_curves;
        self.accepted += o.accepted;
        self.perturbed += o.perturbed;
        self.perturbed_nonreal += o.perturbed_nonreal;
        self.perturbed_rejected += o.perturbed_rejected;
        self.nonreal_curves += o.nonreal_curves;
        self.nonreal_rejected += o.nonreal_rejected;
        self.disagreements += o.disagreements;
        self.errors += o.errors;
        for c in o.cases {
            if self.cases.len() < 10 {
                self.cases.push(c);
            }
        }
    }

    fn note(&mut self, v: Value) {
        if self.cases.len() < 10 {
            self.cases.push(v);
        }
    }
}

/// Adds a random Gaussian rational with nonzero real and imaginary parts.
fn perturb<R: Rng + ?Sized>(z: &ProjPoint, rng: &mut R, bound: i64) -> ProjPoint {
    let b = bound.max(1);
    let part = |rng: &mut R| {
        let s = if rng.gen_bool(0.5) { 1 } else { -1 };
        Rat::frac(s, rng.gen_range(1..=b)).expect("positive")
    };
    let d = GaussRat::new(part(rng), part(rng));
    match z.value() {
        Some(v) => ProjPoint::finite(v.add(&d)),
        None => ProjPoint::finite(d),
    }
}

/// `conj CR_q = CR_{q̄}` for every ordered quadruple, read off the full
/// reconstructed table.
fn on_fixed_locus(values: &[ProjPoint], t: &MarkedTree, eta: &MarkingMap, basis: &charts::ChartBasis) -> Result<bool> {
    let table = charts::reconstruct_all(t, eta, basis, values)?;
    for q in ordered_quads(t.n_marks()) {
        if table.get(q)?.conj() != table.get(charts::conj_quad(q))? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The fixed-locus equations on real curves, on real curves with one basis
/// value moved, and on curves sampled without real structure. Verdicts are
/// compared with the all-quadruple conjugation test.
pub fn verify_real_slice(l: usize, samples: usize, bound: i64, seed: u64, exec: Exec) -> Result<RealSliceReport> {
    let trees = enumerate_trees(l, true)?;
    let per_tree = exec.map_range(trees.len(), |i| -> Result<RealSliceReport> {
        let t = &trees[i];
        let eta = MarkingMap::systematic(t);
        let basis = charts::gamma_basis(t, &eta)?;
        let plain = t.with_phi(None)?;
        let mut rng = case_rng(seed, i as u64);
        let mut r = RealSliceReport::default();
        let verdicts = |w: &[ProjPoint]| -> Result<(bool, bool)> {
            Ok((charts::real_slice_check(w, t, &eta)?, on_fixed_locus(w, t, &eta, &basis)?))
        };
        for _ in 0..samples {
            let c = sample_curve(t, bound, &mut rng)?;
            let values = charts::basis_values(&c, &basis)?;
            r.real_curves += 1;
            let (check, oracle) = verdicts(&values)?;
            if check {
                r.accepted += 1;
            } else {
                r.note(json!({"type": "real_rejected", "curve": c.to_json()}));
            }
            if check != oracle {
                r.disagreements += 1;
            }
            for k in 0..values.len() {
                let mut w = values.clone();
                w[k] = perturb(&w[k], &mut rng, bound);
                r.perturbed += 1;
                match verdicts(&w) {
                    Ok((check, oracle)) => {
                        if !oracle {
                            r.perturbed_nonreal += 1;
                            if !check {
                                r.perturbed_rejected += 1;
                            }
                        }
                        if check != oracle {
                            r.disagreements += 1;
                            r.note(json!({"type": "perturbed_disagreement", "curve": c.to_json(), "index": k}));
                        }
                    }
                    Err(Error::ChartDomain(_)) => {}
                    Err(e) => {
                        r.errors += 1;
                        r.note(json!({"type": "perturbed_error", "index": k, "error": e.to_string()}));
                    }
                }
            }
            let d = sample_curve(&plain, bound, &mut rng)?;
            let dv = charts::basis_values(&d, &basis)?;
            let (check, oracle) = verdicts(&dv)?;
            if !oracle {
                r.nonreal_curves += 1;
                if !check {
                    r.nonreal_rejected += 1;
                }
            }
            if check != oracle {
                r.disagreements += 1;
                r.note(json!({"type": "nonreal_disagreement", "curve": d.to_json()}));
            }
        }
        Ok(r)
    });
    let mut r = RealSliceReport { l, trees: trees.len(), ..Default::default() };
    for p in per_tree {
        r.absorb(p?);
    }
    Ok(r)
}
