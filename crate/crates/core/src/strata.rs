//! Index sets of boundary strata, their real classification, and blowup
//! schedules.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::marks::{self, MarkSet};
use crate::trees::{MarkedTree, OEdge};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Complex,
    H,
    E,
    D1,
    D2,
    D3,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Complex => "C",
            Kind::H => "H",
            Kind::E => "E",
            Kind::D1 => "D1",
            Kind::D2 => "D2",
            Kind::D3 => "D3",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StratumLabel {
    pub l: usize,
    pub real: bool,
    pub rho: MarkSet,
    pub kind: Kind,
}

impl StratumLabel {
    pub fn order_key(&self) -> (usize, Vec<usize>) {
        marks::order_key(self.rho)
    }

    pub fn labels(&self) -> Vec<String> {
        marks::labels(self.rho, self.real)
    }

    pub fn to_json(&self) -> Value {
        json!({"rho": self.labels(), "kind": self.kind.name()})
    }
}

impl std::fmt::Display for StratumLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", marks::fmt_set(self.rho, self.real), self.kind.name())
    }
}

fn sorted(mut v: Vec<MarkSet>) -> Vec<MarkSet> {
    v.sort_by_key(|&s| marks::order_key(s));
    v
}

/// `ρ ∈ 𝒜_ℓ`.
pub fn in_a_ell(rho: MarkSet, l: usize) -> bool {
    let all = marks::full(l);
    rho & !all == 0 && marks::card(rho & 0b111) >= 2 && marks::card(all ^ rho) >= 2
}

/// `ρ ∈ 𝒜_ℓ^±`.
pub fn in_a_ell_pm(rho: MarkSet, l: usize) -> bool {
    let all = marks::full(2 * l);
    rho & !all == 0 && marks::card(rho & 0b111) >= 2 && marks::card(all ^ rho) >= 2
}

/// `𝒜_ℓ`, sorted by order key.
pub fn build_a_ell(l: usize) -> Vec<StratumLabel> {
    sorted((0..1u64 << l).filter(|&r| in_a_ell(r, l)).collect())
        .into_iter()
        .map(|rho| StratumLabel { l, real: false, rho, kind: Kind::Complex })
        .collect()
}

/// `𝒜_ℓ^±`, sorted by order key.
pub fn build_a_ell_pm(l: usize) -> Vec<MarkSet> {
    sorted((0..1u64 << (2 * l)).filter(|&r| in_a_ell_pm(r, l)).collect())
}

/// Kind of `ρ ∈ 𝒜_ℓ^±`, or `None` if `ρ` and `ρ̄` are incomparable in the
/// sense that `D_{ℓ;ρ}` contains no real curve.
pub fn classify_real(rho: MarkSet, l: usize) -> Option<Kind> {
    if !in_a_ell_pm(rho, l) {
        return None;
    }
    let all = marks::full(2 * l);
    let c = all ^ rho;
    let b = marks::conj_set(rho);
    if b == rho {
        Some(Kind::H)
    } else if b == c {
        Some(Kind::E)
    } else if b & !c == 0 {
        Some(Kind::D1)
    } else if c & !b == 0 {
        let pre = all ^ marks::conj_set(rho);
        if in_a_ell_pm(pre, l) && marks::conj_set(pre) & !(all ^ pre) == 0 && marks::conj_set(pre) != all ^ pre {
            Some(Kind::D2)
        } else {
            Some(Kind::D3)
        }
    } else {
        None
    }
}

/// `(𝒜_ℓ^±, 𝒜_ℓ^ℝ)` with kinds, both sorted by order key.
pub fn build_a_ell_real(l: usize) -> (Vec<MarkSet>, Vec<StratumLabel>) {
    let pm = build_a_ell_pm(l);
    let r = pm
        .iter()
        .filter_map(|&rho| classify_real(rho, l).map(|kind| StratumLabel { l, real: true, rho, kind }))
        .collect();
    (pm, r)
}

/// Counts `(H, E, D1, D2, D3)`.
pub fn kind_counts(labels: &[StratumLabel]) -> [usize; 5] {
    let mut c = [0; 5];
    for s in labels {
        let k = match s.kind {
            Kind::H => 0,
            Kind::E => 1,
            Kind::D1 => 2,
            Kind::D2 => 3,
            Kind::D3 => 4,
            Kind::Complex => continue,
        };
        c[k] += 1;
    }
    c
}

/// The other label of the same boundary divisor: `ρ̄^c` for D1/D2, `ρ̄` for
/// D3, `None` for hypersurfaces.
pub fn divisor_partner(rho: MarkSet, l: usize) -> Option<MarkSet> {
    let all = marks::full(2 * l);
    match classify_real(rho, l)? {
        Kind::D1 | Kind::D2 => Some(all ^ marks::conj_set(rho)),
        Kind::D3 => Some(marks::conj_set(rho)),
        _ => None,
    }
}

/// Number of distinct boundary divisors `D_{ℓ;ρ}`, `ρ ∈ 𝒜_ℓ^D`.
pub fn distinct_boundary_divisors(l: usize) -> usize {
    let (_, labels) = build_a_ell_real(l);
    let mut seen = std::collections::BTreeSet::new();
    for s in &labels {
        if let Some(p) = divisor_partner(s.rho, l) {
            seen.insert(s.rho.min(p));
        }
    }
    seen.len()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StepType {
    Holomorphic,
    Real,
    Complex,
    Augmented,
}

impl StepType {
    pub fn name(self) -> &'static str {
        match self {
            StepType::Holomorphic => "holomorphic",
            StepType::Real => "real",
            StepType::Complex => "complex",
            StepType::Augmented => "augmented",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub label: StratumLabel,
    pub step_type: StepType,
    /// `ρ* − 1`; `None` stands for `0`.
    pub predecessor: Option<MarkSet>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlowupSchedule {
    pub l: usize,
    pub real: bool,
    pub steps: Vec<Step>,
}

impl BlowupSchedule {
    pub fn count(&self, t: StepType) -> usize {
        self.steps.iter().filter(|s| s.step_type == t).count()
    }

    /// `ρ ⊊ ρ′ ⟹ ρ` is scheduled before `ρ′`.
    pub fn is_linear_extension(&self) -> bool {
        let r: Vec<MarkSet> = self.steps.iter().map(|s| s.label.rho).collect();
        (0..r.len()).all(|i| (0..i).all(|j| !(r[i] & !r[j] == 0 && r[i] != r[j])))
    }

    pub fn to_json(&self) -> Value {
        let steps: Vec<Value> = self
            .steps
            .iter()
            .map(|s| {
                json!({
                    "rho": s.label.labels(),
                    "kind": s.label.kind.name(),
                    "type": s.step_type.name(),
                    "predecessor": s.predecessor.map(|p| marks::labels(p, self.real)),
                })
            })
            .collect();
        json!({"l": self.l, "real": self.real, "length": self.steps.len(), "schedule": steps})
    }
}

/// Index set in blowup order with step types.
pub fn schedule(l: usize, real: bool) -> Result<BlowupSchedule> {
    let labels = if real {
        if l < 2 {
            return Err(Error::TooFewMarks(l));
        }
        build_a_ell_real(l).1
    } else {
        if l < 3 {
            return Err(Error::TooFewMarks(l));
        }
        build_a_ell(l)
    };
    let mut prev = None;
    let mut steps = Vec::with_capacity(labels.len());
    for label in labels {
        let step_type = match label.kind {
            Kind::Complex => StepType::Holomorphic,
            Kind::H => StepType::Real,
            Kind::E => StepType::Augmented,
            Kind::D1 | Kind::D2 | Kind::D3 => StepType::Complex,
        };
        let rho = label.rho;
        steps.push(Step { label, step_type, predecessor: prev });
        prev = Some(rho);
    }
    Ok(BlowupSchedule { l, real, steps })
}

/// `ẽ_ρ`: the oriented edge with `μ⁻¹(Ver_ẽ) = ρ`.
pub fn stratum_edge(t: &MarkedTree, rho: MarkSet) -> Option<OEdge> {
    t.oriented_edges().into_iter().find(|&e| t.side_marks(e) == rho)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompatMode {
    /// Nested, or `ρ ⊃ [ℓ]−ρ′`.
    Ell,
    /// Nested only.
    EllPlusOne,
    /// Nested only, on `[ℓ^±]`.
    Real,
}

/// Nesting disjunction between two labels over `n_marks` marks.
pub fn neighbor_compat(rho: MarkSet, rho2: MarkSet, mode: CompatMode, n_marks: usize) -> bool {
    let nested = rho & !rho2 == 0 || rho2 & !rho == 0;
    match mode {
        CompatMode::Ell => nested || (marks::full(n_marks) ^ rho2) & !rho == 0,
        CompatMode::EllPlusOne | CompatMode::Real => nested,
    }
}

/// `[ℓ]−{i}` or `[ℓ^±]−{i}`.
pub fn is_full_minus_one(rho: MarkSet, n_marks: usize) -> bool {
    marks::card(marks::full(n_marks) ^ rho) == 1 && rho & !marks::full(n_marks) == 0
}

/// `𝒜̃_ℓ^ℝ = 𝒜_ℓ^ℝ ⊔ {[ℓ^±]−{i}}`: kind of a label, with `None` for the
/// sets `[ℓ^±]−{i}`.
pub fn tilde_kind(rho: MarkSet, l: usize, real: bool) -> Result<Option<Kind>> {
    let nm = marks::n_marks(l, real);
    if is_full_minus_one(rho, nm) {
        return Ok(None);
    }
    let k = if real {
        classify_real(rho, l)
    } else if in_a_ell(rho, l) {
        Some(Kind::Complex)
    } else {
        None
    };
    k.map(Some).ok_or_else(|| Error::NotALabel(marks::fmt_set(rho, real)))
}
