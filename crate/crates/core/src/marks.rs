//! Mark labels and subsets of marks.
//!
//! Complex marks are `1..=ℓ`. Real marks `i⁺, i⁻` are encoded as `2i−1`
//! and `2i`, so integer order is `1⁺ < 1⁻ < 2⁺ < 2⁻ < …` and conjugation
//! swaps `2i−1 ↔ 2i`. Subsets are bitmasks with mark `m` at bit `m−1`.

use crate::error::{Error, Result};

pub type Mark = usize;
pub type MarkSet = u64;

/// Largest supported number of mark labels.
pub const MAX_MARKS: usize = 64;

pub fn n_marks(l: usize, real: bool) -> usize {
    if real {
        2 * l
    } else {
        l
    }
}

pub fn plus(i: usize) -> Mark {
    2 * i - 1
}

pub fn minus(i: usize) -> Mark {
    2 * i
}

/// Conjugate of a real mark.
pub fn conj(m: Mark) -> Mark {
    if m % 2 == 1 {
        m + 1
    } else {
        m - 1
    }
}

pub fn bit(m: Mark) -> MarkSet {
    1u64 << (m - 1)
}

pub fn full(n: usize) -> MarkSet {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

pub fn set<I: IntoIterator<Item = Mark>>(it: I) -> MarkSet {
    it.into_iter().fold(0, |s, m| s | bit(m))
}

pub fn members(s: MarkSet) -> Vec<Mark> {
    (1..=64).filter(|&m| s & bit(m) != 0).collect()
}

pub fn contains(s: MarkSet, m: Mark) -> bool {
    s & bit(m) != 0
}

pub fn card(s: MarkSet) -> usize {
    s.count_ones() as usize
}

/// Smallest mark of a nonempty set.
pub fn min(s: MarkSet) -> Mark {
    s.trailing_zeros() as usize + 1
}

pub fn conj_set(s: MarkSet) -> MarkSet {
    const ODD: u64 = 0x5555_5555_5555_5555;
    ((s & ODD) << 1) | ((s >> 1) & ODD)
}

/// Order key `(|ρ|, sorted members)`.
pub fn order_key(s: MarkSet) -> (usize, Vec<Mark>) {
    (card(s), members(s))
}

pub fn label(m: Mark, real: bool) -> String {
    if real {
        format!("{}{}", m.div_ceil(2), if m % 2 == 1 { '+' } else { '-' })
    } else {
        m.to_string()
    }
}

pub fn parse_label(s: &str, real: bool) -> Result<Mark> {
    let s = s.trim();
    let bad = || Error::Parse(format!("mark label {s:?}"));
    if real {
        let (num, sign) = s.split_at(s.len().checked_sub(1).ok_or_else(bad)?);
        let i: usize = num.parse().map_err(|_| bad())?;
        if i == 0 {
            return Err(bad());
        }
        match sign {
            "+" => Ok(plus(i)),
            "-" => Ok(minus(i)),
            _ => Err(bad()),
        }
    } else {
        match s.parse::<usize>() {
            Ok(m) if m >= 1 => Ok(m),
            _ => Err(bad()),
        }
    }
}

pub fn fmt_set(s: MarkSet, real: bool) -> String {
    let items: Vec<String> = members(s).into_iter().map(|m| label(m, real)).collect();
    format!("{{{}}}", items.join(","))
}

pub fn labels(s: MarkSet, real: bool) -> Vec<String> {
    members(s).into_iter().map(|m| label(m, real)).collect()
}
