//! Classical comparison sets: Behrend's sphere construction of 3-AP-free
//! integer sets, lifted to corner-free grid sets along diagonals.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{GridError, GridSet};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BaselineError {
    #[error("diagonal offset {t} is outside [-{max}, {max}]")]
    OffsetOutOfRange { t: i64, max: i64 },
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Digit vectors in `{0, ..., digits - 1}^k`, read in base `2 digits - 1` so
/// that adding two of them never carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BehrendParams {
    pub m: u64,
    pub k: u32,
    pub base: u64,
    pub digits: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BehrendSet {
    pub params: BehrendParams,
    /// Squared Euclidean norm of the chosen shell.
    pub shell: u64,
    /// Shell size before greedy completion.
    pub shell_size: usize,
    /// Sorted, 3-AP-free, inside `[1, m]`.
    pub elements: Vec<i64>,
}

/// Largest shell among digit vectors of length `k` with `digits` symbols.
/// Returns `(norm_sq, values)` with values `1 + sum_i a_i base^i`.
fn largest_shell(k: u32, digits: u64) -> (u64, Vec<i64>) {
    let base = 2 * digits - 1;
    let mut shells: BTreeMap<u64, Vec<i64>> = BTreeMap::new();
    let total = digits.pow(k);
    for code in 0..total {
        let (mut c, mut value, mut place, mut norm) = (code, 0u64, 1u64, 0u64);
        for _ in 0..k {
            let a = c % digits;
            c /= digits;
            value += a * place;
            place *= base;
            norm += a * a;
        }
        shells.entry(norm).or_default().push(1 + value as i64);
    }
    let (norm, mut vals) = shells.into_iter().fold((0, Vec::new()), |best, (norm, v)| {
        if v.len() > best.1.len() {
            (norm, v)
        } else {
            best
        }
    });
    vals.sort_unstable();
    (norm, vals)
}

/// Adds every element of `[1, m]`, in increasing order, that keeps `set`
/// free of 3-term progressions.
fn saturate(set: &mut Vec<i64>, m: i64) {
    let mut present = vec![false; m as usize + 1];
    for &a in set.iter() {
        present[a as usize] = true;
    }
    let has = |present: &[bool], v: i64| v >= 1 && v <= m && present[v as usize];
    for c in 1..=m {
        if present[c as usize] {
            continue;
        }
        let blocked = set
            .iter()
            .any(|&a| ((a + c) % 2 == 0 && has(&present, (a + c) / 2)) || has(&present, 2 * c - a));
        if !blocked {
            present[c as usize] = true;
            set.push(c);
        }
    }
    set.sort_unstable();
}

/// Behrend's construction on `[1, m]`, completed greedily.
///
/// Scans `k` within 2 of `floor(sqrt(log2 m))`; for each `k` takes the digit
/// count whose largest sphere shell is biggest, then greedily adds further
/// elements. The `(k, digits)` with the largest final set wins.
pub fn behrend_construction(m: u64) -> BehrendSet {
    let m = m.max(1);
    let centre = ((m as f64).log2().max(0.0)).sqrt().floor() as u32;
    let mut best: Option<BehrendSet> = None;
    for k in centre.saturating_sub(2).max(1)..=centre + 2 {
        // (2 digits - 1)^k <= 2m - 1 keeps 1 + sum (digits-1) base^i <= m
        let mut shell_best = (1u64, 0u64, vec![1i64]);
        let mut digits = 2u64;
        while (2 * digits - 1).checked_pow(k).is_some_and(|b| b < 2 * m) {
            let (norm, vals) = largest_shell(k, digits);
            if vals.len() > shell_best.2.len() {
                shell_best = (digits, norm, vals);
            }
            digits += 1;
        }
        let (digits, shell, vals) = shell_best;
        let shell_size = vals.len();
        let mut elements = vals;
        saturate(&mut elements, m as i64);
        let candidate = BehrendSet {
            params: BehrendParams {
                m,
                k,
                base: 2 * digits - 1,
                digits,
            },
            shell,
            shell_size,
            elements,
        };
        if best
            .as_ref()
            .is_none_or(|b| candidate.elements.len() > b.elements.len())
        {
            best = Some(candidate);
        }
    }
    best.expect("k range is non-empty")
}

/// A 3-AP-free subset of `[1, m]`.
pub fn behrend_set(m: u64) -> Vec<i64> {
    behrend_construction(m).elements
}

/// `{(x, y) in [n]^2 : x - y in s}`; corner-free whenever `s` is 3-AP-free.
pub fn diagonal_lift(s: &[i64], n: usize) -> Result<GridSet, BaselineError> {
    let mut g = GridSet::new(n)?;
    let n = n as i64;
    for &t in s {
        if t.abs() > n - 1 {
            return Err(BaselineError::OffsetOutOfRange { t, max: n - 1 });
        }
        for x in (1 + t).max(1)..=(n + t).min(n) {
            g.insert(x, x - t)?;
        }
    }
    Ok(g)
}

/// Expected lift size `sum_{t in s} (n - |t|)` for distinct `t`.
pub fn lift_size(s: &[i64], n: usize) -> usize {
    s.iter().map(|t| n - t.unsigned_abs() as usize).sum()
}

/// The comparison set for `[n]^2`: Behrend on `[1, 2n - 1]`, shifted to
/// `[-(n - 1), n - 1]` and lifted.
#[derive(Debug, Clone)]
pub struct Baseline {
    pub behrend: BehrendSet,
    pub offsets: Vec<i64>,
    pub set: GridSet,
}

pub fn baseline(n: usize) -> Result<Baseline, BaselineError> {
    GridSet::new(n)?;
    let behrend = behrend_construction(2 * n as u64 - 1);
    let offsets: Vec<i64> = behrend.elements.iter().map(|&e| e - n as i64).collect();
    let set = diagonal_lift(&offsets, n)?;
    Ok(Baseline {
        behrend,
        offsets,
        set,
    })
}
