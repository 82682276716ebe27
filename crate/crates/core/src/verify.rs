//! Brute-force pattern detection: corners in grid sets, 3-term progressions in
//! integer sets.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::grid::GridSet;

/// Certifies the corner `(x, y), (x + d, y), (x, y + d)` with `d != 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CornerWitness {
    pub x: i64,
    pub y: i64,
    pub d: i64,
}

impl CornerWitness {
    pub fn points(&self) -> [(i64, i64); 3] {
        [
            (self.x, self.y),
            (self.x + self.d, self.y),
            (self.x, self.y + self.d),
        ]
    }
}

impl std::fmt::Display for CornerWitness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let [p, q, r] = self.points();
        write!(
            f,
            "corner x={} y={} d={}: ({}, {}) ({}, {}) ({}, {})",
            self.x, self.y, self.d, p.0, p.1, q.0, q.1, r.0, r.1
        )
    }
}

/// Certifies the progression `a, a + step, a + 2 step`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct APWitness {
    pub a: i64,
    pub step: i64,
}

/// Word `k` of `row << e` (bit `i` moves to bit `i + e`).
#[inline]
fn shl_word(row: &[u64], k: usize, e: usize) -> u64 {
    let (q, s) = (e / 64, e % 64);
    if k < q {
        return 0;
    }
    let lo = row[k - q] << s;
    if s == 0 || k < q + 1 {
        lo
    } else {
        lo | row[k - q - 1] >> (64 - s)
    }
}

/// Word `k` of `row >> e` (bit `i + e` moves to bit `i`).
#[inline]
fn shr_word(row: &[u64], k: usize, e: usize) -> u64 {
    let (q, s) = (e / 64, e % 64);
    let src = k + q;
    if src >= row.len() {
        return 0;
    }
    let lo = row[src] >> s;
    if s == 0 || src + 1 >= row.len() {
        lo
    } else {
        lo | row[src + 1] << (64 - s)
    }
}

fn first_bit(k: usize, w: u64) -> i64 {
    (k * 64 + w.trailing_zeros() as usize + 1) as i64
}

/// First corner based at row `y`, scanning `d` upward from `-(y - 1)`, then `x`.
fn first_corner_in_row(s: &GridSet, y: usize) -> Option<CornerWitness> {
    let n = s.side();
    let base = s.row(y);
    if base.iter().all(|&w| w == 0) {
        return None;
    }
    // d = -e: (x, y), (x - e, y), (x, y - e)
    for e in (1..y).rev() {
        let lower = s.row(y - e);
        for (k, (&b, &l)) in base.iter().zip(lower).enumerate() {
            let hit = b & l & shl_word(base, k, e);
            if hit != 0 {
                return Some(CornerWitness {
                    x: first_bit(k, hit),
                    y: y as i64,
                    d: -(e as i64),
                });
            }
        }
    }
    // d = +e: (x, y), (x + e, y), (x, y + e)
    for e in 1..=(n - y) {
        let upper = s.row(y + e);
        for (k, (&b, &u)) in base.iter().zip(upper).enumerate() {
            let hit = b & u & shr_word(base, k, e);
            if hit != 0 {
                return Some(CornerWitness {
                    x: first_bit(k, hit),
                    y: y as i64,
                    d: e as i64,
                });
            }
        }
    }
    None
}

/// Returns a corner contained in `s`, or `None` if `s` is corner-free.
///
/// The witness is the first one in the order (increasing `y`, then signed `d`,
/// then `x`), independent of the number of worker threads.
pub fn find_corner(s: &GridSet) -> Option<CornerWitness> {
    (1..=s.side())
        .into_par_iter()
        .find_map_first(|y| first_corner_in_row(s, y))
}

pub fn is_corner_free(s: &GridSet) -> bool {
    find_corner(s).is_none()
}

/// Returns a 3-term progression in `xs`, the one with smallest first term and
/// then smallest positive step.
pub fn find_3ap(xs: &[i64]) -> Option<APWitness> {
    let mut v = xs.to_vec();
    v.sort_unstable();
    v.dedup();
    for (i, &a) in v.iter().enumerate() {
        for &b in &v[i + 1..] {
            let step = b - a;
            if v.binary_search(&(b + step)).is_ok() {
                return Some(APWitness { a, step });
            }
        }
    }
    None
}
