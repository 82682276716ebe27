//! CSV rows comparing constructed sizes with the size law.

use std::io::Write;

use serde::Serialize;

pub const HEADER: &str = "n,d,r,delta,size,density,bound,ratio,seed,verified";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub d: usize,
    pub r: f64,
    pub delta: f64,
    pub size: usize,
    pub density: f64,
    /// `sqrt(d) (3/4)^d n^(2 - 2/d)`.
    pub bound: f64,
    pub ratio: f64,
    pub seed: u64,
    pub verified: bool,
}

/// A row followed by the baseline size and density at the same `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparedRow {
    pub n: usize,
    pub d: usize,
    pub r: f64,
    pub delta: f64,
    pub size: usize,
    pub density: f64,
    pub bound: f64,
    pub ratio: f64,
    pub seed: u64,
    pub verified: bool,
    pub baseline_size: usize,
    pub baseline_density: f64,
}

impl ComparedRow {
    pub fn new(row: &SweepRow, baseline_size: usize) -> Self {
        Self {
            n: row.n,
            d: row.d,
            r: row.r,
            delta: row.delta,
            size: row.size,
            density: row.density,
            bound: row.bound,
            ratio: row.ratio,
            seed: row.seed,
            verified: row.verified,
            baseline_size,
            baseline_density: baseline_size as f64 / (row.n * row.n) as f64,
        }
    }
}

pub fn write_rows<W: Write, R: Serialize>(out: W, rows: &[R]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
