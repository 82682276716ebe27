use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use cornerlab::{
    baseline, construct, default_dimension, find_corner, size_bound, Construction,
    ConstructionError, ConstructionParams, CornerWitness, RadiusMode, VolumeEstimate,
};
use thiserror::Error;

use crate::setfile::{SetFile, SetFileError};
use crate::sweep::{ComparedRow, SweepRow};

/// Environment variable capping the worker count (0 = one per core).
pub const THREADS_ENV: &str = "CORNERLAB_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: SetFileError },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("verification failed: {0}")]
    Verification(CornerWitness),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Parse { .. } | CliError::Io { .. } => 2,
            CliError::Verification(_) | CliError::Construction(_) => 1,
        }
    }
}

/// Installs the global worker pool according to [`THREADS_ENV`].
pub fn init_threads() -> Result<(), CliError> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::Usage(format!("{THREADS_ENV} must be an integer, got {v:?}")))?,
        Err(_) => 0,
    };
    // A pool may already exist in-process (tests); its size then stands.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildOptions {
    pub n: usize,
    /// `None` picks [`default_dimension`].
    pub d: Option<usize>,
    pub delta_coeff: f64,
    pub seed: u64,
    pub mu_trials: usize,
    pub mode: RadiusMode,
}

impl BuildOptions {
    pub fn new(n: usize) -> Self {
        let p = ConstructionParams::new(n, 1);
        Self {
            n,
            d: None,
            delta_coeff: p.delta_coeff,
            seed: p.seed,
            mu_trials: p.mu_trials,
            mode: RadiusMode::default(),
        }
    }

    pub fn params(&self) -> ConstructionParams {
        let mut p =
            ConstructionParams::new(self.n, self.d.unwrap_or_else(|| default_dimension(self.n)));
        p.delta_coeff = self.delta_coeff;
        p.seed = self.seed;
        p.mu_trials = self.mu_trials;
        p
    }
}

/// A verified construction and its file image.
#[derive(Debug, Clone)]
pub struct Built {
    pub construction: Construction,
    pub file: SetFile,
}

/// Constructs, verifies by brute force, and serializes.
pub fn build(opts: &BuildOptions) -> Result<Built, CliError> {
    let construction = construct(&opts.params(), opts.mode)?;
    if let Some(w) = find_corner(&construction.set) {
        return Err(CliError::Verification(w));
    }
    let file = SetFile::from_construction(&construction);
    Ok(Built { construction, file })
}

/// Builds the verified Behrend baseline for `[n]^2`.
pub fn baseline_file(n: usize) -> Result<SetFile, CliError> {
    let b = baseline::baseline(n).map_err(|e| CliError::Usage(e.to_string()))?;
    if let Some(w) = find_corner(&b.set) {
        return Err(CliError::Verification(w));
    }
    Ok(SetFile::from_baseline(n, &b))
}

/// Outcome of checking a set file.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub size: usize,
    pub witness: Option<CornerWitness>,
}

pub fn verify_text(text: &str) -> Result<VerifyReport, SetFileError> {
    let file = SetFile::parse(text)?;
    let set = file.to_grid()?;
    Ok(VerifyReport {
        size: set.len(),
        witness: find_corner(&set),
    })
}

pub fn verify_path(path: &Path) -> Result<VerifyReport, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    verify_text(&text).map_err(|source| CliError::Parse {
        path: path.to_owned(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub n_list: Vec<usize>,
    pub d: Option<usize>,
    pub seeds: u64,
    pub verify: bool,
    pub delta_coeff: f64,
    pub mu_trials: usize,
    pub mode: RadiusMode,
}

impl SweepOptions {
    pub fn new(n_list: Vec<usize>, seeds: u64) -> Self {
        let b = BuildOptions::new(1);
        Self {
            n_list,
            d: None,
            seeds,
            verify: true,
            delta_coeff: b.delta_coeff,
            mu_trials: b.mu_trials,
            mode: b.mode,
        }
    }
}

pub fn sweep_row(c: &Construction, verified: bool) -> SweepRow {
    let (n, d) = (c.params.n, c.params.d);
    let size = c.set.len();
    let bound = size_bound(n, d);
    SweepRow {
        n,
        d,
        r: c.spec.r,
        delta: c.spec.delta,
        size,
        density: size as f64 / (n * n) as f64,
        bound,
        ratio: size as f64 / bound,
        seed: c.params.seed,
        verified,
    }
}

/// One row per `(n, seed)`, in input order.
pub fn sweep(opts: &SweepOptions) -> Result<Vec<SweepRow>, CliError> {
    if opts.seeds == 0 {
        return Err(CliError::Usage("--seeds must be at least 1".into()));
    }
    let mut rows = Vec::new();
    for &n in &opts.n_list {
        for seed in 0..opts.seeds {
            let b = BuildOptions {
                n,
                d: opts.d,
                delta_coeff: opts.delta_coeff,
                seed,
                mu_trials: opts.mu_trials,
                mode: opts.mode,
            };
            let c = construct(&b.params(), b.mode)?;
            if opts.verify {
                if let Some(w) = find_corner(&c.set) {
                    return Err(CliError::Verification(w));
                }
            }
            rows.push(sweep_row(&c, opts.verify));
        }
    }
    Ok(rows)
}

/// Attaches verified baseline sizes to sweep rows.
pub fn compare_with_baseline(rows: &[SweepRow]) -> Result<Vec<ComparedRow>, CliError> {
    let mut sizes = BTreeMap::new();
    for row in rows {
        if let std::collections::btree_map::Entry::Vacant(e) = sizes.entry(row.n) {
            e.insert(baseline_file(row.n)?.points.len());
        }
    }
    Ok(rows
        .iter()
        .map(|r| ComparedRow::new(r, sizes[&r.n]))
        .collect())
}

pub fn estimate(
    d: usize,
    delta: f64,
    mode: RadiusMode,
    seed: u64,
) -> Result<VolumeEstimate, CliError> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(CliError::Usage(format!(
            "--delta must be positive, got {delta}"
        )));
    }
    if d == 0 {
        return Err(CliError::Usage("--d must be at least 1".into()));
    }
    mode.estimate(d, delta, seed)
        .map_err(|e| CliError::Usage(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_small_grid() {
        let mut o = BuildOptions::new(64);
        o.d = Some(2);
        o.seed = 1;
        o.mode = RadiusMode::Mc { samples: 100_000 };
        let b = build(&o).unwrap();
        assert!(!b.file.points.is_empty());
        let report = verify_text(&b.file.to_json()).unwrap();
        assert_eq!(report.witness, None);
        assert_eq!(report.size, b.file.points.len());
    }

    #[test]
    fn verify_finds_hand_written_corner() {
        let mut f = baseline_file(2).unwrap();
        f.points = vec![[1, 1], [1, 2], [2, 1]];
        let report = verify_text(&f.to_json()).unwrap();
        assert_eq!(report.witness, Some(CornerWitness { x: 1, y: 1, d: 1 }));
    }

    #[test]
    fn baseline_of_one() {
        assert_eq!(baseline_file(1).unwrap().points, vec![[1, 1]]);
    }

    #[test]
    fn estimate_rejects_bad_delta() {
        assert!(matches!(
            estimate(1, -1.0, RadiusMode::exact(), 0),
            Err(CliError::Usage(_))
        ));
        let e = estimate(1, 0.5, RadiusMode::exact(), 0).unwrap();
        assert_eq!(e.r, 0.5);
        assert!((e.conditional_mass - 2.0 / 3.0).abs() < 1e-3);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage(String::new()).exit_code(), 2);
        assert_eq!(
            CliError::Verification(CornerWitness { x: 1, y: 1, d: 1 }).exit_code(),
            1
        );
    }
}
