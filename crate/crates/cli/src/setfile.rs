//! The `cornerfree-set-v1` JSON file format.
//!
//! Metadata is pretty-printed; the point list holds one `[x, y]` pair per line,
//! sorted lexicographically. Serialization is canonical, so identical sets with
//! identical parameters produce identical bytes.

use cornerlab::baseline::Baseline;
use cornerlab::grid::MAX_SIDE;
use cornerlab::{Construction, GridSet, RadiusMode};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const FORMAT_TAG: &str = "cornerfree-set-v1";

#[derive(Debug, Error)]
pub enum SetFileError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("field `{field}`: {message}")]
    Invalid {
        field: &'static str,
        message: String,
    },
}

fn invalid(field: &'static str, message: impl Into<String>) -> SetFileError {
    SetFileError::Invalid {
        field,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructionBlock {
    pub r: f64,
    pub delta: f64,
    pub delta_coeff: f64,
    pub theta: Vec<f64>,
    pub mu: Vec<[f64; 2]>,
    pub seed: u64,
    pub mu_trials: usize,
    pub radius_mode: RadiusMode,
    pub conditional_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineBlock {
    pub kind: String,
    pub m: u64,
    pub k: u32,
    pub base: u64,
    pub digits: u64,
    pub shell: u64,
}

pub const BASELINE_KIND: &str = "behrend-diagonal";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetFile {
    pub format: String,
    pub n: usize,
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub construction: Option<ConstructionBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<BaselineBlock>,
    pub points: Vec<[i64; 2]>,
}

/// Everything but the points, for the pretty-printed header.
#[derive(Serialize)]
struct Header<'a> {
    format: &'a str,
    n: usize,
    d: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    construction: Option<&'a ConstructionBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    baseline: Option<&'a BaselineBlock>,
}

fn points_of(set: &GridSet) -> Vec<[i64; 2]> {
    set.points_xy().into_iter().map(|(x, y)| [x, y]).collect()
}

impl SetFile {
    pub fn from_construction(c: &Construction) -> Self {
        let block = ConstructionBlock {
            r: c.spec.r,
            delta: c.spec.delta,
            delta_coeff: c.params.delta_coeff,
            theta: c.theta.0.iter().map(|t| t.lift()).collect(),
            mu: c.mu.0.coords().iter().map(|p| [p.c1(), p.c2()]).collect(),
            seed: c.params.seed,
            mu_trials: c.params.mu_trials,
            radius_mode: c.mode,
            conditional_mass: c.estimate.conditional_mass,
        };
        Self {
            format: FORMAT_TAG.into(),
            n: c.params.n,
            d: c.params.d,
            construction: Some(block),
            baseline: None,
            points: points_of(&c.set),
        }
    }

    pub fn from_baseline(n: usize, b: &Baseline) -> Self {
        let p = b.behrend.params;
        Self {
            format: FORMAT_TAG.into(),
            n,
            d: p.k as usize,
            construction: None,
            baseline: Some(BaselineBlock {
                kind: BASELINE_KIND.into(),
                m: p.m,
                k: p.k,
                base: p.base,
                digits: p.digits,
                shell: b.behrend.shell,
            }),
            points: points_of(&b.set),
        }
    }

    pub fn to_grid(&self) -> Result<GridSet, SetFileError> {
        GridSet::from_points(self.n, self.points.iter().map(|&[x, y]| (x, y)))
            .map_err(|e| invalid("points", e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let header = Header {
            format: &self.format,
            n: self.n,
            d: self.d,
            construction: self.construction.as_ref(),
            baseline: self.baseline.as_ref(),
        };
        let head = serde_json::to_string_pretty(&header).expect("header serializes");
        let head = head.strip_suffix("\n}").expect("object ends with brace");
        let mut out = String::with_capacity(head.len() + 16 * self.points.len() + 32);
        out.push_str(head);
        out.push_str(",\n  \"points\": [");
        for (i, [x, y]) in self.points.iter().enumerate() {
            out.push_str(if i == 0 { "\n    " } else { ",\n    " });
            out.push_str(&format!("[{x}, {y}]"));
        }
        out.push_str(if self.points.is_empty() {
            "]\n}\n"
        } else {
            "\n  ]\n}\n"
        });
        out
    }

    /// Parses and validates a set file.
    pub fn parse(text: &str) -> Result<Self, SetFileError> {
        let file: SetFile = serde_json::from_str(text).map_err(|e| SetFileError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        file.validate()?;
        Ok(file)
    }

    pub fn validate(&self) -> Result<(), SetFileError> {
        if self.format != FORMAT_TAG {
            return Err(invalid(
                "format",
                format!("expected \"{FORMAT_TAG}\", found \"{}\"", self.format),
            ));
        }
        if self.n == 0 || self.n > MAX_SIDE {
            return Err(invalid(
                "n",
                format!("{} is outside [1, {MAX_SIDE}]", self.n),
            ));
        }
        match (&self.construction, &self.baseline) {
            (Some(c), None) => {
                if self.d == 0 {
                    return Err(invalid("d", "must be at least 1"));
                }
                if c.theta.len() != self.d {
                    return Err(invalid(
                        "construction.theta",
                        format!("expected {} values", self.d),
                    ));
                }
                if c.mu.len() != self.d {
                    return Err(invalid(
                        "construction.mu",
                        format!("expected {} pairs", self.d),
                    ));
                }
                let in_unit = |v: &f64| (0.0..1.0).contains(v);
                if !c.theta.iter().all(in_unit) {
                    return Err(invalid("construction.theta", "values must lie in [0, 1)"));
                }
                if !c.mu.iter().flatten().all(in_unit) {
                    return Err(invalid("construction.mu", "values must lie in [0, 1)"));
                }
                if !(c.delta > 0.0 && c.delta <= c.r) {
                    return Err(invalid("construction.delta", "need 0 < delta <= r"));
                }
            }
            (None, Some(b)) => {
                if b.kind != BASELINE_KIND {
                    return Err(invalid(
                        "baseline.kind",
                        format!("unknown kind \"{}\"", b.kind),
                    ));
                }
            }
            (Some(_), Some(_)) => {
                return Err(invalid(
                    "construction",
                    "file has both construction and baseline blocks",
                ))
            }
            (None, None) => {
                return Err(invalid(
                    "construction",
                    "file needs a construction or baseline block",
                ))
            }
        }
        let n = self.n as i64;
        for (i, &[x, y]) in self.points.iter().enumerate() {
            if !(1..=n).contains(&x) || !(1..=n).contains(&y) {
                return Err(invalid(
                    "points",
                    format!("entry {i} [{x}, {y}] is outside [1, {n}]^2"),
                ));
            }
            if i > 0 && self.points[i - 1] >= [x, y] {
                return Err(invalid(
                    "points",
                    format!("entry {i} [{x}, {y}] is not strictly after its predecessor"),
                ));
            }
        }
        Ok(())
    }
}
