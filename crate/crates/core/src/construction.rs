//! The torus-annulus construction of corner-free sets.
//!
//! A direction `theta in T^D` and an offset `mu in (T x T)^D` define the affine
//! map `f(x, y) = ((x theta_i, y theta_i) + mu_i)_i` from `Z^2` to `(T x T)^D`.
//! The set `A` collects the grid points whose image lies in the annulus
//! `S_{r,delta;D}`: every coordinate in the slab `S` and `||phi(f(x, y))||_2` in
//! `[r - delta, r)`.
//!
//! If the three points of a corner with step `d` all land in the annulus, then
//! `sum_i ||d theta_i||_T^2 <= 2 r delta`. So any `theta` whose dilates
//! `d theta`, `d = 1..=N`, all stay outside that ball yields a corner-free `A`
//! for every `mu`, and averaging over `mu` gives `E|A| = N^2 Vol(S_{r,delta;D})`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{words_for, GridError, GridSet, MAX_SIDE};
use crate::radius::{
    exact_radius, select_radius_mc, RadiusError, VolumeEstimate, DEFAULT_GRID_POINTS,
    DEFAULT_SAMPLES,
};
use crate::rng::{substream, DOMAIN_DIRECTION, DOMAIN_OFFSET};
use crate::torus::{in_slab, wrap_unit, GPoint, GVector, TorusValue};

pub const DEFAULT_DELTA_COEFF: f64 = 0.1;
pub const DEFAULT_MU_TRIALS: usize = 8;
pub const DEFAULT_THETA_BUDGET: usize = 10_000;
/// `delta_coeff` is halved at most down to this value.
pub const DELTA_COEFF_FLOOR: f64 = 1.0 / (1u64 << 20) as f64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstructionError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid annulus r={r}, delta={delta}: need 0 < delta <= r")]
    InvalidAnnulus { r: f64, delta: f64 },
    #[error(
        "no admissible direction in {attempts} attempts (last violating dilate d={last_violation})"
    )]
    DirectionBudget {
        attempts: usize,
        last_violation: i64,
    },
    #[error("delta coefficient fell below {DELTA_COEFF_FLOOR:e} without success: {reason}")]
    CoefficientFloor { reason: String },
    #[error(transparent)]
    Radius(#[from] RadiusError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// The annulus `[r - delta, r)` in `phi`-norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusSpec {
    pub r: f64,
    pub delta: f64,
}

impl AnnulusSpec {
    pub fn new(r: f64, delta: f64) -> Result<Self, ConstructionError> {
        if !(r.is_finite() && delta.is_finite() && delta > 0.0 && delta <= r) {
            return Err(ConstructionError::InvalidAnnulus { r, delta });
        }
        Ok(Self { r, delta })
    }

    /// Squared radius `2 r delta` of the forbidden ball.
    pub fn threshold(&self) -> f64 {
        2.0 * self.r * self.delta
    }

    #[inline]
    pub fn contains_norm(&self, norm: f64) -> bool {
        norm >= self.r - self.delta && norm < self.r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Direction(pub Vec<TorusValue>);

impl Direction {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn from_reals(values: &[f64]) -> Result<Self, crate::torus::TorusError> {
        values
            .iter()
            .map(|&v| TorusValue::wrap(v))
            .collect::<Result<_, _>>()
            .map(Direction)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Offset(pub GVector);

impl Offset {
    pub fn zero(d: usize) -> Self {
        Offset(GVector(vec![GPoint::ORIGIN; d]))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstructionParams {
    pub n: usize,
    pub d: usize,
    pub delta_coeff: f64,
    pub seed: u64,
    pub mu_trials: usize,
    pub theta_attempt_budget: usize,
}

impl ConstructionParams {
    /// Defaults for everything but the grid side and dimension.
    pub fn new(n: usize, d: usize) -> Self {
        Self {
            n,
            d,
            delta_coeff: DEFAULT_DELTA_COEFF,
            seed: 0,
            mu_trials: DEFAULT_MU_TRIALS,
            theta_attempt_budget: DEFAULT_THETA_BUDGET,
        }
    }

    pub fn validate(&self) -> Result<(), ConstructionError> {
        let bad = |m: &str| Err(ConstructionError::InvalidParams(m.to_string()));
        if self.n == 0 || self.n > MAX_SIDE {
            return bad("n must lie in [1, 65536]");
        }
        if self.d == 0 {
            return bad("d must be at least 1");
        }
        if !(self.delta_coeff.is_finite() && self.delta_coeff > 0.0) {
            return bad("delta_coeff must be positive");
        }
        if self.mu_trials == 0 {
            return bad("mu_trials must be at least 1");
        }
        if self.theta_attempt_budget == 0 {
            return bad("theta_attempt_budget must be at least 1");
        }
        Ok(())
    }
}

/// Volume of the unit ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    // V_0 = 1, V_1 = 2, V_d = V_{d-2} 2 pi / d
    let mut v = [1.0, 2.0];
    for k in 2..=d {
        v[k % 2] *= 2.0 * std::f64::consts::PI / k as f64;
    }
    v[d % 2]
}

/// Thickness derived from `(n, d, delta_coeff)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    pub n: usize,
    pub d: usize,
    pub delta_coeff: f64,
    pub delta: f64,
}

impl DerivedParams {
    /// Volume of the Euclidean ball of radius `sqrt(2 r delta)` in `R^d`.
    pub fn ball_volume_bound(&self, r: f64) -> f64 {
        unit_ball_volume(self.d) * (2.0 * r * self.delta).powf(self.d as f64 / 2.0)
    }

    /// Whether `n * Vol(B_0) < 1`, so a uniform direction avoids the ball with
    /// all dilates with positive probability.
    pub fn union_bound_holds(&self, r: f64) -> bool {
        self.n as f64 * self.ball_volume_bound(r) < 1.0
    }
}

/// `delta = delta_coeff * sqrt(d) * n^(-2/d)`.
pub fn derive_params(n: usize, d: usize, delta_coeff: f64) -> DerivedParams {
    let delta = delta_coeff * (d as f64).sqrt() * (n as f64).powf(-2.0 / d as f64);
    DerivedParams {
        n,
        d,
        delta_coeff,
        delta,
    }
}

/// `max(1, floor(sqrt(log2 n / log2(2 / sqrt 3))))`; 1 for `n < 2`.
pub fn default_dimension(n: usize) -> usize {
    if n < 2 {
        return 1;
    }
    let ratio = (n as f64).log2() / (2.0 / 3f64.sqrt()).log2();
    (ratio.sqrt().floor() as usize).max(1)
}

/// `f(x, y)` coordinate by coordinate.
pub fn f_map(x: i64, y: i64, theta: &Direction, mu: &Offset) -> GVector {
    assert_eq!(theta.dim(), mu.dim(), "dimension mismatch");
    GVector(
        theta
            .0
            .iter()
            .zip(mu.0.coords())
            .map(|(t, m)| {
                GPoint::new(
                    TorusValue::wrap(x as f64 * t.lift() + m.c1()).expect("finite"),
                    TorusValue::wrap(y as f64 * t.lift() + m.c2()).expect("finite"),
                )
            })
            .collect(),
    )
}

/// Membership in `S_{r,delta;D}`.
pub fn in_annulus(v: &GVector, spec: &AnnulusSpec) -> bool {
    v.in_s() && spec.contains_norm(v.phi_norm())
}

/// Smallest `d` in `1..=n` whose dilate lands in the forbidden ball
/// `sum_i ||d theta_i||^2 <= threshold`, or `None` if there is none.
pub fn direction_ok(theta: &Direction, n: usize, threshold: f64) -> Option<i64> {
    (1..=n as i64).find(|&d| {
        let s: f64 = theta.0.iter().map(|t| t.scale(d).norm().powi(2)).sum();
        s <= threshold
    })
}

/// A direction drawn uniformly from `[0, 1)^d`.
pub fn draw_direction<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Direction {
    Direction(
        (0..d)
            .map(|_| TorusValue::try_from(rng.random::<f64>()).expect("in [0, 1)"))
            .collect(),
    )
}

/// An offset drawn uniformly from `(T x T)^d`.
pub fn draw_offset<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Offset {
    Offset(GVector(
        (0..d)
            .map(|_| {
                let a = TorusValue::try_from(rng.random::<f64>()).expect("in [0, 1)");
                let b = TorusValue::try_from(rng.random::<f64>()).expect("in [0, 1)");
                GPoint::new(a, b)
            })
            .collect(),
    ))
}

fn candidate_direction(params: &ConstructionParams, i: usize) -> Direction {
    draw_direction(
        params.d,
        &mut substream(params.seed, DOMAIN_DIRECTION, i as u64),
    )
}

/// Rejection-samples directions until one passes [`direction_ok`] with
/// threshold `2 r delta`. Candidate `i` comes from its own substream and the
/// lowest passing index wins.
pub fn sample_direction(
    params: &ConstructionParams,
    spec: &AnnulusSpec,
) -> Result<Direction, ConstructionError> {
    let threshold = spec.threshold();
    let hit = (0..params.theta_attempt_budget)
        .into_par_iter()
        .find_map_first(|i| {
            let theta = candidate_direction(params, i);
            direction_ok(&theta, params.n, threshold)
                .is_none()
                .then_some(theta)
        });
    hit.ok_or_else(|| {
        let last = candidate_direction(params, params.theta_attempt_budget - 1);
        ConstructionError::DirectionBudget {
            attempts: params.theta_attempt_budget,
            last_violation: direction_ok(&last, params.n, threshold).unwrap_or(0),
        }
    })
}

/// Per-coordinate lifts `wrap(k theta_i + m_i)` for `k = 1..=n`, laid out
/// `[k][i]`.
fn lifted_orbit(theta: &Direction, shift: impl Fn(usize) -> f64, n: usize) -> Vec<f64> {
    let d = theta.dim();
    let mut out = Vec::with_capacity(n * d);
    for k in 1..=n {
        for (i, t) in theta.0.iter().enumerate() {
            out.push(wrap_unit(k as f64 * t.lift() + shift(i)));
        }
    }
    out
}

/// `A = {(x, y) in [n]^2 : f(x, y) in S_{r,delta;D}}`.
///
/// Each lift is evaluated directly, with the same arithmetic as [`f_map`] and
/// [`in_annulus`], so the result agrees with point-by-point evaluation exactly.
pub fn build_set(
    n: usize,
    spec: &AnnulusSpec,
    theta: &Direction,
    mu: &Offset,
) -> Result<GridSet, ConstructionError> {
    let d = theta.dim();
    if d != mu.dim() {
        return Err(ConstructionError::InvalidParams(format!(
            "direction has dimension {d}, offset has {}",
            mu.dim()
        )));
    }
    GridSet::new(n)?;
    let words = words_for(n);
    let mu_pts = mu.0.coords();
    let xs = lifted_orbit(theta, |i| mu_pts[i].c1(), n);
    let ys = lifted_orbit(theta, |i| mu_pts[i].c2(), n);
    let mut bits = vec![0u64; n * words];
    bits.par_chunks_mut(words)
        .enumerate()
        .for_each(|(yi, row)| {
            let yv = &ys[yi * d..(yi + 1) * d];
            'x: for xi in 0..n {
                let xv = &xs[xi * d..(xi + 1) * d];
                let mut sq = 0.0;
                for (&a, &b) in xv.iter().zip(yv) {
                    if !in_slab(a, b) {
                        continue 'x;
                    }
                    let p = a - b;
                    sq += p * p;
                }
                if spec.contains_norm(sq.sqrt()) {
                    row[xi / 64] |= 1 << (xi % 64);
                }
            }
        });
    Ok(GridSet::from_row_words(n, bits))
}

/// The best of several uniformly drawn offsets.
#[derive(Debug, Clone)]
pub struct MuSearch {
    pub mu: Offset,
    pub set: GridSet,
    /// `|A|` for every trial, in trial order.
    pub trial_sizes: Vec<usize>,
}

/// Builds `A` for `mu_trials` offsets and keeps the largest (ties: earliest).
pub fn best_of_mu(
    params: &ConstructionParams,
    spec: &AnnulusSpec,
    theta: &Direction,
) -> Result<MuSearch, ConstructionError> {
    if params.mu_trials == 0 {
        return Err(ConstructionError::InvalidParams(
            "mu_trials must be at least 1".into(),
        ));
    }
    let trials: Vec<(Offset, GridSet)> = (0..params.mu_trials)
        .into_par_iter()
        .map(|j| {
            let mu = draw_offset(
                params.d,
                &mut substream(params.seed, DOMAIN_OFFSET, j as u64),
            );
            let set = build_set(params.n, spec, theta, &mu)?;
            Ok((mu, set))
        })
        .collect::<Result<_, ConstructionError>>()?;
    let trial_sizes: Vec<usize> = trials.iter().map(|(_, s)| s.len()).collect();
    let best = trial_sizes
        .iter()
        .enumerate()
        .fold(0, |b, (j, &s)| if s > trial_sizes[b] { j } else { b });
    let (mu, set) = trials.into_iter().nth(best).expect("at least one trial");
    Ok(MuSearch {
        mu,
        set,
        trial_sizes,
    })
}

/// How the annulus radius is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RadiusMode {
    /// Histogram of sampled norms.
    Mc { samples: u64 },
    /// Convolution of the exact coordinate law.
    Exact { grid_points: usize },
}

impl Default for RadiusMode {
    fn default() -> Self {
        RadiusMode::Mc {
            samples: DEFAULT_SAMPLES,
        }
    }
}

impl RadiusMode {
    pub fn exact() -> Self {
        RadiusMode::Exact {
            grid_points: DEFAULT_GRID_POINTS,
        }
    }

    pub fn estimate(&self, d: usize, delta: f64, seed: u64) -> Result<VolumeEstimate, RadiusError> {
        match *self {
            RadiusMode::Mc { samples } => select_radius_mc(d, delta, samples, seed),
            RadiusMode::Exact { grid_points } => exact_radius(d, delta, grid_points),
        }
    }
}

/// A finished construction.
#[derive(Debug, Clone)]
pub struct Construction {
    /// Parameters after any `delta_coeff` halving.
    pub params: ConstructionParams,
    pub spec: AnnulusSpec,
    pub mode: RadiusMode,
    pub estimate: VolumeEstimate,
    pub theta: Direction,
    pub mu: Offset,
    pub set: GridSet,
    pub trial_sizes: Vec<usize>,
    /// How many times `delta_coeff` was halved.
    pub halvings: u32,
}

impl Construction {
    /// `N^2 Vol(S_{r,delta;D})`, the mean of `|A|` over offsets.
    pub fn expected_size(&self) -> f64 {
        (self.params.n * self.params.n) as f64 * self.estimate.volume
    }
}

/// Chooses parameters and builds a set.
///
/// Derives `delta`, picks `r`, then checks the union bound `n Vol(B_0) < 1` and
/// rejection-samples a direction. If either step fails, `delta_coeff` is halved
/// and the attempt repeated, down to [`DELTA_COEFF_FLOOR`].
pub fn construct(
    params: &ConstructionParams,
    mode: RadiusMode,
) -> Result<Construction, ConstructionError> {
    params.validate()?;
    let mut p = *params;
    let mut halvings = 0;
    loop {
        let derived = derive_params(p.n, p.d, p.delta_coeff);
        let estimate = mode.estimate(p.d, derived.delta, p.seed)?;
        let spec = AnnulusSpec::new(estimate.r, derived.delta)?;
        let attempt = if derived.union_bound_holds(spec.r) {
            sample_direction(&p, &spec).map_err(|e| e.to_string())
        } else {
            Err(format!(
                "n * Vol(B0) = {} >= 1",
                p.n as f64 * derived.ball_volume_bound(spec.r)
            ))
        };
        match attempt {
            Ok(theta) => {
                let search = best_of_mu(&p, &spec, &theta)?;
                return Ok(Construction {
                    params: p,
                    spec,
                    mode,
                    estimate,
                    theta,
                    mu: search.mu,
                    set: search.set,
                    trial_sizes: search.trial_sizes,
                    halvings,
                });
            }
            Err(reason) => {
                let next = p.delta_coeff / 2.0;
                if next < DELTA_COEFF_FLOOR {
                    return Err(ConstructionError::CoefficientFloor { reason });
                }
                p.delta_coeff = next;
                halvings += 1;
            }
        }
    }
}
