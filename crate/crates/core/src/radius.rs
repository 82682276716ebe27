//! Choosing the annulus radius.
//!
//! For `mu` uniform on `S^D`, the coordinates `phi(mu_i)` are i.i.d. with the
//! trapezoidal density [`phi_density`], so `||phi(mu)||_2^2` concentrates near
//! `5D/24`. The annulus volume `Vol(S_{r,delta;D})` is `(3/4)^D` times the
//! conditional probability that the norm lands in `[r - delta, r)`. Two routes
//! compute that probability for every bin `[k delta, (k + 1) delta)`:
//!
//! * [`select_radius_mc`] histograms sampled norms;
//! * [`exact_radius`] convolves the discretized law of `phi^2` `D` times.
//!
//! Both return the most massive bin.

use rand::Rng;
use rayon::prelude::*;
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{substream, DOMAIN_RADIUS};
use crate::torus::{in_slab, GPoint, TorusValue};

/// `E[phi(mu)^2 | mu in S]`.
pub const SECOND_MOMENT: f64 = 5.0 / 24.0;
/// Measure of `S` inside `T x T`.
pub const SLAB_MEASURE: f64 = 0.75;

pub const MIN_SAMPLES: u64 = 10_000;
pub const MIN_GRID_POINTS: usize = 1 << 10;
pub const DEFAULT_SAMPLES: u64 = 1_000_000;
pub const DEFAULT_GRID_POINTS: usize = 1 << 14;

const CHUNK: u64 = 1 << 15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RadiusError {
    #[error("need at least {MIN_SAMPLES} samples, got {0}")]
    TooFewSamples(u64),
    #[error("need at least {MIN_GRID_POINTS} grid points, got {0}")]
    TooFewGridPoints(usize),
    #[error("annulus thickness must be positive and finite, got {0}")]
    BadDelta(f64),
    #[error("dimension must be at least 1")]
    BadDimension,
}

/// The chosen radius together with the mass of `[r - delta, r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub d: usize,
    pub delta: f64,
    pub r: f64,
    /// `P(||phi(mu)|| in [r - delta, r) | mu in S^D)`.
    pub conditional_mass: f64,
    /// `(3/4)^D * conditional_mass`.
    pub volume: f64,
    /// Monte Carlo sample count, 0 for the convolution route.
    pub samples: u64,
    pub std_error: f64,
}

impl VolumeEstimate {
    fn from_bin(d: usize, delta: f64, bin: usize, mass: f64, samples: u64) -> Self {
        let std_error = if samples > 0 {
            (mass * (1.0 - mass) / samples as f64).sqrt()
        } else {
            0.0
        };
        Self {
            d,
            delta,
            r: (bin + 1) as f64 * delta,
            conditional_mass: mass,
            volume: SLAB_MEASURE.powi(d as i32) * mass,
            samples,
            std_error,
        }
    }
}

/// Mean and standard error of a Monte Carlo average.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
}

/// Draws a point uniformly from `S` by rejection from the unit square.
pub fn sample_conditional_point<R: Rng + ?Sized>(rng: &mut R) -> GPoint {
    loop {
        let a: f64 = rng.random();
        let b: f64 = rng.random();
        if in_slab(a, b) {
            return GPoint::new(
                TorusValue::try_from(a).expect("uniform draw lies in [0, 1)"),
                TorusValue::try_from(b).expect("uniform draw lies in [0, 1)"),
            );
        }
    }
}

/// Density of `phi(mu)` for `mu` uniform on `S`.
pub fn phi_density(t: f64) -> f64 {
    let a = t.abs();
    if a <= 0.5 {
        2.0 / 3.0
    } else if a < 1.0 {
        4.0 / 3.0 * (1.0 - a)
    } else {
        0.0
    }
}

/// `P(|phi(mu)| <= t)` for `mu` uniform on `S`.
pub fn abs_phi_cdf(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t <= 0.5 {
        4.0 / 3.0 * t
    } else if t < 1.0 {
        2.0 / 3.0 + 8.0 / 3.0 * (t - t * t / 2.0 - 0.375)
    } else {
        1.0
    }
}

fn chunks(samples: u64) -> impl IndexedParallelIterator<Item = (u64, u64)> {
    let n = samples.div_ceil(CHUNK) as usize;
    (0..n).into_par_iter().map(move |i| {
        let i = i as u64;
        (i, CHUNK.min(samples - i * CHUNK))
    })
}

/// Monte Carlo estimate of `E[phi(mu)^2 | mu in S]`.
pub fn second_moment_check(samples: u64, seed: u64) -> Result<MomentEstimate, RadiusError> {
    if samples < MIN_SAMPLES {
        return Err(RadiusError::TooFewSamples(samples));
    }
    let (sum, sum_sq) = chunks(samples)
        .map(|(i, len)| {
            let mut rng = substream(seed, DOMAIN_RADIUS ^ 0x5ec0, i);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..len {
                let v = sample_conditional_point(&mut rng).phi().powi(2);
                s += v;
                s2 += v * v;
            }
            (s, s2)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((0.0, 0.0), |(a, b), (s, s2)| (a + s, b + s2));
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    Ok(MomentEstimate {
        mean,
        std_error: (var / n).sqrt(),
        samples,
    })
}

fn check_args(d: usize, delta: f64) -> Result<(), RadiusError> {
    if d == 0 {
        return Err(RadiusError::BadDimension);
    }
    if !(delta.is_finite() && delta > 0.0) {
        return Err(RadiusError::BadDelta(delta));
    }
    Ok(())
}

/// Number of `delta`-bins needed to cover `[0, sqrt(d)]`.
fn bin_count(d: usize, delta: f64) -> usize {
    ((d as f64).sqrt() / delta).floor() as usize + 2
}

/// Counts of sampled `||phi(mu)||_2` over the bins `[k delta, (k + 1) delta)`
/// for `mu` uniform on `S^D`. Deterministic in `seed` regardless of threads.
pub fn norm_histogram(
    d: usize,
    delta: f64,
    samples: u64,
    seed: u64,
) -> Result<Vec<u64>, RadiusError> {
    check_args(d, delta)?;
    if samples < MIN_SAMPLES {
        return Err(RadiusError::TooFewSamples(samples));
    }
    let bins = bin_count(d, delta);
    let partials: Vec<Vec<u64>> = chunks(samples)
        .map(|(i, len)| {
            let mut rng = substream(seed, DOMAIN_RADIUS, i);
            let mut h = vec![0u64; bins];
            for _ in 0..len {
                let sq: f64 = (0..d)
                    .map(|_| sample_conditional_point(&mut rng).phi().powi(2))
                    .sum();
                let k = ((sq.sqrt() / delta) as usize).min(bins - 1);
                h[k] += 1;
            }
            h
        })
        .collect();
    let mut hist = vec![0u64; bins];
    for h in partials {
        for (acc, c) in hist.iter_mut().zip(h) {
            *acc += c;
        }
    }
    Ok(hist)
}

fn argmax_first(masses: impl IntoIterator<Item = f64>) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (k, m) in masses.into_iter().enumerate() {
        if m > best.1 {
            best = (k, m);
        }
    }
    best
}

/// Picks the most populated `delta`-bin of sampled norms (ties: smallest).
pub fn select_radius_mc(
    d: usize,
    delta: f64,
    samples: u64,
    seed: u64,
) -> Result<VolumeEstimate, RadiusError> {
    let hist = norm_histogram(d, delta, samples, seed)?;
    let (k, _) = argmax_first(hist.iter().map(|&c| c as f64));
    let mass = hist[k] as f64 / samples as f64;
    Ok(VolumeEstimate::from_bin(d, delta, k, mass, samples))
}

/// Law of `||phi(mu)||_2^2` for `mu` uniform on `S^D`, computed by convolving
/// the cell masses of `phi^2` on a uniform grid over `[0, 1]`.
#[derive(Debug, Clone)]
pub struct NormSqDistribution {
    d: usize,
    step: f64,
    /// `prefix[j]` is the total mass of the first `j` cells.
    prefix: Vec<f64>,
}

impl NormSqDistribution {
    pub fn new(d: usize, grid_points: usize) -> Result<Self, RadiusError> {
        if d == 0 {
            return Err(RadiusError::BadDimension);
        }
        if grid_points < MIN_GRID_POINTS {
            return Err(RadiusError::TooFewGridPoints(grid_points));
        }
        let step = 1.0 / grid_points as f64;
        // P(phi^2 < u) = P(|phi| < sqrt u); masses are exact per cell.
        let cell: Vec<f64> = (0..grid_points)
            .map(|j| {
                abs_phi_cdf(((j + 1) as f64 * step).sqrt()) - abs_phi_cdf((j as f64 * step).sqrt())
            })
            .collect();
        let len = d * (grid_points - 1) + 1;
        let size = len.next_power_of_two();
        let mut buf: Vec<Complex<f64>> = cell
            .iter()
            .map(|&m| Complex::new(m, 0.0))
            .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
            .take(size)
            .collect();
        let mut planner = FftPlanner::new();
        planner.plan_fft_forward(size).process(&mut buf);
        for z in buf.iter_mut() {
            let base = *z;
            for _ in 1..d {
                *z *= base;
            }
        }
        planner.plan_fft_inverse(size).process(&mut buf);
        let scale = 1.0 / size as f64;
        let mut prefix = Vec::with_capacity(len + 1);
        let mut acc = 0.0;
        prefix.push(0.0);
        for z in &buf[..len] {
            acc += (z.re * scale).max(0.0);
            prefix.push(acc);
        }
        // renormalize away FFT round-off
        let total = acc;
        for p in prefix.iter_mut() {
            *p /= total;
        }
        Ok(Self { d, step, prefix })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// `P(||phi||^2 < s)`. Sum-cell `J` is spread uniformly over
    /// `[(J + (D - 1)/2) h, (J + (D + 1)/2) h)`, the window centred on the sum
    /// of `D` cell midpoints.
    pub fn cdf_sq(&self, s: f64) -> f64 {
        let cells = self.prefix.len() - 1;
        let pos = s / self.step - (self.d as f64 - 1.0) / 2.0;
        if pos <= 0.0 {
            return 0.0;
        }
        if pos >= cells as f64 {
            return 1.0;
        }
        let j = pos.floor() as usize;
        let frac = pos - j as f64;
        self.prefix[j] + frac * (self.prefix[j + 1] - self.prefix[j])
    }

    /// `P(||phi|| in [lo, hi))`.
    pub fn mass_in(&self, lo: f64, hi: f64) -> f64 {
        let lo = lo.max(0.0);
        (self.cdf_sq(hi * hi) - self.cdf_sq(lo * lo)).max(0.0)
    }
}

/// Picks the most massive `delta`-bin of the convolved norm law.
pub fn exact_radius(
    d: usize,
    delta: f64,
    grid_points: usize,
) -> Result<VolumeEstimate, RadiusError> {
    check_args(d, delta)?;
    let dist = NormSqDistribution::new(d, grid_points)?;
    Ok(best_bin(&dist, delta))
}

/// Most massive bin of an already computed distribution.
pub fn best_bin(dist: &NormSqDistribution, delta: f64) -> VolumeEstimate {
    let d = dist.dim();
    let bins = bin_count(d, delta);
    let (k, mass) =
        argmax_first((0..bins).map(|k| dist.mass_in(k as f64 * delta, (k + 1) as f64 * delta)));
    VolumeEstimate::from_bin(d, delta, k, mass, 0)
}
