//! The circle group `R/Z`, the two-coordinate torus `T x T`, and the sum and
//! difference maps that turn the slab `S` into a partial homomorphism to `R`.
//!
//! Every torus value is stored by its canonical lift in `[0, 1)`. The sum map
//! `psi(p) = c1(p) + c2(p)` lands in `[0, 2)` and the difference map
//! `phi(p) = c1(p) - c2(p)` lands in `(-1, 1)`. The slab `S` is the preimage
//! `psi^{-1}([1/2, 3/2))`; on it, translating by `(a, 0)` and by `(0, a)` moves
//! `phi` by the same real amount in opposite directions, with no wrap-around.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Lower (inclusive) edge of `psi(S)`.
pub const SLAB_LO: f64 = 0.5;
/// Upper (exclusive) edge of `psi(S)`.
pub const SLAB_HI: f64 = 1.5;

/// Tolerance used for identities that hold exactly over the reals.
pub const IDENTITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum TorusError {
    #[error("cannot wrap non-finite value {0}")]
    NonFinite(f64),
    #[error("torus lift {0} is outside [0, 1)")]
    OutOfRange(f64),
    #[error("shift leaves S")]
    ShiftLeavesS,
}

/// A point of `R/Z`, held as its lift in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct TorusValue(f64);

impl TorusValue {
    pub const ZERO: TorusValue = TorusValue(0.0);

    /// Reduces `x` modulo 1.
    pub fn wrap(x: f64) -> Result<Self, TorusError> {
        if !x.is_finite() {
            return Err(TorusError::NonFinite(x));
        }
        Ok(Self(wrap_unit(x)))
    }

    /// The canonical lift in `[0, 1)`.
    #[inline]
    pub fn lift(self) -> f64 {
        self.0
    }

    /// Distance to the nearest integer, in `[0, 1/2]`.
    #[inline]
    pub fn norm(self) -> f64 {
        self.0.min(1.0 - self.0)
    }

    #[inline]
    #[allow(clippy::should_implement_trait)]
    pub fn add(self, other: TorusValue) -> TorusValue {
        TorusValue(wrap_unit(self.0 + other.0))
    }

    /// The dilate `k * self`.
    #[inline]
    pub fn scale(self, k: i64) -> TorusValue {
        TorusValue(wrap_unit(k as f64 * self.0))
    }
}

impl TryFrom<f64> for TorusValue {
    type Error = TorusError;

    fn try_from(x: f64) -> Result<Self, Self::Error> {
        if !x.is_finite() {
            return Err(TorusError::NonFinite(x));
        }
        if !(0.0..1.0).contains(&x) {
            return Err(TorusError::OutOfRange(x));
        }
        Ok(Self(x))
    }
}

impl From<TorusValue> for f64 {
    fn from(t: TorusValue) -> f64 {
        t.0
    }
}

/// `x mod 1` for finite `x`, guaranteed to land in `[0, 1)`.
#[inline]
pub(crate) fn wrap_unit(x: f64) -> f64 {
    let w = x - x.floor();
    // x = -1e-20 gives 1.0 - 1e-20 == 1.0 in doubles.
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

/// `wrap(x)` for a finite real.
pub fn wrap(x: f64) -> Result<TorusValue, TorusError> {
    TorusValue::wrap(x)
}

pub fn torus_norm(t: TorusValue) -> f64 {
    t.norm()
}

/// A point of `T x T` with coordinate lifts `c1 = a`, `c2 = b`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GPoint {
    pub a: TorusValue,
    pub b: TorusValue,
}

impl GPoint {
    pub const ORIGIN: GPoint = GPoint {
        a: TorusValue::ZERO,
        b: TorusValue::ZERO,
    };

    pub fn new(a: TorusValue, b: TorusValue) -> Self {
        Self { a, b }
    }

    /// Builds a point from two reals, wrapping each.
    pub fn from_reals(a: f64, b: f64) -> Result<Self, TorusError> {
        Ok(Self {
            a: TorusValue::wrap(a)?,
            b: TorusValue::wrap(b)?,
        })
    }

    #[inline]
    pub fn c1(self) -> f64 {
        self.a.lift()
    }

    #[inline]
    pub fn c2(self) -> f64 {
        self.b.lift()
    }

    #[inline]
    pub fn psi(self) -> f64 {
        self.c1() + self.c2()
    }

    #[inline]
    pub fn phi(self) -> f64 {
        self.c1() - self.c2()
    }

    #[inline]
    pub fn in_s(self) -> bool {
        in_slab(self.c1(), self.c2())
    }

    #[inline]
    #[allow(clippy::should_implement_trait)]
    pub fn add(self, other: GPoint) -> GPoint {
        GPoint {
            a: self.a.add(other.a),
            b: self.b.add(other.b),
        }
    }

    /// Translate by `(alpha, beta)`.
    #[inline]
    pub fn shift(self, alpha: TorusValue, beta: TorusValue) -> GPoint {
        self.add(GPoint::new(alpha, beta))
    }
}

/// Slab membership on raw lifts: `a + b` in `[1/2, 3/2)`.
#[inline]
pub fn in_slab(a: f64, b: f64) -> bool {
    let s = a + b;
    (SLAB_LO..SLAB_HI).contains(&s)
}

pub fn psi(p: GPoint) -> f64 {
    p.psi()
}

pub fn phi(p: GPoint) -> f64 {
    p.phi()
}

pub fn in_s(p: GPoint) -> bool {
    p.in_s()
}

pub fn g_add(p: GPoint, q: GPoint) -> GPoint {
    p.add(q)
}

/// Checks `psi(p + (alpha, beta)) == psi(p + (beta, alpha))` to within
/// [`IDENTITY_TOL`]. Returns `true` when either translate falls outside `S`,
/// so callers can sample unconditionally.
pub fn check_psi_iso(p: GPoint, alpha: TorusValue, beta: TorusValue) -> bool {
    let u = p.shift(alpha, beta);
    let v = p.shift(beta, alpha);
    if !(u.in_s() && v.in_s()) {
        return true;
    }
    (u.psi() - v.psi()).abs() <= IDENTITY_TOL
}

/// The real step `c1(p + (alpha, 0)) - c1(p)`.
///
/// When both `p + (alpha, 0)` and `p + (0, alpha)` lie in `S`, this equals both
/// `phi(p + (alpha, 0)) - phi(p)` and `phi(p) - phi(p + (0, alpha))`, wraps to
/// `alpha`, and bounds `||alpha||_T` from above.
pub fn phi_step(p: GPoint, alpha: TorusValue) -> Result<f64, TorusError> {
    let right = p.shift(alpha, TorusValue::ZERO);
    let up = p.shift(TorusValue::ZERO, alpha);
    if !(right.in_s() && up.in_s()) {
        return Err(TorusError::ShiftLeavesS);
    }
    Ok(right.c1() - p.c1())
}

/// A point of `(T x T)^D`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GVector(pub Vec<GPoint>);

impl GVector {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[GPoint] {
        &self.0
    }

    pub fn in_s(&self) -> bool {
        self.0.iter().all(|p| p.in_s())
    }

    /// `phi` applied coordinate-wise.
    pub fn phi_vec(&self) -> Vec<f64> {
        self.0.iter().map(|p| p.phi()).collect()
    }

    pub fn phi_norm_sq(&self) -> f64 {
        self.0.iter().map(|p| p.phi() * p.phi()).sum()
    }

    pub fn phi_norm(&self) -> f64 {
        self.phi_norm_sq().sqrt()
    }

    pub fn add(&self, other: &GVector) -> GVector {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        GVector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(p, q)| p.add(*q))
                .collect(),
        )
    }
}
