//! Corner-free subsets of the grid `[N]^2` from rotations of a torus.
//!
//! The crate builds sets `A subset [N]^2` with no corner
//! `(x, y), (x + d, y), (x, y + d)`, `d != 0`, by pulling back a thin annulus
//! through an affine map into `(T x T)^D`, checks them by brute force, and
//! compares them against Behrend's classical construction.

pub mod baseline;
pub mod construction;
pub mod grid;
pub mod radius;
pub mod rng;
pub mod torus;
pub mod verify;

pub use baseline::{baseline, behrend_set, diagonal_lift, Baseline, BehrendParams, BehrendSet};
pub use construction::{
    best_of_mu, build_set, construct, default_dimension, derive_params, direction_ok, f_map,
    in_annulus, sample_direction, AnnulusSpec, Construction, ConstructionError, ConstructionParams,
    Direction, Offset, RadiusMode,
};
pub use grid::GridSet;
pub use radius::{exact_radius, select_radius_mc, VolumeEstimate};
pub use torus::{GPoint, GVector, TorusValue};
pub use verify::{find_3ap, find_corner, is_corner_free, APWitness, CornerWitness};

/// The size law `sqrt(D) (3/4)^D N^(2 - 2/D)`.
pub fn size_bound(n: usize, d: usize) -> f64 {
    let (n, d) = (n as f64, d as f64);
    d.sqrt() * 0.75f64.powf(d) * n.powf(2.0 - 2.0 / d)
}
