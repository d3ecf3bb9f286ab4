//! Shared fixtures for the kernel benchmarks.

use nalgebra::DMatrix;
use npch_core::rng::task_rng;
use npch_core::spd::{SpdPoint, SpdSpace};
use npch_core::Geometry;

/// Deterministic well-conditioned symmetric matrix of size `n`.
pub fn symmetric(n: usize, seed: u64) -> DMatrix<f64> {
    let p = random_spd(n, seed);
    p.matrix().clone()
}

pub fn random_spd(n: usize, seed: u64) -> SpdPoint {
    let space = SpdSpace::new(n).expect("n >= 1");
    space.sample_point(&mut task_rng(seed, 0), 2.0)
}
