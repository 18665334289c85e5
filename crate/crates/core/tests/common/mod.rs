#![allow(dead_code)]

use dyadlab_core::dyadic::{DyadicGrid, IntervalId, StepFunction};
use dyadlab_core::weights::{Weight, WeightFamilySpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn grid(d: u32) -> DyadicGrid {
    DyadicGrid::new(d).unwrap()
}

pub fn random_function(rng: &mut ChaCha8Rng, d: u32) -> StepFunction {
    let n = 1usize << d;
    StepFunction::new(d, (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

pub fn random_nonnegative(rng: &mut ChaCha8Rng, d: u32) -> StepFunction {
    let n = 1usize << d;
    StepFunction::new(d, (0..n).map(|_| rng.gen_range(0.0..2.0)).collect()).unwrap()
}

/// Leafwise log-uniform weight, independent of the cascade generator.
pub fn random_weight(rng: &mut ChaCha8Rng, d: u32, spread: f64) -> Weight {
    let n = 1usize << d;
    Weight::from_leaves(d, (0..n).map(|_| (spread * rng.gen_range(-1.0..1.0)).exp()).collect()).unwrap()
}

pub fn cascade(d: u32, delta: f64, seed: u64) -> Weight {
    WeightFamilySpec::Cascade { depth: d, delta, seed }.generate().unwrap()
}

/// Mean of `f` over `I` straight from the leaves.
pub fn leaf_mean(f: &[f64], depth: u32, i: IntervalId) -> f64 {
    let r = i.leaf_range(depth);
    let c = r.len() as f64;
    f[r].iter().sum::<f64>() / c
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
