//! Shared fixtures for the benchmarks.

use polynet::{Architecture, PrimeField, WeightAssignment};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const PRIME: u64 = 2_147_483_629;

pub fn arch(widths: &str, r: u32) -> Architecture {
    Architecture::parse(widths, r).expect("valid benchmark architecture")
}

/// Random weights and `count` random points over a fixed prime field.
pub fn instance(arch: &Architecture, count: usize, seed: u64) -> (WeightAssignment<PrimeField>, Vec<Vec<u64>>) {
    let field = PrimeField::new(PRIME).expect("benchmark prime");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta = WeightAssignment::random(arch, field, &mut rng);
    let points = (0..count).map(|_| (0..arch.input_dim()).map(|_| rng.gen_range(0..PRIME)).collect()).collect();
    (theta, points)
}
