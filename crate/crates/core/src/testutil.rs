//! Seeded random fields shared by the test suites.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::grid::GridFunction;

/// Uniform complex values in the unit square, seeded.
pub fn random_complex_field(dim: usize, n: usize, seed: u64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = n.pow(dim as u32);
    let values = (0..total)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    GridFunction::from_values(dim, n, values).expect("valid random field")
}

/// Uniform real values in `[-1, 1]`, seeded.
pub fn random_real_field(dim: usize, n: usize, seed: u64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = n.pow(dim as u32);
    let values = (0..total)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), 0.0))
        .collect();
    GridFunction::from_values(dim, n, values).expect("valid random field")
}

/// Real field with the grid mean removed exactly once.
pub fn random_real_field_mean_zero(dim: usize, n: usize, seed: u64) -> GridFunction {
    random_real_field(dim, n, seed)
        .mean_subtracted()
        .map(|v| Complex64::new(v.re, 0.0))
}
