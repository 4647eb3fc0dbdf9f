#![allow(dead_code)]

use pointwave::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::sync::Arc;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn unit(dim: Dim, p: f64) -> InteractionParams {
    InteractionParams::unit_bound_state(dim, p).unwrap()
}

pub fn small_grid(dim: Dim, n: usize) -> Arc<RadialGrid> {
    Arc::new(build_grid(dim, 1e-30, 60.0, n, 2.0).unwrap())
}

/// Sum of three complex Gaussians of random width plus a random singular part.
pub fn random_field(rng: &mut StdRng, grid: &Arc<RadialGrid>, lambda: f64) -> DecomposedField {
    let terms: Vec<(C64, f64)> = (0..3)
        .map(|_| (C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)), rng.gen_range(0.05..2.0)))
        .collect();
    let c = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let f = DecomposedField::from_regular_fn(grid.clone(), lambda, |r| terms.iter().map(|(a, b)| a * (-b * r * r).exp()).sum()).unwrap();
    f.combine(real(1.0), &DecomposedField::pure_singular(grid.clone(), c, lambda).unwrap(), real(1.0)).unwrap()
}

pub fn sup_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
