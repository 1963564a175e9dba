//! Shared fixtures for the criterion benchmarks.

use nnls_core::{EvolutionState, Potential};
use num_complex::Complex64;

pub fn gaussian_potential(n: usize) -> Potential {
    Potential::gaussian(0.3, 1.0, 8.0, n)
}

pub fn evolution_state(n: usize) -> EvolutionState {
    EvolutionState::from_fn(
        |x: f64| Complex64::new(0.3 * (-x * x).exp(), 0.0),
        1.0,
        32.0,
        n,
    )
    .expect("benchmark field fits the box")
}
