//! Numerical inverse scattering for the nonlocal nonlinear Schrodinger
//! equation i q_t + q_xx + 2 sigma q^2(x,t) conj(q(-x,t)) = 0: direct
//! scattering, discrete spectrum, phase functions, soliton and dispersive
//! pieces of the long-time asymptotic field, and a split-step PDE oracle.

pub mod dispersive;
pub mod numeric;
pub mod pdeoracle;
pub mod phase;
pub mod potential;
pub mod scattering;
pub mod soliton;
pub mod specfun;
pub mod spectrum;

pub use dispersive::{asymptotic_q, beta_tilde, error_order, modulation, AsymptoticField, DispersiveError, Modulation};
pub use pdeoracle::{evolve, pde_residual, EvolutionState, PdeError};
pub use phase::{chi, delta, nu, theta, PhaseContext, PhaseError};
pub use potential::{DecayClass, Potential, PotentialError, PotentialKind};
pub use scattering::{
    jost_grid, jost_left, jost_right, reflection_grid, scattering_sample, JostMatrix,
    ReflectionGrid, ScatteringError, ScatteringSample, Side,
};
pub use soliton::{
    dress_with_delta, m_sol, q_delta, q_sol, solve_residues, ReflectionlessData,
    ResidueSolution, SolitonError,
};
pub use specfun::{branch_power, complex_gamma, BranchSpec, SpecFunError};
pub use spectrum::{
    a1_quadrant_zeros, a2_quadrant_zeros, blaschke_t, classify, locate_zeros, norming_constants,
    DeltaPartition, DiscreteSpectrum, Pole, Rect, SpectrumError,
};
