//! Independent split-step spectral integrator for
//! i q_t + q_xx + 2 sigma q^2(x,t) conj(q(-x,t)) = 0 on a periodic grid.
//! Strang splitting; the nonlinear substep is exact because the pairwise
//! product P(x) = q(x) conj(q(-x)) is conserved by the nonlinear flow.
//! The reflection x -> -x is the index permutation j -> (n-j) mod n, so
//! the nonlocal coupling is interpolation-free.

use crate::potential::Potential;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;
use thiserror::Error;

/// Fraction of the domain at each edge that must stay empty.
const EDGE_FRACTION: f64 = 0.05;
const EDGE_EPS: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum PdeError {
    #[error("boundary leak at t = {t}: edge amplitude {amplitude:.3e} exceeds 1e-8")]
    BoundaryLeak { t: f64, amplitude: f64 },
    #[error("{0}")]
    Invalid(String),
}

pub struct EvolutionState {
    q: Vec<Complex64>,
    t: f64,
    sigma: f64,
    l: f64,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    /// conserved-quantity log: (t, quasi_power) every 100 steps
    pub power_log: Vec<(f64, Complex64)>,
}

impl EvolutionState {
    /// Uniform grid of n nodes on [-L, L), n a power of two.
    pub fn from_fn<F: Fn(f64) -> Complex64>(
        f: F,
        sigma: f64,
        l: f64,
        n: usize,
    ) -> Result<Self, PdeError> {
        if !n.is_power_of_two() || n < 8 {
            return Err(PdeError::Invalid(format!("n = {n} is not a power of two >= 8")));
        }
        if l <= 0.0 {
            return Err(PdeError::Invalid(format!("half-width L = {l} <= 0")));
        }
        if sigma != 1.0 && sigma != -1.0 {
            return Err(PdeError::Invalid(format!("sigma = {sigma} is not +-1")));
        }
        let h = 2.0 * l / n as f64;
        let q: Vec<Complex64> = (0..n).map(|j| f(-l + h * j as f64)).collect();
        let mut planner = FftPlanner::new();
        let state = EvolutionState {
            q,
            t: 0.0,
            sigma,
            l,
            fft: planner.plan_fft_forward(n),
            ifft: planner.plan_fft_inverse(n),
            power_log: Vec::new(),
        };
        state.check_edges()?;
        Ok(state)
    }

    pub fn from_potential(q0: &Potential, l: f64, n: usize) -> Result<Self, PdeError> {
        Self::from_fn(|x| q0.eval(x), q0.sigma(), l, n)
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn half_width(&self) -> f64 {
        self.l
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.l / self.n() as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        -self.l + self.spacing() * j as f64
    }

    pub fn field(&self) -> &[Complex64] {
        &self.q
    }

    /// Field value at arbitrary x by local cubic interpolation.
    pub fn eval(&self, x: f64) -> Complex64 {
        let n = self.n();
        let h = self.spacing();
        let pos = (x + self.l) / h;
        let j = pos.floor() as isize;
        let frac = pos - j as f64;
        // periodic 4-point Lagrange around the cell
        let idx = |i: isize| -> Complex64 { self.q[(i.rem_euclid(n as isize)) as usize] };
        let (f_m1, f_0, f_1, f_2) = (idx(j - 1), idx(j), idx(j + 1), idx(j + 2));
        let u = frac;
        let c_m1 = -u * (u - 1.0) * (u - 2.0) / 6.0;
        let c_0 = (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0;
        let c_1 = -(u + 1.0) * u * (u - 2.0) / 2.0;
        let c_2 = (u + 1.0) * u * (u - 1.0) / 6.0;
        f_m1 * c_m1 + f_0 * c_0 + f_1 * c_1 + f_2 * c_2
    }

    fn check_edges(&self) -> Result<(), PdeError> {
        let n = self.n();
        let zone = ((n as f64 * EDGE_FRACTION) as usize).max(1);
        let mut amp = 0.0f64;
        for j in 0..zone {
            amp = amp.max(self.q[j].norm()).max(self.q[n - 1 - j].norm());
        }
        if amp > EDGE_EPS {
            return Err(PdeError::BoundaryLeak {
                t: self.t,
                amplitude: amp,
            });
        }
        Ok(())
    }

    /// e^{-i kappa^2 dt} Fourier multiplier (from i q_t + q_xx = 0).
    fn linear_substep(&mut self, dt: f64) {
        let n = self.n();
        self.fft.process(&mut self.q);
        let dk = std::f64::consts::PI / self.l;
        let scale = 1.0 / n as f64;
        for (m, v) in self.q.iter_mut().enumerate() {
            let mm = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
            let kappa = dk * mm;
            *v *= (Complex64::new(0.0, -1.0) * kappa * kappa * dt).exp() * scale;
        }
        self.ifft.process(&mut self.q);
    }

    /// Exact nonlinear substep: q <- q exp(2 i sigma P dt) with
    /// P(x) = q(x) conj(q(-x)) frozen by the flow.
    pub fn nonlinear_substep(&mut self, dt: f64) {
        let n = self.n();
        let p: Vec<Complex64> = (0..n)
            .map(|j| self.q[j] * self.q[(n - j) % n].conj())
            .collect();
        for j in 0..n {
            self.q[j] *= (Complex64::new(0.0, 2.0) * self.sigma * p[j] * dt).exp();
        }
    }

    /// One Strang step: half linear, full nonlinear, half linear.
    pub fn step(&mut self, dt: f64) -> Result<(), PdeError> {
        self.linear_substep(dt / 2.0);
        self.nonlinear_substep(dt);
        self.linear_substep(dt / 2.0);
        self.t += dt;
        self.check_edges()
    }

    /// Steps until t_end (sign of dt chooses the direction), logging the
    /// quasi-power every 100 steps.
    pub fn evolve(&mut self, t_end: f64, dt: f64) -> Result<(), PdeError> {
        assert!(dt != 0.0, "dt must be nonzero");
        let steps = ((t_end - self.t) / dt).round() as i64;
        assert!(steps >= 0, "dt points away from t_end");
        self.power_log.push((self.t, self.quasi_power()));
        for s in 0..steps {
            self.step(dt)?;
            if (s + 1) % 100 == 0 {
                self.power_log.push((self.t, self.quasi_power()));
            }
        }
        self.power_log.push((self.t, self.quasi_power()));
        Ok(())
    }

    /// Trapezoid estimate of INT q(x,t) conj(q(-x,t)) dx (plain scaled
    /// sum on the periodic grid).
    pub fn quasi_power(&self) -> Complex64 {
        let n = self.n();
        let h = self.spacing();
        (0..n)
            .map(|j| self.q[j] * self.q[(n - j) % n].conj())
            .sum::<Complex64>()
            * h
    }
}

/// Builds an evolution from a potential and runs it to t_end.
pub fn evolve(
    q0: &Potential,
    t_end: f64,
    dt: f64,
    l: f64,
    n: usize,
) -> Result<EvolutionState, PdeError> {
    let mut state = EvolutionState::from_potential(q0, l, n)?;
    state.evolve(t_end, dt)?;
    Ok(state)
}

/// Max over the patch of |i q_t + q_xx + 2 sigma q^2 conj(q(-x,t))| with
/// 4th-order central differences in x and t.
pub fn pde_residual<F: Fn(f64, f64) -> Complex64>(
    field: F,
    sigma: f64,
    xs: &[f64],
    ts: &[f64],
    hx: f64,
    ht: f64,
) -> f64 {
    let i = Complex64::new(0.0, 1.0);
    let d1 = |f: &dyn Fn(f64) -> Complex64, h: f64| {
        (-f(2.0 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2.0 * h)) / (12.0 * h)
    };
    let d2 = |f: &dyn Fn(f64) -> Complex64, h: f64| {
        (-f(2.0 * h) + 16.0 * f(h) - 30.0 * f(0.0) + 16.0 * f(-h) - f(-2.0 * h)) / (12.0 * h * h)
    };
    let mut worst = 0.0f64;
    for &x in xs {
        for &t in ts {
            let qt = d1(&|e| field(x, t + e), ht);
            let qxx = d2(&|e| field(x + e, t), hx);
            let q0 = field(x, t);
            let qr = field(-x, t);
            let res = i * qt + qxx + 2.0 * sigma * q0 * q0 * qr.conj();
            worst = worst.max(res.norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_field_stays_zero() {
        let mut s = EvolutionState::from_fn(|_| c(0.0, 0.0), 1.0, 10.0, 256).unwrap();
        s.evolve(1.0, 0.01).unwrap();
        assert!(s.field().iter().all(|v| v.norm() == 0.0));
        assert_eq!(s.quasi_power(), c(0.0, 0.0));
    }

    #[test]
    fn tiny_gaussian_matches_free_dispersion() {
        // amplitude 1e-6 makes the nonlinearity negligible; the linear
        // flow of A e^{-x^2} is A (1+4it)^{-1/2} e^{-x^2/(1+4it)}
        let a = 1e-6;
        let mut s = EvolutionState::from_fn(
            |x| c(a, 0.0) * (-x * x).exp(),
            1.0,
            20.0,
            2048,
        )
        .unwrap();
        s.evolve(1.0, 1e-3).unwrap();
        let w = c(1.0, 4.0);
        let mut worst = 0.0f64;
        for j in 0..s.n() {
            let x = s.x(j);
            let exact = a * (-x * x / w).exp() / w.sqrt();
            worst = worst.max((s.field()[j] - exact).norm());
        }
        assert!(worst / a < 1e-9, "relative error {}", worst / a);
    }

    #[test]
    fn nonlinear_substep_conserves_pair_product() {
        let mut s = EvolutionState::from_fn(
            |x| c(0.7, 0.2) * (-0.3 * x * x).exp() * c(0.0, 1.3 * x).exp(),
            -1.0,
            12.0,
            512,
        )
        .unwrap();
        let n = s.n();
        let p_before: Vec<Complex64> = (0..n)
            .map(|j| s.field()[j] * s.field()[(n - j) % n].conj())
            .collect();
        s.nonlinear_substep(0.37);
        for j in 0..n {
            let p_after = s.field()[j] * s.field()[(n - j) % n].conj();
            assert!(
                (p_after - p_before[j]).norm() < 1e-14,
                "P drift at node {j}"
            );
        }
    }

    #[test]
    fn time_reversal_recovers_initial_data() {
        let f = |x: f64| c(0.4, 0.0) * (-x * x).exp();
        let mut s = EvolutionState::from_fn(f, 1.0, 16.0, 1024).unwrap();
        let q0: Vec<Complex64> = s.field().to_vec();
        s.evolve(0.5, 1e-3).unwrap();
        s.evolve(0.0, -1e-3).unwrap();
        let worst = s
            .field()
            .iter()
            .zip(&q0)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        assert!(worst < 1e-6, "reversal error {worst}");
    }

    #[test]
    fn quasi_power_is_conserved() {
        let mut s = EvolutionState::from_fn(
            |x| c(0.5, 0.1) * (-0.5 * x * x).exp(),
            1.0,
            48.0,
            4096,
        )
        .unwrap();
        s.evolve(2.0, 1e-3).unwrap();
        let p0 = s.power_log[0].1;
        for &(t, p) in &s.power_log {
            assert!(
                (p - p0).norm() / p0.norm() < 1e-6,
                "drift {} at t={t}",
                (p - p0).norm() / p0.norm()
            );
        }
    }

    #[test]
    fn quasi_power_equals_mass_for_even_real_data() {
        let s = EvolutionState::from_fn(|x| c(0.3, 0.0) * (-x * x).exp(), 1.0, 12.0, 512).unwrap();
        let mass: f64 = s.field().iter().map(|v| v.norm_sqr()).sum::<f64>() * s.spacing();
        assert!((s.quasi_power() - mass).norm() < 1e-12);
    }

    #[test]
    fn strang_is_second_order() {
        // error against a fine-dt reference halves 4x with dt/2
        let f = |x: f64| c(0.5, 0.0) * (-x * x).exp();
        let run = |dt: f64| {
            let mut s = EvolutionState::from_fn(f, 1.0, 32.0, 1024).unwrap();
            s.evolve(0.5, dt).unwrap();
            s.field().to_vec()
        };
        let reference = run(1.0 / 4096.0);
        let err = |dt: f64| {
            run(dt)
                .iter()
                .zip(&reference)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0f64, f64::max)
        };
        let e1 = err(1.0 / 32.0);
        let e2 = err(1.0 / 64.0);
        let order = (e1 / e2).log2();
        assert!((1.8..2.2).contains(&order), "measured order {order}");
    }

    #[test]
    fn boundary_leak_detected() {
        // wide field violates the edge precondition immediately
        let r = EvolutionState::from_fn(|_| c(0.1, 0.0), 1.0, 10.0, 256);
        assert!(matches!(r, Err(PdeError::BoundaryLeak { .. })));
    }

    #[test]
    fn residual_zero_field_and_plane_wave() {
        assert_eq!(
            pde_residual(|_, _| c(0.0, 0.0), 1.0, &[0.0, 1.0], &[0.5], 1e-2, 1e-2),
            0.0
        );
        // eps e^{i(kx - k^2 t)} solves the linear part; the nonlinear
        // remainder is O(eps^3)
        let eps = 1e-8;
        let k = 1.3;
        let wave = move |x: f64, t: f64| eps * (c(0.0, 1.0) * (k * x - k * k * t)).exp();
        let r = pde_residual(wave, 1.0, &[-0.7, 0.0, 1.1], &[0.3, 2.0], 1e-2, 1e-2);
        assert!(r < 1e-12, "plane wave residual {r}");
    }

    #[test]
    fn reflection_indexing_is_involutive() {
        let n = 512usize;
        for j in 0..n {
            let r = (n - j) % n;
            assert_eq!((n - r) % n, j);
        }
    }
}
