//! Phase machinery for the stationary-point analysis: the phase theta,
//! the log-density nu(k) = -(1/2pi) Log(1 + sigma r1 r2), and the partial
//! transmission function delta with its factorization
//! delta(k) = (xi+k)^{i nu(-xi)} exp(chi(k)), evaluated by
//! singularity-subtracted adaptive quadrature along the cut (-inf, -xi].

use crate::numeric::{adaptive_simpson, cubic_interp};
use crate::potential::Potential;
use crate::scattering::{scattering_sample, ScatteringError};
use crate::specfun::{branch_power, BranchSpec, SpecFunError};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
/// nu-grid spacing: cubic interpolation error stays below the quadrature
/// tolerance for the H^1 reflection data handled here.
const NU_SPACING: f64 = 0.01;
/// |nu| below this ends the tail; consecutive-hit count guards flukes.
const TAIL_EPS: f64 = 1e-12;
const TAIL_CAP: f64 = 60.0;
const QUAD_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum PhaseError {
    #[error("1 + sigma r1 r2 vanishes (|jump| < 1e-12) at k = {0}")]
    VanishingJump(f64),
    #[error("Im nu = {0} outside the admissible band (-1/4, 1/2)")]
    AssumptionViolation(f64),
    #[error("k = {0} lies on the cut (-inf, -xi]")]
    OnCut(Complex64),
    #[error("adaptive quadrature failed to reach tolerance {QUAD_TOL}")]
    QuadratureFailure,
    #[error("|nu| did not fall below {TAIL_EPS} within {TAIL_CAP} of the stationary point")]
    TailNotDecayed,
    #[error(transparent)]
    Eval(#[from] ScatteringError),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
}

/// theta(k) = 4 k xi + 2 k^2; the stationary point is k = -xi.
pub fn theta(k: Complex64, xi: f64) -> Complex64 {
    4.0 * k * xi + 2.0 * k * k
}

/// t * theta(k, x/(4t)) = k x + 2 k^2 t, finite at t = 0.
pub fn t_theta(k: Complex64, x: f64, t: f64) -> Complex64 {
    k * x + 2.0 * k * k * t
}

/// nu(k) = -(1/2pi) Log(1 + sigma r1(k) r2(k)), principal branch.
pub fn nu(r1: Complex64, r2: Complex64, sigma: f64, k: f64) -> Result<Complex64, PhaseError> {
    let jump = 1.0 + sigma * r1 * r2;
    if jump.norm() < 1e-12 {
        return Err(PhaseError::VanishingJump(k));
    }
    let v = -jump.ln() / TWO_PI;
    if v.im <= -0.25 || v.im >= 0.5 {
        return Err(PhaseError::AssumptionViolation(v.im));
    }
    Ok(v)
}

/// Everything needed to evaluate chi and delta along one ray xi = x/(4t):
/// nu sampled on the cut down to where it is negligible, its value at the
/// stationary point, and delta0 = exp(chi(-xi)).
#[derive(Debug, Clone, Serialize)]
pub struct PhaseContext {
    pub xi: f64,
    #[serde(serialize_with = "ser_c")]
    pub nu_at_xi: Complex64,
    #[serde(serialize_with = "ser_c")]
    pub delta0: Complex64,
    #[serde(serialize_with = "ser_c")]
    pub r1_at_neg_xi: Complex64,
    #[serde(serialize_with = "ser_c")]
    pub r2_at_neg_xi: Complex64,
    pub sigma: f64,
    /// ascending sample abscissas on [s_min, -xi]
    pub s_grid: Vec<f64>,
    #[serde(skip)]
    pub nu_grid: Vec<Complex64>,
}

fn ser_c<S: serde::Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

impl PhaseContext {
    /// Samples nu(s) on s <= -xi by direct scattering of `q0`, marching
    /// down in blocks until the tail is negligible, then fixes delta0.
    pub fn build(q0: &Potential, xi: f64) -> Result<Self, PhaseError> {
        let neg_xi = -xi;
        let block = 128usize;
        let mut s_desc: Vec<f64> = Vec::new();
        let mut nu_desc: Vec<Complex64> = Vec::new();
        let mut offset = 0usize;
        let mut consecutive_small = 0usize;
        'outer: loop {
            let ss: Vec<f64> = (offset..offset + block)
                .map(|j| neg_xi - NU_SPACING * j as f64)
                .collect();
            let samples: Vec<_> = ss
                .par_iter()
                .map(|&s| scattering_sample(q0, Complex64::new(s, 0.0)))
                .collect::<Result<_, _>>()?;
            for (s, smp) in ss.iter().zip(&samples) {
                let v = nu(smp.r1, smp.r2, q0.sigma(), *s)?;
                s_desc.push(*s);
                nu_desc.push(v);
                if offset == 0 && s_desc.len() == 1 {
                    // keep r1, r2 at the stationary point for the caller
                }
                if v.norm() < TAIL_EPS {
                    consecutive_small += 1;
                    if consecutive_small >= 8 {
                        break 'outer;
                    }
                } else {
                    consecutive_small = 0;
                }
            }
            offset += block;
            if NU_SPACING * offset as f64 > TAIL_CAP {
                return Err(PhaseError::TailNotDecayed);
            }
        }
        let head = scattering_sample(q0, Complex64::new(neg_xi, 0.0))?;
        s_desc.reverse();
        nu_desc.reverse();
        let mut ctx = PhaseContext {
            xi,
            nu_at_xi: *nu_desc.last().unwrap(),
            delta0: Complex64::new(1.0, 0.0),
            r1_at_neg_xi: head.r1,
            r2_at_neg_xi: head.r2,
            sigma: q0.sigma(),
            s_grid: s_desc,
            nu_grid: nu_desc,
        };
        ctx.delta0 = chi(Complex64::new(neg_xi, 0.0), &ctx)?.exp();
        Ok(ctx)
    }

    /// Assemble a context from an explicit nu sample (tests and synthetic
    /// data); delta0 is computed from the sample.
    pub fn from_samples(
        xi: f64,
        s_grid: Vec<f64>,
        nu_grid: Vec<Complex64>,
        sigma: f64,
    ) -> Result<Self, PhaseError> {
        assert!(s_grid.len() == nu_grid.len() && s_grid.len() >= 4);
        let nu_at_xi = *nu_grid.last().unwrap();
        let mut ctx = PhaseContext {
            xi,
            nu_at_xi,
            delta0: Complex64::new(1.0, 0.0),
            r1_at_neg_xi: Complex64::new(0.0, 0.0),
            r2_at_neg_xi: Complex64::new(0.0, 0.0),
            sigma,
            s_grid,
            nu_grid,
        };
        ctx.delta0 = chi(Complex64::new(-xi, 0.0), &ctx)?.exp();
        Ok(ctx)
    }

    /// nu(s) on the cut: interpolated on the sample grid, zero below the
    /// truncation point.
    pub fn nu_on_cut(&self, s: f64) -> Complex64 {
        if self.s_grid.is_empty() || s < self.s_grid[0] {
            return Complex64::new(0.0, 0.0);
        }
        if s >= *self.s_grid.last().unwrap() {
            return self.nu_at_xi;
        }
        cubic_interp(&self.s_grid, &self.nu_grid, s).unwrap_or(Complex64::new(0.0, 0.0))
    }
}

fn on_cut(k: Complex64, neg_xi: f64) -> bool {
    k.im == 0.0 && k.re < neg_xi - 1e-14
}

/// chi(k) = -i nu(-xi) log(xi+k+1)
///          + i INT_{-xi-1}^{-xi} (nu(s)-nu(-xi))/(s-k) ds
///          + i INT_{-inf}^{-xi-1} nu(s)/(s-k) ds.
/// The endpoint k = -xi itself is admitted (the subtracted integrand is
/// regular there); interior cut points are not.
pub fn chi(k: Complex64, ctx: &PhaseContext) -> Result<Complex64, PhaseError> {
    let neg_xi = -ctx.xi;
    if on_cut(k, neg_xi) {
        return Err(PhaseError::OnCut(k));
    }
    let nu0 = ctx.nu_at_xi;
    let i = Complex64::new(0.0, 1.0);

    let term1 = -i * nu0 * (ctx.xi + k + 1.0).ln();

    // slope of nu at -xi for the removable point of the subtracted
    // kernel; taken from the interpolant at small h so the guard value
    // matches the quotient's limit and leaves no endpoint jump
    let h = 1e-6;
    let slope = (ctx.nu_on_cut(neg_xi) - ctx.nu_on_cut(neg_xi - h)) / h;
    let sub = |s: f64| -> Complex64 {
        let den = s - k;
        if den.norm() < 1e-9 {
            return slope;
        }
        (ctx.nu_on_cut(s) - nu0) / den
    };
    let term2 = i * adaptive_simpson(&sub, neg_xi - 1.0, neg_xi, QUAD_TOL)
        .ok_or(PhaseError::QuadratureFailure)?;

    let s_min = ctx.s_grid.first().copied().unwrap_or(neg_xi);
    let term3 = if s_min < neg_xi - 1.0 {
        let tail = |s: f64| ctx.nu_on_cut(s) / (s - k);
        i * adaptive_simpson(&tail, s_min, neg_xi - 1.0, QUAD_TOL)
            .ok_or(PhaseError::QuadratureFailure)?
    } else {
        Complex64::new(0.0, 0.0)
    };

    Ok(term1 + term2 + term3)
}

/// delta(k) = (xi+k)^{i nu(-xi)} exp(chi(k)), cut along (-inf, -xi].
pub fn delta(k: Complex64, ctx: &PhaseContext) -> Result<Complex64, PhaseError> {
    let neg_xi = -ctx.xi;
    if on_cut(k, neg_xi) || (k - neg_xi).norm() < 1e-300 {
        return Err(PhaseError::OnCut(k));
    }
    let spec = BranchSpec::negative_real(Complex64::new(neg_xi, 0.0));
    let power = branch_power(ctx.xi + k, Complex64::new(0.0, 1.0) * ctx.nu_at_xi, &spec)?;
    Ok(power * chi(k, ctx)?.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn theta_stationary_point() {
        for &xi in &[-1.3, 0.0, 0.7] {
            let th = theta(c(-xi, 0.0), xi);
            assert!((th - c(-2.0 * xi * xi, 0.0)).norm() < 1e-12);
            assert!(theta(c(0.0, 0.0), xi).norm() < 1e-15);
            let h = 1e-6;
            let d = (theta(c(-xi + h, 0.0), xi) - theta(c(-xi - h, 0.0), xi)) / (2.0 * h);
            assert!(d.norm() < 1e-8);
        }
        // t*theta matches 4 k xi + 2k^2 scaled by t
        let (k, x, t) = (c(0.3, 0.2), 1.7, 2.2);
        assert!((t_theta(k, x, t) - t * theta(k, x / (4.0 * t))).norm() < 1e-12);
    }

    #[test]
    fn nu_values() {
        assert_eq!(nu(c(0.0, 0.0), c(0.5, 0.0), 1.0, 0.0).unwrap(), c(0.0, 0.0));
        let v = nu(c(0.1, 0.0), c(0.1, 0.0), 1.0, 0.0).unwrap();
        assert!((v - c(-(1.01f64).ln() / TWO_PI, 0.0)).norm() < 1e-15);
        let v = nu(c(0.0, 0.1), c(0.1, 0.0), 1.0, 0.0).unwrap();
        let expect = -c(1.0, 0.01).ln() / TWO_PI;
        assert!((v - expect).norm() < 1e-15);
        assert!((v.im - (-0.0015915)).abs() < 1e-6);
        // vanishing jump
        assert!(matches!(
            nu(c(1.0, 0.0), c(-1.0, 0.0), 1.0, 0.0),
            Err(PhaseError::VanishingJump(_))
        ));
    }

    fn constant_nu_ctx(xi: f64, c0: Complex64) -> PhaseContext {
        // nu = c0 on [-xi-1, -xi] and 0 below; sharp but integrable
        let neg_xi = -xi;
        let n = 101;
        let s: Vec<f64> = (0..n)
            .map(|j| neg_xi - 1.0 + j as f64 / (n - 1) as f64)
            .collect();
        let v = vec![c0; n];
        PhaseContext {
            xi,
            nu_at_xi: c0,
            delta0: Complex64::new(1.0, 0.0),
            r1_at_neg_xi: Complex64::new(0.0, 0.0),
            r2_at_neg_xi: Complex64::new(0.0, 0.0),
            sigma: 1.0,
            s_grid: s,
            nu_grid: v,
        }
    }

    #[test]
    fn chi_vanishes_for_zero_nu() {
        let ctx = constant_nu_ctx(0.5, c(0.0, 0.0));
        let v = chi(c(1.0, 1.0), &ctx).unwrap();
        assert!(v.norm() < 1e-12);
        assert!((delta(c(1.0, 1.0), &ctx).unwrap() - 1.0).norm() < 1e-12);
    }

    #[test]
    fn chi_constant_nu_closed_form() {
        let xi = 0.5;
        let c0 = c(0.03, -0.01);
        let ctx = constant_nu_ctx(xi, c0);
        for &k in &[c(1.0, 1.0), c(0.2, -0.8), c(2.0, 0.0)] {
            let got = chi(k, &ctx).unwrap();
            let expect = -Complex64::new(0.0, 1.0) * c0 * (xi + k + 1.0).ln();
            assert!((got - expect).norm() < 1e-8, "k={k}: {got} vs {expect}");
        }
    }

    #[test]
    fn chi_on_cut_rejected_but_endpoint_allowed() {
        let ctx = constant_nu_ctx(0.5, c(0.02, 0.0));
        assert!(matches!(
            chi(c(-2.0, 0.0), &ctx),
            Err(PhaseError::OnCut(_))
        ));
        assert!(chi(c(-0.5, 0.0), &ctx).is_ok());
    }

    // smooth synthetic nu profile for quadrature cross-checks
    fn bump_ctx(xi: f64, amp: Complex64) -> PhaseContext {
        let neg_xi = -xi;
        let s_min = neg_xi - 12.0;
        let n = ((neg_xi - s_min) / NU_SPACING).round() as usize + 1;
        let s: Vec<f64> = (0..n)
            .map(|j| s_min + (neg_xi - s_min) * j as f64 / (n - 1) as f64)
            .collect();
        let v: Vec<Complex64> = s
            .iter()
            .map(|&x| amp * (-(x - neg_xi + 2.0) * (x - neg_xi + 2.0)).exp())
            .collect();
        PhaseContext {
            xi,
            nu_at_xi: *v.last().unwrap(),
            delta0: Complex64::new(1.0, 0.0),
            r1_at_neg_xi: Complex64::new(0.0, 0.0),
            r2_at_neg_xi: Complex64::new(0.0, 0.0),
            sigma: 1.0,
            s_grid: s,
            nu_grid: v,
        }
    }

    #[test]
    fn chi_matches_unsplit_integral_oracle() {
        // log delta = i INT nu(s)/(s-k) ds for k off the axis; the split
        // three-term form plus the branch factor must reproduce it
        let xi = 0.5;
        let ctx = bump_ctx(xi, c(0.04, 0.015));
        let k = c(1.0, 1.0);
        let neg_xi = -xi;
        let s_min = ctx.s_grid[0];
        // fine fixed-step Simpson rule
        let n = 240_001;
        let h = (neg_xi - s_min) / (n - 1) as f64;
        let f = |s: f64| ctx.nu_on_cut(s) / (s - k);
        let mut acc = f(s_min) + f(neg_xi);
        for j in 1..n - 1 {
            let w = if j % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(s_min + h * j as f64);
        }
        let unsplit = Complex64::new(0.0, 1.0) * acc * h / 3.0;
        let log_delta_split = chi(k, &ctx).unwrap()
            + Complex64::new(0.0, 1.0) * ctx.nu_at_xi * (xi + k).ln();
        assert!(
            (log_delta_split - unsplit).norm() < 1e-7,
            "{log_delta_split} vs {unsplit}"
        );
    }

    #[test]
    fn delta_jump_across_cut() {
        // delta(s0+) = delta(s0-) (1 + sigma r1 r2)(s0) = delta- e^{-2pi nu}
        let xi = 0.5;
        let ctx = bump_ctx(xi, c(0.04, 0.015));
        let s0 = -xi - 1.7;
        let jump_expect = (-TWO_PI * ctx.nu_on_cut(s0)).exp();
        let eps = 1e-5;
        let ratio_at = |e: f64| {
            let up = delta(c(s0, e), &ctx).unwrap();
            let dn = delta(c(s0, -e), &ctx).unwrap();
            up / dn
        };
        // Richardson in eps
        let r1 = ratio_at(eps);
        let r2 = ratio_at(eps / 2.0);
        let extrap = 2.0 * r2 - r1;
        assert!(
            (extrap - jump_expect).norm() < 1e-6,
            "{extrap} vs {jump_expect}"
        );
    }

    #[test]
    fn delta_tends_to_one() {
        let ctx = bump_ctx(0.5, c(0.04, 0.015));
        let mut prev = f64::INFINITY;
        for &r in &[1e2, 1e3, 1e4] {
            for &phi in &[
                std::f64::consts::FRAC_PI_4,
                std::f64::consts::FRAC_PI_2,
                3.0 * std::f64::consts::FRAC_PI_4,
            ] {
                let k = r * c(phi.cos(), phi.sin());
                let dev = (delta(k, &ctx).unwrap() - 1.0).norm();
                assert!(dev < 10.0 / r, "slow decay at r={r}");
            }
            let dev = (delta(c(0.0, r), &ctx).unwrap() - 1.0).norm();
            assert!(dev < prev / 5.0, "not halving at r={r}");
            prev = dev;
        }
    }

    #[test]
    fn delta_factorization_holder_bound() {
        // |delta - delta0 (xi+k)^{i nu}| / r^{1/2 - Im nu} stays bounded
        // as r -> 0 along |phi| <= pi/4
        let xi = 0.5;
        let ctx = bump_ctx(xi, c(0.04, 0.015));
        let spec = BranchSpec::negative_real(c(-xi, 0.0));
        let i = c(0.0, 1.0);
        let mut ratios = Vec::new();
        for &r in &[1e-3, 3e-3, 1e-2, 3e-2, 1e-1, 3e-1, 1.0] {
            for &phi in &[-std::f64::consts::FRAC_PI_4, 0.0, std::f64::consts::FRAC_PI_4] {
                let k = c(-xi, 0.0) + r * c(phi.cos(), phi.sin());
                if k.im == 0.0 && k.re <= -xi {
                    continue;
                }
                let d = delta(k, &ctx).unwrap();
                let lead = ctx.delta0 * branch_power(xi + k, i * ctx.nu_at_xi, &spec).unwrap();
                let ratio = (d - lead).norm() / r.powf(0.5 - ctx.nu_at_xi.im);
                ratios.push(ratio);
            }
        }
        let max = ratios.iter().cloned().fold(0.0f64, f64::max);
        let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max / min.max(1e-12) <= 100.0, "ratio spread {max}/{min}");
    }

    #[test]
    fn delta_is_analytic_off_cut() {
        let ctx = bump_ctx(0.5, c(0.04, 0.015));
        let h = 1e-5;
        for &k in &[c(1.0, 0.5), c(-2.0, 0.8), c(0.3, -0.9)] {
            let dre = (delta(k + h, &ctx).unwrap() - delta(k - h, &ctx).unwrap()) / (2.0 * h);
            let dim = (delta(k + c(0.0, h), &ctx).unwrap() - delta(k - c(0.0, h), &ctx).unwrap())
                / (2.0 * h);
            // Cauchy-Riemann: d/dx = -i d/dy for analytic functions
            assert!(
                (dre - dim / c(0.0, 1.0)).norm() < 1e-6,
                "CR residual at {k}"
            );
        }
    }

    #[test]
    fn build_from_zero_potential() {
        let q0 = Potential::zero(1.0, 3.0, 201);
        let ctx = PhaseContext::build(&q0, 0.5).unwrap();
        assert!(ctx.nu_at_xi.norm() < 1e-14);
        assert!((ctx.delta0 - 1.0).norm() < 1e-10);
        assert!((delta(c(1.0, 1.0), &ctx).unwrap() - 1.0).norm() < 1e-9);
    }
}
