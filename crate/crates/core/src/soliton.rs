//! Reflectionless Riemann-Hilbert solver: the pole expansion of M_sol
//! closes into a dense linear system for the residue vectors alpha, beta
//! through the Cauchy kernels 1/(omega_p - gamma_m); q_sol and the
//! Delta-reduced field q^Delta are read off the beta sums.

use crate::phase::{delta, t_theta, PhaseContext, PhaseError};
use crate::spectrum::{blaschke_t, DeltaPartition, DiscreteSpectrum, Pole, SpectrumError};
use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

/// Real part of an exponent beyond which exp overflows f64.
const EXP_CLAMP: f64 = 700.0;
const COND_LIMIT: f64 = 1e12;

#[derive(Debug, Error)]
pub enum SolitonError {
    #[error("residue system condition estimate {0:.3e} exceeds 1e12")]
    SingularSystem(f64),
    #[error("exponent real part {0:.3e} exceeds the overflow clamp at (x,t)=({1},{2})")]
    OverflowRegime(f64, f64, f64),
    #[error("no norming constant stored for pole {0}")]
    MissingConstant(Complex64),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Phase(#[from] PhaseError),
}

/// Scattering data with zero reflection: omega-type poles with constants
/// c-hat and gamma-type poles with constants d-hat.
#[derive(Debug, Clone)]
pub struct ReflectionlessData {
    pub poles1: Vec<Pole>,
    pub poles2: Vec<Pole>,
    pub sigma: f64,
}

impl ReflectionlessData {
    pub fn empty(sigma: f64) -> Self {
        ReflectionlessData {
            poles1: Vec::new(),
            poles2: Vec::new(),
            sigma,
        }
    }

    /// Mirror-symmetric N = M = 1 data. The free parameters are the
    /// first-quadrant omega, fourth-quadrant gamma and the constants c1,
    /// d1 at them; the mirror constants are forced by the scattering
    /// symmetries: with A = a1'(omega1) of the rational one-soliton
    ///   a1(k) = (k-omega1)(k+conj omega1)/((k-gamma1)(k+conj gamma1)),
    /// c_{-1} = conj(-sigma/(c1 A^2)), and likewise for d with
    /// B = a2'(gamma1) of a2 = 1/a1.
    pub fn one_soliton(
        omega: Complex64,
        gamma: Complex64,
        c1: Complex64,
        d1: Complex64,
        sigma: f64,
    ) -> Self {
        assert!(omega.re > 0.0 && omega.im > 0.0, "omega in first quadrant");
        assert!(gamma.re > 0.0 && gamma.im < 0.0, "gamma in fourth quadrant");
        let a1p = (omega + omega.conj()) / ((omega - gamma) * (omega + gamma.conj()));
        let a2p = (gamma + gamma.conj()) / ((gamma - omega) * (gamma + omega.conj()));
        let c_m = (-sigma / (c1 * a1p * a1p)).conj();
        let d_m = (-sigma / (d1 * a2p * a2p)).conj();
        ReflectionlessData {
            poles1: vec![
                Pole {
                    location: -omega.conj(),
                    constant: c_m,
                },
                Pole {
                    location: omega,
                    constant: c1,
                },
            ],
            poles2: vec![
                Pole {
                    location: -gamma.conj(),
                    constant: d_m,
                },
                Pole {
                    location: gamma,
                    constant: d1,
                },
            ],
            sigma,
        }
    }

    /// a1'(omega1) of the rational one-soliton transmission coefficient.
    pub fn one_soliton_a1_prime(omega: Complex64, gamma: Complex64) -> Complex64 {
        (omega + omega.conj()) / ((omega - gamma) * (omega + gamma.conj()))
    }

    pub fn from_spectrum(spec: &DiscreteSpectrum) -> Self {
        let poles1 = spec
            .omegas
            .iter()
            .zip(&spec.c)
            .map(|(&z, &c)| Pole {
                location: z,
                constant: c,
            })
            .collect();
        let poles2 = spec
            .gammas
            .iter()
            .zip(&spec.d)
            .map(|(&z, &c)| Pole {
                location: z,
                constant: c,
            })
            .collect();
        ReflectionlessData {
            poles1,
            poles2,
            sigma: spec.sigma,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ResidueSolution {
    pub alpha1: Vec<Complex64>,
    pub alpha2: Vec<Complex64>,
    pub beta1: Vec<Complex64>,
    pub beta2: Vec<Complex64>,
    /// 2-norm condition estimate of the system matrix
    pub condition: f64,
}

fn driving(
    data: &ReflectionlessData,
    x: f64,
    t: f64,
) -> Result<(Vec<Complex64>, Vec<Complex64>), SolitonError> {
    let two_i = Complex64::new(0.0, 2.0);
    let mut g = Vec::with_capacity(data.poles1.len());
    for p in &data.poles1 {
        let e = two_i * t_theta(p.location, x, t);
        if e.re > EXP_CLAMP {
            return Err(SolitonError::OverflowRegime(e.re, x, t));
        }
        g.push(p.constant * e.exp());
    }
    let mut h = Vec::with_capacity(data.poles2.len());
    for q in &data.poles2 {
        let e = -two_i * t_theta(q.location, x, t);
        if e.re > EXP_CLAMP {
            return Err(SolitonError::OverflowRegime(e.re, x, t));
        }
        h.push(q.constant * e.exp());
    }
    Ok((g, h))
}

/// Solves the residue system
///   alpha_p = g_p sum_m beta_m/(omega_p - gamma_m) + [sys 2: g_p],
///   beta_q  = h_q (sum_n alpha_n/(gamma_q - omega_n)) + [sys 1: h_q],
/// with g_p = c-hat_p e^{2it theta(omega_p)}, h_q = d-hat_q e^{-2it theta(gamma_q)}.
pub fn solve_residues(
    data: &ReflectionlessData,
    x: f64,
    t: f64,
) -> Result<ResidueSolution, SolitonError> {
    let n1 = data.poles1.len();
    let n2 = data.poles2.len();
    let dim = n1 + n2;
    if dim == 0 {
        return Ok(ResidueSolution {
            alpha1: vec![],
            alpha2: vec![],
            beta1: vec![],
            beta2: vec![],
            condition: 1.0,
        });
    }
    let (g, h) = driving(data, x, t)?;
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);

    let mut m = DMatrix::from_element(dim, dim, zero);
    for p in 0..n1 {
        m[(p, p)] = one;
        for q in 0..n2 {
            m[(p, n1 + q)] = -g[p] / (data.poles1[p].location - data.poles2[q].location);
        }
    }
    for q in 0..n2 {
        m[(n1 + q, n1 + q)] = one;
        for p in 0..n1 {
            m[(n1 + q, p)] = -h[q] / (data.poles2[q].location - data.poles1[p].location);
        }
    }

    let svd = m.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition > COND_LIMIT {
        return Err(SolitonError::SingularSystem(condition));
    }

    let mut rhs = DMatrix::from_element(dim, 2, zero);
    for q in 0..n2 {
        rhs[(n1 + q, 0)] = h[q]; // system 1
    }
    for p in 0..n1 {
        rhs[(p, 1)] = g[p]; // system 2
    }
    let lu = m.lu();
    let sol = lu.solve(&rhs).ok_or(SolitonError::SingularSystem(condition))?;

    Ok(ResidueSolution {
        alpha1: (0..n1).map(|p| sol[(p, 0)]).collect(),
        alpha2: (0..n1).map(|p| sol[(p, 1)]).collect(),
        beta1: (0..n2).map(|q| sol[(n1 + q, 0)]).collect(),
        beta2: (0..n2).map(|q| sol[(n1 + q, 1)]).collect(),
        condition,
    })
}

/// q_sol(x,t) = 2i sum_m beta_m^{(1)}.
pub fn q_sol(data: &ReflectionlessData, x: f64, t: f64) -> Result<Complex64, SolitonError> {
    let sol = solve_residues(data, x, t)?;
    Ok(Complex64::new(0.0, 2.0) * sol.beta1.iter().sum::<Complex64>())
}

/// M_sol(k) from the pole expansion; k must avoid the poles.
pub fn m_sol(
    data: &ReflectionlessData,
    sol: &ResidueSolution,
    k: Complex64,
) -> [[Complex64; 2]; 2] {
    let mut m = [
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
    ];
    for (p, pole) in data.poles1.iter().enumerate() {
        let w = 1.0 / (k - pole.location);
        m[0][0] += sol.alpha1[p] * w;
        m[1][0] += sol.alpha2[p] * w;
    }
    for (q, pole) in data.poles2.iter().enumerate() {
        let w = 1.0 / (k - pole.location);
        m[0][1] += sol.beta1[q] * w;
        m[1][1] += sol.beta2[q] * w;
    }
    m
}

/// The Delta-reduced soliton field: reflectionless data with the poles of
/// Delta only and constants c_n T^2(omega_n) delta(omega_n)^{-2}, gamma
/// slots zeroed exactly as the source prescribes.
pub fn q_delta(
    spec: &DiscreteSpectrum,
    part: &DeltaPartition,
    ctx: &PhaseContext,
    x: f64,
    t: f64,
) -> Result<Complex64, SolitonError> {
    let mut poles1 = Vec::with_capacity(part.delta.len());
    for &w in &part.delta {
        let idx = spec
            .omegas
            .iter()
            .position(|&z| (z - w).norm() < 1e-8)
            .ok_or(SolitonError::MissingConstant(w))?;
        let t_w = blaschke_t(w, part)?;
        let d_w = delta(w, ctx)?;
        poles1.push(Pole {
            location: w,
            constant: spec.c[idx] * t_w * t_w / (d_w * d_w),
        });
    }
    let data = ReflectionlessData {
        poles1,
        poles2: Vec::new(),
        sigma: spec.sigma,
    };
    q_sol(&data, x, t)
}

/// Reflectionless data dressed for long-time evaluation: all poles kept,
/// constants c_n delta(omega_n)^{-2} and d_m delta(gamma_m)^2.
pub fn dress_with_delta(
    spec: &DiscreteSpectrum,
    ctx: &PhaseContext,
) -> Result<ReflectionlessData, SolitonError> {
    let mut poles1 = Vec::with_capacity(spec.omegas.len());
    for (&w, &c) in spec.omegas.iter().zip(&spec.c) {
        let d_w = delta(w, ctx)?;
        poles1.push(Pole {
            location: w,
            constant: c / (d_w * d_w),
        });
    }
    let mut poles2 = Vec::with_capacity(spec.gammas.len());
    for (&g, &d) in spec.gammas.iter().zip(&spec.d) {
        let d_g = delta(g, ctx)?;
        poles2.push(Pole {
            location: g,
            constant: d * d_g * d_g,
        });
    }
    Ok(ReflectionlessData {
        poles1,
        poles2,
        sigma: spec.sigma,
    })
}
