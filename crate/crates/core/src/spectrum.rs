//! Discrete spectrum: zeros of a1 in the upper half-plane and a2 in the
//! lower, located by argument-principle winding counts on recursively
//! subdivided rectangles with Newton refinement; norming constants; the
//! Delta-partition relative to the stationary point -xi and the partial
//! Blaschke product T(z).

use crate::potential::Potential;
use crate::scattering::{a1_at, a2_at, b_at, central_derivative, ScatteringError};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Smallest rectangle dimension before a multi-zero cell is declared a
/// multiplicity violation.
const MIN_CELL: f64 = 1e-4;
/// Rectangle size below which Newton refinement takes over from
/// subdivision for a single-zero cell.
const NEWTON_CELL: f64 = 0.05;
const ZERO_RESIDUAL: f64 = 1e-10;
/// Zeros closer than this to the real axis are treated as spectral
/// singularities and rejected.
const MIN_IM: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error("a zero sits on or too close to a winding contour near {0}")]
    BoundaryZero(Complex64),
    #[error("cell at {center} of size {size} holds {count} zeros; simplicity violated")]
    MultiplicityError {
        center: Complex64,
        size: f64,
        count: i64,
    },
    #[error("Newton refinement failed to reach residual {ZERO_RESIDUAL} near {0}")]
    NewtonFailure(Complex64),
    #[error("claimed zero {z} has residual {residual:.3e} > 1e-9")]
    InvalidZero { z: Complex64, residual: f64 },
    #[error("derivative magnitude {mag:.3e} at {z} below 1e-6; zero not numerically simple")]
    NearDegenerateDerivative { z: Complex64, mag: f64 },
    #[error("zero {0} within 1e-3 of the real axis (near spectral singularity)")]
    NearRealZero(Complex64),
    #[error("pole {z} has Re within 1e-9 of -xi = {neg_xi}")]
    OnThreshold { z: Complex64, neg_xi: f64 },
    #[error("evaluation point {0} within 1e-12 of a denominator root of T")]
    PoleHit(Complex64),
    #[error(transparent)]
    Eval(#[from] ScatteringError),
}

#[derive(Debug, Clone, Copy)]
pub struct Rect {
    pub re: (f64, f64),
    pub im: (f64, f64),
}

impl Rect {
    pub fn new(re0: f64, re1: f64, im0: f64, im1: f64) -> Self {
        assert!(re0 < re1 && im0 < im1, "degenerate rectangle");
        Rect {
            re: (re0, re1),
            im: (im0, im1),
        }
    }

    fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re.0 + self.re.1), 0.5 * (self.im.0 + self.im.1))
    }

    fn max_dim(&self) -> f64 {
        (self.re.1 - self.re.0).max(self.im.1 - self.im.0)
    }

    fn contains(&self, z: Complex64, slack: f64) -> bool {
        z.re >= self.re.0 - slack
            && z.re <= self.re.1 + slack
            && z.im >= self.im.0 - slack
            && z.im <= self.im.1 + slack
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re.0, self.im.0),
            Complex64::new(self.re.1, self.im.0),
            Complex64::new(self.re.1, self.im.1),
            Complex64::new(self.re.0, self.im.1),
        ]
    }
}

type EvalFn<'a> = &'a (dyn Fn(Complex64) -> Result<Complex64, ScatteringError> + Sync);

/// Accumulated phase change of f along the segment z0 -> z1, subdividing
/// until each increment is unambiguous (< pi/2).
fn edge_phase(
    f: EvalFn,
    z0: Complex64,
    f0: Complex64,
    z1: Complex64,
    f1: Complex64,
    depth: usize,
) -> Result<f64, SpectrumError> {
    let step = (f1 / f0).arg();
    if step.abs() < std::f64::consts::FRAC_PI_2 {
        return Ok(step);
    }
    if depth >= 48 {
        return Err(SpectrumError::BoundaryZero(0.5 * (z0 + z1)));
    }
    let zm = 0.5 * (z0 + z1);
    let fm = f(zm)?;
    if fm.norm() < 1e-13 {
        return Err(SpectrumError::BoundaryZero(zm));
    }
    Ok(edge_phase(f, z0, f0, zm, fm, depth + 1)? + edge_phase(f, zm, fm, z1, f1, depth + 1)?)
}

/// Counterclockwise winding number of f around the rectangle boundary.
fn winding(f: EvalFn, rect: &Rect) -> Result<i64, SpectrumError> {
    let corners = rect.corners();
    let mut vals = [Complex64::default(); 4];
    for (i, &z) in corners.iter().enumerate() {
        let v = f(z)?;
        if v.norm() < 1e-13 {
            return Err(SpectrumError::BoundaryZero(z));
        }
        vals[i] = v;
    }
    // pre-split each edge: the endpoint-only test can alias a near-2pi
    // swing on a long edge into a small increment
    const PRESPLIT: usize = 8;
    let mut total = 0.0;
    for i in 0..4 {
        let j = (i + 1) % 4;
        let (z0, z1) = (corners[i], corners[j]);
        let mut zp = z0;
        let mut fp = vals[i];
        for s in 1..=PRESPLIT {
            let zs = z0 + (z1 - z0) * (s as f64 / PRESPLIT as f64);
            let fs = if s == PRESPLIT {
                vals[j]
            } else {
                let v = f(zs)?;
                if v.norm() < 1e-13 {
                    return Err(SpectrumError::BoundaryZero(zs));
                }
                v
            };
            total += edge_phase(f, zp, fp, zs, fs, 0)?;
            zp = zs;
            fp = fs;
        }
    }
    let w = total / (2.0 * std::f64::consts::PI);
    if (w - w.round()).abs() > 0.1 {
        return Err(SpectrumError::BoundaryZero(rect.center()));
    }
    Ok(w.round() as i64)
}

fn newton(f: EvalFn, start: Complex64, home: &Rect) -> Result<Complex64, SpectrumError> {
    let mut z = start;
    let slack = home.max_dim();
    for _ in 0..80 {
        let fz = f(z)?;
        if fz.norm() <= ZERO_RESIDUAL {
            return Ok(z);
        }
        let h = 1e-7;
        let d = (f(z + h)? - f(z - h)?) / (2.0 * h);
        if d.norm() < 1e-14 {
            break;
        }
        z -= fz / d;
        if !home.contains(z, slack) {
            break;
        }
    }
    Err(SpectrumError::NewtonFailure(start))
}

fn split_points(lo: f64, hi: f64, frac: f64) -> f64 {
    lo + frac * (hi - lo)
}

fn find_in(f: EvalFn, rect: Rect, out: &mut Vec<Complex64>) -> Result<(), SpectrumError> {
    let w = winding(f, &rect)?;
    if w == 0 {
        return Ok(());
    }
    if w == 1 && rect.max_dim() <= NEWTON_CELL {
        match newton(f, rect.center(), &rect) {
            Ok(z) => {
                out.push(z);
                return Ok(());
            }
            Err(SpectrumError::NewtonFailure(_)) if rect.max_dim() > MIN_CELL => {
                // keep subdividing; a shrinking cell pins the zero down
            }
            Err(e) => return Err(e),
        }
    }
    if rect.max_dim() <= MIN_CELL {
        if w >= 2 {
            return Err(SpectrumError::MultiplicityError {
                center: rect.center(),
                size: rect.max_dim(),
                count: w,
            });
        }
        // w == 1 in a minimal cell with Newton stuck: accept the center
        // only if the residual qualifies, otherwise report the failure
        let c = rect.center();
        let fc = f(c)?;
        if fc.norm() <= ZERO_RESIDUAL {
            out.push(c);
            return Ok(());
        }
        return Err(SpectrumError::NewtonFailure(c));
    }
    // quadrisect; nudge the split point if a zero lands on a child contour
    let mut last_err = None;
    for &frac in &[0.5, 0.543, 0.461, 0.52] {
        let rm = split_points(rect.re.0, rect.re.1, frac);
        let im = split_points(rect.im.0, rect.im.1, frac);
        let children = [
            Rect::new(rect.re.0, rm, rect.im.0, im),
            Rect::new(rm, rect.re.1, rect.im.0, im),
            Rect::new(rect.re.0, rm, im, rect.im.1),
            Rect::new(rm, rect.re.1, im, rect.im.1),
        ];
        let mut found = Vec::new();
        let mut failed = None;
        for child in &children {
            match find_in(f, *child, &mut found) {
                Ok(()) => {}
                Err(e @ SpectrumError::BoundaryZero(_)) => {
                    failed = Some(e);
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        match failed {
            None => {
                out.extend(found);
                return Ok(());
            }
            Some(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap())
}

/// All zeros of `f` inside `region`, each refined to residual <= 1e-10.
/// `tol` is the caller's promise of boundary clearance; it also guards
/// the deduplication radius.
pub fn locate_zeros(
    f: EvalFn,
    region: Rect,
    tol: f64,
) -> Result<Vec<Complex64>, SpectrumError> {
    let mut zeros = Vec::new();
    find_in(f, region, &mut zeros)?;
    // dedup: distinct cells may refine to the same zero near a shared edge
    let radius = tol.max(1e-8);
    let mut unique: Vec<Complex64> = Vec::new();
    for z in zeros {
        if !unique.iter().any(|u| (u - z).norm() < radius) {
            unique.push(z);
        }
    }
    unique.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
    Ok(unique)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscreteSpectrum {
    /// zeros of a1, mirror-completed (omega and -conj(omega)), Re ascending
    #[serde(with = "complex_vec")]
    pub omegas: Vec<Complex64>,
    /// zeros of a2, mirror-completed, Re ascending
    #[serde(with = "complex_vec")]
    pub gammas: Vec<Complex64>,
    /// norming constants c_n aligned with omegas
    #[serde(with = "complex_vec")]
    pub c: Vec<Complex64>,
    /// norming constants d_m aligned with gammas
    #[serde(with = "complex_vec")]
    pub d: Vec<Complex64>,
    pub sigma: f64,
}

mod complex_vec {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = v.iter().map(|z| [z.re, z.im]).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let pairs: Vec<[f64; 2]> = Vec::deserialize(d)?;
        Ok(pairs.iter().map(|p| Complex64::new(p[0], p[1])).collect())
    }
}

fn mirror_complete(zs: &[Complex64]) -> Vec<Complex64> {
    let mut all: Vec<Complex64> = Vec::new();
    for &z in zs {
        for cand in [z, -z.conj()] {
            if !all.iter().any(|u| (u - cand).norm() < 1e-8) {
                all.push(cand);
            }
        }
    }
    all.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
    all
}

impl DiscreteSpectrum {
    pub fn empty(sigma: f64) -> Self {
        DiscreteSpectrum {
            omegas: Vec::new(),
            gammas: Vec::new(),
            c: Vec::new(),
            d: Vec::new(),
            sigma,
        }
    }
}

/// Zeros of a1 in the first quadrant [0.01, kmax]^2; mirrors are implied
/// by symmetry and appended by the callers that need them.
pub fn a1_quadrant_zeros(q0: &Potential, kmax: f64) -> Result<Vec<Complex64>, SpectrumError> {
    let f = move |k| a1_at(q0, k);
    locate_zeros(&f, Rect::new(0.01, kmax, 0.01, kmax), 1e-8)
}

/// Zeros of a2 in the fourth quadrant [0.01, kmax] x [-kmax, -0.01].
pub fn a2_quadrant_zeros(q0: &Potential, kmax: f64) -> Result<Vec<Complex64>, SpectrumError> {
    let f = move |k| a2_at(q0, k);
    locate_zeros(&f, Rect::new(0.01, kmax, -kmax, -0.01), 1e-8)
}

/// Norming constants c_n = b(omega_n)/a1'(omega_n) and
/// d_m = -sigma conj(b(-conj gamma_m))/a2'(gamma_m) at the given zeros.
/// Inputs may omit mirrors; the output is mirror-complete.
pub fn norming_constants(
    q0: &Potential,
    omega_zeros: &[Complex64],
    gamma_zeros: &[Complex64],
) -> Result<DiscreteSpectrum, SpectrumError> {
    let omegas = mirror_complete(omega_zeros);
    let gammas = mirror_complete(gamma_zeros);
    let mut c = Vec::with_capacity(omegas.len());
    for &w in &omegas {
        if w.im.abs() < MIN_IM {
            return Err(SpectrumError::NearRealZero(w));
        }
        let residual = a1_at(q0, w)?.norm();
        if residual > 1e-9 {
            return Err(SpectrumError::InvalidZero { z: w, residual });
        }
        let da1 = central_derivative(|k| a1_at(q0, k), w)?;
        if da1.norm() < 1e-6 {
            return Err(SpectrumError::NearDegenerateDerivative {
                z: w,
                mag: da1.norm(),
            });
        }
        c.push(b_at(q0, w)? / da1);
    }
    let mut d = Vec::with_capacity(gammas.len());
    for &g in &gammas {
        if g.im.abs() < MIN_IM {
            return Err(SpectrumError::NearRealZero(g));
        }
        let residual = a2_at(q0, g)?.norm();
        if residual > 1e-9 {
            return Err(SpectrumError::InvalidZero { z: g, residual });
        }
        let da2 = central_derivative(|k| a2_at(q0, k), g)?;
        if da2.norm() < 1e-6 {
            return Err(SpectrumError::NearDegenerateDerivative {
                z: g,
                mag: da2.norm(),
            });
        }
        d.push(-q0.sigma() * b_at(q0, -g.conj())?.conj() / da2);
    }
    Ok(DiscreteSpectrum {
        omegas,
        gammas,
        c,
        d,
        sigma: q0.sigma(),
    })
}

#[derive(Debug, Clone)]
pub struct Pole {
    pub location: Complex64,
    pub constant: Complex64,
}

#[derive(Debug, Clone)]
pub struct DeltaPartition {
    pub delta1_plus: Vec<Complex64>,
    pub delta1_minus: Vec<Complex64>,
    pub delta2_plus: Vec<Complex64>,
    pub delta2_minus: Vec<Complex64>,
    /// the mirror-closed set Delta (the poles that keep their residue
    /// character after the T-conjugation)
    pub delta: Vec<Complex64>,
    /// Re-ordered first-quadrant omega and fourth-quadrant gamma lists of
    /// the full spectrum, kept for the Blaschke product
    pub omegas_plus: Vec<Complex64>,
    pub gammas_plus: Vec<Complex64>,
    /// the standing inequality |D1+|-|D1-| > |D2+|-|D2-| and |D1-| > |D2-|
    /// is assumed "without loss of generality"; violations are flagged,
    /// not rejected
    pub wlog_inequality_ok: bool,
}

fn resorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
    v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
    v
}

pub fn classify(spec: &DiscreteSpectrum, xi: f64) -> Result<DeltaPartition, SpectrumError> {
    let neg_xi = -xi;
    for &z in spec.omegas.iter().chain(&spec.gammas) {
        if (z.re - neg_xi).abs() < 1e-9 {
            return Err(SpectrumError::OnThreshold { z, neg_xi });
        }
    }
    let part = |zs: &[Complex64], sign: f64| -> Vec<Complex64> {
        resorted(
            zs.iter()
                .copied()
                .filter(|z| z.re > neg_xi && z.re * sign > 0.0)
                .collect(),
        )
    };
    let delta1_plus = part(&spec.omegas, 1.0);
    let delta1_minus = part(&spec.omegas, -1.0);
    let delta2_plus = part(&spec.gammas, 1.0);
    let delta2_minus = part(&spec.gammas, -1.0);

    // Delta keeps the positive-Re Delta1 poles with index
    // |D2-|+1 .. |D1+|-|D2+|+|D2-| (Re ascending), i.e. drops the |D2-|
    // lowest and the |D2+|-|D2-| highest, then closes under mirrors
    let lo = delta2_minus.len();
    let hi = (delta1_plus.len() + delta2_minus.len()).saturating_sub(delta2_plus.len());
    let kept: Vec<Complex64> = if lo < hi && hi <= delta1_plus.len() {
        delta1_plus[lo..hi].to_vec()
    } else {
        Vec::new()
    };
    let delta = mirror_complete(&kept);

    let wlog_inequality_ok = (delta1_plus.len() as i64 - delta1_minus.len() as i64
        > delta2_plus.len() as i64 - delta2_minus.len() as i64)
        && delta1_minus.len() > delta2_minus.len()
        || (delta1_plus.is_empty() && delta2_plus.is_empty());

    let omegas_plus = resorted(spec.omegas.iter().copied().filter(|z| z.re > 0.0).collect());
    let gammas_plus = resorted(spec.gammas.iter().copied().filter(|z| z.re > 0.0).collect());

    Ok(DeltaPartition {
        delta1_plus,
        delta1_minus,
        delta2_plus,
        delta2_minus,
        delta,
        omegas_plus,
        gammas_plus,
        wlog_inequality_ok,
    })
}

/// The partial Blaschke product
///   T(z) = prod_{n=0}^{|D2+|-|D2-|-1} (z - s_{|D1+|-n})/(z - t_{|D2+|-n})
///        * prod_{n=1}^{|D2-|} ((z-omega_n)(z+conj omega_n))
///                            /((z-gamma_n)(z+conj gamma_n))
/// with s_j = omega_j and t_j = gamma_j indexing the Re-ordered
/// delta1_plus/delta2_plus lists and the second product indexing the
/// Re-ordered first-quadrant lists of the full spectrum. The index
/// convention is a deliberate configuration constant; see classify.
pub fn blaschke_t(z: Complex64, part: &DeltaPartition) -> Result<Complex64, SpectrumError> {
    let mut t = Complex64::new(1.0, 0.0);
    let excess = part.delta2_plus.len() as i64 - part.delta2_minus.len() as i64;
    for n in 0..excess.max(0) as usize {
        let s_idx = part.delta1_plus.len() - 1 - n;
        let t_idx = part.delta2_plus.len() - 1 - n;
        let s = part.delta1_plus[s_idx];
        let tt = part.delta2_plus[t_idx];
        if (z - tt).norm() < 1e-12 {
            return Err(SpectrumError::PoleHit(z));
        }
        t *= (z - s) / (z - tt);
    }
    for n in 0..part.delta2_minus.len() {
        let w = part.omegas_plus[n];
        let g = part.gammas_plus[n];
        if (z - g).norm() < 1e-12 || (z + g.conj()).norm() < 1e-12 {
            return Err(SpectrumError::PoleHit(z));
        }
        t *= (z - w) * (z + w.conj()) / ((z - g) * (z + g.conj()));
    }
    Ok(t)
}
