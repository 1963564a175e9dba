//! Sampled initial data for the nonlocal NLS flow.
//!
//! The grid is uniform and symmetric about x = 0 with an odd number of
//! nodes, so the reflection x -> -x is an exact index permutation
//! (j -> n-1-j). Everything downstream that couples q(x) to q(-x)
//! relies on that.

use num_complex::Complex64;
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PotentialError {
    #[error("invalid potential config: {0}")]
    Invalid(String),
    #[error("malformed potential JSON: key '{key}': {msg}")]
    Json { key: String, msg: String },
    #[error("malformed samples CSV at line {line}: {msg}")]
    Csv { line: usize, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayClass {
    CompactSupport,
    Exponential { rate: f64 },
    Generic,
}

/// Closed-form families the toolkit knows how to resample exactly.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind {
    /// amplitude * exp(-(x/width)^2)
    Gaussian { amplitude: Complex64, width: f64 },
    /// amplitude on [x0, x1], zero elsewhere
    Box {
        amplitude: Complex64,
        x0: f64,
        x1: f64,
    },
    /// amplitude * sech(x/width)
    Sech { amplitude: Complex64, width: f64 },
    Samples,
}

#[derive(Debug, Clone)]
pub struct Potential {
    xs: Vec<f64>,
    values: Vec<Complex64>,
    sigma: f64,
    decay_class: DecayClass,
    kind: PotentialKind,
}

impl Potential {
    pub fn from_kind(
        kind: PotentialKind,
        sigma: f64,
        half_width: f64,
        n: usize,
    ) -> Result<Self, PotentialError> {
        if sigma != 1.0 && sigma != -1.0 {
            return Err(PotentialError::Invalid(format!("sigma must be +-1, got {sigma}")));
        }
        if half_width <= 0.0 {
            return Err(PotentialError::Invalid(format!("L must be positive, got {half_width}")));
        }
        if n < 3 || n % 2 == 0 {
            return Err(PotentialError::Invalid(format!(
                "grid count must be odd and >= 3, got {n}"
            )));
        }
        let h = 2.0 * half_width / (n - 1) as f64;
        let xs: Vec<f64> = (0..n).map(|j| -half_width + h * j as f64).collect();
        let values: Vec<Complex64> = xs.iter().map(|&x| eval_kind(&kind, x, h)).collect();
        let decay_class = match kind {
            PotentialKind::Box { .. } => DecayClass::CompactSupport,
            PotentialKind::Gaussian { .. } => DecayClass::CompactSupport,
            PotentialKind::Sech { width, .. } => DecayClass::Exponential { rate: 1.0 / width },
            PotentialKind::Samples => DecayClass::Generic,
        };
        Ok(Potential {
            xs,
            values,
            sigma,
            decay_class,
            kind,
        })
    }

    pub fn from_samples(
        xs: Vec<f64>,
        values: Vec<Complex64>,
        sigma: f64,
        decay_class: DecayClass,
    ) -> Result<Self, PotentialError> {
        if xs.len() != values.len() {
            return Err(PotentialError::Invalid("xs/values length mismatch".into()));
        }
        let n = xs.len();
        if n < 3 || n % 2 == 0 {
            return Err(PotentialError::Invalid(format!(
                "grid count must be odd and >= 3, got {n}"
            )));
        }
        if sigma != 1.0 && sigma != -1.0 {
            return Err(PotentialError::Invalid(format!("sigma must be +-1, got {sigma}")));
        }
        let h = xs[1] - xs[0];
        for j in 1..n {
            if ((xs[j] - xs[j - 1]) - h).abs() > 1e-9 * h.abs().max(1.0) {
                return Err(PotentialError::Invalid("grid must be uniform".into()));
            }
        }
        for j in 0..n {
            if (xs[j] + xs[n - 1 - j]).abs() > 1e-9 {
                return Err(PotentialError::Invalid(
                    "grid must be symmetric about 0".into(),
                ));
            }
        }
        Ok(Potential {
            xs,
            values,
            sigma,
            decay_class,
            kind: PotentialKind::Samples,
        })
    }

    pub fn zero(sigma: f64, half_width: f64, n: usize) -> Self {
        Potential::from_kind(
            PotentialKind::Box {
                amplitude: Complex64::new(0.0, 0.0),
                x0: 0.0,
                x1: 0.0,
            },
            sigma,
            half_width,
            n,
        )
        .expect("zero potential construction")
    }

    pub fn gaussian(amplitude: f64, sigma: f64, half_width: f64, n: usize) -> Self {
        Potential::from_kind(
            PotentialKind::Gaussian {
                amplitude: Complex64::new(amplitude, 0.0),
                width: 1.0,
            },
            sigma,
            half_width,
            n,
        )
        .expect("gaussian potential construction")
    }

    pub fn box_potential(amplitude: f64, x0: f64, x1: f64, sigma: f64, half_width: f64, n: usize) -> Self {
        Potential::from_kind(
            PotentialKind::Box {
                amplitude: Complex64::new(amplitude, 0.0),
                x0,
                x1,
            },
            sigma,
            half_width,
            n,
        )
        .expect("box potential construction")
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.xs[1] - self.xs[0]
    }

    pub fn half_width(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn decay_class(&self) -> DecayClass {
        self.decay_class
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    /// Override the declared decay class (used when a synthesized field is
    /// truncated far enough out to treat it as compactly supported).
    pub fn with_decay_class(mut self, decay_class: DecayClass) -> Self {
        self.decay_class = decay_class;
        self
    }

    /// q(-x_j) by exact index reflection.
    pub fn reflected(&self, j: usize) -> Complex64 {
        self.values[self.len() - 1 - j]
    }

    /// Evaluate at arbitrary x: closed forms exactly, samples by local
    /// cubic interpolation (zero outside the grid).
    pub fn eval(&self, x: f64) -> Complex64 {
        match &self.kind {
            PotentialKind::Samples => {
                crate::numeric::cubic_interp(&self.xs, &self.values, x).unwrap_or_default()
            }
            kind => eval_kind(kind, x, self.spacing()),
        }
    }

    /// Diagnostic weighted norms of the sampled data (trapezoid).
    pub fn weighted_norms(&self) -> WeightedNorms {
        let h = self.spacing();
        let mut l1 = 0.0;
        let mut l11 = 0.0;
        let mut l2sq = 0.0;
        let mut l2half_sq = 0.0;
        for (j, q) in self.values.iter().enumerate() {
            let w = if j == 0 || j == self.len() - 1 { 0.5 } else { 1.0 };
            let x = self.xs[j];
            let a = q.norm();
            l1 += w * a;
            l11 += w * (1.0 + x.abs()) * a;
            l2sq += w * a * a;
            l2half_sq += w * x.abs() * a * a;
        }
        WeightedNorms {
            l1: l1 * h,
            l1_weighted: l11 * h,
            l2: (l2sq * h).sqrt(),
            l2_half_weighted: (l2half_sq * h).sqrt(),
        }
    }

    /// Parse the JSON ingestion document.
    pub fn from_json(doc: &str) -> Result<Self, PotentialError> {
        let spec: PotentialSpec = serde_json::from_str(doc).map_err(|e| PotentialError::Json {
            key: "<document>".into(),
            msg: e.to_string(),
        })?;
        spec.build()
    }

    /// Parse raw samples from CSV rows of (x, Re q, Im q).
    pub fn from_csv(
        doc: &str,
        sigma: f64,
        decay_class: DecayClass,
    ) -> Result<Self, PotentialError> {
        let mut xs = Vec::new();
        let mut values = Vec::new();
        for (i, line) in doc.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with('x') {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 3 {
                return Err(PotentialError::Csv {
                    line: i + 1,
                    msg: format!("expected 3 columns, got {}", cols.len()),
                });
            }
            let parse = |s: &str| -> Result<f64, PotentialError> {
                s.parse().map_err(|_| PotentialError::Csv {
                    line: i + 1,
                    msg: format!("not a number: '{s}'"),
                })
            };
            xs.push(parse(cols[0])?);
            values.push(Complex64::new(parse(cols[1])?, parse(cols[2])?));
        }
        Potential::from_samples(xs, values, sigma, decay_class)
    }
}

fn eval_kind(kind: &PotentialKind, x: f64, h: f64) -> Complex64 {
    match kind {
        PotentialKind::Gaussian { amplitude, width } => {
            let u = x / width;
            amplitude * (-u * u).exp()
        }
        PotentialKind::Box { amplitude, x0, x1 } => {
            // half-value at jump nodes keeps composite trapezoid 2nd order
            let tol = 1e-12 * h.max(1.0);
            if (x - x0).abs() < tol || (x - x1).abs() < tol {
                0.5 * amplitude
            } else if x > *x0 && x < *x1 {
                *amplitude
            } else {
                Complex64::new(0.0, 0.0)
            }
        }
        PotentialKind::Sech { amplitude, width } => amplitude / (x / width).cosh(),
        PotentialKind::Samples => unreachable!("samples have no closed form"),
    }
}

#[derive(Debug, Clone)]
pub struct WeightedNorms {
    pub l1: f64,
    pub l1_weighted: f64,
    pub l2: f64,
    pub l2_half_weighted: f64,
}

/// The JSON ingestion schema:
/// {"kind": "gaussian"|"box"|"sech"|"samples", parameters, "sigma": +-1, "L": float, "n": int}
#[derive(Debug, Deserialize)]
struct PotentialSpec {
    kind: String,
    #[serde(default)]
    amplitude: Option<f64>,
    #[serde(default)]
    amplitude_im: Option<f64>,
    #[serde(default)]
    width: Option<f64>,
    #[serde(default)]
    x0: Option<f64>,
    #[serde(default)]
    x1: Option<f64>,
    #[serde(default)]
    samples: Option<Vec<[f64; 3]>>,
    sigma: f64,
    #[serde(rename = "L")]
    l: Option<f64>,
    n: Option<usize>,
}

impl PotentialSpec {
    fn build(self) -> Result<Potential, PotentialError> {
        let missing = |key: &str| PotentialError::Json {
            key: key.into(),
            msg: "missing".into(),
        };
        let amp = || -> Result<Complex64, PotentialError> {
            Ok(Complex64::new(
                self.amplitude.ok_or_else(|| missing("amplitude"))?,
                self.amplitude_im.unwrap_or(0.0),
            ))
        };
        match self.kind.as_str() {
            "gaussian" => Potential::from_kind(
                PotentialKind::Gaussian {
                    amplitude: amp()?,
                    width: self.width.unwrap_or(1.0),
                },
                self.sigma,
                self.l.ok_or_else(|| missing("L"))?,
                self.n.ok_or_else(|| missing("n"))?,
            ),
            "box" => Potential::from_kind(
                PotentialKind::Box {
                    amplitude: amp()?,
                    x0: self.x0.ok_or_else(|| missing("x0"))?,
                    x1: self.x1.ok_or_else(|| missing("x1"))?,
                },
                self.sigma,
                self.l.ok_or_else(|| missing("L"))?,
                self.n.ok_or_else(|| missing("n"))?,
            ),
            "sech" => Potential::from_kind(
                PotentialKind::Sech {
                    amplitude: amp()?,
                    width: self.width.unwrap_or(1.0),
                },
                self.sigma,
                self.l.ok_or_else(|| missing("L"))?,
                self.n.ok_or_else(|| missing("n"))?,
            ),
            "samples" => {
                let rows = self.samples.ok_or_else(|| missing("samples"))?;
                let xs = rows.iter().map(|r| r[0]).collect();
                let values = rows.iter().map(|r| Complex64::new(r[1], r[2])).collect();
                Potential::from_samples(xs, values, self.sigma, DecayClass::Generic)
            }
            other => Err(PotentialError::Json {
                key: "kind".into(),
                msg: format!("unknown kind '{other}'"),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_symmetry_and_reflection() {
        let p = Potential::gaussian(0.2, 1.0, 5.0, 101);
        let n = p.len();
        assert_eq!(n % 2, 1);
        for j in 0..n {
            assert!((p.xs()[j] + p.xs()[n - 1 - j]).abs() < 1e-12);
        }
        assert!((p.xs()[n / 2]).abs() < 1e-12);
        // reflection of an even function is itself
        for j in 0..n {
            assert!((p.reflected(j) - p.values()[j]).norm() < 1e-15);
        }
    }

    #[test]
    fn json_ingestion() {
        let p = Potential::from_json(
            r#"{"kind": "gaussian", "amplitude": 0.2, "sigma": 1, "L": 8.0, "n": 201}"#,
        )
        .unwrap();
        assert_eq!(p.len(), 201);
        assert!((p.values()[100] - 0.2).norm() < 1e-15);

        let err = Potential::from_json(r#"{"kind": "box", "sigma": 1, "L": 2.0, "n": 11}"#);
        let msg = format!("{}", err.unwrap_err());
        assert!(msg.contains("amplitude"), "{msg}");

        let err = Potential::from_json(r#"{"kind": "nope", "sigma": 1}"#);
        assert!(format!("{}", err.unwrap_err()).contains("kind"));
    }

    #[test]
    fn csv_ingestion() {
        let doc = "-1.0, 0.1, 0.0\n0.0, 0.3, -0.1\n1.0, 0.1, 0.0\n";
        let p = Potential::from_csv(doc, 1.0, DecayClass::Generic).unwrap();
        assert_eq!(p.len(), 3);
        assert!((p.values()[1] - Complex64::new(0.3, -0.1)).norm() < 1e-15);

        let bad = "-1.0, 0.1\n";
        assert!(Potential::from_csv(bad, 1.0, DecayClass::Generic).is_err());
    }

    #[test]
    fn rejects_even_grid_and_bad_sigma() {
        assert!(Potential::from_kind(
            PotentialKind::Gaussian { amplitude: Complex64::new(0.1, 0.0), width: 1.0 },
            1.0,
            5.0,
            100
        )
        .is_err());
        assert!(Potential::from_kind(
            PotentialKind::Gaussian { amplitude: Complex64::new(0.1, 0.0), width: 1.0 },
            0.5,
            5.0,
            101
        )
        .is_err());
    }

    #[test]
    fn box_half_values_at_jumps() {
        let p = Potential::box_potential(0.3, -1.0, 0.0, 1.0, 2.0, 41);
        let h = p.spacing();
        let j0 = ((-1.0 - (-2.0)) / h).round() as usize;
        let j1 = ((0.0 - (-2.0)) / h).round() as usize;
        assert!((p.values()[j0] - 0.15).norm() < 1e-14);
        assert!((p.values()[j1] - 0.15).norm() < 1e-14);
        assert!((p.values()[(j0 + j1) / 2] - 0.3).norm() < 1e-14);
    }

    #[test]
    fn weighted_norms_gaussian() {
        let p = Potential::gaussian(0.2, 1.0, 10.0, 2001);
        let norms = p.weighted_norms();
        // 0.2 * sqrt(pi)
        assert!((norms.l1 - 0.2 * std::f64::consts::PI.sqrt()).abs() < 1e-8);
        // L2^2 = 0.04 * sqrt(pi/2)
        let l2 = (0.04 * (std::f64::consts::PI / 2.0).sqrt()).sqrt();
        assert!((norms.l2 - l2).abs() < 1e-8);
    }
}
