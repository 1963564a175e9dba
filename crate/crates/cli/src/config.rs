//! Run configuration: one JSON document per invocation, with a section per
//! subcommand. Unknown keys are rejected so typos surface as exit code 2
//! with the offending key named.

use std::collections::BTreeMap;
use std::path::Path;

use nnls_core::{DiscreteSpectrum, Potential};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Inline potential spec (same schema as the scattering ingestion),
    /// or a string path to a .json spec / .csv sample file.
    #[serde(default)]
    pub potential: Option<serde_json::Value>,
    /// Inline discrete spectrum for soliton synthesis / asymptotics.
    #[serde(default)]
    pub spectrum: Option<DiscreteSpectrum>,
    #[serde(default)]
    pub scatter: Option<ScatterConfig>,
    #[serde(default)]
    pub spectrum_search: Option<SpectrumSearchConfig>,
    #[serde(default)]
    pub soliton: Option<SolitonConfig>,
    #[serde(default)]
    pub evolve: Option<EvolveConfig>,
    #[serde(default)]
    pub asymptote: Option<AsymptoteConfig>,
    #[serde(default)]
    pub compare: Option<CompareConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatterConfig {
    pub kmin: f64,
    pub kmax: f64,
    pub count: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSearchConfig {
    /// zeros are searched in [0.01, kmax]^2 and its mirror quadrant
    pub kmax: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolitonConfig {
    pub xmin: f64,
    pub xmax: f64,
    pub nx: usize,
    pub ts: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    /// periodic half-width: the grid covers [-l, l)
    pub l: f64,
    /// grid size, power of two
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    /// a snapshot is written every `snapshot_stride` steps
    pub snapshot_stride: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymptoteConfig {
    /// rays xi = x/(4t)
    pub rays: Vec<f64>,
    pub ts: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    /// "dispersive": PDE vs full asymptotic formula along rays, with a
    /// log-log decay fit. "soliton": PDE vs reflectionless q_sol only.
    pub mode: CompareMode,
    pub pde: PdeConfig,
    pub t_window: TimeWindow,
    #[serde(default)]
    pub rays: Vec<f64>,
    /// max |x| over which the soliton-mode field comparison runs
    #[serde(default)]
    pub xmax: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompareMode {
    Dispersive,
    Soliton,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdeConfig {
    pub l: f64,
    pub n: usize,
    pub dt: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeWindow {
    pub t_min: f64,
    pub t_max: f64,
    /// number of sample times, spaced evenly in t
    pub samples: usize,
}

impl TimeWindow {
    pub fn sample_times(&self) -> Result<Vec<f64>, CliError> {
        if !(self.t_min < self.t_max) || self.samples < 2 {
            return Err(CliError::Config(format!(
                "empty t-window: need t_min < t_max and samples >= 2, got \
                 t_min={}, t_max={}, samples={}",
                self.t_min, self.t_max, self.samples
            )));
        }
        let step = (self.t_max - self.t_min) / (self.samples - 1) as f64;
        Ok((0..self.samples)
            .map(|j| self.t_min + step * j as f64)
            .collect())
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<(Self, serde_json::Value), CliError> {
        let doc = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let echo: serde_json::Value = serde_json::from_str(&doc)
            .map_err(|e| CliError::Config(format!("config is not valid JSON: {e}")))?;
        let cfg: RunConfig = serde_json::from_str(&doc)
            .map_err(|e| CliError::Config(format!("invalid config: {e}")))?;
        Ok((cfg, echo))
    }

    /// Resolve the potential section: an inline spec object, or a string
    /// path to a .json spec or .csv sample file (relative to the config).
    pub fn potential(&self, config_dir: &Path) -> Result<Potential, CliError> {
        let val = self
            .potential
            .as_ref()
            .ok_or_else(|| CliError::Config("missing required key `potential`".into()))?;
        match val {
            serde_json::Value::String(rel) => {
                let path = config_dir.join(rel);
                let doc = std::fs::read_to_string(&path).map_err(|e| {
                    CliError::Config(format!("cannot read potential {}: {e}", path.display()))
                })?;
                let is_csv = path
                    .extension()
                    .map(|e| e.eq_ignore_ascii_case("csv"))
                    .unwrap_or(false);
                if is_csv {
                    // CSV carries only samples; sigma defaults to +1 (use the
                    // inline object form to choose the sign).
                    Potential::from_csv(&doc, 1.0, nnls_core::DecayClass::Generic)
                        .map_err(|e| CliError::Config(format!("invalid potential CSV: {e}")))
                } else {
                    Potential::from_json(&doc)
                        .map_err(|e| CliError::Config(format!("invalid potential spec: {e}")))
                }
            }
            serde_json::Value::Object(_) => Potential::from_json(&val.to_string())
                .map_err(|e| CliError::Config(format!("invalid potential spec: {e}"))),
            _ => Err(CliError::Config(
                "`potential` must be an object or a file path string".into(),
            )),
        }
    }
}

/// Named numeric tolerances, overridable from the command line.
#[derive(Debug, Clone)]
pub struct Tolerances(pub BTreeMap<String, f64>);

impl Tolerances {
    pub fn defaults() -> Self {
        let mut m = BTreeMap::new();
        m.insert("det_s".into(), 1e-8);
        m.insert("btilde_symmetry".into(), 1e-8);
        m.insert("a1_symmetry".into(), 1e-8);
        m.insert("a2_symmetry".into(), 1e-8);
        m.insert("jump_identity".into(), 1e-8);
        m.insert("quasi_power_drift".into(), 1e-6);
        m.insert("soliton_agreement".into(), 1e-3);
        m.insert("decay_fit".into(), 0.05);
        Tolerances(m)
    }

    pub fn apply_overrides(&mut self, overrides: &[String]) -> Result<(), CliError> {
        for ov in overrides {
            let (name, value) = ov
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("tol-override `{ov}` is not name=value")))?;
            if !self.0.contains_key(name) {
                let known: Vec<&str> = self.0.keys().map(|s| s.as_str()).collect();
                return Err(CliError::Config(format!(
                    "unknown tolerance `{name}` (known: {})",
                    known.join(", ")
                )));
            }
            let v: f64 = value
                .parse()
                .map_err(|e| CliError::Config(format!("tolerance `{name}`: {e}")))?;
            if !(v > 0.0) {
                return Err(CliError::Config(format!(
                    "tolerance `{name}` must be positive, got {value}"
                )));
            }
            self.0.insert(name.to_string(), v);
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> f64 {
        self.0[name]
    }
}
