//! Run configuration: JSON layout, defaults, validation and hashing.

use std::path::{Path, PathBuf};

use dtc::dynamics::{IntegratorOptions, TimeGrid, TrajectoryOptions};
use dtc::liouville::{CommensurabilityParams, SpectrumTolerances};
use dtc::model::{DephasingOperator, PresetOptions, ScenarioSpec, ScenarioTag, DEFAULT_DEPHASING, DEFAULT_FIELD, DEFAULT_FIELD_WIDTH};
use dtc::symmetry::{DarkStateTolerances, SYMMETRY_TOL};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Largest chain for `spectrum` (dense `4^L·4^L` superoperator).
pub const SPECTRUM_MAX_SITES: usize = 3;
/// Largest chain for `evolve`, `trajectories` and `darkstates`.
pub const DYNAMICS_MAX_SITES: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Seeds {
    pub disorder: u64,
    pub initial_state: u64,
    pub trajectories: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Self {
            disorder: 1,
            initial_state: 42,
            trajectories: 7,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    /// Uniform Zeeman field, or the center of the inhomogeneous window.
    pub field: f64,
    /// Half-width of the inhomogeneous field window.
    pub field_width: f64,
    pub loss_rate: f64,
    pub gain_rate: f64,
    /// Site-1 dephasing strength (thermo_breaker only).
    pub dephasing: f64,
    pub dephasing_operator: DephasingOperator,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            field: DEFAULT_FIELD,
            field_width: DEFAULT_FIELD_WIDTH,
            loss_rate: 1.0,
            gain_rate: 1.0,
            dephasing: DEFAULT_DEPHASING,
            dephasing_operator: DephasingOperator::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DftConfig {
    /// Samples before this time are dropped as transient.
    pub t_start: Option<f64>,
    /// Peaks below this fraction of the largest magnitude are ignored.
    #[serde(default = "default_peak_threshold")]
    pub peak_threshold: f64,
}

fn default_peak_threshold() -> f64 {
    0.1
}

impl Default for DftConfig {
    fn default() -> Self {
        Self {
            t_start: None,
            peak_threshold: default_peak_threshold(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrajectoryConfig {
    pub count: usize,
    /// Per-trajectory series written to `trajectories.csv`.
    pub write_series: usize,
    pub max_substep: f64,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        Self {
            count: 3,
            write_series: 16,
            max_substep: TrajectoryOptions::default().max_substep,
        }
    }
}

/// Contents of the `--config` file. Only `scenario_tag` and `sites` are required.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario_tag: ScenarioTag,
    #[serde(alias = "L")]
    pub sites: usize,
    #[serde(default)]
    pub seeds: Seeds,
    #[serde(default)]
    pub model: ModelConfig,
    /// Defaults to `[0, 100]` with 4096 samples, or `[0, 1000]` with 16384 for `inhom_field`.
    #[serde(default)]
    pub grid: Option<TimeGrid>,
    /// 1-based site of the transverse-spin probe; defaults to `min(2, sites)`.
    #[serde(default)]
    pub probe_site: Option<usize>,
    #[serde(default)]
    pub dft: DftConfig,
    #[serde(default)]
    pub commensurability: CommensurabilityParams,
    #[serde(default)]
    pub spectrum: SpectrumTolerances,
    #[serde(default)]
    pub integrator: IntegratorOptions,
    #[serde(default)]
    pub trajectories: TrajectoryConfig,
    #[serde(default)]
    pub dark_states: DarkStateTolerances,
    #[serde(default = "default_symmetry_tol")]
    pub symmetry_tol: f64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_symmetry_tol() -> f64 {
    SYMMETRY_TOL
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    /// Fills every optional field so the resolved config fully describes the run.
    pub fn resolve(mut self) -> Result<Self, CliError> {
        let grid = *self.grid.get_or_insert(match self.scenario_tag {
            ScenarioTag::InhomField => TimeGrid {
                t0: 0.0,
                t1: 1000.0,
                n_samples: 16384,
            },
            _ => TimeGrid {
                t0: 0.0,
                t1: 100.0,
                n_samples: 4096,
            },
        });
        let sites = self.sites;
        self.probe_site.get_or_insert(sites.min(2));
        self.dft.t_start.get_or_insert_with(|| {
            let mid = grid.t0 + 0.5 * (grid.t1 - grid.t0);
            match self.scenario_tag {
                ScenarioTag::InhomField => mid.max(grid.t1 - 50.0),
                _ => mid,
            }
        });
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.sites == 0 {
            return bad("sites must be at least 1".into());
        }
        if let Some(k) = self.probe_site {
            if k == 0 || k > self.sites {
                return bad(format!("probe_site {k} outside 1..={}", self.sites));
            }
        }
        if let Some(g) = &self.grid {
            g.validate().map_err(|e| CliError::Config(e.to_string()))?;
        }
        if !(self.dft.peak_threshold > 0.0 && self.dft.peak_threshold < 1.0) {
            return bad(format!("dft.peak_threshold must lie in (0, 1), got {}", self.dft.peak_threshold));
        }
        if self.dft.t_start.is_some_and(|t| !t.is_finite()) {
            return bad("dft.t_start must be finite".into());
        }
        if self.trajectories.count == 0 {
            return bad("trajectories.count must be positive".into());
        }
        if !(self.trajectories.max_substep > 0.0) {
            return bad("trajectories.max_substep must be positive".into());
        }
        if !(self.symmetry_tol > 0.0) {
            return bad("symmetry_tol must be positive".into());
        }
        if !(self.spectrum.tol_re > 0.0 && self.spectrum.tol_zero > 0.0) {
            return bad("spectrum tolerances must be positive".into());
        }
        let c = &self.commensurability;
        if !(c.max_den >= 1 && c.rel_tol > 0.0 && c.t_exp > 0.0) {
            return bad(format!("invalid commensurability parameters {c:?}"));
        }
        if !(self.dark_states.kernel > 0.0 && self.dark_states.invariance > 0.0) {
            return bad("dark_states tolerances must be positive".into());
        }
        self.integrator.validate().map_err(|e| CliError::Config(e.to_string()))?;
        self.scenario().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(())
    }

    pub fn with_seed_override(mut self, seed: Option<u64>) -> Self {
        if let Some(s) = seed {
            self.seeds = Seeds {
                disorder: s,
                initial_state: s,
                trajectories: s,
            };
        }
        self
    }

    pub fn scenario(&self) -> Result<ScenarioSpec, CliError> {
        let opts = PresetOptions {
            field: self.model.field,
            field_width: self.model.field_width,
            loss_rate: self.model.loss_rate,
            gain_rate: self.model.gain_rate,
            dephasing: self.model.dephasing,
            dephasing_operator: self.model.dephasing_operator,
        };
        Ok(ScenarioSpec::preset(self.scenario_tag, self.sites, self.seeds.disorder, &opts)?)
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid.expect("resolved config")
    }

    pub fn probe_site(&self) -> usize {
        self.probe_site.expect("resolved config")
    }

    pub fn t_start(&self) -> f64 {
        self.dft.t_start.expect("resolved config")
    }

    pub fn trajectory_options(&self) -> TrajectoryOptions {
        TrajectoryOptions {
            max_substep: self.trajectories.max_substep,
        }
    }

    pub fn require_sites(&self, cap: usize, command: &str) -> Result<(), CliError> {
        if self.sites > cap {
            return Err(CliError::Config(format!(
                "{command} supports at most {cap} sites, config has {}",
                self.sites
            )));
        }
        Ok(())
    }

    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON of the resolved config.
    pub fn hash(&self) -> String {
        format!("{:x}", Sha256::digest(self.to_canonical_json().as_bytes()))
    }
}
