use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use adaptvqe::adapt::Criterion;
use serde::{Deserialize, Serialize};

use crate::RunError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Adapt,
    Adaptn,
    Landscape,
    Variance,
    Reorder,
    Fci,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Adapt => "adapt",
            Mode::Adaptn => "adaptn",
            Mode::Landscape => "landscape",
            Mode::Variance => "variance",
            Mode::Reorder => "reorder",
            Mode::Fci => "fci",
        }
    }
}

/// One experiment, read from a flat TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Fixture name, e.g. `h4_1a`.
    pub system: String,
    #[serde(default)]
    pub mode: Option<Mode>,
    #[serde(default = "default_fixtures_dir")]
    pub fixtures_dir: PathBuf,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub seed: u64,

    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_max_ops")]
    pub max_ops: usize,
    #[serde(default = "default_criterion")]
    pub criterion: Criterion,
    /// Collated copies per operator; required for `adaptn`.
    #[serde(default, alias = "N")]
    pub repetition: Option<usize>,
    #[serde(default = "default_true")]
    pub recycle: bool,
    /// Continue from `trace.json` in the output directory when present.
    #[serde(default)]
    pub resume: bool,
    #[serde(default)]
    pub gtol: Option<f64>,
    #[serde(default)]
    pub max_iter: Option<usize>,

    #[serde(default)]
    pub n_random: Option<usize>,
    /// Ansatz lengths to restart; all lengths when absent.
    #[serde(default)]
    pub lengths: Option<Vec<usize>>,
    #[serde(default = "default_trap_tol")]
    pub trap_tol: f64,

    #[serde(default = "default_widths")]
    pub widths: Vec<f64>,
    #[serde(default = "default_samples")]
    pub samples_per_width: usize,

    #[serde(default)]
    pub reorder_seeds: Vec<u64>,

    /// Eigenvalues written by `fci`.
    #[serde(default = "default_spectrum_k")]
    pub spectrum_k: usize,
    /// Eigenvalues searched for states below Hartree-Fock in the trace
    /// overlay.
    #[serde(default = "default_overlay_k")]
    pub overlay_k: usize,
}

fn default_fixtures_dir() -> PathBuf {
    PathBuf::from("fixtures")
}
fn default_output() -> PathBuf {
    PathBuf::from("out")
}
fn default_eps() -> f64 {
    1e-6
}
fn default_max_ops() -> usize {
    200
}
fn default_criterion() -> Criterion {
    Criterion::Max
}
fn default_true() -> bool {
    true
}
fn default_trap_tol() -> f64 {
    adaptvqe::landscape::DEFAULT_TRAP_TOL
}
fn default_widths() -> Vec<f64> {
    vec![PI / 8.0, PI / 4.0, PI / 2.0, PI, 2.0 * PI]
}
fn default_samples() -> usize {
    100
}
fn default_spectrum_k() -> usize {
    1
}
fn default_overlay_k() -> usize {
    20
}

pub const DEFAULT_N_RANDOM: usize = 50;

impl ExperimentConfig {
    pub fn new(system: &str) -> Self {
        toml::from_str(&format!("system = {system:?}")).expect("defaults are complete")
    }

    pub fn from_toml(text: &str) -> Result<Self, RunError> {
        toml::from_str(text).map_err(|e| RunError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn fixture_path(&self) -> PathBuf {
        self.fixtures_dir.join(format!("{}.fcidump", self.system))
    }

    pub fn n_random(&self) -> usize {
        self.n_random.unwrap_or(DEFAULT_N_RANDOM)
    }

    /// Checks the fields a mode needs and returns the repetition factor.
    pub fn validate(&self, mode: Mode) -> Result<usize, RunError> {
        let bad = |msg: String| Err(RunError::Config(msg));
        if let Some(m) = self.mode {
            if m != mode {
                return bad(format!("config mode `{}` conflicts with requested mode `{}`", m.name(), mode.name()));
            }
        }
        if self.eps.is_nan() || self.eps <= 0.0 {
            return bad(format!("eps must be positive, got {}", self.eps));
        }
        let repetition = match (mode, self.repetition) {
            (Mode::Adaptn, None) => return bad("mode `adaptn` requires `repetition`".into()),
            (_, Some(0)) => return bad("repetition must be at least 1".into()),
            (Mode::Reorder, Some(n)) if n != 1 => return bad("mode `reorder` needs repetition 1".into()),
            (_, r) => r.unwrap_or(1),
        };
        match mode {
            Mode::Reorder if self.reorder_seeds.is_empty() => bad("mode `reorder` requires `reorder_seeds`".into()),
            Mode::Variance if self.widths.is_empty() || self.samples_per_width == 0 => {
                bad("mode `variance` requires non-empty `widths` and positive `samples_per_width`".into())
            }
            Mode::Fci if self.spectrum_k == 0 => bad("spectrum_k must be positive".into()),
            _ => Ok(repetition),
        }
    }
}
