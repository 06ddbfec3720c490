//! Experiment configuration: a flat TOML table of optional keys, resolved
//! against defaults and validated before anything is computed.
//!
//! ```toml
//! experiment = "fidelity_sweep"
//! j = 10
//! lambda_list = [0.5, 2.5, 7.0]
//! n_states = 20
//! seed = 1
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use kicktomo_core::kicked_top::{DEFAULT_ALPHA, DEFAULT_DELTA_LAMBDA, DEFAULT_STEPS};
use kicktomo_core::metrics::DEFAULT_ENTROPY_FLOOR;
use kicktomo_core::spin::SpinParams;
use kicktomo_core::tomography::DEFAULT_RCOND;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::RunError;

pub const DEFAULT_J: f64 = 10.0;
pub const DEFAULT_N_STATES: usize = 100;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_OUTPUT_DIR: &str = "runs";
/// Noise standard deviation per unit of `j`.
pub const DEFAULT_SIGMA_PER_J: f64 = 0.01;
pub const DEFAULT_LAMBDAS: [f64; 3] = [0.5, 2.5, 7.0];
pub const DEFAULT_PERTURB_LAMBDAS: [f64; 1] = [7.0];
pub const DEFAULT_DELTA_LAMBDAS: [f64; 3] = [0.005, 0.01, 0.02];
pub const DEFAULT_ETAS: [f64; 3] = [0.0, 0.1, 0.3];
pub const DEFAULT_PROJECTION_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    /// Ensemble-mean reconstruction fidelity against time, one series per `λ`.
    FidelitySweep,
    Loschmidt,
    RelEntropy,
    Otoc,
    /// Noise-free fidelity against the number of ordered components measured
    /// through a basis perturbed by `U_r^η`, one series per `η`.
    BlochPerturb,
    /// Reconstruction fidelity against time, one series per `(λ, δλ)`.
    PerturbSweep,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::FidelitySweep,
        Experiment::Loschmidt,
        Experiment::RelEntropy,
        Experiment::Otoc,
        Experiment::BlochPerturb,
        Experiment::PerturbSweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::FidelitySweep => "fidelity_sweep",
            Experiment::Loschmidt => "loschmidt",
            Experiment::RelEntropy => "rel_entropy",
            Experiment::Otoc => "otoc",
            Experiment::BlochPerturb => "bloch_perturb",
            Experiment::PerturbSweep => "perturb_sweep",
        }
    }

    fn uses_lambdas(self) -> bool {
        self != Experiment::BlochPerturb
    }

    fn uses_ensemble(self) -> bool {
        matches!(
            self,
            Experiment::FidelitySweep | Experiment::PerturbSweep | Experiment::BlochPerturb
        )
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = RunError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
                RunError::config(
                    "experiment",
                    format!(
                        "unknown experiment `{s}` (expected one of {})",
                        names.join(", ")
                    ),
                )
            })
    }
}

/// Config file contents before defaults are applied.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub experiment: Option<String>,
    pub j: Option<f64>,
    pub alpha: Option<f64>,
    pub lambda_list: Option<Vec<f64>>,
    pub delta_lambda: Option<f64>,
    pub delta_lambda_list: Option<Vec<f64>>,
    pub n_steps: Option<i64>,
    pub n_states: Option<i64>,
    pub noise_sigma: Option<f64>,
    pub eta_list: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    /// Draw one initial observable for the whole sweep (default) or one per
    /// ensemble member.
    pub shared_observable: Option<bool>,
    /// Apply `δλ` to the experimenter's model instead of the true dynamics.
    pub perturb_model: Option<bool>,
    pub rcond: Option<f64>,
    pub entropy_floor: Option<f64>,
    pub projection_tol: Option<f64>,
    pub max_iterations: Option<i64>,
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct ConfigOverrides {
    pub experiment: Option<Experiment>,
    pub seed: Option<u64>,
    pub lambda_list: Option<Vec<f64>>,
    pub output_dir: Option<PathBuf>,
}

/// Fully resolved and validated run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub j: f64,
    pub alpha: f64,
    pub lambda_list: Vec<f64>,
    pub delta_lambda: f64,
    pub delta_lambda_list: Vec<f64>,
    pub n_steps: usize,
    pub n_states: usize,
    pub noise_sigma: f64,
    pub eta_list: Vec<f64>,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub shared_observable: bool,
    pub perturb_model: bool,
    pub rcond: f64,
    pub entropy_floor: f64,
    pub projection_tol: f64,
    pub max_iterations: usize,
}

impl RawConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self, RunError> {
        toml::from_str(text).map_err(|e| RunError::ConfigParse {
            path: path.to_path_buf(),
            message: e.message().to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
        Self::from_toml(&text, path)
    }

    /// Applies defaults and overrides, then validates every field.
    pub fn resolve(self, overrides: &ConfigOverrides) -> Result<ExperimentConfig, RunError> {
        let experiment = match (overrides.experiment, &self.experiment) {
            (Some(e), _) => e,
            (None, Some(name)) => name.parse()?,
            (None, None) => {
                return Err(RunError::config(
                    "experiment",
                    "missing; set it in the config or pass --experiment",
                ))
            }
        };
        let j = self.j.unwrap_or(DEFAULT_J);
        let spin = SpinParams::new(j)
            .map_err(|_| RunError::config("j", format!("{j} is not a positive multiple of 1/2")))?;

        let default_lambdas: &[f64] = match experiment {
            Experiment::PerturbSweep => &DEFAULT_PERTURB_LAMBDAS,
            Experiment::BlochPerturb => &[],
            _ => &DEFAULT_LAMBDAS,
        };
        let lambda_list = overrides
            .lambda_list
            .clone()
            .or(self.lambda_list)
            .unwrap_or_else(|| default_lambdas.to_vec());

        let config = ExperimentConfig {
            experiment,
            j,
            alpha: self.alpha.unwrap_or(DEFAULT_ALPHA),
            lambda_list,
            delta_lambda: self.delta_lambda.unwrap_or(DEFAULT_DELTA_LAMBDA),
            delta_lambda_list: self
                .delta_lambda_list
                .unwrap_or_else(|| DEFAULT_DELTA_LAMBDAS.to_vec()),
            n_steps: count("n_steps", self.n_steps, DEFAULT_STEPS)?,
            n_states: count("n_states", self.n_states, DEFAULT_N_STATES)?,
            noise_sigma: self.noise_sigma.unwrap_or(DEFAULT_SIGMA_PER_J * j),
            eta_list: self.eta_list.unwrap_or_else(|| DEFAULT_ETAS.to_vec()),
            seed: overrides.seed.or(self.seed).unwrap_or(DEFAULT_SEED),
            output_dir: overrides
                .output_dir
                .clone()
                .or(self.output_dir)
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
            shared_observable: self.shared_observable.unwrap_or(true),
            perturb_model: self.perturb_model.unwrap_or(false),
            rcond: self.rcond.unwrap_or(DEFAULT_RCOND),
            entropy_floor: self.entropy_floor.unwrap_or(DEFAULT_ENTROPY_FLOOR),
            projection_tol: self.projection_tol.unwrap_or(DEFAULT_PROJECTION_TOL),
            max_iterations: count(
                "max_iterations",
                self.max_iterations,
                DEFAULT_MAX_ITERATIONS,
            )?,
        };
        config.validate(spin)?;
        Ok(config)
    }
}

fn count(field: &str, value: Option<i64>, default: usize) -> Result<usize, RunError> {
    match value {
        None => Ok(default),
        Some(v) if v >= 1 => usize::try_from(v).map_err(|_| RunError::config(field, "too large")),
        Some(v) => Err(RunError::config(
            field,
            format!("must be at least 1, got {v}"),
        )),
    }
}

fn finite(field: &str, v: f64) -> Result<(), RunError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(RunError::config(field, format!("must be finite, got {v}")))
    }
}

/// Output file names are built from list values, so repeats would collide.
fn distinct(field: &str, values: &[f64]) -> Result<(), RunError> {
    for (i, a) in values.iter().enumerate() {
        if values[..i].contains(a) {
            return Err(RunError::config(
                field,
                format!("{a} appears more than once"),
            ));
        }
    }
    Ok(())
}

impl ExperimentConfig {
    /// Parses a config file and resolves it.
    pub fn load(path: &Path, overrides: &ConfigOverrides) -> Result<Self, RunError> {
        RawConfig::load(path)?.resolve(overrides)
    }

    pub fn spin(&self) -> SpinParams {
        SpinParams::new(self.j).expect("validated on construction")
    }

    fn validate(&self, spin: SpinParams) -> Result<(), RunError> {
        finite("alpha", self.alpha)?;
        finite("delta_lambda", self.delta_lambda)?;
        if self.experiment.uses_lambdas() && self.lambda_list.is_empty() {
            return Err(RunError::config("lambda_list", "must not be empty"));
        }
        for &l in &self.lambda_list {
            finite("lambda_list", l)?;
        }
        distinct("lambda_list", &self.lambda_list)?;
        if self.experiment == Experiment::PerturbSweep && self.delta_lambda_list.is_empty() {
            return Err(RunError::config("delta_lambda_list", "must not be empty"));
        }
        for &dl in &self.delta_lambda_list {
            finite("delta_lambda_list", dl)?;
        }
        distinct("delta_lambda_list", &self.delta_lambda_list)?;
        if self.experiment == Experiment::BlochPerturb && self.eta_list.is_empty() {
            return Err(RunError::config("eta_list", "must not be empty"));
        }
        for &eta in &self.eta_list {
            if !(0.0..=1.0).contains(&eta) {
                return Err(RunError::config(
                    "eta_list",
                    format!("{eta} is outside [0, 1]"),
                ));
            }
        }
        distinct("eta_list", &self.eta_list)?;
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(RunError::config(
                "noise_sigma",
                format!("must be finite and non-negative, got {}", self.noise_sigma),
            ));
        }
        if !(self.rcond.is_finite() && self.rcond > 0.0 && self.rcond < 1.0) {
            return Err(RunError::config(
                "rcond",
                format!("must lie in (0, 1), got {}", self.rcond),
            ));
        }
        let d = spin.dim() as f64;
        if !(self.entropy_floor > 0.0 && self.entropy_floor * d < 1.0) {
            return Err(RunError::config(
                "entropy_floor",
                format!("must lie in (0, 1/{d}), got {}", self.entropy_floor),
            ));
        }
        if !(self.projection_tol.is_finite() && self.projection_tol > 0.0) {
            return Err(RunError::config(
                "projection_tol",
                format!("must be finite and positive, got {}", self.projection_tol),
            ));
        }
        if self.experiment.uses_ensemble() && self.n_states == 0 {
            return Err(RunError::config("n_states", "must be at least 1"));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, excluding `output_dir` so that the
    /// destination does not change the data files.
    pub fn hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let Some(map) = value.as_object_mut() {
            map.remove("output_dir");
        }
        let digest = Sha256::digest(value.to_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
