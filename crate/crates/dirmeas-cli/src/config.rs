//! Declarative run configuration: JSON schema, flag overrides, validation.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use dirmeas::{ReconstructionMode, StateError, WaveFunction};

use crate::CliError;

/// A full run description. Loaded from JSON; the `--out`, `--format` and
/// `--seed` flags override the corresponding fields. The resolved form is
/// embedded verbatim in every output file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub state: StateSpec,
    /// Single coupling strength. Exactly one of `theta` / `theta_grid` may be
    /// present (`sweep` also accepts neither and uses the default grid).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_grid: Option<Vec<f64>>,
    /// Reconstruction modes, for `reconstruct` and `sweep`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub modes: Vec<ModeSpec>,
    /// Requests sampled statistics when present (required for `sample`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots_per_setting: Option<u64>,
    /// Master seed for the experiment substreams.
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

/// Which state the (simulated) experimenter is handed.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Haar {
        dim: usize,
        seed: u64,
    },
    /// Amplitudes as `[re, im]` pairs; must match `dim`.
    Explicit {
        dim: usize,
        amplitudes: Vec<(f64, f64)>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeSpec {
    StrongJoint,
    StrongConditional,
    StrongOracleScaled,
    WeakValue,
}

impl From<ModeSpec> for ReconstructionMode {
    fn from(m: ModeSpec) -> Self {
        match m {
            ModeSpec::StrongJoint => ReconstructionMode::StrongJoint,
            ModeSpec::StrongConditional => ReconstructionMode::StrongConditional,
            ModeSpec::StrongOracleScaled => ReconstructionMode::StrongOracleScaled,
            ModeSpec::WeakValue => ReconstructionMode::WeakValue,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: PathBuf,
    /// Defaults per command: `csv` for sweep/sample, `json` for
    /// verify/reconstruct.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
    }

    /// Apply flag overrides, producing the resolved config embedded in
    /// outputs.
    pub fn with_overrides(
        mut self,
        out: Option<PathBuf>,
        format: Option<OutputFormat>,
        seed: Option<u64>,
    ) -> Self {
        if let Some(seed) = seed {
            self.seed = seed;
        }
        let prior_format = self.output.as_ref().and_then(|o| o.format);
        match (&mut self.output, out, format) {
            (_, Some(path), format) => {
                self.output = Some(OutputSpec {
                    path,
                    format: format.or(prior_format),
                });
            }
            (Some(spec), None, Some(format)) => spec.format = Some(format),
            _ => {}
        }
        self
    }

    /// Build the true state handed to the protocol.
    pub fn build_state(&self) -> Result<WaveFunction, CliError> {
        let state = match &self.state {
            StateSpec::Haar { dim, seed } => WaveFunction::haar_random(*dim, *seed),
            StateSpec::Explicit { dim, amplitudes } => {
                if amplitudes.len() != *dim {
                    return Err(CliError::Config(format!(
                        "explicit state declares dim {} but has {} amplitudes",
                        dim,
                        amplitudes.len()
                    )));
                }
                let amps: Vec<Complex64> = amplitudes
                    .iter()
                    .map(|&(re, im)| Complex64::new(re, im))
                    .collect();
                WaveFunction::new(&amps, *dim)
            }
        };
        state.map_err(|e: StateError| CliError::Config(format!("invalid state: {e}")))
    }

    /// The single coupling strength, for commands that need exactly one.
    pub fn single_theta(&self) -> Result<f64, CliError> {
        self.check_theta_exclusivity()?;
        match (self.theta, &self.theta_grid) {
            (Some(t), None) => Ok(t),
            _ => Err(CliError::Config(
                "this command needs a single `theta` (not `theta_grid`)".into(),
            )),
        }
    }

    /// The coupling grid: explicit `theta_grid`, a one-point grid from
    /// `theta`, or `default` when the config names neither.
    pub fn theta_grid_or(&self, default: Option<Vec<f64>>) -> Result<Vec<f64>, CliError> {
        self.check_theta_exclusivity()?;
        match (self.theta, &self.theta_grid) {
            (Some(t), None) => Ok(vec![t]),
            (None, Some(grid)) => Ok(grid.clone()),
            (None, None) => default.ok_or_else(|| {
                CliError::Config("config must set `theta` or `theta_grid`".into())
            }),
            (Some(_), Some(_)) => unreachable!("checked above"),
        }
    }

    fn check_theta_exclusivity(&self) -> Result<(), CliError> {
        if self.theta.is_some() && self.theta_grid.is_some() {
            return Err(CliError::Config(
                "`theta` and `theta_grid` are mutually exclusive".into(),
            ));
        }
        Ok(())
    }

    pub fn modes(&self) -> Result<Vec<ModeSpec>, CliError> {
        if self.modes.is_empty() {
            return Err(CliError::Config(
                "config must list at least one reconstruction mode".into(),
            ));
        }
        Ok(self.modes.clone())
    }

    pub fn required_shots(&self) -> Result<u64, CliError> {
        match self.shots_per_setting {
            Some(0) | None => Err(CliError::Config(
                "`shots_per_setting` must be present and at least 1".into(),
            )),
            Some(n) => Ok(n),
        }
    }

    pub fn reject_shots(&self, command: &str) -> Result<(), CliError> {
        if self.shots_per_setting.is_some() {
            return Err(CliError::Config(format!(
                "`{command}` uses exact probabilities; remove `shots_per_setting`"
            )));
        }
        Ok(())
    }

    pub fn output_spec(&self) -> Result<&OutputSpec, CliError> {
        self.output
            .as_ref()
            .ok_or_else(|| CliError::Config("no output path (config `output` or `--out`)".into()))
    }
}

/// Validate a grid of coupling strengths against an allowed open/closed
/// upper bound at π.
pub fn validate_thetas(thetas: &[f64], include_pi: bool, context: &str) -> Result<(), CliError> {
    let pi = std::f64::consts::PI;
    for &t in thetas {
        let ok = t.is_finite() && t > 0.0 && if include_pi { t <= pi } else { t < pi };
        if !ok {
            return Err(CliError::Config(format!(
                "{context}: coupling angle {t} outside {}",
                if include_pi { "(0, pi]" } else { "(0, pi)" }
            )));
        }
    }
    Ok(())
}
