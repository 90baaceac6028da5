//! Command implementations: wire configs into the library and emit
//! self-describing result files.

use num_complex::Complex64;
use serde::Serialize;

use dirmeas::analysis;
use dirmeas::experiment;
use dirmeas::{ReconstructionMode, WaveFunction};

use crate::config::{validate_thetas, OutputFormat, RunConfig};
use crate::output::{fmt_f64, to_json_string, write_atomic, Csv};
use crate::{CliError, Command};

pub fn run(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Verify(args) => cmd_verify(load(args)?),
        Command::Reconstruct(args) => cmd_reconstruct(load(args)?),
        Command::Sweep(args) => cmd_sweep(load(args)?),
        Command::Sample(args) => cmd_sample(load(args)?),
    }
}

fn load(args: &crate::CommonArgs) -> Result<RunConfig, CliError> {
    Ok(RunConfig::load(&args.config)?.with_overrides(args.out.clone(), args.format, args.seed))
}

fn run_err(e: impl std::fmt::Display) -> CliError {
    CliError::Run(e.to_string())
}

/// Resolve the output format (filling the command default back into the
/// config so the embedded copy is fully resolved) and return
/// `(config, format, path)`.
fn resolve_output(
    mut config: RunConfig,
    default: OutputFormat,
) -> Result<(RunConfig, OutputFormat, std::path::PathBuf), CliError> {
    let spec = config.output_spec()?;
    let format = spec.format.unwrap_or(default);
    let path = spec.path.clone();
    if let Some(spec) = config.output.as_mut() {
        spec.format = Some(format);
    }
    Ok((config, format, path))
}

fn amp_pairs(amps: &[Complex64]) -> Vec<(f64, f64)> {
    amps.iter().map(|z| (z.re, z.im)).collect()
}

#[derive(Serialize)]
struct TruthOut {
    dim: usize,
    amplitudes: Vec<(f64, f64)>,
    amplitude_sum: f64,
    amplitude_sum_zero: bool,
}

impl TruthOut {
    fn of(psi: &WaveFunction) -> Self {
        Self {
            dim: psi.dim(),
            amplitudes: amp_pairs(psi.amplitudes()),
            amplitude_sum: psi.amplitude_sum(),
            amplitude_sum_zero: psi.has_zero_amplitude_sum(),
        }
    }
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct AuditEntry {
    theta: f64,
    norm_factor_max_dev: f64,
    joint_sum_max_dev: f64,
    conditional_sum_max_dev: f64,
    weak_value_sum_dev: Option<f64>,
    weak_value_skipped: bool,
    degenerate_positions: usize,
    tolerance: f64,
    pass: bool,
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    command: &'a str,
    config: &'a RunConfig,
    audits: Vec<AuditEntry>,
    pass: bool,
}

fn cmd_verify(config: RunConfig) -> Result<(), CliError> {
    config.reject_shots("verify")?;
    let thetas = config.theta_grid_or(None)?;
    validate_thetas(&thetas, true, "verify")?;
    let (config, format, path) = resolve_output(config, OutputFormat::Json)?;
    if format != OutputFormat::Json {
        return Err(CliError::Config(
            "verify emits structured JSON; use `--format json`".into(),
        ));
    }
    let psi = config.build_state()?;

    let mut audits = Vec::new();
    for &theta in &thetas {
        let audit = analysis::verify_identities(&psi, theta).map_err(run_err)?;
        audits.push(AuditEntry {
            theta,
            norm_factor_max_dev: audit.norm_factor_max_dev,
            joint_sum_max_dev: audit.joint_sum_max_dev,
            conditional_sum_max_dev: audit.conditional_sum_max_dev,
            weak_value_sum_dev: audit.weak_value_sum_dev,
            weak_value_skipped: audit.weak_value_sum_dev.is_none(),
            degenerate_positions: audit.degenerate_positions,
            tolerance: audit.tolerance,
            pass: audit.passed(),
        });
    }
    let failed = audits.iter().filter(|a| !a.pass).count();
    let out = VerifyOutput {
        command: "verify",
        config: &config,
        audits,
        pass: failed == 0,
    };
    write_atomic(&path, &to_json_string(&out)?)?;
    if failed == 0 {
        Ok(())
    } else {
        Err(CliError::Audit(format!(
            "{failed} of {} audits exceeded tolerance",
            thetas.len()
        )))
    }
}

// ---------------------------------------------------------------------------
// reconstruct
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ModeResult {
    mode: &'static str,
    theta: Option<f64>,
    raw_amplitudes: Vec<(f64, f64)>,
    estimate: Vec<(f64, f64)>,
    fidelity: f64,
    aligned_l2: f64,
    max_std_error: Option<f64>,
}

#[derive(Serialize)]
struct ReconstructOutput<'a> {
    command: &'a str,
    config: &'a RunConfig,
    truth: TruthOut,
    results: Vec<ModeResult>,
}

fn cmd_reconstruct(config: RunConfig) -> Result<(), CliError> {
    let theta = config.single_theta()?;
    validate_thetas(&[theta], false, "reconstruct")?;
    let modes = config.modes()?;
    let shots = match config.shots_per_setting {
        Some(0) => {
            return Err(CliError::Config(
                "`shots_per_setting` must be at least 1".into(),
            ))
        }
        other => other,
    };
    let (config, format, path) = resolve_output(config, OutputFormat::Json)?;
    if format != OutputFormat::Json {
        return Err(CliError::Config(
            "reconstruct emits structured JSON; use `--format json`".into(),
        ));
    }
    let psi = config.build_state()?;

    let table = match shots {
        Some(n) => {
            Some(experiment::run_experiment(&psi, theta, n, config.seed).map_err(run_err)?)
        }
        None => None,
    };

    let mut results = Vec::new();
    for mode in &modes {
        let rmode = ReconstructionMode::from(*mode);
        let (report, max_std_error) =
            analysis::reconstruct_with(&psi, theta, rmode, table.as_ref()).map_err(run_err)?;
        let report = report.with_metrics_vs(&psi).map_err(run_err)?;
        let metrics = report.metrics_vs_truth.expect("metrics just attached");
        results.push(ModeResult {
            mode: rmode.label(),
            theta: report.theta,
            raw_amplitudes: amp_pairs(&report.raw_amplitudes),
            estimate: amp_pairs(report.estimate.amplitudes()),
            fidelity: metrics.fidelity,
            aligned_l2: metrics.aligned_l2,
            max_std_error,
        });
    }
    let out = ReconstructOutput {
        command: "reconstruct",
        config: &config,
        truth: TruthOut::of(&psi),
        results,
    };
    write_atomic(&path, &to_json_string(&out)?)
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct RecordOut {
    theta: f64,
    mode: &'static str,
    fidelity: f64,
    aligned_l2: f64,
    max_norm_spread: f64,
    shots: Option<u64>,
    max_std_error: Option<f64>,
}

#[derive(Serialize)]
struct ExponentOut {
    mode: &'static str,
    exponent: Option<f64>,
    status: &'static str,
}

#[derive(Serialize)]
struct SweepOutput<'a> {
    command: &'a str,
    config: &'a RunConfig,
    records: Vec<RecordOut>,
    scaling_exponents: Vec<ExponentOut>,
}

fn cmd_sweep(config: RunConfig) -> Result<(), CliError> {
    let grid = config.theta_grid_or(Some(analysis::default_theta_grid()))?;
    validate_thetas(&grid, false, "sweep")?;
    let modes = config.modes()?;
    let shots = match config.shots_per_setting {
        Some(0) => {
            return Err(CliError::Config(
                "`shots_per_setting` must be at least 1".into(),
            ))
        }
        other => other,
    };
    let (config, format, path) = resolve_output(config, OutputFormat::Csv)?;
    let psi = config.build_state()?;

    let mut records = Vec::new();
    let mut exponents = Vec::new();
    for mode in &modes {
        let rmode = ReconstructionMode::from(*mode);
        let swept = analysis::theta_sweep(&psi, &grid, rmode, shots, Some(config.seed))
            .map_err(run_err)?;
        let exponent = if shots.is_some() {
            ExponentOut {
                mode: rmode.label(),
                exponent: None,
                status: "empirical",
            }
        } else {
            match analysis::fit_scaling_exponent(&swept) {
                Ok(v) => ExponentOut {
                    mode: rmode.label(),
                    exponent: Some(v),
                    status: "ok",
                },
                Err(analysis::AnalysisError::DegenerateFit(_)) => ExponentOut {
                    mode: rmode.label(),
                    exponent: None,
                    status: "degenerate",
                },
                Err(e) => return Err(run_err(e)),
            }
        };
        exponents.push(exponent);
        records.extend(swept.into_iter().map(|r| RecordOut {
            theta: r.theta,
            mode: rmode.label(),
            fidelity: r.fidelity,
            aligned_l2: r.aligned_l2,
            max_norm_spread: r.max_norm_spread,
            shots: r.shots,
            max_std_error: r.max_std_error,
        }));
    }

    let content = match format {
        OutputFormat::Json => to_json_string(&SweepOutput {
            command: "sweep",
            config: &config,
            records,
            scaling_exponents: exponents,
        })?,
        OutputFormat::Csv => {
            let mut csv = Csv::new();
            csv.comment(&format!("config: {}", to_json_string(&config)?));
            csv.row([
                "theta",
                "mode",
                "fidelity",
                "aligned_l2",
                "max_norm_spread",
                "shots",
                "max_std_error",
            ]);
            for r in &records {
                csv.row([
                    fmt_f64(r.theta),
                    r.mode.to_string(),
                    fmt_f64(r.fidelity),
                    fmt_f64(r.aligned_l2),
                    fmt_f64(r.max_norm_spread),
                    r.shots.map(|s| s.to_string()).unwrap_or_default(),
                    r.max_std_error.map(fmt_f64).unwrap_or_default(),
                ]);
            }
            for e in &exponents {
                let value = e
                    .exponent
                    .map(fmt_f64)
                    .unwrap_or_else(|| e.status.to_string());
                csv.comment(&format!("exponent,{},{value}", e.mode));
            }
            csv.finish()
        }
    };
    write_atomic(&path, &content)
}

// ---------------------------------------------------------------------------
// sample
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct SampleRow {
    x: usize,
    basis: &'static str,
    shots: u64,
    successes: u64,
    outcome_a: &'static str,
    count_a: u64,
    outcome_b: &'static str,
    count_b: u64,
    seed: u64,
}

#[derive(Serialize)]
struct SampleOutput<'a> {
    command: &'a str,
    config: &'a RunConfig,
    theta: f64,
    rows: Vec<SampleRow>,
}

fn cmd_sample(config: RunConfig) -> Result<(), CliError> {
    let theta = config.single_theta()?;
    validate_thetas(&[theta], true, "sample")?;
    let shots = config.required_shots()?;
    let (config, format, path) = resolve_output(config, OutputFormat::Csv)?;
    let psi = config.build_state()?;

    let table = experiment::run_experiment(&psi, theta, shots, config.seed).map_err(run_err)?;
    let rows: Vec<SampleRow> = table
        .rows
        .iter()
        .map(|row| {
            let (outcome_a, outcome_b) = row.basis.outcome_labels();
            SampleRow {
                x: row.x,
                basis: row.basis.label(),
                shots: row.shots,
                successes: row.successes,
                outcome_a,
                count_a: row.counts[0],
                outcome_b,
                count_b: row.counts[1],
                seed: row.seed,
            }
        })
        .collect();

    let content = match format {
        OutputFormat::Json => to_json_string(&SampleOutput {
            command: "sample",
            config: &config,
            theta,
            rows,
        })?,
        OutputFormat::Csv => {
            let mut csv = Csv::new();
            csv.comment(&format!("config: {}", to_json_string(&config)?));
            csv.row([
                "x",
                "basis",
                "shots",
                "successes",
                "outcome_a",
                "count_a",
                "outcome_b",
                "count_b",
                "seed",
            ]);
            for r in &rows {
                csv.row([
                    r.x.to_string(),
                    r.basis.to_string(),
                    r.shots.to_string(),
                    r.successes.to_string(),
                    r.outcome_a.to_string(),
                    r.count_a.to_string(),
                    r.outcome_b.to_string(),
                    r.count_b.to_string(),
                    r.seed.to_string(),
                ]);
            }
            csv.finish()
        }
    };
    write_atomic(&path, &content)
}
