//! Acceptance suite: one test per acceptance criterion, each printing a
//! PASS/FAIL line (run with `--nocapture` to see them).
//!
//! Run: `cargo test -p dirmeas-cli --test acceptance -- --nocapture`

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;

use dirmeas::analysis::{fit_scaling_exponent, theta_sweep};
use dirmeas::experiment::{empirical_conditional, run_experiment};
use dirmeas::oracle;
use dirmeas::protocol::{
    all_positions, conditional_probabilities, joint_probabilities, norm_factor, pointer_state,
};
use dirmeas::reconstruct::{strong_reconstruct, weak_reconstruct, weak_value, StrongMode};
use dirmeas::{ProbabilityKind, ReconstructionMode, StateMetrics, WaveFunction};

/// Dimensions and coupling strengths of the shared verification grid.
const GRID_DIMS: [usize; 4] = [2, 4, 16, 64];
const GRID_THETAS: [f64; 6] = [0.01, 0.1, 0.5, 1.0, FRAC_PI_2, PI];
const STATES_PER_DIM: u64 = 100;

fn grid_states(dim: usize) -> impl Iterator<Item = WaveFunction> {
    (0..STATES_PER_DIM).map(move |k| WaveFunction::haar_random(dim, dim as u64 * 1000 + k).unwrap())
}

fn report(criterion: &str, pass: bool, detail: &str) -> bool {
    println!(
        "[acceptance] {criterion}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}

#[test]
fn criterion_01_norm_factor_identity() {
    let mut max_dev = 0.0f64;
    for d in GRID_DIMS {
        for psi in grid_states(d) {
            for theta in GRID_THETAS {
                for x in 0..d {
                    let closed = norm_factor(&psi, x, theta).unwrap();
                    let phi = pointer_state(&psi, x, theta).unwrap();
                    max_dev = max_dev.max((closed - phi.norm_sqr()).abs());
                }
            }
        }
    }
    let pass = report(
        "criterion 1 (closed-form norm factor equals pointer norm)",
        max_dev <= 1e-12,
        &format!("max |closed form − ⟨φ|φ⟩| = {max_dev:.3e} over d ∈ {GRID_DIMS:?}, 100 states each, 6 couplings"),
    );
    assert!(pass);
}

#[test]
fn criterion_02_joint_sums_equal_norm_conditional_sums_equal_one() {
    let mut joint_dev = 0.0f64;
    let mut cond_dev = 0.0f64;
    for d in GRID_DIMS {
        for psi in grid_states(d) {
            for theta in GRID_THETAS {
                for x in 0..d {
                    let phi = pointer_state(&psi, x, theta).unwrap();
                    let n = phi.norm_sqr();
                    let joint = joint_probabilities(&phi).unwrap();
                    for sum in [joint.x_sum(), joint.z_sum(), joint.y_sum()] {
                        joint_dev = joint_dev.max((sum - n).abs());
                    }
                    let cond = conditional_probabilities(&phi).unwrap();
                    for sum in [cond.x_sum(), cond.z_sum(), cond.y_sum()] {
                        cond_dev = cond_dev.max((sum - 1.0).abs());
                    }
                }
            }
        }
    }
    // The joint sums are genuinely ≠ 1 at strong coupling: check on a d = 8
    // Haar state at θ = π/2.
    let psi = WaveFunction::haar_random(8, 1).unwrap();
    let away_from_one = (0..8)
        .map(|x| {
            let phi = pointer_state(&psi, x, FRAC_PI_2).unwrap();
            (joint_probabilities(&phi).unwrap().x_sum() - 1.0).abs()
        })
        .fold(0.0f64, f64::max);

    let pass = report(
        "criterion 2 (joint sums = ⟨φ|φ⟩ ≠ 1; conditional sums = 1)",
        joint_dev <= 1e-12 && cond_dev <= 1e-12 && away_from_one > 1e-6,
        &format!(
            "max |joint sum − ⟨φ|φ⟩| = {joint_dev:.3e}, max |conditional sum − 1| = {cond_dev:.3e}, \
             max |joint sum − 1| = {away_from_one:.3e} on the d=8 probe"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_03_exact_recovery_from_joint_probabilities() {
    let mut min_fidelity = 1.0f64;
    for d in GRID_DIMS {
        for psi in grid_states(d) {
            for theta in GRID_THETAS.iter().filter(|t| **t < PI) {
                let probs = all_positions(&psi, *theta, ProbabilityKind::Joint).unwrap();
                let estimate = strong_reconstruct(&probs, *theta, StrongMode::Joint)
                    .unwrap()
                    .estimate;
                let m = StateMetrics::between(&psi, &estimate).unwrap();
                min_fidelity = min_fidelity.min(m.fidelity);
            }
        }
    }
    let pass = report(
        "criterion 3 (exact recovery from joint probabilities)",
        min_fidelity >= 1.0 - 1e-10,
        &format!("min fidelity = 1 − {:.3e}", 1.0 - min_fidelity),
    );
    assert!(pass);
}

#[test]
fn criterion_04_oracle_scaled_conditionals_reproduce_joint_route() {
    let mut max_dev = 0.0f64;
    for d in GRID_DIMS {
        for psi in grid_states(d) {
            for theta in GRID_THETAS.iter().filter(|t| **t < PI) {
                let joint = all_positions(&psi, *theta, ProbabilityKind::Joint).unwrap();
                let cond = all_positions(&psi, *theta, ProbabilityKind::Conditional).unwrap();
                let via_joint = strong_reconstruct(&joint, *theta, StrongMode::Joint).unwrap();
                let via_scaled =
                    strong_reconstruct(&cond, *theta, StrongMode::OracleScaled { truth: &psi })
                        .unwrap();
                for (u, v) in via_joint
                    .raw_amplitudes
                    .iter()
                    .zip(&via_scaled.raw_amplitudes)
                {
                    max_dev = max_dev.max((u - v).norm());
                }
            }
        }
    }
    let pass = report(
        "criterion 4 (conditionals × true norm factor = joint route)",
        max_dev <= 1e-12,
        &format!("max elementwise |raw difference| = {max_dev:.3e}"),
    );
    assert!(pass);
}

/// The criterion as stated: the d = 2 regression state (√0.8, √0.2) at
/// θ = π/2 is asserted to show a conditional-reconstruction bias above 1e-4.
///
/// It cannot: with the amplitude-sum phase convention, any d = 2 state has
/// Re ψ₀ + Re ψ₁ = S and Im ψ₀ = −Im ψ₁, which makes the closed-form pointer
/// norm identical at both positions for every coupling strength — dividing
/// both positions' probabilities by the same constant cannot move the
/// normalized estimate. The brute-force oracle below confirms the error sits
/// at machine precision, so this test fails and is expected to fail; the
/// companion criterion 5b demonstrates the bias itself on a d = 3 state,
/// where the norm factor genuinely varies.
#[test]
fn criterion_05_conditional_bias_on_the_d2_regression_state() {
    let psi = WaveFunction::from_reals(&[0.8f64.sqrt(), 0.2f64.sqrt()]).unwrap();
    let theta = FRAC_PI_2;

    // Independent check that both positions carry the same norm factor.
    let norms: Vec<f64> = (0..2)
        .map(|x| {
            let (a, b) = oracle::postselected_pointer(&psi, x, theta);
            a.norm_sqr() + b.norm_sqr()
        })
        .collect();

    let cond = all_positions(&psi, theta, ProbabilityKind::Conditional).unwrap();
    let joint = all_positions(&psi, theta, ProbabilityKind::Joint).unwrap();
    let cond_err = StateMetrics::between(
        &psi,
        &strong_reconstruct(&cond, theta, StrongMode::Conditional)
            .unwrap()
            .estimate,
    )
    .unwrap()
    .aligned_l2;
    let joint_err = StateMetrics::between(
        &psi,
        &strong_reconstruct(&joint, theta, StrongMode::Joint)
            .unwrap()
            .estimate,
    )
    .unwrap()
    .aligned_l2;

    let pass = report(
        "criterion 5 (conditional bias > 1e-4 on the d=2 state (√0.8, √0.2) at θ=π/2)",
        cond_err > 1e-4 && cond_err > 1e4 * joint_err.max(1e-300),
        &format!(
            "conditional aligned_l2 = {cond_err:.3e}, joint residual = {joint_err:.3e}, \
             per-position pointer norms = ({:.12}, {:.12})",
            norms[0], norms[1]
        ),
    );
    assert!(
        pass,
        "expected conditional bias > 1e-4, measured {cond_err:.3e}: at d = 2 the \
         post-selected pointer norm is position-independent for every state \
         (here {:.15} at both positions, oracle-verified), so conditional and \
         joint statistics differ by one uniform constant and the normalized \
         estimate is exact; a position-dependent norm factor needs d >= 3 — \
         see criterion 5b for the demonstration on a d = 3 state",
        norms[0]
    );
}

/// Frozen by three independent routes (library, full-matrix oracle, closed
/// form): the conditional-route error of the d = 3 regression state
/// (√0.7, √0.2, √0.1) at θ = π/2.
const D3_BIAS_ALIGNED_L2: f64 = 0.09939183617674933;

#[test]
fn criterion_05b_conditional_bias_on_a_d3_regression_state() {
    let psi = WaveFunction::from_reals(&[0.7f64.sqrt(), 0.2f64.sqrt(), 0.1f64.sqrt()]).unwrap();
    let theta = FRAC_PI_2;

    // Brute-force oracle route: full-matrix probabilities, inline inversion,
    // manual normalization and aligned distance.
    let mut raw = Vec::new();
    for x in 0..3 {
        let p = oracle::joint_probabilities(&psi, x, theta);
        let (a, b) = oracle::postselected_pointer(&psi, x, theta);
        let n = a.norm_sqr() + b.norm_sqr();
        let sin = theta.sin();
        let c = 1.0 - theta.cos();
        raw.push(
            Complex64::new((p[0] - p[1]) / n, (p[4] - p[5]) / n) / (2.0 * sin)
                + c * (p[3] / n) / (sin * sin),
        );
    }
    let norm: f64 = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let overlap: Complex64 = raw
        .iter()
        .zip(psi.amplitudes())
        .map(|(r, t)| t.conj() * (r / norm))
        .sum();
    let oracle_err = (2.0 - 2.0 * overlap.norm()).max(0.0).sqrt();

    let cond = all_positions(&psi, theta, ProbabilityKind::Conditional).unwrap();
    let joint = all_positions(&psi, theta, ProbabilityKind::Joint).unwrap();
    let cond_err = StateMetrics::between(
        &psi,
        &strong_reconstruct(&cond, theta, StrongMode::Conditional)
            .unwrap()
            .estimate,
    )
    .unwrap()
    .aligned_l2;
    let joint_err = StateMetrics::between(
        &psi,
        &strong_reconstruct(&joint, theta, StrongMode::Joint)
            .unwrap()
            .estimate,
    )
    .unwrap()
    .aligned_l2;

    let pass = report(
        "criterion 5b (conditional bias on the d=3 state (√0.7, √0.2, √0.1) at θ=π/2)",
        cond_err > 1e-4
            && cond_err > 1e4 * joint_err.max(1e-300)
            && (cond_err - oracle_err).abs() < 1e-12
            && (cond_err - D3_BIAS_ALIGNED_L2).abs() < 1e-9,
        &format!(
            "conditional aligned_l2 = {cond_err:.12} (frozen {D3_BIAS_ALIGNED_L2:.12}, \
             oracle {oracle_err:.12}), joint residual = {joint_err:.3e}"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_06_weak_limit_vanishing_of_the_bias() {
    let psi = WaveFunction::haar_random(8, 1).unwrap();
    let grid: Vec<f64> = (0..8)
        .map(|i| 1e-3 * (0.3f64 / 1e-3).powf(i as f64 / 7.0))
        .collect();

    // Library route.
    let records = theta_sweep(
        &psi,
        &grid,
        ReconstructionMode::StrongConditional,
        None,
        None,
    )
    .unwrap();
    let slope = fit_scaling_exponent(&records).unwrap();

    // Oracle route: same exponent from full-matrix probabilities, inline
    // inversion and an inline least-squares fit.
    let mut points = Vec::new();
    for &theta in &grid {
        let d = psi.dim();
        let mut raw = Vec::new();
        for x in 0..d {
            let p = oracle::joint_probabilities(&psi, x, theta);
            let (a, b) = oracle::postselected_pointer(&psi, x, theta);
            let n = a.norm_sqr() + b.norm_sqr();
            let sin = theta.sin();
            let c = 1.0 - theta.cos();
            raw.push(
                Complex64::new((p[0] - p[1]) / n, (p[4] - p[5]) / n) / (2.0 * sin)
                    + c * (p[3] / n) / (sin * sin),
            );
        }
        let norm: f64 = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let overlap: Complex64 = raw
            .iter()
            .zip(psi.amplitudes())
            .map(|(r, t)| t.conj() * (r / norm))
            .sum();
        let err = (2.0 - 2.0 * overlap.norm()).max(0.0).sqrt();
        points.push((theta.ln(), err.ln()));
    }
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let oracle_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);

    // Deep weak limit: conditional-mode fidelity within 1e-6 of 1.
    let weak = theta_sweep(
        &psi,
        &[1e-4],
        ReconstructionMode::StrongConditional,
        None,
        None,
    )
    .unwrap();
    let weak_fidelity = weak[0].fidelity;

    let pass = report(
        "criterion 6 (conditional-mode error vanishes as θ²)",
        (slope - 2.0).abs() <= 0.2
            && (oracle_slope - 2.0).abs() <= 0.2
            && (slope - oracle_slope).abs() < 1e-3
            && weak_fidelity >= 1.0 - 1e-6,
        &format!(
            "fitted exponent = {slope:.4} (oracle {oracle_slope:.4}), fidelity at θ=1e-4 is \
             1 − {:.3e}",
            1.0 - weak_fidelity
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_07_weak_value_identities() {
    let mut max_sum_dev = 0.0f64;
    let mut min_fidelity = 1.0f64;
    for d in [2usize, 8, 32] {
        for k in 0..STATES_PER_DIM {
            let psi = WaveFunction::haar_random(d, 7000 + d as u64 * 100 + k).unwrap();
            let total: Complex64 = (0..d).map(|x| weak_value(&psi, x).unwrap()).sum();
            max_sum_dev = max_sum_dev.max((total - Complex64::new(1.0, 0.0)).norm());
            let report = weak_reconstruct(&psi).unwrap();
            let m = StateMetrics::between(&psi, &report.estimate).unwrap();
            min_fidelity = min_fidelity.min(m.fidelity);
        }
    }
    let pass = report(
        "criterion 7 (weak values of a complete basis sum to 1 and rebuild the state)",
        max_sum_dev <= 1e-12 && min_fidelity >= 1.0 - 1e-12,
        &format!(
            "max |Σ weak values − 1| = {max_sum_dev:.3e}, min reconstruction fidelity = 1 − {:.3e}",
            1.0 - min_fidelity
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_08_monte_carlo_consistency() {
    let psi = WaveFunction::haar_random(8, 1).unwrap();
    let theta = FRAC_PI_2;

    // (a) Every empirical conditional frequency within 5 standard errors of
    // the exact conditional at 10⁶ shots per setting.
    let table = run_experiment(&psi, theta, 1_000_000, 2024).unwrap();
    let empirical = empirical_conditional(&table).unwrap();
    let exact = all_positions(&psi, theta, ProbabilityKind::Conditional).unwrap();
    let mut max_sigmas = 0.0f64;
    for (emp, ex) in empirical.iter().zip(&exact) {
        for ((f, se), p) in emp
            .probs
            .slots()
            .into_iter()
            .zip(emp.std_errors())
            .zip(ex.slots())
        {
            if se > 0.0 {
                max_sigmas = max_sigmas.max((f - p).abs() / se);
            } else {
                assert!((f - p).abs() < 1e-12);
            }
        }
    }

    // (b) Quadrupling the shots halves (±30%) the sampling part of the
    // reconstruction error: distance between the sampled-statistics estimate
    // and the exact-statistics estimate of the same mode, RMS over seeds.
    let exact_probs = all_positions(&psi, theta, ProbabilityKind::Conditional).unwrap();
    let exact_estimate = strong_reconstruct(&exact_probs, theta, StrongMode::Conditional)
        .unwrap()
        .estimate;
    let rms_error = |shots: u64| -> f64 {
        let seeds = [11u64, 12, 13, 14, 15];
        let total: f64 = seeds
            .iter()
            .map(|&seed| {
                let table = run_experiment(&psi, theta, shots, seed).unwrap();
                let empirical = empirical_conditional(&table).unwrap();
                let probs: Vec<_> = empirical.iter().map(|e| e.probs).collect();
                let estimate = strong_reconstruct(&probs, theta, StrongMode::Conditional)
                    .unwrap()
                    .estimate;
                StateMetrics::between(&exact_estimate, &estimate)
                    .unwrap()
                    .aligned_l2
                    .powi(2)
            })
            .sum();
        (total / seeds.len() as f64).sqrt()
    };
    let err_small = rms_error(250_000);
    let err_large = rms_error(1_000_000);
    let ratio = err_small / err_large;

    let pass = report(
        "criterion 8 (finite-shot frequencies and errors behave statistically)",
        max_sigmas <= 5.0 && (1.4..=2.6).contains(&ratio),
        &format!(
            "max frequency deviation = {max_sigmas:.2}σ at 10⁶ shots; quadrupling shots \
             divides the sampling error by {ratio:.2} (expected ≈ 2)"
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------------------
// criterion 9: byte-identical outputs through the CLI
// ---------------------------------------------------------------------------

fn scratch_dir() -> PathBuf {
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    let dir = std::env::temp_dir().join(format!(
        "dirmeas-acceptance-{}-{}",
        std::process::id(),
        COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_to_bytes(subcommand: &str, cfg: &Path, out_path: &Path) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_dirmeas"))
        .args([
            subcommand,
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_path.to_str().unwrap(),
        ])
        .output()
        .expect("binary should run");
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    std::fs::read(out_path).unwrap()
}

#[test]
fn criterion_09_identical_configs_give_byte_identical_files() {
    let dir = scratch_dir();

    let sample_cfg = dir.join("sample.json");
    std::fs::write(
        &sample_cfg,
        r#"{
          "state": {"haar": {"dim": 4, "seed": 3}},
          "theta": 1.0,
          "shots_per_setting": 200000,
          "seed": 42
        }"#,
    )
    .unwrap();
    let sample_out = dir.join("counts.csv");
    let sample_a = run_to_bytes("sample", &sample_cfg, &sample_out);
    let sample_b = run_to_bytes("sample", &sample_cfg, &sample_out);

    let sweep_cfg = dir.join("sweep.json");
    std::fs::write(
        &sweep_cfg,
        r#"{
          "state": {"haar": {"dim": 4, "seed": 3}},
          "theta_grid": [0.3, 1.0],
          "modes": ["strong_conditional", "weak_value"],
          "shots_per_setting": 50000,
          "seed": 42,
          "output": {"format": "json", "path": "unused"}
        }"#,
    )
    .unwrap();
    let sweep_out = dir.join("sweep.json.out");
    let sweep_a = run_to_bytes("sweep", &sweep_cfg, &sweep_out);
    let sweep_b = run_to_bytes("sweep", &sweep_cfg, &sweep_out);

    let pass = report(
        "criterion 9 (identical configs and seeds ⇒ byte-identical outputs)",
        !sample_a.is_empty() && sample_a == sample_b && !sweep_a.is_empty() && sweep_a == sweep_b,
        &format!(
            "sample run: {} bytes twice; sweep run: {} bytes twice",
            sample_a.len(),
            sweep_a.len()
        ),
    );
    assert!(pass);
}
