//! Wave-function estimators: inversion of the pointer statistics, with or
//! without access to the per-position normalization, and the weak-value
//! route.
//!
//! The strong-coupling inversion is the unique affine combination of the six
//! outcome probabilities that undoes the pointer map: from
//! `a*b = sinθ(S·ψ_x − (1−cosθ)|ψ_x|²)/d` and `|b|² = sin²θ|ψ_x|²/d`,
//!
//! ```text
//! raw_x = (P₊ − P₋ + i(P_L − P_R)) / (2 sinθ) + (1−cosθ)·P₁ / sin²θ
//! ```
//!
//! equals `S·ψ_x/d` when fed *joint* probabilities, so normalizing `raw`
//! recovers the state exactly. Fed *conditional* probabilities it instead
//! yields `S·ψ_x/(d·N_x)` with `N_x` the norm factor: biased whenever `N_x`
//! varies over positions, which is the generic situation for `d ≥ 3`. The
//! bias shrinks as `θ²` and the weak-value route avoids it altogether.

use num_complex::Complex64;
use thiserror::Error;

use crate::protocol::{self, one_minus_cos, OutcomeProbabilities, ProbabilityKind, ProtocolError};
use crate::state::{StateError, StateMetrics, WaveFunction, AMPLITUDE_SUM_FLOOR};

/// Raw reconstructed amplitudes below this magnitude count as degenerate
/// rather than as floating-point noise around a real signal.
pub const DEGENERACY_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReconstructError {
    #[error("all reconstructed amplitudes below {DEGENERACY_FLOOR:.0e}; nothing to normalize")]
    ReconstructionDegenerate,
    #[error("coupling angle {0} has sin(theta) = 0; the inversion is undefined")]
    ThetaOutOfRange(f64),
    #[error("probability kind {found:?} does not match reconstruction mode {mode:?}")]
    KindMismatch {
        mode: ReconstructionMode,
        found: ProbabilityKind,
    },
    #[error("amplitude sum is numerically zero; the weak-value scheme is undefined for this state")]
    PostSelectionDegenerate,
    #[error("probabilities must cover positions 0..d in order, one entry each, d >= 2")]
    MalformedInput,
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

/// Which statistics fed the estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReconstructionMode {
    /// Joint probabilities (raw pointer). Exact, but not what counting
    /// statistics on a post-selected ensemble deliver.
    StrongJoint,
    /// Conditional probabilities as measured. Biased for finite coupling
    /// whenever the norm factor varies over positions.
    StrongConditional,
    /// Conditional probabilities rescaled by the *true* norm factor. Needs
    /// the unknown state, so it is a diagnostic, not an operational mode.
    StrongOracleScaled,
    /// Weak values of the position projectors.
    WeakValue,
}

impl ReconstructionMode {
    pub fn label(self) -> &'static str {
        match self {
            ReconstructionMode::StrongJoint => "strong_joint",
            ReconstructionMode::StrongConditional => "strong_conditional",
            ReconstructionMode::StrongOracleScaled => "strong_oracle_scaled",
            ReconstructionMode::WeakValue => "weak_value",
        }
    }
}

/// Input flavor for [`strong_reconstruct`]. The oracle-scaled flavor carries
/// the true state because the rescaling factor cannot be known otherwise.
#[derive(Debug, Clone, Copy)]
pub enum StrongMode<'a> {
    Joint,
    Conditional,
    OracleScaled { truth: &'a WaveFunction },
}

impl StrongMode<'_> {
    fn mode(&self) -> ReconstructionMode {
        match self {
            StrongMode::Joint => ReconstructionMode::StrongJoint,
            StrongMode::Conditional => ReconstructionMode::StrongConditional,
            StrongMode::OracleScaled { .. } => ReconstructionMode::StrongOracleScaled,
        }
    }

    fn expected_kind(&self) -> ProbabilityKind {
        match self {
            StrongMode::Joint => ProbabilityKind::Joint,
            _ => ProbabilityKind::Conditional,
        }
    }
}

/// Result of one reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionReport {
    pub estimate: WaveFunction,
    pub mode: ReconstructionMode,
    /// Coupling strength, absent for the weak-value route.
    pub theta: Option<f64>,
    /// Pre-normalization amplitudes straight out of the estimator.
    pub raw_amplitudes: Vec<Complex64>,
    pub metrics_vs_truth: Option<StateMetrics>,
}

impl ReconstructionReport {
    /// Fill in the distance metrics against a known true state.
    pub fn with_metrics_vs(mut self, truth: &WaveFunction) -> Result<Self, StateError> {
        self.metrics_vs_truth = Some(StateMetrics::between(truth, &self.estimate)?);
        Ok(self)
    }
}

/// Invert per-position outcome probabilities into a normalized state
/// estimate.
///
/// The overall positive constant `S/d` carried by the raw amplitudes is not
/// knowable from the statistics, so the estimate is fixed by a final
/// normalization and the usual phase convention.
pub fn strong_reconstruct(
    probs: &[OutcomeProbabilities],
    theta: f64,
    mode: StrongMode,
) -> Result<ReconstructionReport, ReconstructError> {
    if !theta.is_finite() || theta <= 0.0 || theta >= std::f64::consts::PI {
        return Err(ReconstructError::ThetaOutOfRange(theta));
    }
    if probs.len() < 2 || probs.iter().enumerate().any(|(k, p)| p.x != k) {
        return Err(ReconstructError::MalformedInput);
    }
    let expected = mode.expected_kind();
    if let Some(p) = probs.iter().find(|p| p.kind != expected) {
        return Err(ReconstructError::KindMismatch {
            mode: mode.mode(),
            found: p.kind,
        });
    }

    let rescaled: Vec<OutcomeProbabilities> = match mode {
        StrongMode::OracleScaled { truth } => {
            if truth.dim() != probs.len() {
                return Err(StateError::DimensionMismatch {
                    expected: truth.dim(),
                    found: probs.len(),
                }
                .into());
            }
            probs
                .iter()
                .map(|p| {
                    let factor = protocol::norm_factor(truth, p.x, theta)?;
                    Ok(p.scaled(factor, ProbabilityKind::Joint))
                })
                .collect::<Result<_, ReconstructError>>()?
        }
        _ => probs.to_vec(),
    };

    let sin = theta.sin();
    let cos_deficit = one_minus_cos(theta);
    let raw: Vec<Complex64> = rescaled
        .iter()
        .map(|p| {
            Complex64::new(p.p_plus - p.p_minus, p.p_left - p.p_right) / (2.0 * sin)
                + cos_deficit * p.p_one / (sin * sin)
        })
        .collect();

    if raw.iter().map(|z| z.norm()).fold(0.0, f64::max) < DEGENERACY_FLOOR {
        return Err(ReconstructError::ReconstructionDegenerate);
    }
    let estimate = WaveFunction::new(&raw, raw.len())?;
    Ok(ReconstructionReport {
        estimate,
        mode: mode.mode(),
        theta: Some(theta),
        raw_amplitudes: raw,
        metrics_vs_truth: None,
    })
}

/// The weak value of the position projector `|x⟩⟨x|` with the uniform
/// superposition as post-selection: `ψ_x / S`.
pub fn weak_value(psi: &WaveFunction, x: usize) -> Result<Complex64, ReconstructError> {
    assert!(
        x < psi.dim(),
        "position {x} out of range for dimension {}",
        psi.dim()
    );
    if psi.has_zero_amplitude_sum() || psi.amplitude_sum().abs() < AMPLITUDE_SUM_FLOOR {
        return Err(ReconstructError::PostSelectionDegenerate);
    }
    Ok(psi.amplitude(x) / psi.amplitude_sum())
}

/// Reconstruct the state as the normalized vector of projector weak values.
/// The weak values over a complete basis sum to exactly 1, and the normalized
/// vector *is* the state — no per-position normalization issue arises.
pub fn weak_reconstruct(psi: &WaveFunction) -> Result<ReconstructionReport, ReconstructError> {
    let raw: Vec<Complex64> = (0..psi.dim())
        .map(|x| weak_value(psi, x))
        .collect::<Result<_, _>>()?;
    let estimate = WaveFunction::new(&raw, raw.len())?;
    Ok(ReconstructionReport {
        estimate,
        mode: ReconstructionMode::WeakValue,
        theta: None,
        raw_amplitudes: raw,
        metrics_vs_truth: None,
    })
}
