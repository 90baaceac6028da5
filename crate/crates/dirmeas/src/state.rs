//! Wave-function construction, Haar-random test states, and distance metrics.
//!
//! A [`WaveFunction`] is a unit vector of `d` complex amplitudes stored under a
//! fixed global-phase convention: the amplitude sum `Σ_x ψ_x` is rotated to be
//! real and non-negative. The amplitude sum (up to a factor `1/√d`, the overlap
//! with the uniform superposition) is what post-selection in the measurement
//! protocol couples to, so fixing its phase once here keeps every closed form
//! downstream free of stray phases.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

/// Absolute tolerance on the unit-norm and phase-convention invariants.
pub const NORM_TOL: f64 = 1e-12;

/// Below this magnitude the amplitude sum counts as zero: the global phase
/// cannot be fixed and post-selection on the uniform superposition becomes
/// singular.
pub const AMPLITUDE_SUM_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StateError {
    /// Every amplitude is exactly zero; there is no direction to normalize.
    #[error("state vector is zero")]
    ZeroVector,
    #[error("expected {expected} amplitudes, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
}

/// A normalized `d`-dimensional pure state with the amplitude-sum phase
/// convention applied.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    amplitudes: Vec<Complex64>,
    sum: Complex64,
    sum_is_zero: bool,
}

impl WaveFunction {
    /// Normalize `raw` and fix the global phase so the amplitude sum is real
    /// and non-negative.
    ///
    /// When the amplitude sum vanishes (within [`AMPLITUDE_SUM_FLOOR`]) there
    /// is no phase to fix; the state keeps the phase it was given and is
    /// flagged via [`WaveFunction::has_zero_amplitude_sum`].
    pub fn new(raw: &[Complex64], dim: usize) -> Result<Self, StateError> {
        if dim < 2 {
            return Err(StateError::DimensionTooSmall(dim));
        }
        if raw.len() != dim {
            return Err(StateError::DimensionMismatch {
                expected: dim,
                found: raw.len(),
            });
        }
        let norm_sqr: f64 = raw.iter().map(|z| z.norm_sqr()).sum();
        if norm_sqr == 0.0 {
            return Err(StateError::ZeroVector);
        }
        let inv_norm = norm_sqr.sqrt().recip();
        let mut amplitudes: Vec<Complex64> = raw.iter().map(|z| z * inv_norm).collect();

        let sum: Complex64 = amplitudes.iter().sum();
        let sum_is_zero = sum.norm() < AMPLITUDE_SUM_FLOOR;
        if !sum_is_zero {
            let phase = sum.conj() / sum.norm();
            for amp in &mut amplitudes {
                *amp *= phase;
            }
        }
        let sum = amplitudes.iter().sum();
        let state = Self {
            amplitudes,
            sum,
            sum_is_zero,
        };
        debug_assert!(state.invariants_hold());
        Ok(state)
    }

    /// Convenience constructor from real amplitudes; dimension is the length.
    pub fn from_reals(raw: &[f64]) -> Result<Self, StateError> {
        let raw: Vec<Complex64> = raw.iter().map(|&re| Complex64::new(re, 0.0)).collect();
        Self::new(&raw, raw.len())
    }

    /// The uniform superposition `(1/√d) Σ_x |x⟩`.
    pub fn uniform(dim: usize) -> Result<Self, StateError> {
        Self::from_reals(&vec![1.0; dim.max(1)])
    }

    /// The computational basis state `|x⟩`.
    pub fn basis_state(dim: usize, x: usize) -> Result<Self, StateError> {
        assert!(x < dim, "basis index {x} out of range for dimension {dim}");
        let mut raw = vec![0.0; dim];
        raw[x] = 1.0;
        Self::from_reals(&raw)
    }

    /// Draw a state from the unitarily invariant (Haar) distribution:
    /// independent standard complex Gaussian amplitudes, normalized, phase
    /// fixed. Deterministic for a given seed.
    pub fn haar_random(dim: usize, seed: u64) -> Result<Self, StateError> {
        if dim < 2 {
            return Err(StateError::DimensionTooSmall(dim));
        }
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let raw: Vec<Complex64> = (0..dim)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im)
            })
            .collect();
        Self::new(&raw, dim)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, x: usize) -> Complex64 {
        self.amplitudes[x]
    }

    /// The amplitude sum `Σ_x ψ_x`, real and non-negative under the phase
    /// convention. Equals `√d` times the overlap with the uniform
    /// superposition.
    pub fn amplitude_sum(&self) -> f64 {
        self.sum.re
    }

    pub(crate) fn amplitude_sum_complex(&self) -> Complex64 {
        self.sum
    }

    /// True when the amplitude sum is numerically zero and the phase
    /// convention could not be applied.
    pub fn has_zero_amplitude_sum(&self) -> bool {
        self.sum_is_zero
    }

    fn invariants_hold(&self) -> bool {
        let norm_sqr: f64 = self.amplitudes.iter().map(|z| z.norm_sqr()).sum();
        let phase_ok = self.sum_is_zero || (self.sum.re >= 0.0 && self.sum.im.abs() < NORM_TOL);
        (norm_sqr - 1.0).abs() < NORM_TOL && phase_ok
    }
}

/// Phase-invariant distances between two states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateMetrics {
    /// `|⟨truth|estimate⟩|²`, in `[0, 1]`.
    pub fidelity: f64,
    /// L2 distance minimized over a global phase:
    /// `min_α ‖truth − e^{iα}·estimate‖₂ = √(2 − 2|⟨truth|estimate⟩|)`.
    pub aligned_l2: f64,
}

impl StateMetrics {
    pub fn between(truth: &WaveFunction, estimate: &WaveFunction) -> Result<Self, StateError> {
        if truth.dim() != estimate.dim() {
            return Err(StateError::DimensionMismatch {
                expected: truth.dim(),
                found: estimate.dim(),
            });
        }
        let overlap: Complex64 = truth
            .amplitudes()
            .iter()
            .zip(estimate.amplitudes())
            .map(|(t, e)| t.conj() * e)
            .sum();
        let magnitude = overlap.norm().min(1.0);
        // ‖t − e^{iα}e‖² with the minimizing phase e^{iα} = ov*/|ov| equals
        // 2 − 2|ov| exactly; the explicit difference avoids the cancellation
        // that √(2 − 2|ov|) suffers when the states coincide.
        let phase = if magnitude > 0.0 {
            overlap.conj() / magnitude
        } else {
            Complex64::new(1.0, 0.0)
        };
        let aligned_l2 = truth
            .amplitudes()
            .iter()
            .zip(estimate.amplitudes())
            .map(|(t, e)| (t - e * phase).norm_sqr())
            .sum::<f64>()
            .sqrt();
        Ok(Self {
            fidelity: magnitude * magnitude,
            aligned_l2,
        })
    }
}
