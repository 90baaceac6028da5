//! The measurement protocol core: pointer coupling, post-selection, and the
//! joint versus conditional outcome probabilities.
//!
//! At position `x` the coupling of strength `θ` rotates the pointer qubit,
//! `|x⟩|0⟩ ↦ |x⟩(cosθ|0⟩ + sinθ|1⟩)`, and acts as the identity elsewhere.
//! Post-selecting the system on the uniform superposition leaves the pointer
//! in the *unnormalized* state
//!
//! ```text
//! |φ⟩ = a|0⟩ + b|1⟩,   a = (S − (1−cosθ)ψ_x)/√d,   b = sinθ·ψ_x/√d,
//! ```
//!
//! with `S = Σ_x ψ_x`. Its squared norm — the post-selection success
//! probability — has the closed form implemented by [`norm_factor`]:
//!
//! ```text
//! ⟨φ|φ⟩ = (1/d)[ S² − 2(1−cosθ)·S·Re(ψ_x) + 2(1−cosθ)·|ψ_x|² ]
//! ```
//!
//! (`S` real under the phase convention). Because `⟨φ|φ⟩` depends on the
//! unknown `ψ_x`, it varies with `x` for `d ≥ 3`; probabilities read off the
//! raw pointer (joint) and probabilities renormalized per position
//! (conditional, what counting statistics on the surviving ensemble deliver)
//! then differ by an `x`-dependent factor. That gap closes only in the weak
//! limit `θ → 0`, where the factor becomes the uniform `S²/d`.

use num_complex::Complex64;
use thiserror::Error;

use crate::state::WaveFunction;

/// Absolute tolerance for the exact algebraic identities of this module.
pub const IDENTITY_TOL: f64 = 1e-12;

/// Pointer norms at or below this are treated as zero: post-selection never
/// succeeds and conditional probabilities are undefined.
pub const POINTER_NORM_FLOOR: f64 = 1e-30;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("position {x} out of range for dimension {dim}")]
    IndexOutOfRange { x: usize, dim: usize },
    #[error("coupling angle {0} outside the valid range")]
    ThetaOutOfRange(f64),
    #[error("joint probabilities require the raw post-selected pointer, not a renormalized one")]
    NormalizedInputRejected,
    #[error("pointer norm {0:.3e} is numerically zero; post-selection never succeeds here")]
    DegeneratePointer(f64),
}

/// The post-selected pointer qubit at one position.
///
/// `normalized = false` means the raw amplitudes straight out of
/// post-selection, whose squared norm equals [`norm_factor`]; that norm is the
/// information a renormalized pointer has lost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointerState {
    /// `⟨0|φ⟩`
    pub a: Complex64,
    /// `⟨1|φ⟩`
    pub b: Complex64,
    /// Position the coupling acted on.
    pub x: usize,
    /// Coupling strength.
    pub theta: f64,
    normalized: bool,
}

impl PointerState {
    /// Wrap raw (unnormalized) pointer amplitudes.
    pub fn raw(a: Complex64, b: Complex64, x: usize, theta: f64) -> Self {
        Self {
            a,
            b,
            x,
            theta,
            normalized: false,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Rescale to unit norm, discarding the post-selection probability.
    pub fn into_normalized(self) -> Result<Self, ProtocolError> {
        let n = self.norm_sqr();
        if n <= POINTER_NORM_FLOOR {
            return Err(ProtocolError::DegeneratePointer(n));
        }
        let inv = n.sqrt().recip();
        Ok(Self {
            a: self.a * inv,
            b: self.b * inv,
            normalized: true,
            ..self
        })
    }
}

/// Whether outcome probabilities are taken on the raw pointer (joint: outcome
/// AND post-selection success) or renormalized per position (conditional:
/// outcome GIVEN success).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProbabilityKind {
    Joint,
    Conditional,
}

/// The six pointer outcome probabilities at one position: the `X` pair
/// `(plus, minus)`, the `Z` pair `(zero, one)`, and the `Y` pair
/// `(left, right)` with `|L⟩ = (|0⟩ + i|1⟩)/√2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeProbabilities {
    pub p_plus: f64,
    pub p_minus: f64,
    pub p_zero: f64,
    pub p_one: f64,
    pub p_left: f64,
    pub p_right: f64,
    pub kind: ProbabilityKind,
    pub x: usize,
    pub theta: f64,
}

impl OutcomeProbabilities {
    /// Slot order used throughout: plus, minus, zero, one, left, right.
    pub const SLOT_NAMES: [&'static str; 6] = ["plus", "minus", "zero", "one", "left", "right"];

    pub fn slots(&self) -> [f64; 6] {
        [
            self.p_plus,
            self.p_minus,
            self.p_zero,
            self.p_one,
            self.p_left,
            self.p_right,
        ]
    }

    /// Sum of the `X`-basis pair.
    pub fn x_sum(&self) -> f64 {
        self.p_plus + self.p_minus
    }

    /// Sum of the `Z`-basis pair.
    pub fn z_sum(&self) -> f64 {
        self.p_zero + self.p_one
    }

    /// Sum of the `Y`-basis pair.
    pub fn y_sum(&self) -> f64 {
        self.p_left + self.p_right
    }

    pub(crate) fn scaled(mut self, factor: f64, kind: ProbabilityKind) -> Self {
        self.p_plus *= factor;
        self.p_minus *= factor;
        self.p_zero *= factor;
        self.p_one *= factor;
        self.p_left *= factor;
        self.p_right *= factor;
        self.kind = kind;
        self
    }
}

/// Numerically stable `1 − cosθ`.
pub(crate) fn one_minus_cos(theta: f64) -> f64 {
    let s = (0.5 * theta).sin();
    2.0 * s * s
}

fn check_domain(psi: &WaveFunction, x: usize, theta: f64) -> Result<(), ProtocolError> {
    if x >= psi.dim() {
        return Err(ProtocolError::IndexOutOfRange { x, dim: psi.dim() });
    }
    if !(theta > 0.0 && theta <= std::f64::consts::PI) {
        return Err(ProtocolError::ThetaOutOfRange(theta));
    }
    Ok(())
}

/// The unnormalized post-selected pointer at position `x` for coupling
/// strength `theta ∈ (0, π]`.
///
/// States with a numerically zero amplitude sum are accepted — the pointer is
/// still well defined — but every position then carries an `O(θ²)` norm and
/// reconstruction from these statistics is singular.
pub fn pointer_state(
    psi: &WaveFunction,
    x: usize,
    theta: f64,
) -> Result<PointerState, ProtocolError> {
    check_domain(psi, x, theta)?;
    let d = psi.dim() as f64;
    let inv_sqrt_d = d.sqrt().recip();
    let c = one_minus_cos(theta);
    let amp = psi.amplitude(x);
    let a = (psi.amplitude_sum_complex() - amp * c) * inv_sqrt_d;
    let b = amp * theta.sin() * inv_sqrt_d;
    Ok(PointerState::raw(a, b, x, theta))
}

/// Closed form for the squared pointer norm `⟨φ|φ⟩` (equivalently the
/// post-selection success probability) at position `x`:
/// `(1/d)[S² − 2(1−cosθ)·S·Re(ψ_x) + 2(1−cosθ)·|ψ_x|²]` with `S` the real
/// amplitude sum.
pub fn norm_factor(psi: &WaveFunction, x: usize, theta: f64) -> Result<f64, ProtocolError> {
    check_domain(psi, x, theta)?;
    let d = psi.dim() as f64;
    let c = one_minus_cos(theta);
    let s = psi.amplitude_sum();
    let amp = psi.amplitude(x);
    Ok((s * s - 2.0 * c * s * amp.re + 2.0 * c * amp.norm_sqr()) / d)
}

fn slots_from_raw(a: Complex64, b: Complex64) -> [f64; 6] {
    let i = Complex64::new(0.0, 1.0);
    [
        (a + b).norm_sqr() / 2.0,
        (a - b).norm_sqr() / 2.0,
        a.norm_sqr(),
        b.norm_sqr(),
        (a - i * b).norm_sqr() / 2.0,
        (a + i * b).norm_sqr() / 2.0,
    ]
}

fn assemble(slots: [f64; 6], kind: ProbabilityKind, x: usize, theta: f64) -> OutcomeProbabilities {
    OutcomeProbabilities {
        p_plus: slots[0],
        p_minus: slots[1],
        p_zero: slots[2],
        p_one: slots[3],
        p_left: slots[4],
        p_right: slots[5],
        kind,
        x,
        theta,
    }
}

/// Joint probabilities of (post-selection success AND pointer outcome), read
/// directly off the raw pointer. Each dichotomic pair sums to `⟨φ|φ⟩`, not 1.
///
/// A renormalized pointer is rejected: its projections no longer carry the
/// success probability, so calling them joint probabilities would be wrong.
pub fn joint_probabilities(phi: &PointerState) -> Result<OutcomeProbabilities, ProtocolError> {
    if phi.normalized {
        return Err(ProtocolError::NormalizedInputRejected);
    }
    Ok(assemble(
        slots_from_raw(phi.a, phi.b),
        ProbabilityKind::Joint,
        phi.x,
        phi.theta,
    ))
}

/// Conditional probabilities of a pointer outcome GIVEN post-selection
/// success: the joint slots divided by `⟨φ|φ⟩`. Each dichotomic pair sums
/// to 1. This is what outcome frequencies on the surviving ensemble estimate.
pub fn conditional_probabilities(
    phi: &PointerState,
) -> Result<OutcomeProbabilities, ProtocolError> {
    let n = phi.norm_sqr();
    if n <= POINTER_NORM_FLOOR {
        return Err(ProtocolError::DegeneratePointer(n));
    }
    let slots = slots_from_raw(phi.a, phi.b).map(|p| p / n);
    Ok(assemble(
        slots,
        ProbabilityKind::Conditional,
        phi.x,
        phi.theta,
    ))
}

/// Outcome probabilities of the requested kind for every position
/// `x = 0..d−1`, in order.
pub fn all_positions(
    psi: &WaveFunction,
    theta: f64,
    kind: ProbabilityKind,
) -> Result<Vec<OutcomeProbabilities>, ProtocolError> {
    (0..psi.dim())
        .map(|x| {
            let phi = pointer_state(psi, x, theta)?;
            match kind {
                ProbabilityKind::Joint => joint_probabilities(&phi),
                ProbabilityKind::Conditional => conditional_probabilities(&phi),
            }
        })
        .collect()
}

/// All per-position norm factors at one coupling strength.
pub fn norm_factors(psi: &WaveFunction, theta: f64) -> Result<Vec<f64>, ProtocolError> {
    (0..psi.dim()).map(|x| norm_factor(psi, x, theta)).collect()
}

/// Spread `max_x ⟨φ|φ⟩ − min_x ⟨φ|φ⟩` of the norm factor over positions; the
/// quantity that vanishes as `θ → 0` and makes weak-limit reconstruction from
/// conditionals unbiased.
pub fn norm_spread(psi: &WaveFunction, theta: f64) -> Result<f64, ProtocolError> {
    let factors = norm_factors(psi, theta)?;
    let max = factors.iter().cloned().fold(f64::MIN, f64::max);
    let min = factors.iter().cloned().fold(f64::MAX, f64::min);
    Ok(max - min)
}
