//! Finite-shot Monte Carlo simulation of the operational experiment.
//!
//! Each trial prepares the state, couples the pointer at one position, and
//! post-selects: the trial *succeeds* with probability equal to the norm
//! factor and only then yields a pointer outcome in the configured basis.
//! Failures are tallied, never silently dropped. Frequencies over the
//! surviving ensemble estimate conditional probabilities — normalization is
//! built into this kind of statistics, which is exactly why the raw joint
//! probabilities are not what a counting experiment returns.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::protocol::{
    self, OutcomeProbabilities, ProbabilityKind, ProtocolError, POINTER_NORM_FLOOR,
};
use crate::state::WaveFunction;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("no post-selection successes at x={x}, basis={basis:?}; conditional frequency undefined")]
    InsufficientStatistics { x: usize, basis: Basis },
    #[error("shots must be at least 1")]
    NoShots,
    #[error("counts table is missing rows for position {x}")]
    IncompleteTable { x: usize },
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

/// Pointer analyzer setting. Each basis is a separate experimental
/// configuration with its own shot budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    X,
    Y,
    Z,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::X, Basis::Y, Basis::Z];

    pub fn index(self) -> usize {
        match self {
            Basis::X => 0,
            Basis::Y => 1,
            Basis::Z => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Basis::X => "X",
            Basis::Y => "Y",
            Basis::Z => "Z",
        }
    }

    /// Names of the two outcomes counted for this basis, in slot order.
    pub fn outcome_labels(self) -> (&'static str, &'static str) {
        match self {
            Basis::X => ("plus", "minus"),
            Basis::Y => ("left", "right"),
            Basis::Z => ("zero", "one"),
        }
    }

    /// The two conditional-probability slots for this basis.
    fn pair(self, p: &OutcomeProbabilities) -> (f64, f64) {
        match self {
            Basis::X => (p.p_plus, p.p_minus),
            Basis::Y => (p.p_left, p.p_right),
            Basis::Z => (p.p_zero, p.p_one),
        }
    }
}

/// Tallies of one `(position, basis)` setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountsRow {
    pub x: usize,
    pub basis: Basis,
    pub shots: u64,
    /// Trials that passed post-selection.
    pub successes: u64,
    /// Outcome tallies among the successes, in [`Basis::outcome_labels`] order.
    pub counts: [u64; 2],
    /// Substream seed this row was generated from.
    pub seed: u64,
}

/// All `(x, basis)` rows of one experiment, ordered by `x` then `X, Y, Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountsTable {
    pub dim: usize,
    pub theta: f64,
    pub shots_per_setting: u64,
    pub master_seed: u64,
    pub rows: Vec<CountsRow>,
}

impl CountsTable {
    pub fn row(&self, x: usize, basis: Basis) -> Option<&CountsRow> {
        self.rows.get(x * 3 + basis.index())
    }
}

/// Conditional frequency estimates at one position, with per-slot standard
/// errors `√(f(1−f)/successes)` from the basis run that produced each slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalProbabilities {
    /// Frequency estimates, `kind = Conditional`.
    pub probs: OutcomeProbabilities,
    pub se_plus: f64,
    pub se_minus: f64,
    pub se_zero: f64,
    pub se_one: f64,
    pub se_left: f64,
    pub se_right: f64,
}

impl EmpiricalProbabilities {
    pub fn std_errors(&self) -> [f64; 6] {
        [
            self.se_plus,
            self.se_minus,
            self.se_zero,
            self.se_one,
            self.se_left,
            self.se_right,
        ]
    }

    pub fn max_std_error(&self) -> f64 {
        self.std_errors().into_iter().fold(0.0, f64::max)
    }
}

/// SplitMix64 finalizer; avalanches a seed into a decorrelated stream.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a decorrelated child seed from a master seed and a stream index.
pub(crate) fn mix(master: u64, stream: u64) -> u64 {
    splitmix64(master ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// The per-`(x, basis)` substream seed: stream index `x·3 + basis`.
pub fn substream_seed(master: u64, x: usize, basis: Basis) -> u64 {
    mix(master, (x * 3 + basis.index()) as u64)
}

/// Run `shots` trials at one `(position, basis)` setting.
///
/// Each trial is a two-stage draw: post-selection succeeds with probability
/// equal to the norm factor, and on success the outcome follows the
/// conditional probabilities restricted to `basis`. (A single categorical
/// draw over `{fail, outcome₁, outcome₂}` with the joint probabilities would
/// be distributionally identical.)
pub fn run_trials(
    psi: &WaveFunction,
    theta: f64,
    x: usize,
    basis: Basis,
    shots: u64,
    seed: u64,
) -> Result<CountsRow, ExperimentError> {
    if shots == 0 {
        return Err(ExperimentError::NoShots);
    }
    let success_probability = protocol::norm_factor(psi, x, theta)?;
    let phi = protocol::pointer_state(psi, x, theta)?;
    let p_first = if phi.norm_sqr() > POINTER_NORM_FLOOR {
        basis.pair(&protocol::conditional_probabilities(&phi)?).0
    } else {
        0.0
    };

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut successes = 0u64;
    let mut counts = [0u64; 2];
    for _ in 0..shots {
        if rng.random::<f64>() < success_probability {
            successes += 1;
            if rng.random::<f64>() < p_first {
                counts[0] += 1;
            } else {
                counts[1] += 1;
            }
        }
    }
    Ok(CountsRow {
        x,
        basis,
        shots,
        successes,
        counts,
        seed,
    })
}

/// Run the full experiment: every position, all three bases, each from its
/// own substream so rows are independent of execution order.
pub fn run_experiment(
    psi: &WaveFunction,
    theta: f64,
    shots_per_setting: u64,
    master_seed: u64,
) -> Result<CountsTable, ExperimentError> {
    let mut rows = Vec::with_capacity(psi.dim() * 3);
    for x in 0..psi.dim() {
        for basis in Basis::ALL {
            let seed = substream_seed(master_seed, x, basis);
            rows.push(run_trials(psi, theta, x, basis, shots_per_setting, seed)?);
        }
    }
    Ok(CountsTable {
        dim: psi.dim(),
        theta,
        shots_per_setting,
        master_seed,
        rows,
    })
}

fn frequency_pair(row: &CountsRow) -> Result<(f64, f64, f64, f64), ExperimentError> {
    if row.successes == 0 {
        return Err(ExperimentError::InsufficientStatistics {
            x: row.x,
            basis: row.basis,
        });
    }
    let n = row.successes as f64;
    let f0 = row.counts[0] as f64 / n;
    let f1 = row.counts[1] as f64 / n;
    let se0 = (f0 * (1.0 - f0) / n).sqrt();
    let se1 = (f1 * (1.0 - f1) / n).sqrt();
    Ok((f0, f1, se0, se1))
}

/// Conditional frequency estimates per position. Errors with
/// [`ExperimentError::InsufficientStatistics`] when any consumed setting has
/// zero successes — the operational signal that this conditional cannot be
/// estimated at all.
pub fn empirical_conditional(
    table: &CountsTable,
) -> Result<Vec<EmpiricalProbabilities>, ExperimentError> {
    (0..table.dim)
        .map(|x| {
            let row_x = table.row(x, Basis::X).ok_or(ExperimentError::IncompleteTable { x })?;
            let row_y = table.row(x, Basis::Y).ok_or(ExperimentError::IncompleteTable { x })?;
            let row_z = table.row(x, Basis::Z).ok_or(ExperimentError::IncompleteTable { x })?;
            let (p_plus, p_minus, se_plus, se_minus) = frequency_pair(row_x)?;
            let (p_left, p_right, se_left, se_right) = frequency_pair(row_y)?;
            let (p_zero, p_one, se_zero, se_one) = frequency_pair(row_z)?;
            Ok(EmpiricalProbabilities {
                probs: OutcomeProbabilities {
                    p_plus,
                    p_minus,
                    p_zero,
                    p_one,
                    p_left,
                    p_right,
                    kind: ProbabilityKind::Conditional,
                    x,
                    theta: table.theta,
                },
                se_plus,
                se_minus,
                se_zero,
                se_one,
                se_left,
                se_right,
            })
        })
        .collect()
}

/// Joint frequency estimates `count/shots` per position.
///
/// This estimator divides by the *attempted* ensemble size, so it only exists
/// for an experimenter who trusts an absolute calibration of how many trials
/// were attempted; conditional frequencies alone never determine it. Provided
/// as a non-default mode for comparison studies.
pub fn empirical_joint(table: &CountsTable) -> Result<Vec<OutcomeProbabilities>, ExperimentError> {
    (0..table.dim)
        .map(|x| {
            let row_x = table.row(x, Basis::X).ok_or(ExperimentError::IncompleteTable { x })?;
            let row_y = table.row(x, Basis::Y).ok_or(ExperimentError::IncompleteTable { x })?;
            let row_z = table.row(x, Basis::Z).ok_or(ExperimentError::IncompleteTable { x })?;
            let f = |row: &CountsRow, slot: usize| row.counts[slot] as f64 / row.shots as f64;
            Ok(OutcomeProbabilities {
                p_plus: f(row_x, 0),
                p_minus: f(row_x, 1),
                p_left: f(row_y, 0),
                p_right: f(row_y, 1),
                p_zero: f(row_z, 0),
                p_one: f(row_z, 1),
                kind: ProbabilityKind::Joint,
                x,
                theta: table.theta,
            })
        })
        .collect()
}
