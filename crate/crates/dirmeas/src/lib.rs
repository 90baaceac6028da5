//! Simulation and analysis of direct wave-function measurement with a qubit
//! pointer.
//!
//! A system in an unknown `d`-dimensional state is coupled, one position at a
//! time, to a pointer qubit with adjustable strength, then post-selected on
//! the uniform superposition. The crate computes the exact joint and
//! conditional pointer statistics of that protocol, simulates the counting
//! experiment shot by shot, and reconstructs the state from either kind of
//! statistics — making the difference between the two measurable: conditional
//! frequencies (the only thing a post-selected counting experiment yields)
//! carry a position-dependent normalization that biases the strong-coupling
//! reconstruction, a bias that vanishes quadratically in the weak limit and
//! is absent from the weak-value route.
//!
//! Module map:
//!
//! - [`state`] — wave functions, phase convention, Haar sampling, metrics
//! - [`protocol`] — pointer coupling, post-selection, joint/conditional probabilities
//! - [`experiment`] — finite-shot Monte Carlo with explicit post-selection failures
//! - [`reconstruct`] — strong-coupling inversion and weak-value estimators
//! - [`analysis`] — sweeps, scaling fits, identity audits
//! - [`oracle`] — brute-force full-Hilbert-space reference used by the tests

pub mod analysis;
pub mod experiment;
pub mod oracle;
pub mod protocol;
pub mod reconstruct;
pub mod state;

pub use analysis::{AnalysisError, IdentityAudit, SweepRecord};
pub use experiment::{
    Basis, CountsRow, CountsTable, EmpiricalProbabilities, ExperimentError,
};
pub use protocol::{
    OutcomeProbabilities, PointerState, ProbabilityKind, ProtocolError,
};
pub use reconstruct::{
    ReconstructError, ReconstructionMode, ReconstructionReport, StrongMode,
};
pub use state::{StateError, StateMetrics, WaveFunction};
