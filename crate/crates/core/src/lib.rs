//! Simulation of weak and strong measurements on pre- and post-selected
//! quantum systems, with local-product and entangled-sum Gaussian pointer
//! devices, weak-value estimators, and shot-level Monte Carlo.

pub mod error;
pub mod estimators;
pub mod pointer;
pub mod qstate;
pub mod sampling;
pub mod scenarios;
pub mod tsvf;

pub use error::{Error, Result};
pub use estimators::{
    estimate_direct, estimate_resch_lundeen, estimate_resch_steinberg, weak_value_from_moments,
    EstimateReport, EstimatorKind,
};
pub use pointer::{
    couple, couple_observable, fidelity, measure_strong, moments_closed_form, postselect, Branch,
    BranchedPointerState, CoupledState, MomentSet, PointerConfig, StrongOutcome, Topology,
};
pub use qstate::{
    eigendecompose, embed, inner, joint_eigenbasis, matrix_element, tensor, Ket, Operator,
    SpectralDecomposition, C64,
};
pub use sampling::{
    required_ensemble, required_total_trials, run_experiment, sample_postselected, sample_shots,
    Basis, EnsembleStats, ShotRecord,
};
pub use scenarios::{
    alice_success_probability, spin1_causality, BobAction, ObservableSpec, ResolvedScenario,
    ScenarioSpec, BUILTIN_NAMES,
};
pub use tsvf::{
    abl_probabilities, joint_strong_expectation, modsum_identity_check, strong_expectation,
    Combine, TwoStateVector,
};
