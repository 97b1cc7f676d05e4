//! Shot-level Monte Carlo: post-selection events, pointer readings,
//! estimator statistics, and the ensemble sizes required to reach a target
//! statistical uncertainty.

pub mod rng;
pub mod sampler;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::EstimatorKind;
use crate::pointer::oracle::GridSpec;
use crate::pointer::{couple, moments_closed_form, postselect, BranchedPointerState, MomentSet};
use crate::scenarios::ResolvedScenario;
use crate::sampling::rng::CounterRng;
use crate::sampling::sampler::GridSampler;

/// Salt separating the momentum-basis shot streams from the position ones.
const MOMENTUM_SALT: u64 = 0x4D4F4D454E54554D;
/// Pilot run used to estimate per-shot variances of joint statistics.
const PILOT_SHOTS: u64 = 10_000;
const PILOT_SEED: u64 = 0x70696C6F74;

/// Which conjugate variable the detectors read out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Position,
    Momentum,
}

impl std::str::FromStr for Basis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "position" => Ok(Basis::Position),
            "momentum" => Ok(Basis::Momentum),
            other => Err(Error::InvalidConfig(format!("unknown basis `{other}`"))),
        }
    }
}

/// One experimental trial. Readings are present exactly when the
/// post-selection succeeded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub index: u64,
    pub postselected: bool,
    pub readings: Option<Vec<f64>>,
}

/// Aggregated estimator output over an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub n_total: u64,
    pub n_postselected: u64,
    pub estimate: f64,
    pub stderr: f64,
    pub estimator: String,
}

/// Draws `n` trials. Each shot succeeds post-selection with probability
/// `p_postselect`; on success the reading comes from the normalized device
/// density in the requested basis. Deterministic given the seed.
pub fn sample_shots(
    state: &BranchedPointerState,
    basis: Basis,
    n: u64,
    seed: u64,
) -> Result<Vec<ShotRecord>> {
    let sampler = GridSampler::new(state, basis, &GridSpec::default())?;
    let p = state.p_postselect();
    Ok((0..n)
        .into_par_iter()
        .map(|index| {
            let mut rng = CounterRng::for_shot(seed, index);
            let postselected = rng.next_f64() < p;
            let readings = postselected.then(|| sampler.sample(&mut rng));
            ShotRecord {
                index,
                postselected,
                readings,
            }
        })
        .collect())
}

/// Draws `n` readings conditioned on post-selection success.
pub fn sample_postselected(
    state: &BranchedPointerState,
    basis: Basis,
    n: u64,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let sampler = GridSampler::new(state, basis, &GridSpec::default())?;
    Ok((0..n)
        .into_par_iter()
        .map(|index| {
            let mut rng = CounterRng::for_shot(seed, index);
            sampler.sample(&mut rng)
        })
        .collect())
}

fn mean_and_var(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var)
}

/// Per-(post-selected)-shot variance of the estimator's statistic:
/// analytic from moments for the direct estimators, a seeded pilot Monte
/// Carlo run for the joint ones.
pub fn per_shot_variance(
    state: &BranchedPointerState,
    moments: &MomentSet,
    estimator: EstimatorKind,
) -> Result<f64> {
    match estimator {
        EstimatorKind::Direct | EstimatorKind::SumRule => {
            let d = moments.n_coordinates();
            let mut second = 0.0;
            let mut first = 0.0;
            for i in 0..d {
                first += moments.mean_q[i];
                for j in 0..d {
                    second += moments.corr_qq[i][j];
                }
            }
            Ok(second - first * first)
        }
        EstimatorKind::ReschSteinberg => {
            let qs = sample_postselected(state, Basis::Position, PILOT_SHOTS, PILOT_SEED)?;
            let stats: Vec<f64> = qs.iter().map(|q| 2.0 * q[0] * q[1]).collect();
            Ok(mean_and_var(&stats).1)
        }
        EstimatorKind::ReschLundeen => {
            let qs = sample_postselected(state, Basis::Position, PILOT_SHOTS, PILOT_SEED)?;
            let ps = sample_postselected(
                state,
                Basis::Momentum,
                PILOT_SHOTS,
                PILOT_SEED ^ MOMENTUM_SALT,
            )?;
            let qvar = mean_and_var(&qs.iter().map(|q| q[0] * q[1]).collect::<Vec<_>>()).1;
            let pvar = mean_and_var(&ps.iter().map(|p| p[0] * p[1]).collect::<Vec<_>>()).1;
            let d4 = moments.width.powi(4);
            Ok(qvar + d4 * d4 * pvar)
        }
    }
}

/// Post-selected ensemble size for a target relative statistical
/// uncertainty: `n = ceil((σ_shot / (rel · |target|))²)` with `σ_shot` the
/// per-shot standard deviation of the estimator's statistic.
pub fn required_ensemble(
    state: &BranchedPointerState,
    estimator: EstimatorKind,
    target: f64,
    rel_uncertainty: f64,
) -> Result<u64> {
    if target == 0.0 {
        return Err(Error::ZeroTarget);
    }
    if rel_uncertainty <= 0.0 || rel_uncertainty.is_nan() {
        return Err(Error::InvalidConfig(
            "relative uncertainty must be positive".into(),
        ));
    }
    let moments = moments_closed_form(state);
    let variance = per_shot_variance(state, &moments, estimator)?;
    let allowed = rel_uncertainty * target.abs();
    Ok((variance / (allowed * allowed)).ceil().max(1.0) as u64)
}

/// Total trials needed for the expected post-selected count to reach
/// `postselected`.
pub fn required_total_trials(state: &BranchedPointerState, postselected: u64) -> u64 {
    (postselected as f64 / state.p_postselect()).ceil() as u64
}

/// End-to-end pipeline: couple, post-select, sample `n` trials, estimate.
/// Reproducible bit for bit from the seed.
pub fn run_experiment(
    scenario: &ResolvedScenario,
    estimator: EstimatorKind,
    delta: f64,
    n: u64,
    seed: u64,
) -> Result<EnsembleStats> {
    if n == 0 {
        return Err(Error::InvalidConfig("need at least one shot".into()));
    }
    let config = scenario.pointer_config(delta)?;
    let coupled = couple(scenario.tsv.pre(), &scenario.observables, &config)?;
    let state = postselect(&coupled, scenario.tsv.post())?;

    let position_shots = sample_shots(&state, Basis::Position, n, seed)?;
    let readings: Vec<&Vec<f64>> = position_shots
        .iter()
        .filter_map(|s| s.readings.as_ref())
        .collect();
    let n_postselected = readings.len() as u64;
    if n_postselected < 2 {
        return Err(Error::InsufficientStatistics {
            postselected: n_postselected,
            total: n,
        });
    }

    let (estimate, stderr) = match estimator {
        EstimatorKind::Direct | EstimatorKind::SumRule => {
            let sums: Vec<f64> = readings.iter().map(|q| q.iter().sum()).collect();
            let (mean, var) = mean_and_var(&sums);
            (mean, (var / sums.len() as f64).sqrt())
        }
        EstimatorKind::ReschSteinberg => {
            if state.n_coordinates() < 2 {
                return Err(Error::WrongTopology);
            }
            let embedded = scenario.embedded_observables()?;
            let a_w = scenario.tsv.weak_value(&embedded[0])?;
            let b_w = scenario.tsv.weak_value(&embedded[1])?;
            let stats: Vec<f64> = readings.iter().map(|q| 2.0 * q[0] * q[1]).collect();
            let (mean, var) = mean_and_var(&stats);
            (
                mean - (a_w.conj() * b_w).re,
                (var / stats.len() as f64).sqrt(),
            )
        }
        EstimatorKind::ReschLundeen => {
            if state.n_coordinates() < 2 {
                return Err(Error::WrongTopology);
            }
            let momentum_shots = sample_shots(&state, Basis::Momentum, n, seed ^ MOMENTUM_SALT)?;
            let preadings: Vec<&Vec<f64>> = momentum_shots
                .iter()
                .filter_map(|s| s.readings.as_ref())
                .collect();
            if preadings.len() < 2 {
                return Err(Error::InsufficientStatistics {
                    postselected: preadings.len() as u64,
                    total: n,
                });
            }
            let qstats: Vec<f64> = readings.iter().map(|q| q[0] * q[1]).collect();
            let pstats: Vec<f64> = preadings.iter().map(|p| p[0] * p[1]).collect();
            let (qmean, qvar) = mean_and_var(&qstats);
            let (pmean, pvar) = mean_and_var(&pstats);
            let d4 = delta.powi(4);
            (
                qmean - d4 * pmean,
                (qvar / qstats.len() as f64 + d4 * d4 * pvar / pstats.len() as f64).sqrt(),
            )
        }
    };

    Ok(EnsembleStats {
        n_total: n,
        n_postselected,
        estimate,
        stderr,
        estimator: estimator.name().to_string(),
    })
}
