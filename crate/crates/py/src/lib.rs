//! Python bindings: states, operators, two-state vectors, device moments,
//! estimators, scenarios and the Monte Carlo pipeline.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use weaksim_core as core;

fn err(e: core::Error) -> PyErr {
    if e.is_physics() {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

/// A pure state over a tensor product of finite subsystems.
#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
struct Ket {
    inner: core::Ket,
}

#[pymethods]
impl Ket {
    #[new]
    fn new(amplitudes: Vec<Complex64>, dims: Vec<usize>) -> PyResult<Self> {
        Ok(Ket {
            inner: core::Ket::new(amplitudes, dims).map_err(err)?,
        })
    }

    #[staticmethod]
    fn basis(dims: Vec<usize>, index: usize) -> PyResult<Self> {
        Ok(Ket {
            inner: core::Ket::basis(&dims, index).map_err(err)?,
        })
    }

    #[staticmethod]
    fn tensor(factors: Vec<Ket>) -> PyResult<Self> {
        let kets: Vec<core::Ket> = factors.into_iter().map(|k| k.inner).collect();
        Ok(Ket {
            inner: core::tensor(&kets).map_err(err)?,
        })
    }

    #[getter]
    fn amplitudes(&self) -> Vec<Complex64> {
        self.inner.amps().to_vec()
    }

    #[getter]
    fn dims(&self) -> Vec<usize> {
        self.inner.dims().to_vec()
    }

    fn norm(&self) -> f64 {
        self.inner.norm()
    }

    fn normalized(&self) -> Ket {
        Ket {
            inner: self.inner.normalized(),
        }
    }

    fn inner_with(&self, ket: &Ket) -> PyResult<Complex64> {
        core::inner(&self.inner, &ket.inner).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Ket(dims={:?}, norm={})", self.inner.dims(), self.inner.norm())
    }
}

/// A dense (typically hermitian) operator.
#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
struct Operator {
    inner: core::Operator,
}

#[pymethods]
impl Operator {
    #[new]
    fn new(rows: Vec<Vec<Complex64>>, dims: Vec<usize>) -> PyResult<Self> {
        Ok(Operator {
            inner: core::Operator::from_rows(&rows, dims).map_err(err)?,
        })
    }

    #[staticmethod]
    fn sigma_z() -> Self {
        Operator {
            inner: core::Operator::sigma_z(),
        }
    }

    #[staticmethod]
    fn spin1_z() -> Self {
        Operator {
            inner: core::Operator::spin1_z(),
        }
    }

    #[staticmethod]
    fn identity(dims: Vec<usize>) -> Self {
        Operator {
            inner: core::Operator::identity(&dims),
        }
    }

    /// Lifts this single-site operator to the full space.
    fn embed(&self, site: usize, dims: Vec<usize>) -> PyResult<Operator> {
        Ok(Operator {
            inner: core::embed(&self.inner, site, &dims).map_err(err)?,
        })
    }

    fn plus(&self, other: &Operator) -> PyResult<Operator> {
        Ok(Operator {
            inner: self.inner.add(&other.inner).map_err(err)?,
        })
    }

    fn times(&self, other: &Operator) -> PyResult<Operator> {
        Ok(Operator {
            inner: self.inner.matmul(&other.inner).map_err(err)?,
        })
    }

    fn apply(&self, ket: &Ket) -> PyResult<Ket> {
        Ok(Ket {
            inner: self.inner.apply(&ket.inner).map_err(err)?,
        })
    }

    fn eigenvalues(&self) -> PyResult<Vec<f64>> {
        Ok(core::eigendecompose(&self.inner)
            .map_err(err)?
            .eigenvalues())
    }

    #[getter]
    fn hermitian(&self) -> bool {
        self.inner.is_hermitian()
    }

    fn __repr__(&self) -> String {
        format!("Operator(dims={:?})", self.inner.dims())
    }
}

/// A pre- and post-selected system.
#[pyclass(frozen)]
struct TwoStateVector {
    inner: core::TwoStateVector,
}

#[pymethods]
impl TwoStateVector {
    #[new]
    fn new(pre: &Ket, post: &Ket) -> PyResult<Self> {
        Ok(TwoStateVector {
            inner: core::TwoStateVector::new(pre.inner.clone(), post.inner.clone())
                .map_err(err)?,
        })
    }

    fn overlap(&self) -> Complex64 {
        self.inner.overlap()
    }

    fn weak_value(&self, op: &Operator) -> PyResult<Complex64> {
        self.inner.weak_value(&op.inner).map_err(err)
    }

    /// ABL outcome distribution of a strong intermediate measurement as
    /// (eigenvalue, probability) pairs.
    fn abl_probabilities(&self, op: &Operator) -> PyResult<Vec<(f64, f64)>> {
        let dec = core::eigendecompose(&op.inner).map_err(err)?;
        core::abl_probabilities(&self.inner, &dec).map_err(err)
    }

    fn strong_expectation(&self, op: &Operator) -> PyResult<f64> {
        let dec = core::eigendecompose(&op.inner).map_err(err)?;
        core::strong_expectation(&self.inner, &dec).map_err(err)
    }
}

/// Post-selection probability plus pointer position/momentum moments.
#[pyclass(frozen)]
struct MomentSet {
    inner: core::MomentSet,
}

#[pymethods]
impl MomentSet {
    #[getter]
    fn p_postselect(&self) -> f64 {
        self.inner.p_postselect
    }

    #[getter]
    fn mean_q(&self) -> Vec<f64> {
        self.inner.mean_q.clone()
    }

    #[getter]
    fn mean_p(&self) -> Vec<f64> {
        self.inner.mean_p.clone()
    }

    #[getter]
    fn corr_qq(&self) -> Vec<Vec<f64>> {
        self.inner.corr_qq.clone()
    }

    #[getter]
    fn corr_pp(&self) -> Vec<Vec<f64>> {
        self.inner.corr_pp.clone()
    }

    #[getter]
    fn width(&self) -> f64 {
        self.inner.width
    }

    fn __repr__(&self) -> String {
        format!(
            "MomentSet(p_postselect={}, mean_q={:?})",
            self.inner.p_postselect, self.inner.mean_q
        )
    }
}

/// Estimator output over a sampled ensemble.
#[pyclass(frozen)]
struct EnsembleStats {
    inner: core::EnsembleStats,
}

#[pymethods]
impl EnsembleStats {
    #[getter]
    fn n_total(&self) -> u64 {
        self.inner.n_total
    }

    #[getter]
    fn n_postselected(&self) -> u64 {
        self.inner.n_postselected
    }

    #[getter]
    fn estimate(&self) -> f64 {
        self.inner.estimate
    }

    #[getter]
    fn stderr(&self) -> f64 {
        self.inner.stderr
    }

    #[getter]
    fn estimator(&self) -> String {
        self.inner.estimator.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "EnsembleStats(estimate={}, stderr={}, n_postselected={})",
            self.inner.estimate, self.inner.stderr, self.inner.n_postselected
        )
    }
}

fn scenario(name: &str) -> PyResult<core::ResolvedScenario> {
    core::ScenarioSpec::builtin(name)
        .and_then(|s| s.resolve())
        .map_err(err)
}

fn scenario_state(name: &str, delta: f64) -> PyResult<core::BranchedPointerState> {
    let resolved = scenario(name)?;
    let cfg = resolved.pointer_config(delta).map_err(err)?;
    let coupled =
        core::couple(resolved.tsv.pre(), &resolved.observables, &cfg).map_err(err)?;
    core::postselect(&coupled, resolved.tsv.post()).map_err(err)
}

/// Names of the builtin scenarios.
#[pyfunction]
fn builtin_scenarios() -> Vec<String> {
    core::BUILTIN_NAMES.iter().map(|s| s.to_string()).collect()
}

/// Scenario definition as a JSON string.
#[pyfunction]
fn scenario_json(name: &str) -> PyResult<String> {
    Ok(core::ScenarioSpec::builtin(name).map_err(err)?.to_json())
}

/// Labelled weak values of a builtin scenario.
#[pyfunction]
fn weak_values(name: &str) -> PyResult<Vec<(String, Complex64)>> {
    scenario(name)?.weak_value_rows().map_err(err)
}

/// Closed-form device moments of a scenario at the given pointer width.
#[pyfunction]
fn moments(name: &str, delta: f64) -> PyResult<MomentSet> {
    Ok(MomentSet {
        inner: core::moments_closed_form(&scenario_state(name, delta)?),
    })
}

/// Grid-oracle device moments (independent quadrature path).
#[pyfunction]
fn grid_oracle_moments(name: &str, delta: f64) -> PyResult<MomentSet> {
    let state = scenario_state(name, delta)?;
    Ok(MomentSet {
        inner: core::pointer::oracle::moments_grid_oracle(
            &state,
            &core::pointer::oracle::GridSpec::default(),
        )
        .map_err(err)?,
    })
}

/// Alice's success probability in the spin-1 causality demonstration;
/// `action` is "nothing" or "flip_to_one".
#[pyfunction]
#[pyo3(signature = (action, nonlocal_measurement = true))]
fn causality_probability(action: &str, nonlocal_measurement: bool) -> PyResult<f64> {
    let action: core::BobAction = action.parse().map_err(err)?;
    Ok(core::alice_success_probability(action, nonlocal_measurement))
}

/// Eigenvalue-by-eigenvalue check of the two-qubit modular-sum identity.
#[pyfunction]
fn modsum_identity_check() -> bool {
    core::modsum_identity_check()
}

/// End-to-end Monte Carlo run; deterministic for a fixed seed.
#[pyfunction]
fn run_experiment(
    name: &str,
    estimator: &str,
    delta: f64,
    shots: u64,
    seed: u64,
) -> PyResult<EnsembleStats> {
    let resolved = scenario(name)?;
    let kind: core::EstimatorKind = estimator.parse().map_err(err)?;
    Ok(EnsembleStats {
        inner: core::run_experiment(&resolved, kind, delta, shots, seed).map_err(err)?,
    })
}

/// Post-selected ensemble size for a target relative uncertainty.
#[pyfunction]
fn required_ensemble(
    name: &str,
    estimator: &str,
    delta: f64,
    target: f64,
    rel_uncertainty: f64,
) -> PyResult<u64> {
    let state = scenario_state(name, delta)?;
    let kind: core::EstimatorKind = estimator.parse().map_err(err)?;
    core::required_ensemble(&state, kind, target, rel_uncertainty).map_err(err)
}

#[pymodule]
fn weaksim(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Ket>()?;
    m.add_class::<Operator>()?;
    m.add_class::<TwoStateVector>()?;
    m.add_class::<MomentSet>()?;
    m.add_class::<EnsembleStats>()?;
    m.add_function(wrap_pyfunction!(builtin_scenarios, m)?)?;
    m.add_function(wrap_pyfunction!(scenario_json, m)?)?;
    m.add_function(wrap_pyfunction!(weak_values, m)?)?;
    m.add_function(wrap_pyfunction!(moments, m)?)?;
    m.add_function(wrap_pyfunction!(grid_oracle_moments, m)?)?;
    m.add_function(wrap_pyfunction!(causality_probability, m)?)?;
    m.add_function(wrap_pyfunction!(modsum_identity_check, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(required_ensemble, m)?)?;
    Ok(())
}
