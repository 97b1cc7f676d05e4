//! Gaussian measuring-device models: impulsive von Neumann coupling,
//! local-product and entangled-sum pointer topologies, post-selection, and
//! closed-form moments of the final device state.
//!
//! One Gaussian convention is used throughout: a pointer of width `Δ` has
//! amplitude `∝ exp(-Q²/(2Δ²))`, so position variance is `Δ²/2`, momentum
//! variance is `1/(2Δ²)` (ħ = 1), and two branches displaced by `δ` overlap
//! with the kernel `exp(-|δ|²/(4Δ²))`.

pub mod oracle;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{embed, inner, joint_eigenbasis, Ket, Operator, C64};

/// Gap-to-width ratio below which a measurement no longer resolves
/// adjacent eigenvalues sharply.
pub const STRONG_REGIME_RATIO: f64 = 10.0;

/// Branch amplitudes this far below the selection scale are dropped.
const BRANCH_EPS: f64 = 1e-14;

/// Pointer arrangement of the composite measuring device.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    /// One independent pointer per local observable.
    LocalProduct,
    /// Pointers prepared with sharp ΣQ and equal momenta; behaves as a
    /// single effective coordinate S = ΣQ coupled to the sum observable.
    EntangledSum,
}

/// Width, coupling and topology of the measuring device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointerConfig {
    pub topology: Topology,
    pub n_pointers: usize,
    /// Gaussian width Δ in dimensionless pointer units.
    pub width: f64,
    /// Impulse integral g of the coupling; pointer shifts are g·eigenvalue.
    pub coupling: f64,
}

impl PointerConfig {
    pub fn local(n_pointers: usize, width: f64) -> Result<Self> {
        PointerConfig::new(Topology::LocalProduct, n_pointers, width, 1.0)
    }

    pub fn entangled_sum(n_pointers: usize, width: f64) -> Result<Self> {
        PointerConfig::new(Topology::EntangledSum, n_pointers, width, 1.0)
    }

    pub fn new(topology: Topology, n_pointers: usize, width: f64, coupling: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "pointer width must be positive, got {width}"
            )));
        }
        if n_pointers == 0 {
            return Err(Error::InvalidConfig("need at least one pointer".into()));
        }
        if topology == Topology::EntangledSum && n_pointers < 2 {
            return Err(Error::InvalidConfig(
                "entangled-sum device needs at least two pointers".into(),
            ));
        }
        Ok(PointerConfig {
            topology,
            n_pointers,
            width,
            coupling,
        })
    }

    pub fn with_coupling(mut self, coupling: f64) -> Self {
        self.coupling = coupling;
        self
    }

    /// Number of effective device coordinates: the entangled-sum device
    /// collapses to the single coordinate S.
    pub fn n_coordinates(&self) -> usize {
        match self.topology {
            Topology::LocalProduct => self.n_pointers,
            Topology::EntangledSum => 1,
        }
    }
}

/// System-device state after the impulsive coupling, before post-selection:
/// a finite list of (system branch, pointer shift vector).
#[derive(Debug, Clone)]
pub struct CoupledState {
    branches: Vec<(Ket, Vec<f64>)>,
    config: PointerConfig,
    pre_norm_sqr: f64,
}

impl CoupledState {
    pub fn branches(&self) -> &[(Ket, Vec<f64>)] {
        &self.branches
    }

    pub fn config(&self) -> &PointerConfig {
        &self.config
    }

    pub fn pre_norm_sqr(&self) -> f64 {
        self.pre_norm_sqr
    }
}

/// Expands `pre` in the joint eigenbasis of the coupled observables; each
/// branch acquires the pointer shift g·eigenvalue (one pointer per
/// observable, or the single sum coordinate for the entangled device).
pub fn couple(
    pre: &Ket,
    observables: &[(Operator, usize)],
    config: &PointerConfig,
) -> Result<CoupledState> {
    if observables.is_empty() {
        return Err(Error::InvalidConfig("no observables to couple".into()));
    }
    for (i, (op, site_i)) in observables.iter().enumerate() {
        if !op.is_hermitian() {
            return Err(Error::NotHermitian { max_dev: f64::NAN });
        }
        if *site_i >= pre.dims().len() {
            return Err(Error::SiteOutOfRange {
                site: *site_i,
                n_sites: pre.dims().len(),
            });
        }
        for (_, site_j) in observables.iter().skip(i + 1) {
            if site_i == site_j {
                return Err(Error::SameSite { site: *site_i });
            }
        }
    }
    if observables.len() != config.n_pointers {
        return Err(Error::InvalidConfig(format!(
            "{} observables for a {}-pointer device",
            observables.len(),
            config.n_pointers
        )));
    }
    let dims = pre.dims();
    let embedded: Vec<Operator> = observables
        .iter()
        .map(|(op, site)| embed(op, *site, dims))
        .collect::<Result<_>>()?;

    match config.topology {
        Topology::LocalProduct => {
            let spaces = joint_eigenbasis(&embedded)?;
            let mut branches = Vec::new();
            let scale = pre.norm_sqr();
            for space in &spaces {
                let projected = space.project(pre)?;
                if projected.norm_sqr() > scale * BRANCH_EPS * BRANCH_EPS {
                    let shifts = space.values.iter().map(|v| config.coupling * v).collect();
                    branches.push((projected, shifts));
                }
            }
            Ok(CoupledState {
                branches,
                config: *config,
                pre_norm_sqr: scale,
            })
        }
        Topology::EntangledSum => {
            let mut sum = embedded[0].clone();
            for op in &embedded[1..] {
                sum = sum.add(op)?;
            }
            couple_observable(pre, &sum, config)
        }
    }
}

/// Direct coupling of one pointer to an arbitrary (possibly nonlocal)
/// observable on the full space. This realizes both the entangled-sum
/// device and the idealized single-pointer coupling that has no local
/// implementation for product observables.
pub fn couple_observable(
    pre: &Ket,
    observable: &Operator,
    config: &PointerConfig,
) -> Result<CoupledState> {
    let spaces = joint_eigenbasis(std::slice::from_ref(observable))?;
    let scale = pre.norm_sqr();
    let mut branches = Vec::new();
    for space in &spaces {
        let projected = space.project(pre)?;
        if projected.norm_sqr() > scale * BRANCH_EPS * BRANCH_EPS {
            branches.push((projected, vec![config.coupling * space.values[0]]));
        }
    }
    Ok(CoupledState {
        branches,
        config: *config,
        pre_norm_sqr: scale,
    })
}

/// One Gaussian branch of the post-selected device state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Branch {
    pub amplitude: C64,
    pub shifts: Vec<f64>,
}

/// Post-selected measuring-device state: a superposition of displaced
/// Gaussians `Σ_k amp_k · G(q - shift_k)` with G the convention Gaussian.
#[derive(Debug, Clone)]
pub struct BranchedPointerState {
    branches: Vec<Branch>,
    config: PointerConfig,
    /// ‖pre‖²·‖post‖²; divides the Gram norm to give p_postselect.
    selection_norm: f64,
}

impl BranchedPointerState {
    /// Builds a standalone branched state (post-selection probability 1).
    pub fn from_branches(branches: Vec<Branch>, config: PointerConfig) -> Result<Self> {
        let n_coords = config.n_coordinates();
        if branches.is_empty() || branches.iter().all(|b| b.amplitude.norm() == 0.0) {
            return Err(Error::InconsistentSelection);
        }
        if branches.iter().any(|b| b.shifts.len() != n_coords) {
            return Err(Error::InvalidConfig(
                "branch shift vectors must match the coordinate count".into(),
            ));
        }
        let mut state = BranchedPointerState {
            branches,
            config,
            selection_norm: 1.0,
        };
        state.selection_norm = state.norm_sqr();
        Ok(state)
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn config(&self) -> &PointerConfig {
        &self.config
    }

    pub fn n_coordinates(&self) -> usize {
        self.config.n_coordinates()
    }

    pub fn width(&self) -> f64 {
        self.config.width
    }

    /// Gaussian overlap kernel between two shift vectors.
    pub fn overlap_kernel(&self, a: &[f64], b: &[f64]) -> f64 {
        let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
        (-d2 / (4.0 * self.config.width * self.config.width)).exp()
    }

    /// Squared norm of the represented wavefunction (the Gram form).
    pub fn norm_sqr(&self) -> f64 {
        let mut acc = C64::ZERO;
        for k in &self.branches {
            for l in &self.branches {
                acc += k.amplitude.conj() * l.amplitude * self.overlap_kernel(&k.shifts, &l.shifts);
            }
        }
        acc.re
    }

    /// Probability that the post-selection succeeds.
    pub fn p_postselect(&self) -> f64 {
        self.norm_sqr() / self.selection_norm
    }
}

/// Projects the system part onto `post`, leaving a device-only state.
pub fn postselect(coupled: &CoupledState, post: &Ket) -> Result<BranchedPointerState> {
    let selection_norm = coupled.pre_norm_sqr * post.norm_sqr();
    let amp_floor = selection_norm.sqrt() * BRANCH_EPS;
    let mut branches = Vec::new();
    for (ket, shifts) in &coupled.branches {
        let amplitude = inner(post, ket)?;
        if amplitude.norm() > amp_floor {
            branches.push(Branch {
                amplitude,
                shifts: shifts.clone(),
            });
        }
    }
    if branches.is_empty() {
        return Err(Error::InconsistentSelection);
    }
    Ok(BranchedPointerState {
        branches,
        config: coupled.config,
        selection_norm,
    })
}

/// Post-selection probability plus first and raw second moments of the
/// pointer positions and momenta, conditioned on post-selection.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentSet {
    pub p_postselect: f64,
    pub mean_q: Vec<f64>,
    pub corr_qq: Vec<Vec<f64>>,
    pub mean_p: Vec<f64>,
    pub corr_pp: Vec<Vec<f64>>,
    pub width: f64,
    pub topology: Topology,
}

impl MomentSet {
    pub fn n_coordinates(&self) -> usize {
        self.mean_q.len()
    }

    pub fn var_q(&self, i: usize) -> f64 {
        self.corr_qq[i][i] - self.mean_q[i] * self.mean_q[i]
    }

    pub fn var_p(&self, i: usize) -> f64 {
        self.corr_pp[i][i] - self.mean_p[i] * self.mean_p[i]
    }
}

/// Exact Gaussian-Gram evaluation of the device moments.
///
/// Pairwise branch terms use the overlap kernel `exp(-|δ|²/(4Δ²))`; first
/// moments insert the midpoint `(a+b)/2`, diagonal second moments add
/// `Δ²/2` (position) and `1/(2Δ²)` (momentum), and momentum first moments
/// insert `i·δ/(2Δ²)`.
pub fn moments_closed_form(state: &BranchedPointerState) -> MomentSet {
    let d = state.n_coordinates();
    let delta = state.config.width;
    let var_q = delta * delta / 2.0;
    let var_p = 1.0 / (2.0 * delta * delta);

    let mut norm = C64::ZERO;
    let mut mean_q = vec![C64::ZERO; d];
    let mut mean_p = vec![C64::ZERO; d];
    let mut corr_qq = vec![vec![C64::ZERO; d]; d];
    let mut corr_pp = vec![vec![C64::ZERO; d]; d];

    for k in state.branches() {
        for l in state.branches() {
            let w = k.amplitude.conj() * l.amplitude * state.overlap_kernel(&k.shifts, &l.shifts);
            norm += w;
            let mid: Vec<f64> = k
                .shifts
                .iter()
                .zip(&l.shifts)
                .map(|(a, b)| 0.5 * (a + b))
                .collect();
            // momentum matrix element factor per coordinate: i δ / (2Δ²)
            let pfac: Vec<C64> = k
                .shifts
                .iter()
                .zip(&l.shifts)
                .map(|(a, b)| C64::new(0.0, (a - b) / (2.0 * delta * delta)))
                .collect();
            for i in 0..d {
                mean_q[i] += w * mid[i];
                mean_p[i] += w * pfac[i];
                for j in 0..d {
                    if i == j {
                        corr_qq[i][i] += w * (mid[i] * mid[i] + var_q);
                        corr_pp[i][i] += w * (C64::new(var_p, 0.0) + pfac[i] * pfac[i]);
                    } else {
                        corr_qq[i][j] += w * (mid[i] * mid[j]);
                        corr_pp[i][j] += w * (pfac[i] * pfac[j]);
                    }
                }
            }
        }
    }

    let n = norm.re;
    MomentSet {
        p_postselect: n / state.selection_norm,
        mean_q: mean_q.iter().map(|v| v.re / n).collect(),
        mean_p: mean_p.iter().map(|v| v.re / n).collect(),
        corr_qq: corr_qq
            .iter()
            .map(|row| row.iter().map(|v| v.re / n).collect())
            .collect(),
        corr_pp: corr_pp
            .iter()
            .map(|row| row.iter().map(|v| v.re / n).collect())
            .collect(),
        width: delta,
        topology: state.config.topology,
    }
}

/// One resolved outcome of a strong (projective-regime) measurement.
#[derive(Debug, Clone)]
pub struct StrongOutcome {
    /// Eigenvalue per pointer coordinate (single entry for the sum device).
    pub values: Vec<f64>,
    /// Pointer readings g·eigenvalue.
    pub readings: Vec<f64>,
    pub probability: f64,
    /// Normalized post-measurement system state.
    pub post_state: Ket,
}

/// Strong measurement: Born-rule outcome distribution over the device's
/// projective decomposition, with conditional post-measurement states.
///
/// With `gap/Δ ≥ 10`, pointer readings round to the true eigenvalue up to
/// a misidentification probability below 1e-11, so outcome probabilities
/// are reported exactly at the Born values.
pub fn measure_strong(
    pre: &Ket,
    observables: &[(Operator, usize)],
    config: &PointerConfig,
) -> Result<Vec<StrongOutcome>> {
    let coupled = couple(pre, observables, config)?;
    // regime check: pointer readings round against the full eigenvalue
    // grid of what each coordinate measures, not just the populated
    // branches, so the relevant gap comes from the operator spectra
    let embedded: Vec<Operator> = observables
        .iter()
        .map(|(op, site)| embed(op, *site, pre.dims()))
        .collect::<Result<_>>()?;
    let spectra: Vec<Vec<f64>> = match config.topology {
        Topology::LocalProduct => embedded
            .iter()
            .map(|op| Ok(crate::qstate::eigendecompose(op)?.eigenvalues()))
            .collect::<Result<_>>()?,
        Topology::EntangledSum => {
            let mut sum = embedded[0].clone();
            for op in &embedded[1..] {
                sum = sum.add(op)?;
            }
            vec![crate::qstate::eigendecompose(&sum)?.eigenvalues()]
        }
    };
    for values in &spectra {
        let mut gap = f64::INFINITY;
        for w in values.windows(2) {
            gap = gap.min(config.coupling.abs() * (w[1] - w[0]));
        }
        if gap / config.width < STRONG_REGIME_RATIO {
            return Err(Error::StrongRegime {
                gap,
                delta: config.width,
            });
        }
    }
    let mut outcomes = Vec::new();
    for (ket, shifts) in &coupled.branches {
        let probability = ket.norm_sqr() / coupled.pre_norm_sqr;
        if probability > BRANCH_EPS {
            outcomes.push(StrongOutcome {
                values: shifts.iter().map(|s| s / config.coupling).collect(),
                readings: shifts.clone(),
                probability,
                post_state: ket.normalized(),
            });
        }
    }
    Ok(outcomes)
}

/// `|⟨a|b⟩|² / (‖a‖²‖b‖²)`.
pub fn fidelity(a: &Ket, b: &Ket) -> Result<f64> {
    Ok(inner(a, b)?.norm_sqr() / (a.norm_sqr() * b.norm_sqr()))
}
