//! Independent verification path for device moments: brute-force grid
//! quadrature of the position density, and of the analytically
//! Fourier-transformed state for momentum moments. Shares no formulas with
//! the closed-form engine beyond the Gaussian itself.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pointer::{BranchedPointerState, MomentSet};
use crate::qstate::C64;

/// Required grid reach beyond the extreme shifts, in pointer widths.
pub const MIN_EXTENT: f64 = 8.0;

/// Quadrature grid parameters, both in units of the natural scale of the
/// integrated coordinate (Δ for positions, 1/(√2·Δ) for momenta).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridSpec {
    /// Grid spacing as a fraction of the coordinate scale.
    pub spacing: f64,
    /// Reach beyond the extreme branch shifts, in coordinate scales.
    pub extent: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            spacing: 0.125,
            extent: 8.0,
        }
    }
}

impl GridSpec {
    pub fn refined(&self) -> GridSpec {
        GridSpec {
            spacing: self.spacing / 2.0,
            extent: self.extent,
        }
    }
}

/// A uniform 1-d grid.
#[derive(Debug, Clone)]
pub struct Axis {
    pub lo: f64,
    pub step: f64,
    pub len: usize,
}

impl Axis {
    fn span(lo: f64, hi: f64, step: f64) -> Axis {
        let len = ((hi - lo) / step).ceil() as usize + 1;
        Axis { lo, step, len }
    }

    pub fn point(&self, i: usize) -> f64 {
        self.lo + self.step * i as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|i| self.point(i))
    }
}

/// Position-side axes covering all shifts plus `extent` widths.
pub fn position_axes(state: &BranchedPointerState, spec: &GridSpec) -> Result<Vec<Axis>> {
    if spec.extent < MIN_EXTENT - 1e-12 {
        return Err(Error::GridTooSmall {
            extent: spec.extent,
            required: MIN_EXTENT,
        });
    }
    let delta = state.width();
    let d = state.n_coordinates();
    Ok((0..d)
        .map(|i| {
            let shifts = state.branches().iter().map(|b| b.shifts[i]);
            let lo = shifts.clone().fold(f64::INFINITY, f64::min) - spec.extent * delta;
            let hi = shifts.fold(f64::NEG_INFINITY, f64::max) + spec.extent * delta;
            Axis::span(lo, hi, spec.spacing * delta)
        })
        .collect())
}

/// Momentum-side axes: centered at zero with scale 1/(√2·Δ), with spacing
/// also fine enough to resolve the interference oscillations `e^{ipδ}`.
pub fn momentum_axes(state: &BranchedPointerState, spec: &GridSpec) -> Result<Vec<Axis>> {
    if spec.extent < MIN_EXTENT - 1e-12 {
        return Err(Error::GridTooSmall {
            extent: spec.extent,
            required: MIN_EXTENT,
        });
    }
    let delta = state.width();
    let sigma_p = 1.0 / (std::f64::consts::SQRT_2 * delta);
    let d = state.n_coordinates();
    Ok((0..d)
        .map(|i| {
            let mut span: f64 = 0.0;
            for a in state.branches() {
                for b in state.branches() {
                    span = span.max((a.shifts[i] - b.shifts[i]).abs());
                }
            }
            let osc = std::f64::consts::PI / (2.0 * span.max(1e-300));
            let step = spec.spacing * sigma_p.min(osc);
            let hi = spec.extent * sigma_p;
            Axis::span(-hi, hi, step)
        })
        .collect())
}

/// `|Ψ(q)|²` of the branched state at a position-grid point.
pub fn position_density(state: &BranchedPointerState, q: &[f64]) -> f64 {
    let delta = state.width();
    let norm = (std::f64::consts::PI * delta * delta).powf(-0.25);
    let mut psi = C64::ZERO;
    for b in state.branches() {
        let mut g = 1.0;
        for (qi, si) in q.iter().zip(&b.shifts) {
            let x = qi - si;
            g *= norm * (-x * x / (2.0 * delta * delta)).exp();
        }
        psi += b.amplitude * g;
    }
    psi.norm_sqr()
}

/// `|Ψ̃(p)|²`: each branch transforms to `e^{-ip·shift}` times the
/// momentum-space Gaussian `(Δ²/π)^{1/4} e^{-p²Δ²/2}` per coordinate.
pub fn momentum_density(state: &BranchedPointerState, p: &[f64]) -> f64 {
    let delta = state.width();
    let norm = (delta * delta / std::f64::consts::PI).powf(0.25);
    let mut psi = C64::ZERO;
    for b in state.branches() {
        let mut g = 1.0;
        let mut phase = 0.0;
        for (pi, si) in p.iter().zip(&b.shifts) {
            g *= norm * (-pi * pi * delta * delta / 2.0).exp();
            phase -= pi * si;
        }
        psi += b.amplitude * C64::from_polar(g, phase);
    }
    psi.norm_sqr()
}

struct Quadrature {
    norm: f64,
    mean: Vec<f64>,
    corr: Vec<Vec<f64>>,
}

/// Trapezoid quadrature of a density over up to two coordinates.
fn integrate(axes: &[Axis], density: impl Fn(&[f64]) -> f64) -> Quadrature {
    let d = axes.len();
    let mut norm = 0.0;
    let mut mean = vec![0.0; d];
    let mut corr = vec![vec![0.0; d]; d];
    let cell: f64 = axes.iter().map(|a| a.step).product();
    let trap = |i: usize, len: usize| if i == 0 || i + 1 == len { 0.5 } else { 1.0 };

    match d {
        1 => {
            let ax = &axes[0];
            for i in 0..ax.len {
                let q = ax.point(i);
                let w = density(&[q]) * trap(i, ax.len) * cell;
                norm += w;
                mean[0] += w * q;
                corr[0][0] += w * q * q;
            }
        }
        2 => {
            let (ax, ay) = (&axes[0], &axes[1]);
            for i in 0..ax.len {
                let qx = ax.point(i);
                let wx = trap(i, ax.len);
                for j in 0..ay.len {
                    let qy = ay.point(j);
                    let w = density(&[qx, qy]) * wx * trap(j, ay.len) * cell;
                    norm += w;
                    mean[0] += w * qx;
                    mean[1] += w * qy;
                    corr[0][0] += w * qx * qx;
                    corr[1][1] += w * qy * qy;
                    corr[0][1] += w * qx * qy;
                }
            }
            corr[1][0] = corr[0][1];
        }
        _ => panic!("grid oracle supports one or two coordinates, got {d}"),
    }
    Quadrature { norm, mean, corr }
}

/// Device moments by numerical quadrature, independent of the Gram-form
/// engine. Position moments integrate `|Ψ|²`; momentum moments integrate
/// the Fourier-side density.
pub fn moments_grid_oracle(state: &BranchedPointerState, spec: &GridSpec) -> Result<MomentSet> {
    let q_axes = position_axes(state, spec)?;
    let p_axes = momentum_axes(state, spec)?;
    let pos = integrate(&q_axes, |q| position_density(state, q));
    let mom = integrate(&p_axes, |p| momentum_density(state, p));

    let d = state.n_coordinates();
    let selection_norm = state.norm_sqr() / state.p_postselect();
    Ok(MomentSet {
        p_postselect: pos.norm / selection_norm,
        mean_q: (0..d).map(|i| pos.mean[i] / pos.norm).collect(),
        corr_qq: (0..d)
            .map(|i| (0..d).map(|j| pos.corr[i][j] / pos.norm).collect())
            .collect(),
        mean_p: (0..d).map(|i| mom.mean[i] / mom.norm).collect(),
        corr_pp: (0..d)
            .map(|i| (0..d).map(|j| mom.corr[i][j] / mom.norm).collect())
            .collect(),
        width: state.width(),
        topology: state.config().topology,
    })
}

/// Maximum relative disagreement across all fields of two moment sets,
/// with an absolute floor of 1 on the comparison scale.
pub fn max_moment_disagreement(a: &MomentSet, b: &MomentSet) -> f64 {
    let mut worst: f64 = 0.0;
    let mut push = |x: f64, y: f64| {
        worst = worst.max((x - y).abs() / x.abs().max(y.abs()).max(1.0));
    };
    push(a.p_postselect, b.p_postselect);
    for i in 0..a.n_coordinates() {
        push(a.mean_q[i], b.mean_q[i]);
        push(a.mean_p[i], b.mean_p[i]);
        for j in 0..a.n_coordinates() {
            push(a.corr_qq[i][j], b.corr_qq[i][j]);
            push(a.corr_pp[i][j], b.corr_pp[i][j]);
        }
    }
    worst
}
