//! Drawing pointer readings from a branched Gaussian state.
//!
//! The primary path tabulates the density on the oracle grid and inverts a
//! piecewise-linear CDF, factorized as marginal(first coordinate) ×
//! conditional(second | first). A rejection sampler over a Gaussian-mixture
//! proposal provides an exact, grid-free cross-check.

use crate::error::Result;
use crate::pointer::oracle::{
    momentum_axes, momentum_density, position_axes, position_density, Axis, GridSpec,
};
use crate::pointer::BranchedPointerState;
use crate::sampling::rng::CounterRng;
use crate::sampling::Basis;

/// Joint-density rows over axis 1 at each axis-0 point, paired with their
/// running (trapezoid) cumulatives.
type DensityRows = (Vec<Vec<f64>>, Vec<Vec<f64>>);

/// Inverse-CDF tables over the oracle grid.
pub struct GridSampler {
    axes: Vec<Axis>,
    /// Marginal density of coordinate 0 at the axis-0 points.
    marginal_pdf: Vec<f64>,
    marginal_cdf: Vec<f64>,
    /// Present for two-coordinate states; rows are unnormalized.
    rows: Option<DensityRows>,
}

fn cumulative(pdf: &[f64], step: f64) -> Vec<f64> {
    let mut cdf = Vec::with_capacity(pdf.len());
    let mut acc = 0.0;
    cdf.push(0.0);
    for w in pdf.windows(2) {
        acc += 0.5 * (w[0] + w[1]) * step;
        cdf.push(acc);
    }
    cdf
}

/// Inverts a piecewise-linear density: finds x with CDF(x) = target.
fn invert(axis: &Axis, pdf: &[f64], cdf: &[f64], target: f64) -> f64 {
    let total = *cdf.last().expect("nonempty grid");
    let target = target.clamp(0.0, total);
    // largest index with cdf[idx] <= target
    let mut lo = 0usize;
    let mut hi = cdf.len() - 1;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if cdf[mid] <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let residual = target - cdf[lo];
    let h = axis.step;
    let f0 = pdf[lo].max(0.0);
    let f1 = pdf[lo + 1].max(0.0);
    let slope = (f1 - f0) / h;
    // residual = f0 t + slope t²/2 within the cell
    let t = if slope.abs() * h < 1e-14 * (f0 + f1 + 1e-300) {
        residual / f0.max(1e-300)
    } else {
        let disc = (f0 * f0 + 2.0 * slope * residual).max(0.0);
        (disc.sqrt() - f0) / slope
    };
    axis.point(lo) + t.clamp(0.0, h)
}

impl GridSampler {
    pub fn new(state: &BranchedPointerState, basis: Basis, spec: &GridSpec) -> Result<Self> {
        match basis {
            Basis::Position => {
                let axes = position_axes(state, spec)?;
                Ok(Self::build(axes, |q| position_density(state, q)))
            }
            Basis::Momentum => {
                let axes = momentum_axes(state, spec)?;
                Ok(Self::build(axes, |p| momentum_density(state, p)))
            }
        }
    }

    fn build(axes: Vec<Axis>, density: impl Fn(&[f64]) -> f64) -> Self {
        match axes.len() {
            1 => {
                let ax = &axes[0];
                let pdf: Vec<f64> = ax.points().map(|x| density(&[x])).collect();
                let cdf = cumulative(&pdf, ax.step);
                GridSampler {
                    marginal_pdf: pdf,
                    marginal_cdf: cdf,
                    rows: None,
                    axes,
                }
            }
            2 => {
                let (ax, ay) = (&axes[0], &axes[1]);
                let mut rows_pdf = Vec::with_capacity(ax.len);
                let mut rows_cdf = Vec::with_capacity(ax.len);
                let mut marginal_pdf = Vec::with_capacity(ax.len);
                for x in ax.points() {
                    let row: Vec<f64> = ay.points().map(|y| density(&[x, y])).collect();
                    let row_cdf = cumulative(&row, ay.step);
                    marginal_pdf.push(*row_cdf.last().expect("nonempty row"));
                    rows_pdf.push(row);
                    rows_cdf.push(row_cdf);
                }
                let marginal_cdf = cumulative(&marginal_pdf, ax.step);
                GridSampler {
                    marginal_pdf,
                    marginal_cdf,
                    rows: Some((rows_pdf, rows_cdf)),
                    axes,
                }
            }
            d => panic!("sampler supports one or two coordinates, got {d}"),
        }
    }

    pub fn sample(&self, rng: &mut CounterRng) -> Vec<f64> {
        let total = *self.marginal_cdf.last().expect("nonempty grid");
        let x = invert(
            &self.axes[0],
            &self.marginal_pdf,
            &self.marginal_cdf,
            rng.next_f64() * total,
        );
        let Some((rows_pdf, rows_cdf)) = &self.rows else {
            return vec![x];
        };
        // conditional density at x: linear blend of the adjacent grid rows
        let ax = &self.axes[0];
        let pos = ((x - ax.lo) / ax.step).clamp(0.0, (ax.len - 2) as f64);
        let i = pos as usize;
        let w = pos - i as f64;
        let blend =
            |row: &[Vec<f64>], j: usize| (1.0 - w) * row[i][j] + w * row[i + 1][j];
        let row_total = blend(rows_cdf, rows_cdf[i].len() - 1);
        let target = rng.next_f64() * row_total;
        // inline inversion over the blended row
        let cdf_at = |j: usize| blend(rows_cdf, j);
        let mut lo = 0usize;
        let mut hi = rows_cdf[i].len() - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if cdf_at(mid) <= target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let ay = &self.axes[1];
        let residual = (target - cdf_at(lo)).max(0.0);
        let f0 = blend(rows_pdf, lo).max(0.0);
        let f1 = blend(rows_pdf, lo + 1).max(0.0);
        let slope = (f1 - f0) / ay.step;
        let t = if slope.abs() * ay.step < 1e-14 * (f0 + f1 + 1e-300) {
            residual / f0.max(1e-300)
        } else {
            let disc = (f0 * f0 + 2.0 * slope * residual).max(0.0);
            (disc.sqrt() - f0) / slope
        };
        vec![x, ay.point(lo) + t.clamp(0.0, ay.step)]
    }
}

/// Exact rejection sampling against a Gaussian-mixture proposal. The
/// density `|Σ c_k G_k|²` is bounded by `(Σ|c_k|)² × mixture(|c_k|/Σ|c|)`
/// through Cauchy-Schwarz, so acceptance is exact with no grid error.
pub fn rejection_sample(
    state: &BranchedPointerState,
    basis: Basis,
    rng: &mut CounterRng,
) -> Vec<f64> {
    let d = state.n_coordinates();
    let delta = state.width();
    let weights: Vec<f64> = state.branches().iter().map(|b| b.amplitude.norm()).collect();
    let wsum: f64 = weights.iter().sum();

    // per-coordinate proposal std: Δ/√2 in position, 1/(√2 Δ) in momentum
    let (sigma, centered) = match basis {
        Basis::Position => (delta / std::f64::consts::SQRT_2, false),
        Basis::Momentum => (1.0 / (std::f64::consts::SQRT_2 * delta), true),
    };
    let gauss = |x: f64, mu: f64| {
        let z = (x - mu) / sigma;
        (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
    };

    loop {
        // pick a branch by |amplitude| (position) or propose centered (momentum)
        let center: Vec<f64> = if centered {
            vec![0.0; d]
        } else {
            let mut pick = rng.next_f64() * wsum;
            let mut chosen = state.branches().len() - 1;
            for (k, w) in weights.iter().enumerate() {
                if pick < *w {
                    chosen = k;
                    break;
                }
                pick -= w;
            }
            state.branches()[chosen].shifts.clone()
        };
        let q: Vec<f64> = center.iter().map(|&mu| mu + sigma * rng.next_gaussian()).collect();

        let proposal: f64 = if centered {
            q.iter().map(|&qi| gauss(qi, 0.0)).product()
        } else {
            state
                .branches()
                .iter()
                .zip(&weights)
                .map(|(b, w)| {
                    w / wsum
                        * q.iter()
                            .zip(&b.shifts)
                            .map(|(&qi, &si)| gauss(qi, si))
                            .product::<f64>()
                })
                .sum()
        };
        let density = match basis {
            Basis::Position => position_density(state, &q),
            Basis::Momentum => momentum_density(state, &q),
        };
        if rng.next_f64() * wsum * wsum * proposal <= density {
            return q;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointer::{Branch, BranchedPointerState, PointerConfig};
    use crate::qstate::C64;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn interfering_state() -> BranchedPointerState {
        BranchedPointerState::from_branches(
            vec![
                Branch {
                    amplitude: c(1.0, 0.0),
                    shifts: vec![1.0, -1.0],
                },
                Branch {
                    amplitude: c(-0.8, 0.3),
                    shifts: vec![-1.0, 1.0],
                },
                Branch {
                    amplitude: c(0.2, 0.1),
                    shifts: vec![1.0, 1.0],
                },
            ],
            PointerConfig::local(2, 0.9).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn grid_and_rejection_agree_on_moments() {
        let state = interfering_state();
        let closed = crate::pointer::moments_closed_form(&state);
        for basis in [Basis::Position, Basis::Momentum] {
            let sampler = GridSampler::new(&state, basis, &GridSpec::default()).unwrap();
            let n = 40_000;
            let mut grid_mean = [0.0f64; 2];
            let mut rej_mean = [0.0f64; 2];
            let mut grid_corr = 0.0;
            let mut rej_corr = 0.0;
            for i in 0..n {
                let mut rng = CounterRng::for_shot(11, i);
                let g = sampler.sample(&mut rng);
                let r = rejection_sample(&state, basis, &mut rng);
                for k in 0..2 {
                    grid_mean[k] += g[k];
                    rej_mean[k] += r[k];
                }
                grid_corr += g[0] * g[1];
                rej_corr += r[0] * r[1];
            }
            let n = n as f64;
            let (want_mean, want_corr, scale) = match basis {
                Basis::Position => (closed.mean_q.clone(), closed.corr_qq[0][1], 0.9),
                Basis::Momentum => (closed.mean_p.clone(), closed.corr_pp[0][1], 1.2),
            };
            // both samplers near the closed form, ~5 sigma at this n
            let tol = 5.0 * scale / n.sqrt() * 1.5;
            for k in 0..2 {
                assert!((grid_mean[k] / n - want_mean[k]).abs() < tol, "{basis:?} grid mean");
                assert!((rej_mean[k] / n - want_mean[k]).abs() < tol, "{basis:?} rej mean");
            }
            assert!((grid_corr / n - want_corr).abs() < tol * scale);
            assert!((rej_corr / n - want_corr).abs() < tol * scale);
        }
    }

    #[test]
    fn single_branch_gaussian_statistics() {
        let state = BranchedPointerState::from_branches(
            vec![Branch {
                amplitude: c(1.0, 0.0),
                shifts: vec![2.0],
            }],
            PointerConfig::local(1, 3.0).unwrap(),
        )
        .unwrap();
        let sampler = GridSampler::new(&state, Basis::Position, &GridSpec::default()).unwrap();
        let n = 30_000u64;
        let mut sum = 0.0;
        let mut sq = 0.0;
        for i in 0..n {
            let mut rng = CounterRng::for_shot(5, i);
            let q = sampler.sample(&mut rng)[0];
            sum += q;
            sq += q * q;
        }
        let mean = sum / n as f64;
        let var = sq / n as f64 - mean * mean;
        // mean within 3Δ/√n of the shift, variance near Δ²/2
        assert!((mean - 2.0).abs() < 3.0 * 3.0 / (n as f64).sqrt());
        assert!((var - 4.5).abs() < 0.15);
    }
}
