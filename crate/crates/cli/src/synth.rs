//! Seeded synthetic inputs and reference closed forms shared by the
//! reproduction report and the acceptance suite.

use weaksim_core::sampling::rng::CounterRng;
use weaksim_core::{
    couple, embed, moments_closed_form, postselect, Branch, BranchedPointerState, Ket, Operator,
    PointerConfig, TwoStateVector, C64,
};

fn uniform(rng: &mut CounterRng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.next_f64()
}

/// A random two-qubit pre/post pair with overlap bounded away from zero.
pub fn seeded_tsv(seed: u64) -> TwoStateVector {
    let mut rng = CounterRng::new(seed ^ 0x7573);
    loop {
        let amps = |rng: &mut CounterRng| -> Vec<C64> {
            (0..4)
                .map(|_| C64::new(uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)))
                .collect()
        };
        let pre = Ket::new(amps(&mut rng), vec![2, 2]).expect("nonzero with probability one");
        let post = Ket::new(amps(&mut rng), vec![2, 2]).expect("nonzero with probability one");
        if let Ok(tsv) = TwoStateVector::new(pre, post) {
            if tsv.overlap().norm() > 0.25 * tsv.pre().norm() * tsv.post().norm() {
                return tsv;
            }
        }
    }
}

/// A random branched device state: up to `max_branches` displaced
/// Gaussians over two coordinates, with healthy norm.
pub fn seeded_branched_state(seed: u64, max_branches: usize) -> BranchedPointerState {
    let mut rng = CounterRng::new(seed ^ 0xB4A2);
    loop {
        let n = 2 + (rng.next_u64() as usize) % (max_branches - 1);
        let width = uniform(&mut rng, 0.6, 4.0);
        let branches: Vec<Branch> = (0..n)
            .map(|_| Branch {
                amplitude: C64::new(uniform(&mut rng, -1.0, 1.0), uniform(&mut rng, -1.0, 1.0)),
                shifts: vec![uniform(&mut rng, -2.5, 2.5), uniform(&mut rng, -2.5, 2.5)],
            })
            .collect();
        let amp_scale: f64 = branches.iter().map(|b| b.amplitude.norm_sqr()).sum();
        let config = PointerConfig::local(2, width).expect("valid width");
        if let Ok(state) = BranchedPointerState::from_branches(branches, config) {
            // reject near-cancelling superpositions that amplify noise
            if state.norm_sqr() > 0.05 * amp_scale {
                return state;
            }
        }
    }
}

/// Least-squares slope of log|deviation| against log(width) for the
/// direct pointer mean of a single local observable.
pub fn weak_limit_slope(tsv: &TwoStateVector, widths: &[f64]) -> f64 {
    let op = Operator::sigma_z();
    let embedded = embed(&op, 0, &[2, 2]).expect("two qubits");
    let target = tsv.weak_value(&embedded).expect("nondegenerate").re;
    let pts: Vec<(f64, f64)> = widths
        .iter()
        .map(|&delta| {
            let cfg = PointerConfig::local(1, delta).expect("valid width");
            let coupled = couple(tsv.pre(), &[(op.clone(), 0)], &cfg).expect("couples");
            let m = moments_closed_form(&postselect(&coupled, tsv.post()).expect("selects"));
            (delta.ln(), (m.mean_q[0] - target).abs().max(1e-300).ln())
        })
        .collect();
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// A random tsv whose leading weak-limit deviation coefficient is healthy,
/// so slope fits are not drowned by floating-point noise.
pub fn seeded_tsv_for_slope(seed: u64) -> TwoStateVector {
    let mut attempt = seed;
    loop {
        let tsv = seeded_tsv(attempt);
        let op = embed(&Operator::sigma_z(), 0, &[2, 2]).expect("two qubits");
        let target = tsv.weak_value(&op).expect("nondegenerate").re;
        let cfg = PointerConfig::local(1, 30.0).expect("valid width");
        let coupled =
            couple(tsv.pre(), &[(Operator::sigma_z(), 0)], &cfg).expect("couples");
        let m = moments_closed_form(&postselect(&coupled, tsv.post()).expect("selects"));
        let coeff = (m.mean_q[0] - target).abs() * 900.0;
        if (0.05..100.0).contains(&coeff) {
            return tsv;
        }
        attempt = attempt.wrapping_add(0x9E3779B97F4A7C15);
    }
}

/// Reference mean of the summed local pointers for the epsilon family:
/// `2ε⁴ / (ε⁴ + 2 - 2e^{-2/Δ²})`.
pub fn epsilon_sum_mean(eps: f64, delta: f64) -> f64 {
    let e4 = eps.powi(4);
    2.0 * e4 / (e4 + 2.0 - 2.0 * (-2.0 / (delta * delta)).exp())
}

/// Exact entangled-device mean for the amplified pair under this crate's
/// Gaussian convention: `22(11e^{1/Δ²} - 10) / (221e^{1/Δ²} - 220)`.
pub fn amplified_entangled_mean(delta: f64) -> f64 {
    let u = (1.0 / (delta * delta)).exp();
    22.0 * (11.0 * u - 10.0) / (221.0 * u - 220.0)
}

/// First-order coefficient of the large-width expansion of
/// [`amplified_entangled_mean`]: mean ≈ 22 - c/Δ². Derived numerically so
/// the report can state it independently of the algebra.
pub fn amplified_entangled_asymptote_coefficient() -> f64 {
    let delta = 3000.0;
    (22.0 - amplified_entangled_mean(delta)) * delta * delta
}

/// Same coefficient for the local-product device, extracted numerically
/// from the moment engine.
pub fn amplified_local_asymptote_coefficient() -> f64 {
    let spec = weaksim_core::ScenarioSpec::builtin("two_state_22").expect("builtin");
    let resolved = spec.resolve().expect("resolves");
    let delta = 30000.0;
    let cfg = PointerConfig::local(2, delta).expect("valid width");
    let coupled = couple(resolved.tsv.pre(), &resolved.observables, &cfg).expect("couples");
    let m = moments_closed_form(&postselect(&coupled, resolved.tsv.post()).expect("selects"));
    (22.0 - (m.mean_q[0] + m.mean_q[1])) * delta * delta
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_inputs_are_deterministic() {
        let a = seeded_tsv(5);
        let b = seeded_tsv(5);
        assert_eq!(a.pre().amps(), b.pre().amps());
        let s = seeded_branched_state(9, 5);
        let t = seeded_branched_state(9, 5);
        assert_eq!(s.branches().len(), t.branches().len());
    }

    #[test]
    fn asymptote_coefficients_match_hand_expansion() {
        // 22(11e^u - 10)/(221e^u - 220) ≈ 22 - 4620 u for small u
        let c = amplified_entangled_asymptote_coefficient();
        assert!((c - 4620.0).abs() < 1.0, "entangled coefficient {c}");
        // and the local device reproduces the published 8.8e5 scale
        let c = amplified_local_asymptote_coefficient();
        assert!((c - 8.824e5).abs() < 1e3, "local coefficient {c}");
    }

    #[test]
    fn slope_tsv_is_well_conditioned() {
        for seed in [1u64, 2, 3] {
            let tsv = seeded_tsv_for_slope(seed);
            let slope = weak_limit_slope(&tsv, &[30.0, 100.0, 300.0, 1000.0, 3000.0]);
            assert!((-2.2..=-1.8).contains(&slope), "seed {seed}: slope {slope}");
        }
    }
}
