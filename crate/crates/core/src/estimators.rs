//! Weak-value estimators built from device moments: the direct pointer
//! mean, the sum rule, and the two joint reconstruction formulas that
//! recover a product weak value from local readings.
//!
//! In the convention used here (position variance Δ²/2 per pointer) the
//! momentum-correlation reconstruction carries prefactor Δ⁴, validated
//! against the grid oracle in the weak limit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pointer::{MomentSet, Topology};
use crate::qstate::C64;

/// Estimator selected by name on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    /// Mean of the pointer reading(s).
    Direct,
    /// Sum of single-pointer means, realizing (A+B)_w = A_w + B_w.
    SumRule,
    /// 2⟨Q_AQ_B⟩ - Re(A_w* B_w), with reference local weak values.
    ReschSteinberg,
    /// ⟨Q_AQ_B⟩ - Δ⁴⟨P_AP_B⟩, from position and momentum readings.
    ReschLundeen,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 4] = [
        EstimatorKind::Direct,
        EstimatorKind::SumRule,
        EstimatorKind::ReschSteinberg,
        EstimatorKind::ReschLundeen,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            EstimatorKind::Direct => "direct",
            EstimatorKind::SumRule => "sum-rule",
            EstimatorKind::ReschSteinberg => "resch-steinberg",
            EstimatorKind::ReschLundeen => "resch-lundeen",
        }
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EstimatorKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown estimator `{s}`")))
    }
}

/// One estimate with its reference value and bookkeeping of what it used.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateReport {
    pub estimator: String,
    pub value: f64,
    pub target: (f64, f64),
    /// |value - Re(target)| / |Re(target)|.
    pub deviation: f64,
    pub width: f64,
    pub inputs: Vec<String>,
}

impl EstimateReport {
    pub fn new(
        estimator: &str,
        value: f64,
        target: C64,
        width: f64,
        inputs: Vec<String>,
    ) -> Self {
        debug_assert!(!inputs.is_empty());
        EstimateReport {
            estimator: estimator.to_string(),
            value,
            target: (target.re, target.im),
            deviation: (value - target.re).abs() / target.re.abs(),
            width,
            inputs,
        }
    }
}

/// Sum of the selected pointer means. With all coordinates selected this
/// realizes the sum rule exactly, by linearity of the mean.
pub fn estimate_direct(moments: &MomentSet, coordinates: &[usize]) -> f64 {
    coordinates.iter().map(|&i| moments.mean_q[i]).sum()
}

fn require_two_local_pointers(moments: &MomentSet) -> Result<()> {
    if moments.topology != Topology::LocalProduct || moments.n_coordinates() < 2 {
        return Err(Error::WrongTopology);
    }
    Ok(())
}

/// Reconstruction of `Re(AB)_w` from the position correlation and the
/// reference local weak values; exact only in the weak limit.
pub fn estimate_resch_steinberg(moments: &MomentSet, a_w: C64, b_w: C64) -> Result<f64> {
    require_two_local_pointers(moments)?;
    Ok(2.0 * moments.corr_qq[0][1] - (a_w.conj() * b_w).re)
}

/// Reconstruction of `Re(AB)_w` from position and momentum correlations.
pub fn estimate_resch_lundeen(moments: &MomentSet, width: f64) -> Result<f64> {
    require_two_local_pointers(moments)?;
    Ok(moments.corr_qq[0][1] - width.powi(4) * moments.corr_pp[0][1])
}

/// Measured-only estimate of a single local weak value:
/// `meanQ + i Δ² meanP`, the alternative to passing reference values into
/// the position-correlation reconstruction.
pub fn weak_value_from_moments(moments: &MomentSet, coordinate: usize) -> C64 {
    let d2 = moments.width * moments.width;
    C64::new(
        moments.mean_q[coordinate],
        d2 * moments.mean_p[coordinate],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointer::oracle::{moments_grid_oracle, GridSpec};
    use crate::pointer::{
        couple, moments_closed_form, postselect, PointerConfig,
    };
    use crate::qstate::{embed, Ket, Operator};
    use crate::tsvf::TwoStateVector;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn ket22(coeffs: [C64; 4]) -> Ket {
        Ket::new(coeffs.to_vec(), vec![2, 2]).unwrap()
    }

    fn sigma_pair() -> Vec<(Operator, usize)> {
        vec![(Operator::sigma_z(), 0), (Operator::sigma_z(), 1)]
    }

    fn phase_pair(primed: bool) -> (Ket, Ket) {
        let pre = ket22([C64::ONE; 4]);
        let post = if primed {
            ket22([c(1.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(-1.0, 0.0)])
        } else {
            ket22([c(1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(1.0, 0.0)])
        };
        (pre, post)
    }

    fn local_moments(pre: &Ket, post: &Ket, delta: f64) -> MomentSet {
        let cfg = PointerConfig::local(2, delta).unwrap();
        let coupled = couple(pre, &sigma_pair(), &cfg).unwrap();
        moments_closed_form(&postselect(&coupled, post).unwrap())
    }

    #[test]
    fn direct_epsilon_scenario_weak_limit() {
        let eps = 0.1;
        let pre = Ket::from_real(&[eps, 1.0, 1.0, 0.0], &[2, 2]).unwrap();
        let post = Ket::from_real(&[eps, 1.0, -1.0, 0.0], &[2, 2]).unwrap();
        let m = local_moments(&pre, &post, 1e7);
        assert_abs_diff_eq!(estimate_direct(&m, &[0, 1]), 2.0, epsilon = 1e-9);
    }

    #[test]
    fn direct_amplified_entangled_weak_limit() {
        let pre = Ket::from_real(&[0.11, 0.95, -1.05, 0.0], &[2, 2]).unwrap();
        let post = Ket::from_real(&[1.0, 1.0, 1.0, 1.0], &[2, 2]).unwrap();
        let cfg = PointerConfig::entangled_sum(2, 1e7).unwrap();
        let coupled = couple(&pre, &sigma_pair(), &cfg).unwrap();
        let m = moments_closed_form(&postselect(&coupled, &post).unwrap());
        assert_abs_diff_eq!(estimate_direct(&m, &[0]), 22.0, epsilon = 1e-6);
    }

    #[test]
    fn direct_single_branch_returns_shift() {
        use crate::pointer::{Branch, BranchedPointerState};
        let state = BranchedPointerState::from_branches(
            vec![Branch {
                amplitude: C64::ONE,
                shifts: vec![0.75],
            }],
            PointerConfig::local(1, 2.0).unwrap(),
        )
        .unwrap();
        let m = moments_closed_form(&state);
        assert_abs_diff_eq!(estimate_direct(&m, &[0]), 0.75, epsilon = 1e-14);
    }

    #[test]
    fn resch_steinberg_recovers_product_weak_value() {
        for (primed, want) in [(false, 1.0), (true, -1.0)] {
            let (pre, post) = phase_pair(primed);
            let tsv = TwoStateVector::new(pre.clone(), post.clone()).unwrap();
            let za = embed(&Operator::sigma_z(), 0, &[2, 2]).unwrap();
            let zb = embed(&Operator::sigma_z(), 1, &[2, 2]).unwrap();
            let a_w = tsv.weak_value(&za).unwrap();
            let b_w = tsv.weak_value(&zb).unwrap();
            // oracle moments, not the closed form, at Δ = 100
            let cfg = PointerConfig::local(2, 100.0).unwrap();
            let coupled = couple(&pre, &sigma_pair(), &cfg).unwrap();
            let state = postselect(&coupled, &post).unwrap();
            let m = moments_grid_oracle(&state, &GridSpec::default()).unwrap();
            let got = estimate_resch_steinberg(&m, a_w, b_w).unwrap();
            assert!(
                (got - want).abs() < 0.01 * want.abs(),
                "primed={primed}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn resch_lundeen_recovers_product_weak_value() {
        for (primed, want) in [(false, 1.0), (true, -1.0)] {
            let (pre, post) = phase_pair(primed);
            let cfg = PointerConfig::local(2, 100.0).unwrap();
            let coupled = couple(&pre, &sigma_pair(), &cfg).unwrap();
            let state = postselect(&coupled, &post).unwrap();
            let m = moments_grid_oracle(&state, &GridSpec::default()).unwrap();
            let got = estimate_resch_lundeen(&m, 100.0).unwrap();
            assert!(
                (got - want).abs() < 0.01 * want.abs(),
                "primed={primed}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn joint_estimators_on_product_eigenstate() {
        // A, B on |up,up> with trivial post-selection: both estimators give 1
        let upup = ket22([C64::ONE, C64::ZERO, C64::ZERO, C64::ZERO]);
        let m = local_moments(&upup, &upup, 3.0);
        let got = estimate_resch_steinberg(&m, C64::ONE, C64::ONE).unwrap();
        assert_abs_diff_eq!(got, 1.0, epsilon = 1e-12);
        let got = estimate_resch_lundeen(&m, 3.0).unwrap();
        assert_abs_diff_eq!(got, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn resch_lundeen_zero_coupling_is_zero() {
        let (pre, post) = phase_pair(false);
        let cfg = PointerConfig::local(2, 2.0).unwrap().with_coupling(0.0);
        let coupled = couple(&pre, &sigma_pair(), &cfg).unwrap();
        let m = moments_closed_form(&postselect(&coupled, &post).unwrap());
        assert_abs_diff_eq!(estimate_resch_lundeen(&m, 2.0).unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn joint_estimators_reject_entangled_topology() {
        let pre = Ket::from_real(&[0.11, 0.95, -1.05, 0.0], &[2, 2]).unwrap();
        let post = Ket::from_real(&[1.0, 1.0, 1.0, 1.0], &[2, 2]).unwrap();
        let cfg = PointerConfig::entangled_sum(2, 5.0).unwrap();
        let coupled = couple(&pre, &sigma_pair(), &cfg).unwrap();
        let m = moments_closed_form(&postselect(&coupled, &post).unwrap());
        assert!(matches!(
            estimate_resch_steinberg(&m, C64::ONE, C64::ONE),
            Err(Error::WrongTopology)
        ));
        assert!(matches!(
            estimate_resch_lundeen(&m, 5.0),
            Err(Error::WrongTopology)
        ));
    }

    fn seeded_tsv(seed: u64) -> (Ket, Ket) {
        // small deterministic complex kets with healthy overlap
        let mut s = seed;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        loop {
            let pre: Vec<C64> = (0..4).map(|_| c(next(), next())).collect();
            let post: Vec<C64> = (0..4).map(|_| c(next(), next())).collect();
            let pre = Ket::new(pre, vec![2, 2]).unwrap();
            let post = Ket::new(post, vec![2, 2]).unwrap();
            let ov = crate::qstate::inner(&post, &pre).unwrap().norm();
            if ov > 0.25 * pre.norm() * post.norm() {
                return (pre, post);
            }
        }
    }

    #[test]
    fn joint_estimators_converge_at_second_order() {
        let za = embed(&Operator::sigma_z(), 0, &[2, 2]).unwrap();
        let zb = embed(&Operator::sigma_z(), 1, &[2, 2]).unwrap();
        let prod = za.matmul(&zb).unwrap();
        let deltas = [10.0, 30.0, 100.0, 300.0];
        for seed in [3u64, 11, 17] {
            let (pre, post) = seeded_tsv(seed);
            let tsv = TwoStateVector::new(pre.clone(), post.clone()).unwrap();
            let target = tsv.weak_value(&prod).unwrap().re;
            let a_w = tsv.weak_value(&za).unwrap();
            let b_w = tsv.weak_value(&zb).unwrap();

            let devs: Vec<(f64, f64, f64)> = deltas
                .iter()
                .map(|&d| {
                    let m = local_moments(&pre, &post, d);
                    let rs = estimate_resch_steinberg(&m, a_w, b_w).unwrap();
                    let rl = estimate_resch_lundeen(&m, d).unwrap();
                    (d, (rs - target).abs(), (rl - target).abs())
                })
                .collect();

            // log-log slope of deviation vs width, for each estimator
            for pick in [1usize, 2] {
                let pts: Vec<(f64, f64)> = devs
                    .iter()
                    .map(|t| (t.0.ln(), if pick == 1 { t.1 } else { t.2 }.max(1e-300).ln()))
                    .collect();
                let n = pts.len() as f64;
                let sx: f64 = pts.iter().map(|p| p.0).sum();
                let sy: f64 = pts.iter().map(|p| p.1).sum();
                let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
                let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
                let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
                assert!(
                    slope < -1.8,
                    "seed {seed}, estimator {pick}: slope {slope}"
                );
            }

            // the two estimators agree at O(1/Δ²) between themselves
            let gap10 = {
                let m = local_moments(&pre, &post, 10.0);
                (estimate_resch_steinberg(&m, a_w, b_w).unwrap()
                    - estimate_resch_lundeen(&m, 10.0).unwrap())
                .abs()
            };
            let gap100 = {
                let m = local_moments(&pre, &post, 100.0);
                (estimate_resch_steinberg(&m, a_w, b_w).unwrap()
                    - estimate_resch_lundeen(&m, 100.0).unwrap())
                .abs()
            };
            assert!(
                gap100 <= gap10 * (10.0f64 / 100.0).powf(1.8) + 1e-12,
                "seed {seed}: gaps {gap10} -> {gap100}"
            );
        }
    }

    #[test]
    fn direct_sum_equals_sum_of_singles_exactly() {
        // linearity of the mean, not just asymptotics
        let (pre, post) = seeded_tsv(23);
        let m = local_moments(&pre, &post, 2.5);
        let total = estimate_direct(&m, &[0, 1]);
        assert_abs_diff_eq!(
            total,
            estimate_direct(&m, &[0]) + estimate_direct(&m, &[1]),
            epsilon = 1e-15
        );
    }

    #[test]
    fn joint_estimators_invariant_under_global_phase() {
        let (pre, post) = phase_pair(false);
        let m0 = local_moments(&pre, &post, 4.0);
        let phased_pre = pre.scaled(C64::from_polar(1.0, 1.1));
        let phased_post = post.scaled(C64::from_polar(1.0, -2.3));
        let m1 = local_moments(&phased_pre, &phased_post, 4.0);
        assert_abs_diff_eq!(m0.corr_qq[0][1], m1.corr_qq[0][1], epsilon = 1e-13);
        assert_abs_diff_eq!(m0.corr_pp[0][1], m1.corr_pp[0][1], epsilon = 1e-13);
    }

    #[test]
    fn measured_only_weak_value_mode() {
        // meanQ + i Δ² meanP converges to the complex local weak value
        let (pre, post) = phase_pair(false);
        let tsv = TwoStateVector::new(pre.clone(), post.clone()).unwrap();
        let za = embed(&Operator::sigma_z(), 0, &[2, 2]).unwrap();
        let want = tsv.weak_value(&za).unwrap();
        let m = local_moments(&pre, &post, 50.0);
        let got = weak_value_from_moments(&m, 0);
        assert!((got - want).norm() < 1e-3, "{got} vs {want}");
    }

    #[test]
    fn estimator_names_round_trip() {
        for kind in EstimatorKind::ALL {
            assert_eq!(kind.name().parse::<EstimatorKind>().unwrap(), kind);
        }
        assert!("nope".parse::<EstimatorKind>().is_err());
    }

    #[test]
    fn estimate_report_deviation() {
        let r = EstimateReport::new("direct", 21.5, c(22.0, 0.0), 100.0, vec!["meanQ".into()]);
        assert_abs_diff_eq!(r.deviation, 0.5 / 22.0, epsilon = 1e-15);
    }
}
