//! The reproduction report: reruns every builtin scenario, compares each
//! quantity against its reference value at a pinned tolerance, and lists
//! the internal inconsistencies of the reference derivation that the
//! simulator resolves. Deterministic for a fixed seed.

use std::fmt::Write as _;

use weaksim_core::pointer::oracle::{max_moment_disagreement, moments_grid_oracle, GridSpec};
use weaksim_core::{
    abl_probabilities, couple, eigendecompose, estimate_resch_lundeen,
    estimate_resch_steinberg, fidelity, joint_strong_expectation, measure_strong,
    modsum_identity_check, moments_closed_form, postselect, required_ensemble,
    required_total_trials, spin1_causality, strong_expectation, BobAction, Combine, EstimatorKind,
    PointerConfig, Result, ScenarioSpec,
};

use crate::commands::{device_state, find_crossing, sweep_rows};
use crate::config::SweepRange;
use crate::synth;

/// Seed compiled into the report so repeated runs are byte-identical.
pub const REPORT_SEED: u64 = 17;

struct Row {
    label: String,
    expected: String,
    computed: String,
    tolerance: String,
    pass: bool,
}

struct Section {
    title: String,
    rows: Vec<Row>,
    notes: Vec<String>,
}

struct ReportBuilder {
    sections: Vec<Section>,
}

impl ReportBuilder {
    fn section(&mut self, title: &str) -> &mut Section {
        self.sections.push(Section {
            title: title.to_string(),
            rows: Vec::new(),
            notes: Vec::new(),
        });
        self.sections.last_mut().expect("just pushed")
    }
}

impl Section {
    fn check(&mut self, label: &str, expected: f64, computed: f64, tol: f64) {
        let scale = expected.abs().max(1.0);
        self.rows.push(Row {
            label: label.to_string(),
            expected: format!("{expected}"),
            computed: format!("{computed}"),
            tolerance: format!("{tol:.0e} (relative to max(1, |expected|))"),
            pass: (computed - expected).abs() <= tol * scale,
        });
    }

    fn check_exact(&mut self, label: &str, expected: f64, computed: f64) {
        self.rows.push(Row {
            label: label.to_string(),
            expected: format!("{expected}"),
            computed: format!("{computed}"),
            tolerance: "exact".to_string(),
            pass: expected == computed,
        });
    }

    fn check_bound(&mut self, label: &str, bound_desc: &str, computed: f64, pass: bool) {
        self.rows.push(Row {
            label: label.to_string(),
            expected: bound_desc.to_string(),
            computed: format!("{computed}"),
            tolerance: "bound".to_string(),
            pass,
        });
    }

    fn note(&mut self, text: &str) {
        self.notes.push(text.to_string());
    }
}

/// Builds the full report; returns (markdown, all_passed).
pub fn build_report() -> Result<(String, bool)> {
    let mut report = ReportBuilder {
        sections: Vec::new(),
    };

    weak_values(&mut report)?;
    strong_expectations(&mut report)?;
    pointer_closed_form(&mut report)?;
    weak_limit(&mut report)?;
    sum_and_product_rules(&mut report)?;
    joint_estimators(&mut report)?;
    indistinguishability(&mut report)?;
    causality(&mut report);
    nondemolition(&mut report)?;
    resources(&mut report)?;

    let all = report
        .sections
        .iter()
        .all(|s| s.rows.iter().all(|r| r.pass));
    Ok((render(&report, all), all))
}

fn weak_values(report: &mut ReportBuilder) -> Result<()> {
    let s = report.section("Exact weak values");
    let resolved = ScenarioSpec::builtin("two_state_22")?.resolve()?;
    for (label, expected) in [
        ("sigma_z[A]+sigma_z[B]", 22.0),
        ("sigma_z[A]", 211.0),
        ("sigma_z[B]", -189.0),
        ("sigma_z[A]*sigma_z[B]", 21.0),
    ] {
        let rows = resolved.weak_value_rows()?;
        let got = rows
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, v)| v.re)
            .expect("row present");
        s.check(&format!("two_state_22 {label}"), expected, got, 1e-10);
    }
    for (name, expected) in [("product_phase", 1.0), ("product_phase_prime", -1.0)] {
        let resolved = ScenarioSpec::builtin(name)?.resolve()?;
        let wv = resolved
            .tsv
            .weak_value(&resolved.combined_observable()?)?;
        s.check(&format!("{name} product"), expected, wv.re, 1e-12);
        s.check(&format!("{name} product (imag)"), 0.0, wv.im, 1e-12);
    }
    let resolved = ScenarioSpec::builtin("epsilon_sum")?.resolve()?;
    let wv = resolved.tsv.weak_value(&resolved.combined_observable()?)?;
    s.check("epsilon_sum sum", 2.0, wv.re, 1e-12);
    Ok(())
}

fn strong_expectations(report: &mut ReportBuilder) -> Result<()> {
    let s = report.section("ABL probabilities and strong expectations (epsilon = 0.1)");
    let eps = 0.1f64;
    let resolved = ScenarioSpec::builtin("epsilon_sum")?.resolve()?;
    let embedded = resolved.embedded_observables()?;
    let sum_op = resolved.combined_observable()?;

    let e2 = eps * eps;
    let e4 = e2 * e2;
    let sum = strong_expectation(&resolved.tsv, &eigendecompose(&sum_op)?)?;
    s.check("nonlocal sum expectation", 2.0, sum, 1e-12);
    let a = strong_expectation(&resolved.tsv, &eigendecompose(&embedded[0])?)?;
    s.check(
        "local A expectation",
        (2.0 * e2 + e4) / (2.0 + e4 + 2.0 * e2),
        a,
        1e-12,
    );
    let b = strong_expectation(&resolved.tsv, &eigendecompose(&embedded[1])?)?;
    s.check(
        "local B expectation",
        (-2.0 * e2 + e4) / (2.0 + e4 - 2.0 * e2),
        b,
        1e-12,
    );
    let joint = joint_strong_expectation(&resolved.tsv, &resolved.observables, Combine::Sum)?;
    s.check(
        "joint separate expectation",
        2.0 * e4 / (2.0 + e4),
        joint,
        1e-12,
    );
    s.note(
        "The reference text prints the joint separate expectation as 2eps^2/(2+eps^4); \
         its own displayed ratio of projector amplitudes evaluates to 2eps^4/(2+eps^4), \
         which is the value checked here.",
    );

    s.check_bound(
        "three-way inequality: |sum - (A+B)|",
        "> 0.01",
        (sum - (a + b)).abs(),
        (sum - (a + b)).abs() > 0.01,
    );
    s.check_bound(
        "three-way inequality: |sum - joint|",
        "> 0.01",
        (sum - joint).abs(),
        (sum - joint).abs() > 0.01,
    );
    s.check_bound(
        "three-way inequality: |(A+B) - joint|",
        "> 1e-5 (exact gap is about 2e-4)",
        ((a + b) - joint).abs(),
        ((a + b) - joint).abs() > 1e-5,
    );

    let probs = abl_probabilities(&resolved.tsv, &eigendecompose(&sum_op)?)?;
    let p2 = probs
        .iter()
        .find(|(v, _)| *v == 2.0)
        .map(|(_, p)| *p)
        .expect("eigenvalue 2 present");
    s.check("ABL certainty on outcome 2", 1.0, p2, 1e-12);

    s.check_bound(
        "modular-sum identity (sum reading)",
        "holds on all four basis states",
        if modsum_identity_check() { 1.0 } else { 0.0 },
        modsum_identity_check(),
    );
    Ok(())
}

fn pointer_closed_form(report: &mut ReportBuilder) -> Result<()> {
    let s = report.section("Pointer closed form and grid oracle");
    for eps in [0.05, 0.1, 0.5] {
        for delta in [1.0, 10.0, 100.0, 600.0] {
            let spec = ScenarioSpec::builtin_with_epsilon("epsilon_sum", eps)?;
            let state = device_state(&spec.resolve()?, delta)?;
            let m = moments_closed_form(&state);
            s.check(
                &format!("sum mean, eps={eps} delta={delta}"),
                synth::epsilon_sum_mean(eps, delta),
                m.mean_q[0] + m.mean_q[1],
                1e-10,
            );
        }
    }

    let mut worst = 0.0f64;
    for i in 0..100 {
        let state = synth::seeded_branched_state(REPORT_SEED.wrapping_add(i), 5);
        let closed = moments_closed_form(&state);
        let oracle = moments_grid_oracle(&state, &GridSpec::default())?;
        worst = worst.max(max_moment_disagreement(&closed, &oracle));
    }
    s.check_bound(
        "closed form vs oracle, 100 random branched states",
        "< 1e-8",
        worst,
        worst < 1e-8,
    );

    let state = device_state(&ScenarioSpec::builtin("epsilon_sum")?.resolve()?, 4.0)?;
    let oracle = moments_grid_oracle(&state, &GridSpec::default())?;
    let gap = (state.p_postselect() - oracle.p_postselect).abs();
    s.check_bound(
        "post-selection probability, Gram form vs integrated density",
        "< 1e-9",
        gap,
        gap < 1e-9,
    );
    Ok(())
}

fn weak_limit(report: &mut ReportBuilder) -> Result<()> {
    let s = report.section("Weak-limit convergence of the pointer mean");
    let widths = [30.0, 100.0, 300.0, 1000.0, 3000.0];
    for i in 0..5u64 {
        let tsv = synth::seeded_tsv_for_slope(REPORT_SEED.wrapping_add(100 + i));
        let slope = synth::weak_limit_slope(&tsv, &widths);
        s.check(&format!("log-log slope, random pair {i}"), -2.0, slope, 0.1);
    }
    Ok(())
}

fn sum_and_product_rules(report: &mut ReportBuilder) -> Result<()> {
    let s = report.section("Sum rule and product non-rule");
    let mut worst = 0.0f64;
    for i in 0..20u64 {
        let tsv = synth::seeded_tsv(REPORT_SEED.wrapping_add(200 + i));
        let za = weaksim_core::embed(&weaksim_core::Operator::sigma_z(), 0, &[2, 2])?;
        let zb = weaksim_core::embed(&weaksim_core::Operator::sigma_z(), 1, &[2, 2])?;
        let lhs = tsv.weak_value(&za.add(&zb)?)?;
        let rhs = tsv.weak_value(&za)? + tsv.weak_value(&zb)?;
        worst = worst.max((lhs - rhs).norm());
    }
    s.check_bound("sum rule on 20 random pairs", "< 1e-10", worst, worst < 1e-10);

    let resolved = ScenarioSpec::builtin("two_state_22")?.resolve()?;
    let embedded = resolved.embedded_observables()?;
    let a_w = resolved.tsv.weak_value(&embedded[0])?;
    let b_w = resolved.tsv.weak_value(&embedded[1])?;
    let ab_w = resolved
        .tsv
        .weak_value(&embedded[0].matmul(&embedded[1])?)?;
    let witness = (ab_w - a_w * b_w).norm();
    s.check_bound(
        "product non-rule witness |(AB)_w - A_w B_w|",
        ">= 0.1",
        witness,
        witness >= 0.1,
    );
    Ok(())
}

fn joint_estimators(report: &mut ReportBuilder) -> Result<()> {
    let s = report.section("Joint weak-value estimators at delta = 100 (oracle moments)");
    for (name, expected) in [("product_phase", 1.0), ("product_phase_prime", -1.0)] {
        let resolved = ScenarioSpec::builtin(name)?.resolve()?;
        let embedded = resolved.embedded_observables()?;
        let a_w = resolved.tsv.weak_value(&embedded[0])?;
        let b_w = resolved.tsv.weak_value(&embedded[1])?;
        let state = device_state(&resolved, 100.0)?;
        let m = moments_grid_oracle(&state, &GridSpec::default())?;
        let rs = estimate_resch_steinberg(&m, a_w, b_w)?;
        let rl = estimate_resch_lundeen(&m, 100.0)?;
        s.check(&format!("{name} position-correlation estimate"), expected, rs, 0.01);
        s.check(&format!("{name} momentum-correlation estimate"), expected, rl, 0.01);
        s.check(&format!("{name} cross-estimator gap"), rs, rl, 1e-3);
    }
    Ok(())
}

fn indistinguishability(report: &mut ReportBuilder) -> Result<()> {
    let s = report.section("Identical position densities, distinct momentum correlations");
    let plain = device_state(&ScenarioSpec::builtin("product_phase")?.resolve()?, 1.0)?;
    let primed = device_state(
        &ScenarioSpec::builtin("product_phase_prime")?.resolve()?,
        1.0,
    )?;
    let axes = weaksim_core::pointer::oracle::position_axes(&plain, &GridSpec::default())?;
    let (na, nb) = (plain.norm_sqr(), primed.norm_sqr());
    let mut sup = 0.0f64;
    for qa in axes[0].points() {
        for qb in axes[1].points() {
            let d = weaksim_core::pointer::oracle::position_density(&plain, &[qa, qb]) / na
                - weaksim_core::pointer::oracle::position_density(&primed, &[qa, qb]) / nb;
            sup = sup.max(d.abs());
        }
    }
    s.check_bound("sup position-density difference", "< 1e-10", sup, sup < 1e-10);

    let ma = moments_grid_oracle(&plain, &GridSpec::default())?;
    let mb = moments_grid_oracle(&primed, &GridSpec::default())?;
    let gap = (ma.corr_pp[0][1] - mb.corr_pp[0][1]).abs();
    s.check_bound("momentum correlation gap", "> 1e-3", gap, gap > 1e-3);
    Ok(())
}

fn causality(report: &mut ReportBuilder) {
    let s = report.section("Causality bound on nonlocal product measurement (spin-1)");
    s.check_exact(
        "Alice success, Bob does nothing",
        1.0,
        spin1_causality(BobAction::Nothing),
    );
    s.check_exact(
        "Alice success, Bob flips to +1",
        0.5,
        spin1_causality(BobAction::FlipToOne),
    );
    s.check_exact(
        "control (measurement disabled)",
        1.0,
        weaksim_core::alice_success_probability(BobAction::FlipToOne, false),
    );
}

fn nondemolition(report: &mut ReportBuilder) -> Result<()> {
    let s = report.section("Non-demolition of the entangled-sum device");
    let resolved = ScenarioSpec::builtin("singlet_sum")?.resolve()?;
    let singlet = resolved.tsv.pre().clone();

    let cfg = PointerConfig::entangled_sum(2, 0.05)?;
    let outcomes = measure_strong(&singlet, &resolved.observables, &cfg)?;
    s.check("entangled-sum outcome count", 1.0, outcomes.len() as f64, 0.0);
    s.check("entangled-sum outcome probability", 1.0, outcomes[0].probability, 1e-12);
    let f = fidelity(&outcomes[0].post_state, &singlet)?;
    s.check_bound("singlet fidelity after sum measurement", ">= 1 - 1e-10", f, f >= 1.0 - 1e-10);

    let cfg = PointerConfig::local(2, 0.05)?;
    let outcomes = measure_strong(&singlet, &resolved.observables, &cfg)?;
    s.check("local-product outcome count", 2.0, outcomes.len() as f64, 0.0);
    for o in &outcomes {
        s.check(
            &format!("local collapse probability at {:?}", o.values),
            0.5,
            o.probability,
            1e-10,
        );
    }
    Ok(())
}

fn resources(report: &mut ReportBuilder) -> Result<()> {
    let s = report.section("Resource accounting and figure data");

    // epsilon scenario at the width where the systematic deviation is 10%
    let resolved = ScenarioSpec::builtin("epsilon_sum")?.resolve()?;
    let state = device_state(&resolved, 600.0)?;
    let n_order = required_ensemble(&state, EstimatorKind::Direct, 2.0, 0.5)?;
    s.check_bound(
        "epsilon ensemble at order-of-magnitude accuracy (abs error 1.0)",
        "within x3 of 3.6e5",
        n_order as f64,
        n_order as f64 / 3.6e5 < 3.0 && 3.6e5 / (n_order as f64) < 3.0,
    );
    let n_tight = required_ensemble(&state, EstimatorKind::Direct, 2.0, 0.1)?;
    s.check(
        "epsilon ensemble at 10% statistical error (inverse-square of the above)",
        25.0,
        n_tight as f64 / n_order as f64,
        0.01,
    );
    s.note(&format!(
        "Post-selected counts above; survival probability {:.3e} puts the total trial \
         counts at {} and {} respectively.",
        state.p_postselect(),
        required_total_trials(&state, n_order),
        required_total_trials(&state, n_tight),
    ));
    s.note(
        "The published 3.6e5 figure corresponds to a statistical error equal to half \
         the target (the order-of-magnitude criterion stated alongside it), not to the \
         10% criterion used for the amplified-pair counts below; the two readings \
         differ by exactly the inverse-square factor 25.",
    );

    // amplified pair at the 1%-deviation widths
    let amplified = ScenarioSpec::builtin("two_state_22")?.resolve()?;
    let c_local = synth::amplified_local_asymptote_coefficient();
    let c_ent = synth::amplified_entangled_asymptote_coefficient();
    let w_local = (c_local / 0.22).sqrt();
    let w_ent = (c_ent / 0.22).sqrt();
    s.check_bound(
        "local-device asymptote coefficient",
        "within 2% of 8.8e5",
        c_local,
        (c_local / 8.8e5 - 1.0).abs() < 0.02,
    );

    let cfg = PointerConfig::local(2, w_local)?;
    let coupled = couple(amplified.tsv.pre(), &amplified.observables, &cfg)?;
    let local_state = postselect(&coupled, amplified.tsv.post())?;
    let n_local = required_ensemble(&local_state, EstimatorKind::Direct, 22.0, 0.1)?;

    let cfg = PointerConfig::entangled_sum(2, w_ent)?;
    let coupled = couple(amplified.tsv.pre(), &amplified.observables, &cfg)?;
    let ent_state = postselect(&coupled, amplified.tsv.post())?;
    let n_ent = required_ensemble(&ent_state, EstimatorKind::Direct, 22.0, 0.1)?;

    s.check_bound(
        "local ensemble at 1% deviation + 10% uncertainty",
        "within x3 of 8.2e5",
        n_local as f64,
        n_local as f64 / 8.2e5 < 3.0 && 8.2e5 / (n_local as f64) < 3.0,
    );
    s.check_bound(
        "entangled ensemble at 1% deviation + 10% uncertainty",
        "within x3 of 2.2e3",
        n_ent as f64,
        n_ent as f64 / 2.2e3 < 3.0 && 2.2e3 / (n_ent as f64) < 3.0,
    );
    s.check_bound(
        "entangled advantage ratio",
        "> 100",
        n_local as f64 / n_ent as f64,
        n_local as f64 / n_ent as f64 > 100.0,
    );

    // figure data: sweep of the amplified pair across both devices
    let range = SweepRange {
        min: 20.0,
        max: 3000.0,
        points: 60,
        log: true,
    };
    let rows = sweep_rows(&amplified, &range.values())?;
    let (a, b) = find_crossing(&rows, "local-product", "direct", 0.1)
        .expect("local crossing inside the sweep range");
    s.check_bound(
        "local-device 10% deviation crossing",
        "bracketed inside [400, 900]",
        0.5 * (a + b),
        a >= 400.0 && b <= 900.0,
    );
    if let Some((ea, eb)) = find_crossing(&rows, "entangled-sum", "direct", 0.1) {
        let exact_mid = synth::amplified_entangled_mean(0.5 * (ea + eb));
        s.check_bound(
            "entangled-device 10% crossing bracket midpoint vs exact expression",
            "deviation within [0.05, 0.2] of the target at the bracket midpoint",
            (exact_mid - 22.0).abs() / 22.0,
            {
                let dev = (exact_mid - 22.0).abs() / 22.0;
                (0.05..=0.2).contains(&dev)
            },
        );
    }
    s.note(&format!(
        "Entangled-device exact mean under this convention: \
         22(11 e^(1/D^2) - 10)/(221 e^(1/D^2) - 220); large-width expansion \
         22 - {c_ent:.0}/D^2."
    ));
    s.note(
        "Not reproducible as printed: the quoted 2360/D^2 entangled asymptote \
         (the exact expression's own expansion gives 9240/D^2 when read with \
         e^(2/D^2), and 4620/D^2 under this convention), and the 1e12 local \
         ensemble for the product measurement; both are covered by the \
         oracle-agreement and convergence checks instead.",
    );
    Ok(())
}

fn render(report: &ReportBuilder, all: bool) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Reproduction report\n");
    let _ = writeln!(
        out,
        "Deterministic run with seed {REPORT_SEED}. Every row compares a simulator \
         output against its reference value at the stated tolerance.\n"
    );
    let total: usize = report.sections.iter().map(|s| s.rows.len()).sum();
    let passed: usize = report
        .sections
        .iter()
        .map(|s| s.rows.iter().filter(|r| r.pass).count())
        .sum();
    let _ = writeln!(
        out,
        "**{passed}/{total} checks passed{}**\n",
        if all { "" } else { " - FAILURES PRESENT" }
    );

    for (i, sec) in report.sections.iter().enumerate() {
        let _ = writeln!(out, "## {} {}\n", i + 1, sec.title);
        let _ = writeln!(out, "| check | expected | computed | tolerance | status |");
        let _ = writeln!(out, "|---|---|---|---|---|");
        for row in &sec.rows {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} |",
                row.label,
                row.expected,
                row.computed,
                row.tolerance,
                if row.pass { "pass" } else { "FAIL" }
            );
        }
        let _ = writeln!(out);
        for note in &sec.notes {
            let _ = writeln!(out, "note: {note}\n");
        }
    }

    let _ = writeln!(out, "## Inconsistencies in the reference derivation\n");
    let _ = writeln!(
        out,
        "The following five statements in the reference derivation are internally \
         inconsistent as printed. The simulator implements the consistent reading \
         in each case; nothing here is silently corrected.\n"
    );
    for (i, item) in [
        "Entangled-device large-width asymptote: printed as 22 - 2360/D^2, but the \
         printed exact expression expands to 22 - 9240/D^2 (with its e^(2/D^2) \
         exponent), and under this simulator's single Gaussian convention the exact \
         mean is 22(11 e^(1/D^2) - 10)/(221 e^(1/D^2) - 220) with asymptote \
         22 - 4620/D^2. The exact expression is the reproduction target.",
        "Product weak value: the printed intermediate (2 - eps^2)/(2 + eps^2) \
         evaluates to about 0.990 at eps = 0.1, not to the printed result 21. The \
         direct ratio of matrix elements gives 21 exactly and is authoritative.",
        "Entangled device initial state: the printed Gaussian carries a positive \
         exponent, which is not normalizable; the negative sign is adopted.",
        "Epsilon-family normalization: the printed prefactor sqrt(1/(2+eps^2)) \
         covers only the first two terms, so the state is not normalized as \
         written. Unnormalized coefficient lists (1, 1, eps) and (1, -1, eps) \
         reproduce every quoted closed form; all formulas here are ratios, so \
         normalization never enters.",
        "Modular-sum identity: printed with the product inside the modulus, which \
         fails on the anti-aligned basis states ((-1 mod 4) - 1 = 2, not -1). The \
         sum-inside-modulus reading ((z_A + z_B) mod 4) - 1 holds on all four \
         basis states and is what the identity check verifies.",
    ]
    .iter()
    .enumerate()
    {
        let _ = writeln!(out, "{}. {}\n", i + 1, item);
    }
    out
}

/// Writes the report and returns the stdout summary.
pub fn cmd_report(out: &std::path::Path) -> Result<String> {
    let (text, all) = build_report()?;
    std::fs::write(out, &text).map_err(|e| {
        weaksim_core::Error::InvalidConfig(format!("cannot write {}: {e}", out.display()))
    })?;
    Ok(format!(
        "wrote report to {} ({})\n",
        out.display(),
        if all { "all checks passed" } else { "FAILURES PRESENT" }
    ))
}
