//! Subcommand implementations. Every function returns the rendered stdout
//! text; file outputs are written as a side effect. All output is
//! deterministic for a fixed configuration and seed.

use std::fmt::Write as _;
use std::path::Path;

use weaksim_core::pointer::oracle::{max_moment_disagreement, moments_grid_oracle, GridSpec};
use weaksim_core::{
    abl_probabilities, couple, couple_observable, eigendecompose, estimate_direct,
    estimate_resch_lundeen, estimate_resch_steinberg, joint_strong_expectation,
    moments_closed_form, postselect, run_experiment, sample_shots, Basis, BranchedPointerState,
    Combine, EnsembleStats, Error, EstimatorKind, PointerConfig, ResolvedScenario, Result,
    ScenarioSpec, ShotRecord, Topology,
};

use crate::config::Format;

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents)
        .map_err(|e| Error::InvalidConfig(format!("cannot write {}: {e}", path.display())))
}

fn fmt_complex(v: weaksim_core::C64) -> String {
    if v.im >= 0.0 {
        format!("{}+{}i", v.re, v.im)
    } else {
        format!("{}-{}i", v.re, -v.im)
    }
}

/// Builds the post-selected device state of a scenario at a given width.
pub fn device_state(resolved: &ResolvedScenario, delta: f64) -> Result<BranchedPointerState> {
    let cfg = resolved.pointer_config(delta)?;
    let coupled = couple(resolved.tsv.pre(), &resolved.observables, &cfg)?;
    postselect(&coupled, resolved.tsv.post())
}

pub fn cmd_weakvalue(scenario: &ScenarioSpec, format: Format) -> Result<String> {
    let resolved = scenario.resolve()?;
    let rows = resolved.weak_value_rows()?;
    match format {
        Format::Table => {
            let mut out = format!("scenario: {}\n", resolved.name);
            for (label, value) in rows {
                let _ = writeln!(out, "{label}: {}", fmt_complex(value));
            }
            Ok(out)
        }
        Format::Json => {
            let items: Vec<serde_json::Value> = rows
                .iter()
                .map(|(label, v)| {
                    serde_json::json!({ "observable": label, "weak_value": [v.re, v.im] })
                })
                .collect();
            Ok(format!(
                "{}\n",
                serde_json::json!({ "scenario": resolved.name, "weak_values": items })
            ))
        }
    }
}

pub fn cmd_abl(scenario: &ScenarioSpec, format: Format) -> Result<String> {
    let resolved = scenario.resolve()?;
    let combined = resolved.combined_observable()?;
    let dec = eigendecompose(&combined)?;
    let probs = abl_probabilities(&resolved.tsv, &dec)?;
    let strong: f64 = probs.iter().map(|(v, p)| v * p).sum();

    let locals: Vec<f64> = resolved
        .embedded_observables()?
        .iter()
        .map(|op| {
            let d = eigendecompose(op)?;
            weaksim_core::strong_expectation(&resolved.tsv, &d)
        })
        .collect::<Result<_>>()?;
    let joint = joint_strong_expectation(&resolved.tsv, &resolved.observables, resolved.combine)?;

    match format {
        Format::Table => {
            let mut out = format!(
                "scenario: {}\nobservable: {}\n",
                resolved.name,
                resolved.combined_label()
            );
            for (value, p) in &probs {
                let _ = writeln!(out, "Prob({value}) = {p}");
            }
            let _ = writeln!(out, "strong expectation = {strong}");
            for (i, v) in locals.iter().enumerate() {
                let _ = writeln!(out, "local strong expectation [{i}] = {v}");
            }
            let _ = writeln!(out, "joint (separate simultaneous) expectation = {joint}");
            Ok(out)
        }
        Format::Json => Ok(format!(
            "{}\n",
            serde_json::json!({
                "scenario": resolved.name,
                "observable": resolved.combined_label(),
                "abl": probs.iter().map(|(v, p)| serde_json::json!({"eigenvalue": v, "probability": p})).collect::<Vec<_>>(),
                "strong_expectation": strong,
                "local_strong_expectations": locals,
                "joint_expectation": joint,
            })
        )),
    }
}

pub fn cmd_moments(
    scenario: &ScenarioSpec,
    delta: Option<f64>,
    grid: &GridSpec,
    format: Format,
) -> Result<String> {
    let resolved = scenario.resolve()?;
    let delta = delta.unwrap_or(resolved.delta);
    let state = device_state(&resolved, delta)?;
    let closed = moments_closed_form(&state);
    let oracle = moments_grid_oracle(&state, grid)?;
    let disagreement = max_moment_disagreement(&closed, &oracle);
    match format {
        Format::Json => Ok(format!(
            "{}\n",
            serde_json::to_string_pretty(&serde_json::json!({
                "scenario": resolved.name,
                "delta": delta,
                "closed_form": closed,
                "grid_oracle": oracle,
                "max_disagreement": disagreement,
            }))
            .expect("serializable")
        )),
        Format::Table => {
            let mut out = format!(
                "scenario: {} (delta = {delta}, p_postselect = {})\n",
                resolved.name, closed.p_postselect
            );
            for i in 0..closed.n_coordinates() {
                let _ = writeln!(
                    out,
                    "coordinate {i}: meanQ = {} meanP = {} varQ = {}",
                    closed.mean_q[i],
                    closed.mean_p[i],
                    closed.var_q(i)
                );
            }
            if closed.n_coordinates() == 2 {
                let _ = writeln!(
                    out,
                    "corrQQ[0][1] = {}  corrPP[0][1] = {}",
                    closed.corr_qq[0][1], closed.corr_pp[0][1]
                );
            }
            let _ = writeln!(out, "closed form vs grid oracle: {disagreement:.3e}");
            Ok(out)
        }
    }
}

/// One sweep sample: a device/estimator pair at one width.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SweepRow {
    pub delta: f64,
    pub device: String,
    pub estimator: String,
    pub estimate: f64,
    pub target: f64,
    pub rel_deviation: f64,
}

/// Closed-form sweep: for sum observables, the local-product and
/// entangled-sum devices; for products, the idealized single-pointer
/// device plus the two local-readout reconstructions.
pub fn sweep_rows(resolved: &ResolvedScenario, widths: &[f64]) -> Result<Vec<SweepRow>> {
    let combined = resolved.combined_observable()?;
    let target = resolved.tsv.weak_value(&combined)?.re;
    let mut rows = Vec::new();
    let mut push = |delta: f64, device: &str, estimator: &str, estimate: f64| {
        rows.push(SweepRow {
            delta,
            device: device.into(),
            estimator: estimator.into(),
            estimate,
            target,
            rel_deviation: (estimate - target).abs() / target.abs(),
        });
    };

    for &delta in widths {
        match resolved.combine {
            Combine::Sum => {
                let cfg = PointerConfig::local(resolved.observables.len(), delta)?;
                let coupled = couple(resolved.tsv.pre(), &resolved.observables, &cfg)?;
                let m = moments_closed_form(&postselect(&coupled, resolved.tsv.post())?);
                let coords: Vec<usize> = (0..m.n_coordinates()).collect();
                push(delta, "local-product", "direct", estimate_direct(&m, &coords));

                let cfg = PointerConfig::entangled_sum(resolved.observables.len(), delta)?;
                let coupled = couple(resolved.tsv.pre(), &resolved.observables, &cfg)?;
                let m = moments_closed_form(&postselect(&coupled, resolved.tsv.post())?);
                push(delta, "entangled-sum", "direct", estimate_direct(&m, &[0]));
            }
            Combine::Product => {
                let cfg =
                    PointerConfig::new(Topology::EntangledSum, resolved.observables.len(), delta, 1.0)?;
                let coupled = couple_observable(resolved.tsv.pre(), &combined, &cfg)?;
                let m = moments_closed_form(&postselect(&coupled, resolved.tsv.post())?);
                push(delta, "single-pointer", "direct", estimate_direct(&m, &[0]));

                if resolved.observables.len() == 2 {
                    let embedded = resolved.embedded_observables()?;
                    let a_w = resolved.tsv.weak_value(&embedded[0])?;
                    let b_w = resolved.tsv.weak_value(&embedded[1])?;
                    let cfg = PointerConfig::local(2, delta)?;
                    let coupled = couple(resolved.tsv.pre(), &resolved.observables, &cfg)?;
                    let m = moments_closed_form(&postselect(&coupled, resolved.tsv.post())?);
                    push(
                        delta,
                        "local-product",
                        "resch-steinberg",
                        estimate_resch_steinberg(&m, a_w, b_w)?,
                    );
                    push(
                        delta,
                        "local-product",
                        "resch-lundeen",
                        estimate_resch_lundeen(&m, delta)?,
                    );
                }
            }
        }
    }
    Ok(rows)
}

pub fn render_sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("delta,device,estimator,estimate,target,rel_deviation\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.delta, r.device, r.estimator, r.estimate, r.target, r.rel_deviation
        );
    }
    out
}

/// First pair of consecutive widths where the deviation of one
/// device/estimator curve drops through the threshold.
pub fn find_crossing(
    rows: &[SweepRow],
    device: &str,
    estimator: &str,
    threshold: f64,
) -> Option<(f64, f64)> {
    let filtered: Vec<&SweepRow> = rows
        .iter()
        .filter(|r| r.device == device && r.estimator == estimator)
        .collect();
    filtered
        .windows(2)
        .find(|w| w[0].rel_deviation > threshold && w[1].rel_deviation <= threshold)
        .map(|w| (w[0].delta, w[1].delta))
}

pub fn cmd_sweep(
    scenario: &ScenarioSpec,
    range: &crate::config::SweepRange,
    out: &Path,
) -> Result<String> {
    range.validate()?;
    let resolved = scenario.resolve()?;
    let rows = sweep_rows(&resolved, &range.values())?;
    write_file(out, &render_sweep_csv(&rows))?;
    let mut summary = format!(
        "wrote {} rows for {} to {}\n",
        rows.len(),
        resolved.name,
        out.display()
    );
    let mut curves: Vec<(String, String)> = Vec::new();
    for r in &rows {
        let key = (r.device.clone(), r.estimator.clone());
        if !curves.contains(&key) {
            curves.push(key);
        }
    }
    for (device, estimator) in curves {
        if let Some((a, b)) = find_crossing(&rows, &device, &estimator, 0.1) {
            let _ = writeln!(
                summary,
                "{device}/{estimator}: 10% deviation crossing in [{a}, {b}]"
            );
        }
    }
    Ok(summary)
}

fn reading_columns(topology: Topology, basis: Basis, n_coords: usize) -> Vec<String> {
    let prefix = match basis {
        Basis::Position => "Q",
        Basis::Momentum => "P",
    };
    match topology {
        Topology::EntangledSum => vec![match basis {
            Basis::Position => "S".to_string(),
            Basis::Momentum => "P_S".to_string(),
        }],
        Topology::LocalProduct => (0..n_coords)
            .map(|i| format!("{prefix}_{}", char::from(b'A' + i as u8)))
            .collect(),
    }
}

pub fn render_shots_csv(
    shots: &[ShotRecord],
    topology: Topology,
    basis: Basis,
    n_coords: usize,
) -> String {
    let cols = reading_columns(topology, basis, n_coords);
    let mut out = format!("shot_index,postselected,{}\n", cols.join(","));
    for s in shots {
        let readings = match &s.readings {
            Some(r) => r
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(","),
            None => vec![""; n_coords].join(","),
        };
        let _ = writeln!(out, "{},{},{}", s.index, s.postselected, readings);
    }
    out
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_sample(
    scenario: &ScenarioSpec,
    estimator: EstimatorKind,
    delta: Option<f64>,
    shots: u64,
    seed: u64,
    basis: Basis,
    out: Option<&Path>,
    format: Format,
) -> Result<String> {
    let resolved = scenario.resolve()?;
    let delta = delta.unwrap_or(resolved.delta);
    let state = device_state(&resolved, delta)?;

    if let Some(path) = out {
        let records = sample_shots(&state, basis, shots, seed)?;
        let csv = render_shots_csv(
            &records,
            resolved.topology,
            basis,
            state.n_coordinates(),
        );
        write_file(path, &csv)?;
    }

    let stats: EnsembleStats = match estimator {
        EstimatorKind::Direct | EstimatorKind::SumRule if basis == Basis::Momentum => {
            // direct statistics in the momentum basis: mean of summed readings
            let records = sample_shots(&state, basis, shots, seed)?;
            let sums: Vec<f64> = records
                .iter()
                .filter_map(|s| s.readings.as_ref())
                .map(|r| r.iter().sum())
                .collect();
            if sums.len() < 2 {
                return Err(Error::InsufficientStatistics {
                    postselected: sums.len() as u64,
                    total: shots,
                });
            }
            let n = sums.len() as f64;
            let mean = sums.iter().sum::<f64>() / n;
            let var = sums.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
            EnsembleStats {
                n_total: shots,
                n_postselected: sums.len() as u64,
                estimate: mean,
                stderr: (var / n).sqrt(),
                estimator: estimator.name().to_string(),
            }
        }
        _ => run_experiment(&resolved, estimator, delta, shots, seed)?,
    };

    // bookkeeping row against the reference weak value
    let target = resolved
        .tsv
        .weak_value(&resolved.combined_observable()?)?;
    let inputs = match estimator {
        EstimatorKind::Direct | EstimatorKind::SumRule => match basis {
            Basis::Position => vec!["meanQ".to_string()],
            Basis::Momentum => vec!["meanP".to_string()],
        },
        EstimatorKind::ReschSteinberg => vec!["corrQQ[A][B]".into(), "reference A_w, B_w".into()],
        EstimatorKind::ReschLundeen => vec!["corrQQ[A][B]".into(), "corrPP[A][B]".into()],
    };
    let report = weaksim_core::EstimateReport::new(
        estimator.name(),
        stats.estimate,
        target,
        delta,
        inputs,
    );

    match format {
        Format::Json => Ok(format!(
            "{}\n",
            serde_json::to_string_pretty(&serde_json::json!({
                "stats": stats,
                "report": report,
            }))
            .expect("serializable")
        )),
        Format::Table => Ok(format!(
            "scenario: {}\nestimator: {}\nn_total: {}\nn_postselected: {}\nestimate: {}\nstderr: {}\ntarget: {}\ndeviation: {}\n",
            resolved.name,
            stats.estimator,
            stats.n_total,
            stats.n_postselected,
            stats.estimate,
            stats.stderr,
            fmt_complex(target),
            report.deviation
        )),
    }
}

pub fn cmd_scenario_list() -> String {
    let mut out = String::new();
    for name in weaksim_core::BUILTIN_NAMES {
        let _ = writeln!(out, "{name}");
    }
    out
}

pub fn cmd_scenario_export(name: &str, out: &Path) -> Result<String> {
    let spec = ScenarioSpec::builtin(name)?;
    write_file(out, &format!("{}\n", spec.to_json()))?;
    Ok(format!("wrote {name} to {}\n", out.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SweepRange;

    #[test]
    fn weakvalue_output_contains_expected_rows() {
        let spec = ScenarioSpec::builtin("two_state_22").unwrap();
        let table = cmd_weakvalue(&spec, Format::Table).unwrap();
        assert!(table.contains("sigma_z[A]+sigma_z[B]"));
        let json = cmd_weakvalue(&spec, Format::Json).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed["weak_values"].as_array().unwrap().len(), 4);
    }

    #[test]
    fn abl_epsilon_scenario_certain() {
        let spec = ScenarioSpec::builtin("epsilon_sum").unwrap();
        let json = cmd_abl(&spec, Format::Json).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!((parsed["strong_expectation"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_rows_cover_both_devices() {
        let resolved = ScenarioSpec::builtin("two_state_22").unwrap().resolve().unwrap();
        let rows = sweep_rows(&resolved, &[50.0, 100.0]).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().any(|r| r.device == "entangled-sum"));
        assert!(rows.iter().any(|r| r.device == "local-product"));
        let csv = render_sweep_csv(&rows);
        assert!(csv.starts_with("delta,device,estimator,estimate,target,rel_deviation\n"));
        assert_eq!(csv.lines().count(), 5);
    }

    #[test]
    fn sweep_product_scenario_has_three_estimators() {
        let resolved = ScenarioSpec::builtin("product_phase").unwrap().resolve().unwrap();
        let rows = sweep_rows(&resolved, &[10.0]).unwrap();
        let estimators: Vec<&str> = rows.iter().map(|r| r.estimator.as_str()).collect();
        assert_eq!(
            estimators,
            vec!["direct", "resch-steinberg", "resch-lundeen"]
        );
        // the idealized single-pointer device reads the weak value directly
        assert!((rows[0].estimate - 1.0).abs() < 0.05);
    }

    #[test]
    fn eigenstate_sweep_deviation_zero() {
        let mut spec = ScenarioSpec::builtin("singlet_sum").unwrap();
        // post = pre = singlet, sum eigenvalue 0... use the amplified pair's
        // sum observable on an eigenstate instead: up-up with target 2
        spec.pre = vec![[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]];
        spec.post = spec.pre.clone();
        let resolved = spec.resolve().unwrap();
        let rows = sweep_rows(&resolved, &[1.0, 10.0, 100.0]).unwrap();
        for r in rows {
            assert!(r.rel_deviation < 1e-12, "{r:?}");
        }
    }

    #[test]
    fn crossing_detection() {
        let resolved = ScenarioSpec::builtin("two_state_22").unwrap().resolve().unwrap();
        let range = SweepRange {
            min: 100.0,
            max: 3000.0,
            points: 30,
            log: true,
        };
        let rows = sweep_rows(&resolved, &range.values()).unwrap();
        let (a, b) = find_crossing(&rows, "local-product", "direct", 0.1).unwrap();
        assert!(a >= 400.0 && b <= 900.0, "crossing [{a}, {b}]");
    }

    #[test]
    fn shots_csv_schema() {
        let spec = ScenarioSpec::builtin("product_phase").unwrap();
        let resolved = spec.resolve().unwrap();
        let state = device_state(&resolved, 2.0).unwrap();
        let shots = sample_shots(&state, Basis::Position, 10, 3).unwrap();
        let csv = render_shots_csv(&shots, resolved.topology, Basis::Position, 2);
        assert!(csv.starts_with("shot_index,postselected,Q_A,Q_B\n"));
        assert_eq!(csv.lines().count(), 11);

        let entangled = ScenarioSpec::builtin("two_state_22").unwrap().resolve().unwrap();
        let state = device_state(&entangled, 10.0).unwrap();
        let shots = sample_shots(&state, Basis::Position, 5, 3).unwrap();
        let csv = render_shots_csv(&shots, entangled.topology, Basis::Position, 1);
        assert!(csv.starts_with("shot_index,postselected,S\n"));
    }
}
