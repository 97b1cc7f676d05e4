//! The named experiments as ready-to-run configurations, plus the spin-1
//! causality demonstration that rules out ideal non-demolition measurement
//! of a product observable.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pointer::{PointerConfig, Topology};
use crate::qstate::{eigendecompose, embed, matrix_element, Ket, Operator, C64};
use crate::tsvf::{Combine, TwoStateVector};

/// Default parameter of the epsilon-family states.
pub const DEFAULT_EPSILON: f64 = 0.1;

fn pairs(values: &[(f64, f64)]) -> Vec<[f64; 2]> {
    values.iter().map(|&(re, im)| [re, im]).collect()
}

fn real_pairs(values: &[f64]) -> Vec<[f64; 2]> {
    values.iter().map(|&re| [re, 0.0]).collect()
}

/// One observable of a scenario, resolvable against the scenario dims.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum ObservableSpec {
    /// The z component: diag(+1,-1) on qubits, diag(+1,0,-1) on spin-1.
    SigmaZ { site: usize },
    /// Explicit hermitian matrix, complex entries as [re, im] pairs.
    Matrix {
        site: usize,
        entries: Vec<Vec<[f64; 2]>>,
    },
}

impl ObservableSpec {
    pub fn site(&self) -> usize {
        match self {
            ObservableSpec::SigmaZ { site } | ObservableSpec::Matrix { site, .. } => *site,
        }
    }

    pub fn resolve(&self, dims: &[usize]) -> Result<(Operator, usize)> {
        let site = self.site();
        if site >= dims.len() {
            return Err(Error::SiteOutOfRange {
                site,
                n_sites: dims.len(),
            });
        }
        let op = match self {
            ObservableSpec::SigmaZ { .. } => match dims[site] {
                2 => Operator::sigma_z(),
                3 => Operator::spin1_z(),
                d => {
                    return Err(Error::InvalidConfig(format!(
                        "sigma_z undefined for subsystem dimension {d}"
                    )))
                }
            },
            ObservableSpec::Matrix { entries, .. } => {
                let flat: Vec<C64> = entries
                    .iter()
                    .flatten()
                    .map(|p| C64::new(p[0], p[1]))
                    .collect();
                Operator::hermitian(flat, vec![dims[site]])?
            }
        };
        Ok((op, site))
    }
}

/// A fully bound experiment: states, observables, device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    pub dims: Vec<usize>,
    /// Pre-selected amplitudes over the lexicographic z product basis,
    /// complex entries as [re, im]; normalization is irrelevant.
    pub pre: Vec<[f64; 2]>,
    pub post: Vec<[f64; 2]>,
    pub observables: Vec<ObservableSpec>,
    pub combine: Combine,
    pub topology: Topology,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub epsilon: Option<f64>,
    /// Default pointer width for single-width commands.
    pub delta: f64,
}

/// Names of all builtin scenarios.
pub const BUILTIN_NAMES: [&str; 7] = [
    "singlet_sum",
    "epsilon_sum",
    "two_state_22",
    "product_phase",
    "product_phase_prime",
    "spin1_causality",
    "modsum_identity",
];

impl ScenarioSpec {
    /// A builtin experiment by name, parameterized ones at their defaults.
    pub fn builtin(name: &str) -> Result<ScenarioSpec> {
        ScenarioSpec::builtin_with_epsilon(name, DEFAULT_EPSILON)
    }

    /// As [`ScenarioSpec::builtin`] with an explicit epsilon binding where
    /// the scenario is parameterized.
    pub fn builtin_with_epsilon(name: &str, eps: f64) -> Result<ScenarioSpec> {
        let pair = vec![
            ObservableSpec::SigmaZ { site: 0 },
            ObservableSpec::SigmaZ { site: 1 },
        ];
        let spec = match name {
            "singlet_sum" => ScenarioSpec {
                name: name.into(),
                dims: vec![2, 2],
                pre: real_pairs(&[0.0, 1.0, -1.0, 0.0]),
                post: real_pairs(&[0.0, 1.0, -1.0, 0.0]),
                observables: pair,
                combine: Combine::Sum,
                topology: Topology::EntangledSum,
                epsilon: None,
                delta: 0.05,
            },
            "epsilon_sum" => ScenarioSpec {
                name: name.into(),
                dims: vec![2, 2],
                pre: real_pairs(&[eps, 1.0, 1.0, 0.0]),
                post: real_pairs(&[eps, 1.0, -1.0, 0.0]),
                observables: pair,
                combine: Combine::Sum,
                topology: Topology::LocalProduct,
                epsilon: Some(eps),
                delta: 600.0,
            },
            "two_state_22" => ScenarioSpec {
                name: name.into(),
                dims: vec![2, 2],
                pre: real_pairs(&[0.11, 0.95, -1.05, 0.0]),
                post: real_pairs(&[1.0, 1.0, 1.0, 1.0]),
                observables: pair,
                combine: Combine::Sum,
                topology: Topology::EntangledSum,
                epsilon: None,
                delta: 100.0,
            },
            "product_phase" => ScenarioSpec {
                name: name.into(),
                dims: vec![2, 2],
                pre: real_pairs(&[1.0, 1.0, 1.0, 1.0]),
                post: pairs(&[(1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (1.0, 0.0)]),
                observables: pair,
                combine: Combine::Product,
                topology: Topology::LocalProduct,
                epsilon: None,
                delta: 100.0,
            },
            "product_phase_prime" => ScenarioSpec {
                name: name.into(),
                dims: vec![2, 2],
                pre: real_pairs(&[1.0, 1.0, 1.0, 1.0]),
                post: pairs(&[(1.0, 0.0), (0.0, 1.0), (0.0, 1.0), (-1.0, 0.0)]),
                observables: pair,
                combine: Combine::Product,
                topology: Topology::LocalProduct,
                epsilon: None,
                delta: 100.0,
            },
            "spin1_causality" => {
                // (|-1> + |0>)_A |0>_B over the descending (+1, 0, -1) basis
                let mut pre = vec![0.0; 9];
                pre[4] = 1.0; // |0>_A |0>_B
                pre[7] = 1.0; // |-1>_A |0>_B
                ScenarioSpec {
                    name: name.into(),
                    dims: vec![3, 3],
                    pre: real_pairs(&pre),
                    post: real_pairs(&pre),
                    observables: vec![
                        ObservableSpec::SigmaZ { site: 0 },
                        ObservableSpec::SigmaZ { site: 1 },
                    ],
                    combine: Combine::Product,
                    topology: Topology::LocalProduct,
                    epsilon: None,
                    delta: 0.05,
                }
            }
            "modsum_identity" => ScenarioSpec {
                name: name.into(),
                dims: vec![2, 2],
                pre: real_pairs(&[1.0, 0.0, 0.0, 0.0]),
                post: real_pairs(&[1.0, 0.0, 0.0, 0.0]),
                observables: pair,
                combine: Combine::Product,
                topology: Topology::LocalProduct,
                epsilon: None,
                delta: 0.05,
            },
            other => return Err(Error::UnknownScenario(other.into())),
        };
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<ScenarioSpec> {
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    fn ket(&self, coeffs: &[[f64; 2]]) -> Result<Ket> {
        Ket::new(
            coeffs.iter().map(|p| C64::new(p[0], p[1])).collect(),
            self.dims.clone(),
        )
    }

    /// Binds the spec into states, operators and a device configuration.
    pub fn resolve(&self) -> Result<ResolvedScenario> {
        let pre = self.ket(&self.pre)?;
        let post = self.ket(&self.post)?;
        let tsv = TwoStateVector::new(pre, post)?;
        let observables: Vec<(Operator, usize)> = self
            .observables
            .iter()
            .map(|o| o.resolve(&self.dims))
            .collect::<Result<_>>()?;
        if observables.is_empty() {
            return Err(Error::InvalidConfig("scenario has no observables".into()));
        }
        Ok(ResolvedScenario {
            name: self.name.clone(),
            tsv,
            observables,
            combine: self.combine,
            topology: self.topology,
            delta: self.delta,
        })
    }
}

/// A scenario bound to concrete states and operators.
#[derive(Debug, Clone)]
pub struct ResolvedScenario {
    pub name: String,
    pub tsv: TwoStateVector,
    pub observables: Vec<(Operator, usize)>,
    pub combine: Combine,
    pub topology: Topology,
    pub delta: f64,
}

impl ResolvedScenario {
    pub fn pointer_config(&self, delta: f64) -> Result<PointerConfig> {
        PointerConfig::new(self.topology, self.observables.len(), delta, 1.0)
    }

    fn site_label(&self, site: usize) -> String {
        if site < 26 {
            char::from(b'A' + site as u8).to_string()
        } else {
            site.to_string()
        }
    }

    /// Embedded full-space observables, one per coupled pointer.
    pub fn embedded_observables(&self) -> Result<Vec<Operator>> {
        self.observables
            .iter()
            .map(|(op, site)| embed(op, *site, self.tsv.dims()))
            .collect()
    }

    /// The combined (sum or product) observable on the full space.
    pub fn combined_observable(&self) -> Result<Operator> {
        let embedded = self.embedded_observables()?;
        let mut acc = embedded[0].clone();
        for op in &embedded[1..] {
            acc = match self.combine {
                Combine::Sum => acc.add(op)?,
                Combine::Product => acc.matmul(op)?,
            };
        }
        Ok(acc)
    }

    pub fn combined_label(&self) -> String {
        let sep = match self.combine {
            Combine::Sum => "+",
            Combine::Product => "*",
        };
        self.observables
            .iter()
            .map(|(_, site)| format!("sigma_z[{}]", self.site_label(*site)))
            .collect::<Vec<_>>()
            .join(sep)
    }

    /// Weak values of each local observable, the configured combination,
    /// and (for multi-site scenarios) both sum and product, labelled.
    pub fn weak_value_rows(&self) -> Result<Vec<(String, C64)>> {
        let embedded = self.embedded_observables()?;
        let mut rows = Vec::new();
        if embedded.len() > 1 {
            let mut sum = embedded[0].clone();
            let mut prod = embedded[0].clone();
            for op in &embedded[1..] {
                sum = sum.add(op)?;
                prod = prod.matmul(op)?;
            }
            let labels: Vec<String> = self
                .observables
                .iter()
                .map(|(_, s)| format!("sigma_z[{}]", self.site_label(*s)))
                .collect();
            rows.push((labels.join("+"), self.tsv.weak_value(&sum)?));
            for ((_, site), op) in self.observables.iter().zip(&embedded) {
                rows.push((
                    format!("sigma_z[{}]", self.site_label(*site)),
                    self.tsv.weak_value(op)?,
                ));
            }
            rows.push((labels.join("*"), self.tsv.weak_value(&prod)?));
        } else {
            rows.push((
                format!("sigma_z[{}]", self.site_label(self.observables[0].1)),
                self.tsv.weak_value(&embedded[0])?,
            ));
        }
        Ok(rows)
    }
}

/// Bob's choice just before the nonlocal product measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BobAction {
    Nothing,
    FlipToOne,
}

impl std::str::FromStr for BobAction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nothing" => Ok(BobAction::Nothing),
            "flip_to_one" => Ok(BobAction::FlipToOne),
            other => Err(Error::InvalidConfig(format!("unknown bob action `{other}`"))),
        }
    }
}

/// Probability that Alice's local projection onto `(|-1> + |0>)/√2`
/// succeeds after an ideal projective nonlocal measurement of the spin-1
/// product observable. Bob doing nothing leaves an eigenstate (probability
/// one); flipping to `|+1>` collapses the state and drops it to one half —
/// an instantaneous, causality-breaking signal if the measurement existed.
pub fn spin1_causality(action: BobAction) -> f64 {
    alice_success_probability(action, true)
}

/// As [`spin1_causality`] with the nonlocal measurement optionally
/// disabled (control run: probability one either way).
pub fn alice_success_probability(action: BobAction, nonlocal_measurement: bool) -> f64 {
    let dims = [3usize, 3];
    // descending basis (+1, 0, -1): index 0 is m=+1, 1 is m=0, 2 is m=-1
    let alice_part = Ket::from_real(&[0.0, 1.0, 1.0], &[3]).expect("static state");
    let bob_part = match action {
        BobAction::Nothing => Ket::from_real(&[0.0, 1.0, 0.0], &[3]),
        BobAction::FlipToOne => Ket::from_real(&[1.0, 0.0, 0.0], &[3]),
    }
    .expect("static state");
    let pre = crate::qstate::tensor(&[alice_part.clone(), bob_part]).expect("static tensor");

    // Alice's projector onto her target state, lifted to the full space
    let mut proj_entries = vec![C64::ZERO; 9];
    for i in [1usize, 2] {
        for j in [1usize, 2] {
            proj_entries[i * 3 + j] = C64::new(0.5, 0.0);
        }
    }
    let alice_local = Operator::hermitian(proj_entries, vec![3]).expect("static projector");
    let alice_proj = embed(&alice_local, 0, &dims).expect("static embed");

    let success = |state: &Ket| -> f64 {
        matrix_element(state, &alice_proj, state)
            .expect("dims match")
            .re
            / state.norm_sqr()
    };

    if !nonlocal_measurement {
        return success(&pre);
    }

    let za = embed(&Operator::spin1_z(), 0, &dims).expect("static embed");
    let zb = embed(&Operator::spin1_z(), 1, &dims).expect("static embed");
    let product = za.matmul(&zb).expect("dims match");
    let dec = eigendecompose(&product).expect("hermitian by construction");

    let mut total = 0.0;
    for line in dec.lines() {
        let projected = line.projector.apply(&pre).expect("dims match");
        let weight = projected.norm_sqr() / pre.norm_sqr();
        if weight > 0.0 {
            total += weight * success(&projected);
        }
    }
    total
}
