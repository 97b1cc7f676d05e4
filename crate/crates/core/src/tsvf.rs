//! Two-state-vector formalism: weak values, ABL probabilities for
//! intermediate strong measurements, and strong-measurement expectations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{
    embed, inner, joint_eigenbasis, matrix_element, Ket, Operator, SpectralDecomposition, C64,
};

/// Relative overlap below which a pre/post pair is rejected as degenerate.
pub const OVERLAP_TOL: f64 = 1e-14;

/// How joint measurement outcomes combine into a single number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Combine {
    Sum,
    Product,
}

impl Combine {
    pub fn apply(self, values: &[f64]) -> f64 {
        match self {
            Combine::Sum => values.iter().sum(),
            Combine::Product => values.iter().product(),
        }
    }
}

/// A pre- and post-selected system. Both kets may be unnormalized; the
/// overlap must be nonzero relative to the norm product.
#[derive(Debug, Clone)]
pub struct TwoStateVector {
    pre: Ket,
    post: Ket,
}

impl TwoStateVector {
    pub fn new(pre: Ket, post: Ket) -> Result<Self> {
        let overlap = inner(&post, &pre)?;
        if overlap.norm() <= OVERLAP_TOL * pre.norm() * post.norm() {
            return Err(Error::DegeneratePostselection);
        }
        Ok(TwoStateVector { pre, post })
    }

    pub fn pre(&self) -> &Ket {
        &self.pre
    }

    pub fn post(&self) -> &Ket {
        &self.post
    }

    pub fn dims(&self) -> &[usize] {
        self.pre.dims()
    }

    pub fn overlap(&self) -> C64 {
        inner(&self.post, &self.pre).expect("dims checked at construction")
    }

    /// The weak value `⟨post|O|pre⟩ / ⟨post|pre⟩`; invariant under
    /// independent rescaling of either state.
    pub fn weak_value(&self, op: &Operator) -> Result<C64> {
        Ok(matrix_element(&self.post, op, &self.pre)? / self.overlap())
    }
}

/// Outcome probabilities of an intermediate strong measurement given the
/// pre- and post-selection: `|⟨Φ|P_j|Ψ⟩|²` normalized over all outcomes.
pub fn abl_probabilities(
    tsv: &TwoStateVector,
    decomp: &SpectralDecomposition,
) -> Result<Vec<(f64, f64)>> {
    let weights: Vec<f64> = decomp
        .lines()
        .iter()
        .map(|line| {
            matrix_element(&tsv.post, &line.projector, &tsv.pre).map(|amp| amp.norm_sqr())
        })
        .collect::<Result<_>>()?;
    let total: f64 = weights.iter().sum();
    let scale = tsv.pre.norm_sqr() * tsv.post.norm_sqr();
    if total <= scale * OVERLAP_TOL * OVERLAP_TOL {
        return Err(Error::InconsistentSelection);
    }
    Ok(decomp
        .lines()
        .iter()
        .zip(weights)
        .map(|(line, w)| (line.eigenvalue, w / total))
        .collect())
}

/// `Σ c_j · Prob(c_j)` over the ABL distribution.
pub fn strong_expectation(tsv: &TwoStateVector, decomp: &SpectralDecomposition) -> Result<f64> {
    Ok(abl_probabilities(tsv, decomp)?
        .iter()
        .map(|(value, prob)| value * prob)
        .sum())
}

/// Expectation of `combine(outcomes)` when each local observable is
/// measured simultaneously but separately: the ABL distribution runs over
/// the fine-grained joint eigenspaces (products of local eigenprojectors).
pub fn joint_strong_expectation(
    tsv: &TwoStateVector,
    locals: &[(Operator, usize)],
    combine: Combine,
) -> Result<f64> {
    for (i, (_, site_i)) in locals.iter().enumerate() {
        for (_, site_j) in locals.iter().skip(i + 1) {
            if site_i == site_j {
                return Err(Error::SameSite { site: *site_i });
            }
        }
    }
    let dims = tsv.dims();
    let embedded: Vec<Operator> = locals
        .iter()
        .map(|(op, site)| embed(op, *site, dims))
        .collect::<Result<_>>()?;
    let spaces = joint_eigenbasis(&embedded)?;

    let mut weights = Vec::with_capacity(spaces.len());
    for space in &spaces {
        let projected = space.project(&tsv.pre)?;
        let amp = inner(&tsv.post, &projected)?;
        weights.push(amp.norm_sqr());
    }
    let total: f64 = weights.iter().sum();
    let scale = tsv.pre.norm_sqr() * tsv.post.norm_sqr();
    if total <= scale * OVERLAP_TOL * OVERLAP_TOL {
        return Err(Error::InconsistentSelection);
    }
    Ok(spaces
        .iter()
        .zip(weights)
        .map(|(space, w)| combine.apply(&space.values) * w / total)
        .sum())
}

/// Checks, eigenvalue by eigenvalue over the two-qubit z product basis,
/// that `((σ_z^A + σ_z^B) mod 4) - 1` equals `σ_z^A σ_z^B`, with the mod
/// mapping {-2, 0, 2} to {2, 0, 2}.
pub fn modsum_identity_check() -> bool {
    for a in [1i32, -1] {
        for b in [1i32, -1] {
            let modsum = (a + b).rem_euclid(4);
            if modsum - 1 != a * b {
                return false;
            }
        }
    }
    true
}
