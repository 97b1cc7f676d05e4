use thiserror::Error;

/// Errors raised by state construction, measurement models and sampling.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("subsystem dimensions {dims:?} are inconsistent with vector length {len}")]
    BadDims { dims: Vec<usize>, len: usize },

    #[error("tensor product of an empty factor list")]
    EmptyTensor,

    #[error("state has zero or non-finite norm")]
    DegenerateState,

    #[error("site index {site} out of range for {n_sites} subsystems")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("operator is not hermitian (max deviation {max_dev:.3e})")]
    NotHermitian { max_dev: f64 },

    #[error("operators do not commute (residual {residual:.3e}); joint coupling undefined")]
    NonCommuting { residual: f64 },

    #[error("two observables coupled to the same site {site}")]
    SameSite { site: usize },

    #[error("pre- and post-selection are orthogonal: weak values diverge")]
    DegeneratePostselection,

    #[error("pre/post-selection inconsistent with the measurement: all branch amplitudes vanish")]
    InconsistentSelection,

    #[error("pointer width {delta} is not in the strong regime for eigenvalue gap {gap} (need gap/width >= 10)")]
    StrongRegime { gap: f64, delta: f64 },

    #[error("estimator requires a local-product device with at least two pointers")]
    WrongTopology,

    #[error("grid extent {extent} pointer widths is too small (need >= {required})")]
    GridTooSmall { extent: f64, required: f64 },

    #[error("target weak value is zero; required ensemble size undefined")]
    ZeroTarget,

    #[error("only {postselected} of {total} shots survived post-selection; not enough statistics")]
    InsufficientStatistics { postselected: u64, total: u64 },

    #[error("unknown builtin scenario `{0}`")]
    UnknownScenario(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors describing a physically degenerate or unattainable
    /// request, as opposed to a malformed configuration.
    pub fn is_physics(&self) -> bool {
        matches!(
            self,
            Error::DegeneratePostselection
                | Error::InconsistentSelection
                | Error::StrongRegime { .. }
                | Error::InsufficientStatistics { .. }
                | Error::ZeroTarget
                | Error::DegenerateState
        )
    }
}
