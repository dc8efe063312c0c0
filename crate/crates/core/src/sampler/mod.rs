//! Exact samplers: the Poisson particle process, finite-window Gibbs laws with a
//! boundary condition (rejection and dominated CFTP), and the disagreement coupling.

mod cftp;
mod poisson;
mod rejection;

use thiserror::Error;

use crate::model::{Diagnostic, ModelError, ModelSpec};
use crate::particles::{Configuration, Window};

pub use cftp::{
    disagreement_couple, disagreement_couple_with, sample_gibbs_cftp, sample_gibbs_cftp_with, CftpOptions, CftpOutcome,
    CouplingOutcome,
};
pub(crate) use poisson::poisson_count;
pub use poisson::sample_poisson;
pub use rejection::{
    sample_gibbs_rejection, sample_gibbs_rejection_with_budget, RejectionOutcome, DEFAULT_PROPOSAL_BUDGET,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplerError {
    #[error("invalid model: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidModel(Vec<Diagnostic>),
    #[error("window has dimension {window}, model has {model}")]
    DimensionMismatch { model: usize, window: usize },
    #[error("boundary particle centered inside the window")]
    BoundaryInsideWindow,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("no proposal accepted in {proposals} tries (estimated acceptance rate {acceptance_estimate:.3e})")]
    BudgetExceeded { proposals: u64, acceptance_estimate: f64 },
    #[error("bounding chains did not coalesce by look-back time {horizon}; activity may be near critical")]
    HorizonExceeded { horizon: f64 },
}

/// Validates the inputs and keeps the part of `chi` that can interact with particles centered in `w`.
pub(crate) fn prepare(model: &ModelSpec, w: &Window, chi: &Configuration) -> Result<Configuration, SamplerError> {
    model.validate().map_err(SamplerError::InvalidModel)?;
    if w.dim() != model.dim {
        return Err(SamplerError::DimensionMismatch { model: model.dim, window: w.dim() });
    }
    if chi.iter().any(|p| p.dim() != model.dim) {
        return Err(SamplerError::DimensionMismatch { model: model.dim, window: w.dim() });
    }
    if chi.iter().any(|p| w.contains(p.center())) {
        return Err(SamplerError::BoundaryInsideWindow);
    }
    Ok(chi.filter(|p| w.distance_to(p.center()) <= model.range))
}
