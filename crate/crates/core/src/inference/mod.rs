//! Estimators and verification experiments built on the samplers.
//!
//! Palm and weighted-moment quantities go through the GNZ plug-in identity rather
//! than conditioning; edge effects are handled by minus-sampling.

mod clt;
mod correlation;
mod fme;
mod moments;

use rayon::prelude::*;
use thiserror::Error;

use crate::model::{ModelError, ModelSpec};
use crate::particles::{Configuration, Window};
use crate::rng::{RngStream, StreamRng};
use crate::sampler::{sample_gibbs_cftp, sample_poisson, SamplerError};

pub use clt::{clt_experiment, CltOptions, CltReport, CltWindow};
pub use correlation::{
    decorrelation_test, estimate_rho, pair_mass, BinEstimate, CorrelationEstimate, DecorrelationReport, DiffPoint,
};
pub use fme::{difference_operator, fme_truncation_check, mixed_product, FmeReport};
pub use moments::{
    domination_check, gnz_weighted_moment, moment_bound_check, BoxRegion, DominationReport, MomentBoundReport,
    MomentEstimate,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InferenceError {
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("particle lies closer than {margin} to the window boundary")]
    MarginViolation { margin: f64 },
    #[error("regions {0} and {1} overlap")]
    OverlappingRegions(usize, usize),
    #[error("region {0} is not inside the window")]
    RegionOutsideWindow(usize),
    #[error("need at least {needed} replicates, got {got}")]
    InsufficientReplicates { needed: u64, got: u64 },
    #[error("the same particle appears twice")]
    DuplicateParticle,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// One exact draw of the model in `w` with boundary `chi`. The free model is sampled
/// directly as a Poisson process.
pub(crate) fn draw(
    model: &ModelSpec,
    w: &Window,
    chi: &Configuration,
    rng: &mut StreamRng,
) -> Result<Configuration, InferenceError> {
    if model.potential.is_free() {
        model.validate().map_err(SamplerError::InvalidModel)?;
        return Ok(sample_poisson(model, w, rng));
    }
    Ok(sample_gibbs_cftp(model, w, chi, rng)?.sample)
}

/// Evaluates `f` on `replicates` independent streams in parallel; results are in replicate order.
pub(crate) fn replicate<T, F>(
    root: RngStream,
    tag: &str,
    window: u64,
    replicates: u64,
    f: F,
) -> Result<Vec<T>, InferenceError>
where
    T: Send,
    F: Fn(&mut StreamRng) -> Result<T, InferenceError> + Sync,
{
    (0..replicates).into_par_iter().map(|r| f(&mut root.replicate(tag, window, r).rng())).collect()
}
