use rand::Rng;

use crate::model::{hamiltonian, ModelSpec};
use crate::particles::{Configuration, Window};

use super::{prepare, sample_poisson, SamplerError};

/// Default proposal budget of the rejection sampler.
pub const DEFAULT_PROPOSAL_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct RejectionOutcome {
    pub sample: Configuration,
    pub proposals: u64,
}

/// Exact draw from the Gibbs law in `w` given the boundary `chi`, by accepting Poisson
/// proposals with probability `exp(-H(Π, χ))`.
pub fn sample_gibbs_rejection<R: Rng + ?Sized>(
    model: &ModelSpec,
    w: &Window,
    chi: &Configuration,
    rng: &mut R,
) -> Result<RejectionOutcome, SamplerError> {
    sample_gibbs_rejection_with_budget(model, w, chi, rng, DEFAULT_PROPOSAL_BUDGET)
}

pub fn sample_gibbs_rejection_with_budget<R: Rng + ?Sized>(
    model: &ModelSpec,
    w: &Window,
    chi: &Configuration,
    rng: &mut R,
    budget: u64,
) -> Result<RejectionOutcome, SamplerError> {
    let chi = prepare(model, w, chi)?;
    let mut weight_sum = 0.0;
    for proposals in 1..=budget {
        let proposal = sample_poisson(model, w, rng);
        let weight = hamiltonian(model, &proposal, &chi).map_err(SamplerError::Model)?.boltzmann();
        weight_sum += weight;
        if rng.random::<f64>() < weight {
            return Ok(RejectionOutcome { sample: proposal, proposals });
        }
    }
    Err(SamplerError::BudgetExceeded { proposals: budget, acceptance_estimate: weight_sum / budget.max(1) as f64 })
}
