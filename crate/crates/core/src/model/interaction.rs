use crate::particles::{hausdorff_unchecked, Configuration, Particle};

use super::{Energy, ModelError, ModelSpec, Potential};

/// Summed pair energy between `k` and the particles of `parts` within interaction range.
///
/// `k` must not belong to any part. Candidates are pre-filtered on center distance,
/// which never exceeds the Hausdorff distance.
pub fn local_energy(model: &ModelSpec, k: &Particle, parts: &[&Configuration]) -> Energy {
    if model.potential.is_free() {
        return Energy::ZERO;
    }
    let reach = model.range;
    let reach2 = reach * reach;
    let exact_range = matches!(model.potential, Potential::Custom { .. } | Potential::PairTable { .. });
    let mut total = Energy::ZERO;
    for part in parts {
        for l in part.slab(k.dim(), k.center()[0], reach) {
            if l.center_dist2(k) > reach2 || (exact_range && hausdorff_unchecked(k, l) > reach) {
                continue;
            }
            total += model.potential.pair(k, l);
            if total.is_infinite() {
                return total;
            }
        }
    }
    total
}

/// Papangelou intensity `κ(K, ξ₁ + ξ₂ + …)` for a configuration given as disjoint parts.
pub fn papangelou_parts(model: &ModelSpec, k: &Particle, parts: &[&Configuration]) -> f64 {
    if parts.iter().any(|p| p.contains(k)) {
        return 0.0;
    }
    local_energy(model, k, parts).boltzmann()
}

/// Papangelou intensity `κ(K, ξ)`: zero if `K ∈ ξ`, else `exp(-Σ_L φ₂(K, L))`.
pub fn papangelou(model: &ModelSpec, k: &Particle, xi: &Configuration) -> f64 {
    papangelou_parts(model, k, &[xi])
}

/// `κ_p(K₁, …, K_p, ξ) = κ(K₁, ξ) κ(K₂, ξ + δ_{K₁}) ⋯`.
pub fn papangelou_p(model: &ModelSpec, tuple: &[Particle], xi: &Configuration) -> f64 {
    let mut added = Configuration::new();
    let mut value = 1.0;
    for k in tuple {
        value *= papangelou_parts(model, k, &[xi, &added]);
        if value == 0.0 {
            return 0.0;
        }
        added.insert(*k);
    }
    value
}

/// Hamiltonian `H(ξ, χ)`: pair energy inside `ξ` plus the energy between `ξ` and `χ`.
pub fn hamiltonian(model: &ModelSpec, xi: &Configuration, chi: &Configuration) -> Result<Energy, ModelError> {
    if !xi.is_disjoint(chi) {
        return Err(ModelError::OverlappingSupports);
    }
    let mut total = Energy::ZERO;
    let mut earlier = Configuration::new();
    for k in xi {
        total += local_energy(model, k, &[&earlier, chi]);
        if total.is_infinite() {
            return Ok(total);
        }
        earlier.insert(*k);
    }
    Ok(total)
}
