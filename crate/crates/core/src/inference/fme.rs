use rand::Rng;
use serde::Serialize;

use crate::model::{score, ModelSpec, UStatSpec};
use crate::particles::{hausdorff_unchecked, Configuration, Particle};
use crate::rng::RngStream;

use super::InferenceError;

/// Iterated difference operator `D^l_{L₁…L_l} ψ(ξ)`.
///
/// For `l = 0` this is `ψ(∅)`; otherwise the signed sum over subsets `J` of
/// `ψ(ξ_{(-∞, L*)} + Σ_{j∈J} δ_{L_j})` with `L*` the smallest `L_j` in the particle order.
pub fn difference_operator<F>(psi: F, particles: &[Particle], xi: &Configuration) -> Result<f64, InferenceError>
where
    F: Fn(&Configuration) -> f64,
{
    let l = particles.len();
    if l == 0 {
        return Ok(psi(&Configuration::new()));
    }
    for (i, p) in particles.iter().enumerate() {
        if particles[..i].contains(p) {
            return Err(InferenceError::DuplicateParticle);
        }
    }
    if l >= usize::BITS as usize - 1 {
        return Err(InferenceError::InvalidInput(format!("{l} particles need too many evaluations")));
    }
    let lowest = particles.iter().min().expect("non-empty");
    let base = xi.below(lowest);
    let mut total = 0.0;
    for mask in 0u64..(1u64 << l) {
        let mut arg = base.clone();
        for (j, p) in particles.iter().enumerate() {
            if mask & (1 << j) != 0 {
                arg.insert(*p);
            }
        }
        let value = psi(&arg);
        if (l - mask.count_ones() as usize).is_multiple_of(2) {
            total += value;
        } else {
            total -= value;
        }
    }
    Ok(total)
}

/// `ψ^!(ξ) = ∏_i T(K_i, ξ + Σ_j δ_{K_j})^{k_i}`.
pub fn mixed_product(spec: &UStatSpec, anchors: &[Particle], powers: &[u32], xi: &Configuration) -> f64 {
    let mut with = xi.clone();
    for a in anchors {
        with.insert(*a);
    }
    anchors.iter().zip(powers).map(|(a, &k)| score(spec, a, &with).powi(k as i32)).product()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FmeReport {
    pub trials: u64,
    /// Largest `|D^l ψ^!|` relative to the largest `|ψ^!|` seen, over `l = t(k-1) + 1`.
    pub max_vanishing_residual: f64,
    pub vanishing_failures: u64,
    /// Largest `|D^l ψ^!|` when one `L` is farther than `2r` from every anchor.
    pub max_locality_residual: f64,
    pub locality_failures: u64,
    /// Trials with `l <= t(k-1)` where the operator was non-zero.
    pub nonzero_below_order: u64,
    pub passes: bool,
}

/// Tolerance on the relative residual of the vanishing identity.
pub const FME_TOLERANCE: f64 = 1e-9;

/// Randomized checks of the truncation of the factorial moment expansion for mixed
/// products of scores:
/// `D^l ψ^! = 0` for `l > t(k-1)` with `t = Σ k_i`, locality of `D^l`, and that lower
/// orders are not identically zero. Particles are drawn from the model's law near the origin.
pub fn fme_truncation_check(
    spec: &UStatSpec,
    model: &ModelSpec,
    trials: u64,
    root: RngStream,
) -> Result<FmeReport, InferenceError> {
    spec.validate()?;
    model.validate().map_err(crate::sampler::SamplerError::InvalidModel)?;
    let k = spec.order;
    let box_half = spec.radius.max(model.radius);
    let draw = |rng: &mut crate::rng::StreamRng| -> Particle {
        let c: Vec<f64> = (0..model.dim).map(|_| rng.random_range(-box_half..=box_half)).collect();
        model.draw_particle(&c, rng)
    };
    let mut report = FmeReport {
        trials,
        max_vanishing_residual: 0.0,
        vanishing_failures: 0,
        max_locality_residual: 0.0,
        locality_failures: 0,
        nonzero_below_order: 0,
        passes: false,
    };
    for trial in 0..trials {
        let mut rng = root.replicate("fme", 0, trial).rng();
        let p = rng.random_range(1..=2usize);
        let powers: Vec<u32> = (0..p).map(|_| rng.random_range(1..=2u32)).collect();
        let t = powers.iter().sum::<u32>() as usize;
        let order = t * (k - 1);
        let anchors: Vec<Particle> = (0..p).map(|_| draw(&mut rng)).collect();
        let xi: Configuration = (0..rng.random_range(0..=4usize)).map(|_| draw(&mut rng)).collect();
        let psi = |c: &Configuration| mixed_product(spec, &anchors, &powers, c);

        // vanishing above the order
        let ls: Vec<Particle> = (0..order + 1).map(|_| draw(&mut rng)).collect();
        let (value, scale) = evaluate(&psi, &ls, &xi)?;
        let residual = value.abs() / scale.max(1.0);
        report.max_vanishing_residual = report.max_vanishing_residual.max(residual);
        if residual > FME_TOLERANCE {
            report.vanishing_failures += 1;
        }

        // locality: one particle far from every anchor
        let l = rng.random_range(1..=order.max(1));
        let mut ls: Vec<Particle> = (0..l).map(|_| draw(&mut rng)).collect();
        let far = 2.0 * spec.radius + 4.0 * model.radius + 1.0;
        let shift: Vec<f64> = (0..model.dim).map(|i| if i == 0 { far + 2.0 * box_half } else { 0.0 }).collect();
        let m = rng.random_range(0..l);
        ls[m] = ls[m].translated(&shift);
        debug_assert!(anchors.iter().all(|a| hausdorff_unchecked(a, &ls[m]) > 2.0 * spec.radius));
        let value = difference_operator(psi, &ls, &xi)?;
        report.max_locality_residual = report.max_locality_residual.max(value.abs());
        if value != 0.0 {
            report.locality_failures += 1;
        }

        // below the order the operator is generically non-zero
        if order >= 1 {
            let l = rng.random_range(1..=order);
            let ls: Vec<Particle> = (0..l).map(|_| draw(&mut rng)).collect();
            if difference_operator(psi, &ls, &xi)? != 0.0 {
                report.nonzero_below_order += 1;
            }
        }
    }
    report.passes = report.vanishing_failures == 0
        && report.locality_failures == 0
        && (trials == 0 || k < 2 || report.nonzero_below_order > 0);
    Ok(report)
}

/// `D^l ψ(ξ)` and the largest `|ψ|` among its terms.
fn evaluate<F>(psi: &F, ls: &[Particle], xi: &Configuration) -> Result<(f64, f64), InferenceError>
where
    F: Fn(&Configuration) -> f64,
{
    let scale = std::cell::Cell::new(0.0f64);
    let value = difference_operator(
        |c| {
            let v = psi(c);
            scale.set(scale.get().max(v.abs()));
            v
        },
        ls,
        xi,
    )?;
    Ok((value, scale.get()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn seg(x: f64, y: f64, t: f64) -> Particle {
        Particle::segment([x, y], t, 0.5).unwrap()
    }

    #[test]
    fn order_zero_and_one() {
        let g2 = UStatSpec::facet(2, 0.5).unwrap();
        let xi = Configuration::try_from_vec(vec![seg(0.0, 0.0, 0.0), seg(2.0, 0.0, 0.0)]).unwrap();
        let psi = |c: &Configuration| crate::model::u_statistic(&g2, c) + c.len() as f64;
        assert_eq!(difference_operator(psi, &[], &xi).unwrap(), 0.0);
        let k = seg(1.0, 0.0, FRAC_PI_2);
        let below = xi.below(&k);
        let direct = psi(&below.with(k)) - psi(&below);
        assert_eq!(difference_operator(psi, &[k], &xi).unwrap(), direct);
        assert!(matches!(difference_operator(psi, &[k, k], &xi), Err(InferenceError::DuplicateParticle)));
    }
}
