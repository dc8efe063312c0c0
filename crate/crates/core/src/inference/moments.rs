use serde::Serialize;
use statrs::distribution::{DiscreteCDF, Poisson};

use crate::model::{papangelou_p, score, ModelSpec, UStatSpec};
use crate::particles::{Configuration, Particle, Window};
use crate::rng::RngStream;
use crate::stats::mean_var;

use super::{draw, replicate, InferenceError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub value: f64,
    pub se: f64,
    pub replicates: u64,
}

fn estimate_of(values: &[f64]) -> MomentEstimate {
    let (m, v) = mean_var(values);
    MomentEstimate { value: m, se: (v / values.len() as f64).sqrt(), replicates: values.len() as u64 }
}

/// Weighted mixed moment by the GNZ plug-in identity:
/// `m(K) = λ E[κ(K, Ξ) T(K, Ξ + δ_K)]`, or with `other = Some(L)`,
/// `m(K, L) = λ² E[κ₂(K, L, Ξ) T(K, Ξ + δ_K + δ_L) T(L, Ξ + δ_K + δ_L)]`.
///
/// `Ξ` is drawn in `w` with boundary `chi`, which also enters the intensities.
/// The particles must lie in `w` eroded by `max(range, r)`.
#[allow(clippy::too_many_arguments)]
pub fn gnz_weighted_moment(
    model: &ModelSpec,
    spec: &UStatSpec,
    k: &Particle,
    other: Option<&Particle>,
    w: &Window,
    chi: &Configuration,
    replicates: u64,
    root: RngStream,
) -> Result<MomentEstimate, InferenceError> {
    spec.validate()?;
    if replicates < 2 {
        return Err(InferenceError::InsufficientReplicates { needed: 2, got: replicates });
    }
    let margin = model.range.max(spec.radius);
    let inner = w.eroded(margin).ok_or(InferenceError::MarginViolation { margin })?;
    let targets: Vec<Particle> = std::iter::once(*k).chain(other.copied()).collect();
    if targets.iter().any(|p| p.dim() != model.dim || !inner.contains(p.center())) {
        return Err(InferenceError::MarginViolation { margin });
    }
    if targets.len() == 2 && targets[0] == targets[1] {
        return Err(InferenceError::DuplicateParticle);
    }
    let scale = model.lambda.powi(targets.len() as i32);
    let values = replicate(root, "gnz", 0, replicates, |rng| {
        let xi = draw(model, w, chi, rng)?;
        let env = xi.union(chi);
        let intensity = papangelou_p(model, &targets, &env);
        if intensity == 0.0 {
            return Ok(0.0);
        }
        let mut with = xi.clone();
        for t in &targets {
            with.insert(*t);
        }
        let scores: f64 = targets.iter().map(|t| score(spec, t, &with)).product();
        Ok(scale * intensity * scores)
    })?;
    Ok(estimate_of(&values))
}

/// Axis-aligned box of particle centers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxRegion {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxRegion {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        Self { lo, hi }
    }

    /// Cube of the given side centered at `center`.
    pub fn cube(center: &[f64], side: f64) -> Self {
        Self {
            lo: center.iter().map(|c| c - side / 2.0).collect(),
            hi: center.iter().map(|c| c + side / 2.0).collect(),
        }
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| (b - a).max(0.0)).product()
    }

    /// Half-open membership, so adjacent boxes share no point.
    pub fn contains(&self, x: &[f64]) -> bool {
        self.lo.iter().zip(&self.hi).zip(x).all(|((a, b), x)| *a <= *x && *x < *b)
    }

    fn overlaps(&self, other: &BoxRegion) -> bool {
        self.volume() > 0.0
            && other.volume() > 0.0
            && self.lo.iter().zip(&self.hi).zip(other.lo.iter().zip(&other.hi)).all(|((a, b), (c, d))| a < d && c < b)
    }

    fn inside(&self, w: &Window) -> bool {
        let h = w.half_side();
        self.lo.iter().zip(&self.hi).all(|(a, b)| -h <= *a && *b <= h)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentBoundReport {
    /// Empirical `E[∏ Ξ(Ψ_i)]`.
    pub empirical: MomentEstimate,
    /// `λ^p ∏ μ(Ψ_i)`.
    pub bound: f64,
    pub holds: bool,
}

/// Compares `E[∏ Ξ(Ψ_i)]` with `λ^p ∏ μ(Ψ_i)` for disjoint center boxes, one-sided at 3σ.
pub fn moment_bound_check(
    model: &ModelSpec,
    w: &Window,
    regions: &[BoxRegion],
    replicates: u64,
    root: RngStream,
) -> Result<MomentBoundReport, InferenceError> {
    if replicates < 2 {
        return Err(InferenceError::InsufficientReplicates { needed: 2, got: replicates });
    }
    for (i, r) in regions.iter().enumerate() {
        if r.lo.len() != model.dim || r.hi.len() != model.dim {
            return Err(InferenceError::InvalidInput(format!("region {i} has the wrong dimension")));
        }
        if !r.inside(w) {
            return Err(InferenceError::RegionOutsideWindow(i));
        }
        if let Some(j) = regions[..i].iter().position(|q| q.overlaps(r)) {
            return Err(InferenceError::OverlappingRegions(j, i));
        }
    }
    let bound = model.lambda.powi(regions.len() as i32) * regions.iter().map(BoxRegion::volume).product::<f64>();
    let empty = Configuration::new();
    let values = replicate(root, "moment", 0, replicates, |rng| {
        if regions.iter().any(|r| r.volume() == 0.0) {
            return Ok(0.0);
        }
        let xi = draw(model, w, &empty, rng)?;
        Ok(regions.iter().map(|r| xi.iter().filter(|p| r.contains(p.center())).count() as f64).product())
    })?;
    let empirical = estimate_of(&values);
    Ok(MomentBoundReport { holds: empirical.value <= bound + 3.0 * empirical.se, empirical, bound })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominationReport {
    pub replicates: u64,
    /// One-sided DKW half-width at level 0.999.
    pub dkw_epsilon: f64,
    /// `max_k (F_Poisson(k) - F_Gibbs(k))`; domination needs this below the band.
    pub max_shortfall: f64,
    pub gibbs_cdf: Vec<f64>,
    pub poisson_cdf: Vec<f64>,
    pub dominated: bool,
    pub mean_count: f64,
}

/// Checks that the Gibbs particle count in `w` is stochastically smaller than Poisson(λ|w|).
pub fn domination_check(
    model: &ModelSpec,
    w: &Window,
    replicates: u64,
    root: RngStream,
) -> Result<DominationReport, InferenceError> {
    if replicates < 2 {
        return Err(InferenceError::InsufficientReplicates { needed: 2, got: replicates });
    }
    let empty = Configuration::new();
    let counts = replicate(root, "domination", 0, replicates, |rng| Ok(draw(model, w, &empty, rng)?.len()))?;
    let mean_poisson = model.lambda * w.volume();
    let poisson = Poisson::new(mean_poisson).map_err(|e| InferenceError::InvalidInput(e.to_string()))?;
    let top = counts.iter().copied().max().unwrap_or(0).max(poisson.inverse_cdf(1.0 - 1e-12) as usize);
    let mut hist = vec![0u64; top + 1];
    for &c in &counts {
        hist[c] += 1;
    }
    let n = replicates as f64;
    let mut acc = 0u64;
    let mut gibbs_cdf = Vec::with_capacity(top + 1);
    let mut poisson_cdf = Vec::with_capacity(top + 1);
    for (k, h) in hist.iter().enumerate() {
        acc += h;
        gibbs_cdf.push(acc as f64 / n);
        poisson_cdf.push(poisson.cdf(k as u64));
    }
    let max_shortfall = gibbs_cdf.iter().zip(&poisson_cdf).map(|(g, p)| p - g).fold(f64::NEG_INFINITY, f64::max);
    let dkw_epsilon = ((1.0f64 / 0.001).ln() / (2.0 * n)).sqrt();
    Ok(DominationReport {
        replicates,
        dkw_epsilon,
        max_shortfall,
        gibbs_cdf,
        poisson_cdf,
        dominated: max_shortfall <= dkw_epsilon,
        mean_count: counts.iter().sum::<usize>() as f64 / n,
    })
}
