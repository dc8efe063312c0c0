use std::f64::consts::PI;

use serde::Serialize;

use crate::grid::LocalityGrid;
use crate::model::{unit_ball_volume, ModelSpec, OrientationLaw, ParticleLaw};
use crate::particles::{hausdorff_unchecked, Configuration, Particle, Window};
use crate::rng::RngStream;
use crate::stats::{mean_var, weighted_log_linear_fit, LogLinearFit};

use super::{draw, replicate, InferenceError};

const POLAR_NODES: usize = 1024;
const RELATIVE_ANGLE_NODES: usize = 96;
const BISECTION_STEPS: usize = 48;

/// Area of `{x : d_H(K, L + x) <= s}` for shapes centered at the origin.
///
/// The map `x ↦ d_H(K, L + x)` is convex and even, so the set is a symmetric convex
/// body around the origin; its radial function is found by bisection on `[0, s]`
/// (the Hausdorff distance dominates the center distance).
fn sublevel_area(k: &Particle, l: &Particle, s: f64) -> f64 {
    if s <= 0.0 || hausdorff_unchecked(k, l) > s {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..POLAR_NODES {
        let a = (i as f64 + 0.5) * PI / POLAR_NODES as f64;
        let (sin, cos) = a.sin_cos();
        let (mut lo, mut hi) = (0.0, s);
        for _ in 0..BISECTION_STEPS {
            let t = 0.5 * (lo + hi);
            if hausdorff_unchecked(k, &l.translated(&[t * cos, t * sin])) <= s {
                lo = t;
            } else {
                hi = t;
            }
        }
        acc += lo * lo;
    }
    // half the integral of ρ² over the full circle, using the even symmetry
    acc * PI / POLAR_NODES as f64
}

/// `E_{Q⊗Q} |{x : d_H(K, L + x) <= s}|`, the `μ²`-mass per unit volume of pairs within distance `s`.
pub fn pair_mass(model: &ModelSpec, s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let half = model.radius;
    let seg = |theta: f64| Particle::segment([0.0, 0.0], theta, half).expect("valid segment");
    match &model.law {
        ParticleLaw::Ball => unit_ball_volume(model.dim) * s.powi(model.dim as i32),
        ParticleLaw::Segment { orientation: OrientationLaw::Uniform } => {
            let k = seg(0.0);
            (0..RELATIVE_ANGLE_NODES)
                .map(|i| sublevel_area(&k, &seg((i as f64 + 0.5) * PI / RELATIVE_ANGLE_NODES as f64), s))
                .sum::<f64>()
                / RELATIVE_ANGLE_NODES as f64
        }
        ParticleLaw::Segment { orientation: OrientationLaw::Discrete { angles, weights } } => {
            let total: f64 = weights.iter().sum();
            let mut acc = 0.0;
            for (a, wa) in angles.iter().zip(weights) {
                for (b, wb) in angles.iter().zip(weights) {
                    if *wa > 0.0 && *wb > 0.0 {
                        acc += wa * wb * sublevel_area(&seg(*a), &seg(*b), s);
                    }
                }
            }
            acc / (total * total)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinEstimate {
    /// The bin is the distance class `lo < d_H <= hi`.
    pub lo: f64,
    pub hi: f64,
    /// `μ²`-mass per unit volume of the bin.
    pub mass: f64,
    /// Volume of the eroded window used for the bin; `None` if nothing is left.
    pub eroded_volume: Option<f64>,
    pub rho2: Option<f64>,
    pub se: Option<f64>,
    /// `ρ̂₂ - ρ̂₁²`.
    pub diff: Option<f64>,
    pub diff_se: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationEstimate {
    pub rho1: f64,
    pub rho1_se: f64,
    pub bins: Vec<BinEstimate>,
    pub replicates: u64,
    pub edge_correction: String,
}

struct ReplicateCounts {
    ones: f64,
    pairs: Vec<f64>,
}

fn check_edges(edges: &[f64]) -> Result<(), InferenceError> {
    if edges.len() < 2 || edges.iter().any(|e| !(e.is_finite() && *e >= 0.0)) || edges.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(InferenceError::InvalidInput("bin edges must be finite, non-negative and increasing".into()));
    }
    Ok(())
}

/// Binned estimates of the first and second correlation functions from Gibbs samples in `w`
/// with empty boundary.
///
/// `ρ̂₁` counts particles in `w` eroded by the interaction range. `ρ̂₂` for the bin
/// `(lo, hi]` counts ordered pairs at Hausdorff distance in the bin whose first member
/// lies in `w` eroded by `max(range, hi)`, normalized by the exact `μ²`-mass of the bin.
/// Bins whose eroded window is empty are reported as missing. With `order = 1` no bins
/// are computed.
pub fn estimate_rho(
    model: &ModelSpec,
    w: &Window,
    order: usize,
    edges: &[f64],
    replicates: u64,
    root: RngStream,
) -> Result<CorrelationEstimate, InferenceError> {
    if !(1..=2).contains(&order) {
        return Err(InferenceError::InvalidInput(format!("correlation order must be 1 or 2, got {order}")));
    }
    if order == 2 {
        check_edges(edges)?;
    }
    if replicates < 2 {
        return Err(InferenceError::InsufficientReplicates { needed: 2, got: replicates });
    }
    let edges: &[f64] = if order == 2 { edges } else { &[] };
    let nbins = edges.len().saturating_sub(1);
    let core = w
        .eroded(model.range)
        .ok_or_else(|| InferenceError::InvalidInput("window too small for the interaction range".into()))?;
    let eroded: Vec<Option<Window>> = (0..nbins).map(|b| w.eroded(model.range.max(edges[b + 1]))).collect();
    let reach = edges.last().copied().unwrap_or(0.0);
    let empty = Configuration::new();

    let counts = replicate(root, "rho", 0, replicates, |rng| {
        let xi = draw(model, w, &empty, rng)?;
        let items = xi.as_slice();
        let ones = items.iter().filter(|p| core.contains(p.center())).count() as f64;
        let mut pairs = vec![0.0; nbins];
        if nbins > 0 {
            let grid = LocalityGrid::new(items, reach);
            for (i, k) in items.iter().enumerate() {
                for j in grid.near(items, k, reach, Some(i)) {
                    let d = hausdorff_unchecked(k, &items[j]);
                    let b = edges.partition_point(|e| *e < d);
                    if b == 0 || b > nbins {
                        continue;
                    }
                    if eroded[b - 1].is_some_and(|we| we.contains(k.center())) {
                        pairs[b - 1] += 1.0;
                    }
                }
            }
        }
        Ok(ReplicateCounts { ones, pairs })
    })?;

    let n = replicates as f64;
    let ys: Vec<f64> = counts.iter().map(|c| c.ones / core.volume()).collect();
    let (rho1, var1) = mean_var(&ys);
    let bins = (0..nbins)
        .map(|b| {
            let (lo, hi) = (edges[b], edges[b + 1]);
            let mass = pair_mass(model, hi) - pair_mass(model, lo);
            let Some(we) = eroded[b].filter(|_| mass > 0.0) else {
                return BinEstimate {
                    lo,
                    hi,
                    mass,
                    eroded_volume: eroded[b].map(|w| w.volume()),
                    rho2: None,
                    se: None,
                    diff: None,
                    diff_se: None,
                };
            };
            let xs: Vec<f64> = counts.iter().map(|c| c.pairs[b] / (we.volume() * mass)).collect();
            let (rho2, var2) = mean_var(&xs);
            let cov = xs.iter().zip(&ys).map(|(x, y)| (x - rho2) * (y - rho1)).sum::<f64>() / (n - 1.0);
            let var_diff = (var2 - 4.0 * rho1 * cov + 4.0 * rho1 * rho1 * var1).max(0.0) / n;
            BinEstimate {
                lo,
                hi,
                mass,
                eroded_volume: Some(we.volume()),
                rho2: Some(rho2),
                se: Some((var2 / n).sqrt()),
                diff: Some(rho2 - rho1 * rho1),
                diff_se: Some(var_diff.sqrt()),
            }
        })
        .collect();
    Ok(CorrelationEstimate {
        rho1,
        rho1_se: (var1 / n).sqrt(),
        bins,
        replicates,
        edge_correction: "minus-sampling".into(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffPoint {
    /// Bin midpoint.
    pub distance: f64,
    pub diff: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecorrelationReport {
    pub estimate: CorrelationEstimate,
    pub points: Vec<DiffPoint>,
    /// Weighted fit of `log |ρ̂₂ - ρ̂₁²|` against distance.
    pub fit: Option<LogLinearFit>,
    /// Every available difference lies within three standard errors of zero.
    pub all_within_3se: bool,
    /// Every available `ρ̂₂` is at most `λ² + 3σ`.
    pub cap_holds: bool,
}

/// `|ρ̂₂(s) - ρ̂₁²|` over distance bins, with an exponential fit.
pub fn decorrelation_test(
    model: &ModelSpec,
    w: &Window,
    edges: &[f64],
    replicates: u64,
    root: RngStream,
) -> Result<DecorrelationReport, InferenceError> {
    let estimate = estimate_rho(model, w, 2, edges, replicates, root)?;
    let points: Vec<DiffPoint> = estimate
        .bins
        .iter()
        .filter_map(|b| Some(DiffPoint { distance: 0.5 * (b.lo + b.hi), diff: b.diff?, se: b.diff_se? }))
        .collect();
    let x: Vec<f64> = points.iter().map(|p| p.distance).collect();
    let y: Vec<f64> = points.iter().map(|p| p.diff.abs()).collect();
    let wts: Vec<f64> = points.iter().map(|p| if p.se > 0.0 { (p.diff / p.se).powi(2) } else { 0.0 }).collect();
    let fit = weighted_log_linear_fit(&x, &y, &wts);
    let all_within_3se = points.iter().all(|p| p.diff.abs() <= 3.0 * p.se);
    let cap = model.lambda * model.lambda;
    let cap_holds = estimate.bins.iter().all(|b| match (b.rho2, b.se) {
        (Some(r), Some(se)) => r <= cap + 3.0 * se,
        _ => true,
    });
    Ok(DecorrelationReport { estimate, points, fit, all_within_3se, cap_holds })
}
