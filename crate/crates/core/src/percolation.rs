//! Connectivity of the Boolean model: clusters, connection events, decay of
//! connection probabilities and crossing probabilities.

use petgraph::unionfind::UnionFind;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::grid::LocalityGrid;
use crate::model::{unit_ball_volume, ModelSpec};
use crate::particles::{intersects, Configuration, Particle, Shape, Window};
use crate::rng::RngStream;
use crate::sampler::{poisson_count, sample_poisson};
use crate::stats::{weighted_log_linear_fit, wilson_interval, LogLinearFit};

/// Normal quantile for two-sided 95% intervals.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PercolationError {
    #[error("dimension {0} is not supported")]
    UnsupportedDimension(usize),
    #[error("particle size must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("distances must be positive and strictly increasing")]
    BadDistances,
    #[error("replicates must be at least 1")]
    NoReplicates,
    #[error("activity must be non-negative and finite, got {0}")]
    BadActivity(f64),
}

/// Cluster labels of a configuration; labels are numbered by first appearance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClusterPartition {
    pub labels: Vec<usize>,
    pub sizes: Vec<usize>,
}

impl ClusterPartition {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    pub fn same(&self, i: usize, j: usize) -> bool {
        self.labels[i] == self.labels[j]
    }
}

/// Union-find over the intersection graph of `items`.
fn union_find(items: &[Particle]) -> UnionFind<usize> {
    let mut uf = UnionFind::new(items.len());
    let reach = 2.0 * items.iter().map(Particle::circumradius).fold(0.0, f64::max);
    let grid = LocalityGrid::new(items, reach);
    for (i, p) in items.iter().enumerate() {
        for j in grid.candidates(p.center()) {
            if j > i && intersects(p, &items[j]) {
                uf.union(i, j);
            }
        }
    }
    uf
}

fn partition_of(uf: &UnionFind<usize>, n: usize) -> ClusterPartition {
    let mut ids = vec![usize::MAX; n];
    let mut labels = Vec::with_capacity(n);
    let mut sizes = Vec::new();
    for i in 0..n {
        let root = uf.find(i);
        if ids[root] == usize::MAX {
            ids[root] = sizes.len();
            sizes.push(0);
        }
        labels.push(ids[root]);
        sizes[ids[root]] += 1;
    }
    ClusterPartition { labels, sizes }
}

/// Connected components of the graph on `ξ` with edges between intersecting particles.
/// Label `i` belongs to the `i`-th particle in configuration order.
pub fn clusters(xi: &Configuration) -> ClusterPartition {
    partition_of(&union_find(xi.as_slice()), xi.len())
}

/// Whether some `K ∈ Ψ` and `L ∈ Γ` are joined by a path in the graph on `ξ + δ_K + δ_L`.
pub fn connects(xi: &Configuration, psi: &Configuration, gamma: &Configuration) -> bool {
    if psi.iter().any(|k| gamma.contains(k)) {
        return true;
    }
    let items = xi.as_slice();
    let part = clusters(xi);
    let touched = |k: &Particle| -> Vec<usize> {
        let mut v: Vec<usize> =
            items.iter().enumerate().filter(|(_, l)| intersects(k, l)).map(|(i, _)| part.labels[i]).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let gamma_touch: Vec<(Particle, Vec<usize>)> = gamma.iter().map(|l| (*l, touched(l))).collect();
    psi.iter().any(|k| {
        let tk = touched(k);
        gamma_touch.iter().any(|(l, tl)| intersects(k, l) || tk.iter().any(|c| tl.binary_search(c).is_ok()))
    })
}

/// Particles of `graph` joined by an intersection path to some particle of `seeds`
/// (seeds included), as a configuration.
pub fn component_of(graph: &Configuration, seeds: &Configuration) -> Configuration {
    let all = graph.union(seeds);
    let items = all.as_slice();
    let uf = union_find(items);
    let roots: Vec<usize> = seeds.iter().map(|s| uf.find(items.binary_search(s).expect("seed present"))).collect();
    all.filter(|p| {
        let i = items.binary_search(p).expect("member");
        roots.contains(&uf.find(i))
    })
}

/// Largest distance from the origin to a point of `p`.
pub fn reach_from_origin(p: &Particle) -> f64 {
    match p.shape() {
        Shape::Ball { radius } => p.center().iter().map(|x| x * x).sum::<f64>().sqrt() + radius,
        Shape::Segment { .. } => {
            let (a, b) = p.endpoints().expect("segment");
            a[0].hypot(a[1]).max(b[0].hypot(b[1]))
        }
    }
}

/// Extent of `p` along the first axis, as `(min, max)`.
fn x_extent(p: &Particle) -> (f64, f64) {
    let x = p.center()[0];
    let e = match p.shape() {
        Shape::Ball { radius } => radius,
        Shape::Segment { orientation, half_length } => half_length * orientation.cos().abs(),
    };
    (x - e, x + e)
}

/// `1/(v_d 2^d R^d)`: below this activity the Boolean model with particles in `B(z, R)` does not percolate.
pub fn percolation_lower_bound(dim: usize, radius: f64) -> Result<f64, PercolationError> {
    check_geometry(dim, radius)?;
    Ok(1.0 / (unit_ball_volume(dim) * (2.0 * radius).powi(dim as i32)))
}

/// `1/(v_d (1 + 2R)^d)`, the earlier activity bound used for comparison.
pub fn sy13_bound(dim: usize, radius: f64) -> Result<f64, PercolationError> {
    check_geometry(dim, radius)?;
    Ok(1.0 / (unit_ball_volume(dim) * (1.0 + 2.0 * radius).powi(dim as i32)))
}

fn check_geometry(dim: usize, radius: f64) -> Result<(), PercolationError> {
    if !(1..=3).contains(&dim) {
        return Err(PercolationError::UnsupportedDimension(dim));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(PercolationError::InvalidRadius(radius));
    }
    Ok(())
}

/// Poisson particles of the model's law with centers uniform in the ball `B(0, rho)`.
pub fn sample_poisson_ball<R: Rng + ?Sized>(model: &ModelSpec, rho: f64, rng: &mut R) -> Vec<Particle> {
    let d = model.dim;
    let n = poisson_count(model.lambda * unit_ball_volume(d) * rho.powi(d as i32), rng);
    let shapes = model.shape_sampler();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let mut c = [0.0; 3];
        for x in c.iter_mut().take(d) {
            *x = rng.random_range(-rho..=rho);
        }
        if c.iter().map(|x| x * x).sum::<f64>() <= rho * rho {
            out.push(shapes.particle(&c[..d], rng));
        }
    }
    out
}

/// Whether the cluster of `probe` in `probe + others` reaches outside `B(0, s)`.
fn cluster_escapes(probe: &Particle, others: &[Particle], s: f64) -> bool {
    if reach_from_origin(probe) > s {
        return true;
    }
    let reach = 2.0 * others.iter().map(Particle::circumradius).fold(probe.circumradius(), f64::max);
    let grid = LocalityGrid::new(others, reach);
    let mut seen = vec![false; others.len()];
    let mut stack = vec![*probe];
    while let Some(k) = stack.pop() {
        for j in grid.candidates(k.center()) {
            if !seen[j] && intersects(&k, &others[j]) {
                seen[j] = true;
                if reach_from_origin(&others[j]) > s {
                    return true;
                }
                stack.push(others[j]);
            }
        }
    }
    false
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayPoint {
    pub distance: f64,
    pub estimate: f64,
    pub successes: u64,
    pub replicates: u64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Distance-indexed probabilities with a fitted `C₁ exp(-C₂ s)` law.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecaySeries {
    pub points: Vec<DecayPoint>,
    pub fit: Option<LogLinearFit>,
    /// Whether the activity lies below [`percolation_lower_bound`].
    pub subcritical_by_bound: bool,
}

impl DecaySeries {
    pub fn c1(&self) -> Option<f64> {
        self.fit.map(|f| f.prefactor())
    }

    pub fn c2(&self) -> Option<f64> {
        self.fit.map(|f| f.rate())
    }
}

/// Fits `log p = log C₁ - C₂ s` with weights `1/var(log p̂) = n p̂ / (1 - p̂)`.
pub fn fit_decay(points: &[DecayPoint]) -> Option<LogLinearFit> {
    let x: Vec<f64> = points.iter().map(|p| p.distance).collect();
    let y: Vec<f64> = points.iter().map(|p| p.estimate).collect();
    let w: Vec<f64> = points
        .iter()
        .map(|p| if p.estimate < 1.0 { p.replicates as f64 * p.estimate / (1.0 - p.estimate) } else { 0.0 })
        .collect();
    weighted_log_linear_fit(&x, &y, &w)
}

fn check_distances(distances: &[f64]) -> Result<(), PercolationError> {
    if distances.iter().any(|s| !(s.is_finite() && *s > 0.0)) || distances.windows(2).any(|w| w[1] <= w[0]) {
        return Err(PercolationError::BadDistances);
    }
    Ok(())
}

/// Monte-Carlo estimate of `P(cluster of the probe in Poisson + probe leaves B(0, s))`
/// for each distance `s`, with independent streams per distance.
pub fn estimate_connection_decay(
    model: &ModelSpec,
    probe: &Particle,
    distances: &[f64],
    replicates: u64,
    root: RngStream,
) -> Result<DecaySeries, PercolationError> {
    check_distances(distances)?;
    check_geometry(model.dim, model.radius)?;
    if replicates == 0 {
        return Err(PercolationError::NoReplicates);
    }
    if !(model.lambda >= 0.0 && model.lambda.is_finite()) {
        return Err(PercolationError::BadActivity(model.lambda));
    }
    let stream = root.tagged("decay");
    let points = distances
        .iter()
        .enumerate()
        .map(|(si, &s)| {
            let rho = s + 4.0 * model.radius;
            let base = stream.substream(si as u64);
            let successes: u64 = (0..replicates)
                .into_par_iter()
                .map(|r| {
                    let mut rng = base.substream(r).rng();
                    let others =
                        if model.lambda > 0.0 { sample_poisson_ball(model, rho, &mut rng) } else { Vec::new() };
                    cluster_escapes(probe, &others, s) as u64
                })
                .sum();
            let (ci_lo, ci_hi) = wilson_interval(successes, replicates, Z95);
            DecayPoint {
                distance: s,
                estimate: successes as f64 / replicates as f64,
                successes,
                replicates,
                ci_lo,
                ci_hi,
            }
        })
        .collect::<Vec<_>>();
    let bound = percolation_lower_bound(model.dim, model.radius)?;
    Ok(DecaySeries { fit: fit_decay(&points), points, subcritical_by_bound: model.lambda < bound })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossingRow {
    pub lambda: f64,
    pub n: f64,
    pub estimate: f64,
    pub successes: u64,
    pub replicates: u64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Whether some cluster touches both faces of the window orthogonal to the first axis.
pub fn crosses(xi: &Configuration, w: &Window) -> bool {
    let h = w.half_side();
    let items = xi.as_slice();
    let part = clusters(xi);
    let mut left = vec![false; part.count()];
    let mut right = vec![false; part.count()];
    for (i, p) in items.iter().enumerate() {
        let (lo, hi) = x_extent(p);
        left[part.labels[i]] |= lo <= -h;
        right[part.labels[i]] |= hi >= h;
    }
    left.iter().zip(&right).any(|(a, b)| *a && *b)
}

/// Crossing probabilities of the Boolean model over a grid of activities and window volumes.
///
/// Each replicate draws one Poisson sample at the largest activity and thins it with
/// uniform marks, so the crossing indicator is monotone in `λ` within a replicate.
pub fn estimate_lambda_c(
    model: &ModelSpec,
    windows: &[f64],
    lambdas: &[f64],
    replicates: u64,
    root: RngStream,
) -> Result<Vec<CrossingRow>, PercolationError> {
    check_geometry(model.dim, model.radius)?;
    if replicates == 0 {
        return Err(PercolationError::NoReplicates);
    }
    if let Some(bad) = lambdas.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
        return Err(PercolationError::BadActivity(*bad));
    }
    let lmax = lambdas.iter().copied().fold(0.0, f64::max);
    let stream = root.tagged("crossing");
    let mut rows = Vec::new();
    for (wi, &n) in windows.iter().enumerate() {
        let w = Window::new(n, model.dim).map_err(|_| PercolationError::BadDistances)?;
        let base = stream.substream(wi as u64);
        let hits: Vec<Vec<bool>> = (0..replicates)
            .into_par_iter()
            .map(|r| {
                if lmax == 0.0 {
                    return vec![false; lambdas.len()];
                }
                let mut rng = base.substream(r).rng();
                let full = sample_poisson(&model.with_lambda(lmax), &w, &mut rng);
                let marks: Vec<f64> = (0..full.len()).map(|_| rng.random::<f64>()).collect();
                lambdas
                    .iter()
                    .map(|&l| {
                        let keep = l / lmax;
                        let mut i = 0;
                        let thinned = full.filter(|_| {
                            i += 1;
                            marks[i - 1] < keep
                        });
                        crosses(&thinned, &w)
                    })
                    .collect()
            })
            .collect();
        for (li, &l) in lambdas.iter().enumerate() {
            let successes = hits.iter().filter(|h| h[li]).count() as u64;
            let (ci_lo, ci_hi) = wilson_interval(successes, replicates, Z95);
            rows.push(CrossingRow {
                lambda: l,
                n,
                estimate: successes as f64 / replicates as f64,
                successes,
                replicates,
                ci_lo,
                ci_hi,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball(x: f64, y: f64) -> Particle {
        Particle::ball(&[x, y], 0.5).unwrap()
    }

    fn conf(v: Vec<Particle>) -> Configuration {
        Configuration::try_from_vec(v).unwrap()
    }

    #[test]
    fn cluster_examples() {
        let chain = conf(vec![ball(0.0, 0.0), ball(0.9, 0.0), ball(1.8, 0.0)]);
        assert_eq!(clusters(&chain).sizes, vec![3]);
        let apart = conf(vec![ball(0.0, 0.0), ball(5.0, 0.0), ball(10.0, 0.0)]);
        assert_eq!(clusters(&apart).sizes, vec![1, 1, 1]);
        let pairs = conf(vec![ball(0.0, 0.0), ball(0.9, 0.0), ball(10.0, 0.0), ball(10.9, 0.0)]);
        assert_eq!(clusters(&pairs).sizes, vec![2, 2]);
    }

    #[test]
    fn connects_examples() {
        let chain = conf(vec![ball(0.0, 0.0), ball(0.9, 0.0), ball(1.8, 0.0)]);
        assert!(connects(&chain, &conf(vec![ball(0.0, 0.0)]), &conf(vec![ball(1.8, 0.0)])));
        let empty = Configuration::new();
        assert!(!connects(&empty, &conf(vec![ball(0.0, 0.0)]), &conf(vec![ball(3.0, 0.0)])));
        assert!(connects(&empty, &conf(vec![ball(0.0, 0.0)]), &conf(vec![ball(0.8, 0.0)])));
        // a chain through the middle particle only
        let mid = conf(vec![ball(0.9, 0.0)]);
        assert!(connects(&mid, &conf(vec![ball(0.0, 0.0)]), &conf(vec![ball(1.8, 0.0)])));
    }

    #[test]
    fn bounds() {
        use std::f64::consts::PI;
        assert!((percolation_lower_bound(2, 0.5).unwrap() - 1.0 / PI).abs() < 1e-15);
        assert!((percolation_lower_bound(1, 0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!((percolation_lower_bound(3, 1.0).unwrap() - 3.0 / (32.0 * PI)).abs() < 1e-15);
        assert!((sy13_bound(2, 0.5).unwrap() - 1.0 / (4.0 * PI)).abs() < 1e-15);
        assert!((sy13_bound(1, 0.5).unwrap() - 0.25).abs() < 1e-15);
        assert!(percolation_lower_bound(4, 1.0).is_err());
    }

    #[test]
    fn decay_trivial_cases() {
        let m = ModelSpec::poisson_balls(2, 0.0, 0.5);
        let probe = ball(0.0, 0.0);
        let s = estimate_connection_decay(&m, &probe, &[0.25, 2.0], 50, RngStream::new(1, 0)).unwrap();
        assert_eq!(s.points[0].estimate, 1.0);
        assert_eq!(s.points[1].estimate, 0.0);
    }

    #[test]
    fn crossing_extremes() {
        let w = [4.0];
        let dense = ModelSpec::poisson_balls(2, 1.0, 3.0);
        let rows = estimate_lambda_c(&dense, &w, &[0.0, 5.0], 20, RngStream::new(2, 0)).unwrap();
        assert_eq!(rows[0].estimate, 0.0);
        assert_eq!(rows[1].estimate, 1.0);
    }
}
