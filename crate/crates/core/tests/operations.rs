//! Worked examples for the public operations, each checked against an independent computation.

use std::f64::consts::{FRAC_PI_2, PI};

use dapsim::inference::{
    clt_experiment, decorrelation_test, difference_operator, domination_check, estimate_rho, gnz_weighted_moment,
    mixed_product, moment_bound_check, BoxRegion, CltOptions, InferenceError,
};
use dapsim::model::{u_statistic, ModelSpec, ParticleLaw, UStatSpec};
use dapsim::particles::{hausdorff_distance, intersects, Configuration, Particle, Window};
use dapsim::percolation::{estimate_connection_decay, estimate_lambda_c};
use dapsim::rng::{RngStream, StreamRng};
use dapsim::sampler::{disagreement_couple, sample_gibbs_cftp, sample_gibbs_rejection, sample_poisson};
use rand::Rng;

fn stream(tag: u64) -> RngStream {
    RngStream::new(777, tag)
}

fn seg(x: f64, y: f64, angle: f64) -> Particle {
    Particle::segment([x, y], angle, 1.0).unwrap()
}

fn ball(x: f64, y: f64, r: f64) -> Particle {
    Particle::ball(&[x, y], r).unwrap()
}

/// Discrete Hausdorff distance between `n` equally spaced points on each of two segments.
/// The nearest grid point on the other segment is found by projecting onto its line.
fn discrete_hausdorff(a: (f64, f64, f64), b: (f64, f64, f64), n: usize) -> f64 {
    let points = |(x, y, t): (f64, f64, f64)| -> Vec<[f64; 2]> {
        (0..n)
            .map(|i| {
                let s = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
                [x + s * t.cos(), y + s * t.sin()]
            })
            .collect()
    };
    let nearest = |p: [f64; 2], (x, y, t): (f64, f64, f64)| -> f64 {
        let s = ((p[0] - x) * t.cos() + (p[1] - y) * t.sin()).clamp(-1.0, 1.0);
        let i = ((s + 1.0) / 2.0 * (n - 1) as f64).round();
        let s = -1.0 + 2.0 * i / (n - 1) as f64;
        ((p[0] - x - s * t.cos()).powi(2) + (p[1] - y - s * t.sin()).powi(2)).sqrt()
    };
    let one_way = |from, to| points(from).into_iter().map(|p| nearest(p, to)).fold(0.0, f64::max);
    f64::max(one_way(a, b), one_way(b, a))
}

#[test]
fn perpendicular_segments_hausdorff() {
    let d = hausdorff_distance(&seg(0.0, 0.0, 0.0), &seg(0.0, 0.0, FRAC_PI_2)).unwrap();
    let oracle = discrete_hausdorff((0.0, 0.0, 0.0), (0.0, 0.0, FRAC_PI_2), 100_000);
    assert!((d - oracle).abs() < 1e-3, "{d} vs {oracle}");
}

#[test]
fn offset_segments_hausdorff() {
    let (a, b) = ((0.3, -0.2, 0.4), (1.1, 0.5, 2.0));
    let d = hausdorff_distance(&seg(a.0, a.1, a.2), &seg(b.0, b.1, b.2)).unwrap();
    let oracle = discrete_hausdorff(a, b, 100_000);
    assert!((d - oracle).abs() < 1e-3, "{d} vs {oracle}");
}

#[test]
fn poisson_count_moments() {
    let model = ModelSpec::poisson_balls(2, 2.0, 0.5);
    let w = Window::new(10.0, 2).unwrap();
    let reps = 10_000;
    let counts: Vec<f64> =
        (0..reps).map(|r| sample_poisson(&model, &w, &mut stream(1).substream(r).rng()).len() as f64).collect();
    let mean = counts.iter().sum::<f64>() / reps as f64;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
    assert!((mean - 20.0).abs() < 4.0 * (20.0f64 / reps as f64).sqrt(), "mean {mean}");
    assert!((var / mean - 1.0).abs() < 0.05, "var {var} mean {mean}");
    assert!(counts.iter().all(|c| *c >= 0.0));
}

#[test]
fn poisson_draw_is_reproducible() {
    let model = ModelSpec::facet(0.5, 0.5, 1.0, ParticleLaw::uniform_segments());
    let w = Window::new(25.0, 2).unwrap();
    let a = sample_poisson(&model, &w, &mut stream(2).rng());
    let b = sample_poisson(&model, &w, &mut stream(2).rng());
    assert_eq!(a, b);
    assert!(a.iter().all(|p| w.contains(p.center())));
}

/// Total variation between empirical counts and the Poisson law of the given mean.
fn tv_to_poisson(counts: &[usize], mean: f64) -> f64 {
    let kmax = counts.iter().copied().max().unwrap_or(0) + 30;
    let mut pmf = vec![(-mean).exp()];
    for k in 1..=kmax {
        pmf.push(pmf[k - 1] * mean / k as f64);
    }
    let mut freq = vec![0.0; kmax + 1];
    for &c in counts {
        freq[c] += 1.0 / counts.len() as f64;
    }
    0.5 * freq.iter().zip(&pmf).map(|(f, p)| (f - p).abs()).sum::<f64>() + 0.5 * (1.0 - pmf.iter().sum::<f64>())
}

#[test]
fn free_model_samplers_are_poisson() {
    let model = ModelSpec::poisson_balls(2, 0.5, 0.5);
    let w = Window::new(9.0, 2).unwrap();
    let empty = Configuration::new();
    let reps = 100_000u64;
    let cftp: Vec<usize> = (0..reps)
        .map(|r| sample_gibbs_cftp(&model, &w, &empty, &mut stream(3).substream(r).rng()).unwrap().sample.len())
        .collect();
    let rejection: Vec<usize> = (0..reps)
        .map(|r| sample_gibbs_rejection(&model, &w, &empty, &mut stream(4).substream(r).rng()).unwrap().sample.len())
        .collect();
    let mean = 0.5 * 9.0;
    assert!(tv_to_poisson(&cftp, mean) < 0.02);
    assert!(tv_to_poisson(&rejection, mean) < 0.02);
}

#[test]
fn samplers_are_deterministic() {
    let model = ModelSpec::facet(0.3, 0.5, 1.0, ParticleLaw::uniform_segments());
    let w = Window::new(16.0, 2).unwrap();
    let chi = Configuration::try_from_vec(vec![seg(2.2, 0.0, 0.3)]).unwrap();
    let a = sample_gibbs_cftp(&model, &w, &chi, &mut stream(5).rng()).unwrap();
    let b = sample_gibbs_cftp(&model, &w, &chi, &mut stream(5).rng()).unwrap();
    assert_eq!(a, b);
    let c = sample_gibbs_rejection(&model, &w, &chi, &mut stream(6).rng()).unwrap();
    let d = sample_gibbs_rejection(&model, &w, &chi, &mut stream(6).rng()).unwrap();
    assert_eq!(c.sample, d.sample);
}

#[test]
fn free_coupling_ignores_boundaries() {
    let model = ModelSpec::poisson_balls(2, 0.8, 0.5);
    let w = Window::new(16.0, 2).unwrap();
    let chi_a = Configuration::new();
    let chi_b = Configuration::try_from_vec(vec![ball(2.3, 0.0, 0.5), ball(-2.4, 1.0, 0.5)]).unwrap();
    for r in 0..50 {
        let out = disagreement_couple(&model, &w, &chi_a, &chi_b, &mut stream(7).substream(r).rng()).unwrap();
        assert_eq!(out.sample_a, out.sample_b);
        assert!(out.disagreement.is_empty());
    }
}

#[test]
fn poisson_correlations_are_powers_of_lambda() {
    let lambda = 0.5;
    let model = ModelSpec::poisson_balls(2, lambda, 0.5);
    let w = Window::new(100.0, 2).unwrap();
    let edges = [0.0, 0.5, 1.0, 1.5, 2.0];
    let est = estimate_rho(&model, &w, 2, &edges, 2_000, stream(8)).unwrap();
    assert!((est.rho1 - lambda).abs() < 3.0 * est.rho1_se, "{} ± {}", est.rho1, est.rho1_se);
    for bin in &est.bins {
        let (rho2, se) = (bin.rho2.unwrap(), bin.se.unwrap());
        assert!((rho2 - lambda * lambda).abs() < 3.0 * se, "bin {}: {rho2} ± {se}", bin.hi);
    }
}

#[test]
fn hardcore_has_no_close_pairs() {
    let lambda = 0.3;
    let model = ModelSpec::hardcore_balls(2, lambda, 0.5);
    let w = Window::new(64.0, 2).unwrap();
    let edges = [0.0, 0.5, 0.95, 1.5, 2.0];
    let est = estimate_rho(&model, &w, 2, &edges, 1_000, stream(9)).unwrap();
    assert_eq!(est.bins[0].rho2, Some(0.0));
    assert_eq!(est.bins[1].rho2, Some(0.0));
    for bin in &est.bins {
        assert!(bin.rho2.unwrap() <= lambda * lambda + 3.0 * bin.se.unwrap());
    }
}

#[test]
fn bins_beyond_the_window_are_missing() {
    let model = ModelSpec::poisson_balls(2, 0.5, 0.5);
    let w = Window::new(4.0, 2).unwrap();
    let est = estimate_rho(&model, &w, 2, &[0.0, 0.5, 5.0], 20, stream(10)).unwrap();
    assert!(est.bins[0].rho2.is_some());
    assert_eq!(est.bins[1].rho2, None);
    assert_eq!(est.bins[1].eroded_volume, None);
}

#[test]
fn poisson_decorrelation_is_null() {
    let model = ModelSpec::poisson_balls(2, 0.5, 0.5);
    let w = Window::new(100.0, 2).unwrap();
    let report = decorrelation_test(&model, &w, &[0.0, 0.5, 1.0, 1.5, 2.0, 2.5], 2_000, stream(11)).unwrap();
    for bin in &report.estimate.bins {
        let (d, se) = (bin.diff.unwrap(), bin.diff_se.unwrap());
        assert!(d.abs() < 3.0 * se, "bin {}: {d} ± {se}", bin.hi);
    }
}

#[test]
fn gnz_constant_kernel_recovers_lambda() {
    let model = ModelSpec::poisson_balls(2, 0.7, 0.5);
    let spec = UStatSpec::constant(1, 1.0, 0.5);
    let w = Window::new(36.0, 2).unwrap();
    let m = gnz_weighted_moment(&model, &spec, &ball(0.0, 0.0, 0.5), None, &w, &Configuration::new(), 100, stream(12))
        .unwrap();
    assert!((m.value - 0.7).abs() < 1e-12);
    assert!(m.se < 1e-12);
}

/// Crossing test by orientation signs, written independently of the library.
fn crosses(a: &Particle, b: &Particle) -> bool {
    let (p1, p2) = a.endpoints().unwrap();
    let (q1, q2) = b.endpoints().unwrap();
    let orient = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    orient(p1, p2, q1) * orient(p1, p2, q2) < 0.0 && orient(q1, q2, p1) * orient(q1, q2, p2) < 0.0
}

#[test]
fn gnz_crossing_score_matches_palm_simulation() {
    let lambda = 0.6;
    let model = ModelSpec::new(2, lambda, 0.5, ParticleLaw::uniform_segments(), dapsim::model::Potential::Free);
    let spec = UStatSpec::facet(2, 0.5).unwrap();
    let w = Window::new(36.0, 2).unwrap();
    let k = Particle::segment([0.0, 0.0], 0.3, 0.5).unwrap();
    let reps = 20_000u64;
    let m = gnz_weighted_moment(&model, &spec, &k, None, &w, &Configuration::new(), reps, stream(13)).unwrap();
    // Palm process Π + δ_K drawn directly; T(K) is half the number of crossings
    let palm: Vec<f64> = (0..reps)
        .map(|r| {
            let xi = sample_poisson(&model, &w, &mut stream(14).substream(r).rng());
            lambda * 0.5 * xi.iter().filter(|l| crosses(&k, l)).count() as f64
        })
        .collect();
    let mean = palm.iter().sum::<f64>() / reps as f64;
    let var = palm.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
    let se = (m.se.powi(2) + var / reps as f64).sqrt();
    assert!((m.value - mean).abs() < 3.0 * se, "{} vs {mean} ± {se}", m.value);
    // mean number of crossings of two uniform unit-length segments: λ·(2/π)·1·1
    let exact = lambda * 0.5 * lambda * 2.0 / PI;
    assert!((m.value - exact).abs() < 3.0 * m.se, "{} vs {exact}", m.value);
}

#[test]
fn gnz_overlapping_hardcore_pair_vanishes() {
    let model = ModelSpec::hardcore_balls(2, 0.2, 0.5);
    let spec = UStatSpec::constant(2, 1.0, 1.0);
    let w = Window::new(36.0, 2).unwrap();
    let (k, l) = (ball(0.0, 0.0, 0.5), ball(0.4, 0.0, 0.5));
    let m = gnz_weighted_moment(&model, &spec, &k, Some(&l), &w, &Configuration::new(), 50, stream(15)).unwrap();
    assert_eq!(m.value, 0.0);
}

#[test]
fn moment_check_examples() {
    let w = Window::new(36.0, 2).unwrap();
    let free = ModelSpec::poisson_balls(2, 0.5, 0.5);
    let one = [BoxRegion::cube(&[0.0, 0.0], 2.0)];
    let r = moment_bound_check(&free, &w, &one, 20_000, stream(16)).unwrap();
    assert!((r.empirical.value - r.bound).abs() < 3.0 * r.empirical.se);
    assert!((r.bound - 2.0).abs() < 1e-12);

    let empty = [BoxRegion::new(vec![0.0, 0.0], vec![0.0, 1.0])];
    let r = moment_bound_check(&free, &w, &empty, 100, stream(17)).unwrap();
    assert_eq!((r.empirical.value, r.bound), (0.0, 0.0));

    let hard = ModelSpec::hardcore_balls(2, 0.3, 0.5);
    let two = [BoxRegion::cube(&[-1.0, 0.0], 1.5), BoxRegion::cube(&[1.0, 0.0], 1.5)];
    let r = moment_bound_check(&hard, &w, &two, 5_000, stream(18)).unwrap();
    assert!(r.holds);
    assert!(r.empirical.value < r.bound);
}

#[test]
fn first_difference_is_two_terms() {
    let spec = UStatSpec::facet(2, 1.0).unwrap();
    let xi = Configuration::try_from_vec(vec![seg(-0.5, 0.0, FRAC_PI_2), seg(0.5, 0.1, FRAC_PI_2), seg(0.0, 0.7, 0.0)])
        .unwrap();
    let psi = |c: &Configuration| u_statistic(&spec, c);
    for k in [seg(0.1, 0.2, 0.0), seg(-0.4, 0.3, 1.0), seg(5.0, 5.0, 0.0)] {
        let below = xi.below(&k);
        let direct = psi(&below.with(k)) - psi(&below);
        assert_eq!(difference_operator(psi, &[k], &xi).unwrap(), direct);
    }
    assert_eq!(difference_operator(|_| 3.5, &[], &xi).unwrap(), 3.5);
}

#[test]
fn crossing_score_has_no_second_difference() {
    let spec = UStatSpec::facet(2, 1.0).unwrap();
    let anchor = seg(0.0, 0.0, 0.7);
    let psi = |c: &Configuration| mixed_product(&spec, &[anchor], &[1], c);
    let mut rng = stream(19).rng();
    let draw =
        |rng: &mut StreamRng| seg(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(0.0..PI));
    let mut nonzero_first = 0;
    for _ in 0..1_000 {
        let xi: Configuration = (0..6).map(|_| draw(&mut rng)).collect();
        let (l1, l2) = (draw(&mut rng), draw(&mut rng));
        assert_eq!(difference_operator(psi, &[l1, l2], &xi).unwrap(), 0.0);
        if difference_operator(psi, &[l1], &xi).unwrap() != 0.0 {
            nonzero_first += 1;
        }
    }
    assert!(nonzero_first > 0);
}

#[test]
fn zero_kernel_is_degenerate() {
    let model = ModelSpec::facet(0.15, 0.5, 1.0, ParticleLaw::axis_segments());
    let report =
        clt_experiment(&model, &UStatSpec::zero(2), &[9.0, 16.0], &[20, 20], stream(20), CltOptions::default())
            .unwrap();
    assert!(report.degenerate);
    assert!(report.windows.iter().all(|w| w.mean_over_n == 0.0 && w.var_over_n == 0.0));
    assert!(!report.warnings.is_empty());
}

#[test]
fn domination_examples() {
    let w = Window::new(25.0, 2).unwrap();
    let free = ModelSpec::poisson_balls(2, 0.3, 0.5);
    let r = domination_check(&free, &w, 20_000, stream(21)).unwrap();
    let gap = r.gibbs_cdf.iter().zip(&r.poisson_cdf).map(|(g, p)| (g - p).abs()).fold(0.0, f64::max);
    assert!(gap < r.dkw_epsilon, "{gap} vs {}", r.dkw_epsilon);

    let hard = ModelSpec::hardcore_balls(2, 0.3, 0.5);
    let r = domination_check(&hard, &w, 20_000, stream(22)).unwrap();
    assert!(r.dominated);
    assert!(r.mean_count < 0.3 * 25.0 - 0.1, "{}", r.mean_count);

    assert!(matches!(domination_check(&hard, &w, 1, stream(23)), Err(InferenceError::InsufficientReplicates { .. })));
}

#[test]
fn crossing_probability_grows_with_lambda() {
    let model = ModelSpec::poisson_balls(2, 1.0, 0.5);
    let lambdas = [0.0, 0.5, 1.0, 1.5, 2.0];
    let rows = estimate_lambda_c(&model, &[16.0], &lambdas, 2_000, stream(24)).unwrap();
    assert_eq!(rows[0].estimate, 0.0);
    for pair in rows.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let sd = |r: &dapsim::percolation::CrossingRow| (r.estimate * (1.0 - r.estimate) / r.replicates as f64).sqrt();
        let tol = 2.0 * (sd(a).powi(2) + sd(b).powi(2)).sqrt();
        assert!(b.estimate + tol >= a.estimate, "{} then {}", a.estimate, b.estimate);
    }
    assert!(rows[4].estimate > 0.5);
}

#[test]
fn decay_trivial_geometry() {
    let probe = ball(0.0, 0.0, 0.5);
    let empty = ModelSpec::poisson_balls(2, 1.0, 0.5).with_lambda(0.0);
    let series = estimate_connection_decay(&empty, &probe, &[1.0, 2.0], 100, stream(25)).unwrap();
    assert!(series.points.iter().all(|p| p.estimate == 0.0));
    let model = ModelSpec::poisson_balls(2, 0.15, 0.5);
    let series = estimate_connection_decay(&model, &probe, &[0.25], 100, stream(26)).unwrap();
    assert_eq!(series.points[0].estimate, 1.0);
}

#[test]
fn intersecting_chain_examples() {
    assert!(intersects(&ball(0.0, 0.0, 1.0), &ball(1.5, 0.0, 1.0)));
    assert!(!intersects(&ball(0.0, 0.0, 1.0), &ball(3.0, 0.0, 1.0)));
    assert!(intersects(&seg(0.0, 0.0, 0.0), &seg(0.0, 0.0, FRAC_PI_2)));
}
