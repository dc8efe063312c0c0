use std::f64::consts::PI;

use dapsim::model::{
    hamiltonian, papangelou, papangelou_p, score, u_statistic, ModelSpec, PairStep, ParticleLaw, Potential, UStatSpec,
};
use dapsim::particles::{hausdorff_distance, intersects, Configuration, Particle, Window};
use proptest::prelude::*;

fn segment() -> impl Strategy<Value = Particle> {
    (-3.0..3.0f64, -3.0..3.0f64, 0.0..PI, 0.1..0.6f64).prop_map(|(x, y, a, h)| Particle::segment([x, y], a, h).unwrap())
}

fn ball() -> impl Strategy<Value = Particle> {
    (-3.0..3.0f64, -3.0..3.0f64, 0.1..0.6f64).prop_map(|(x, y, r)| Particle::ball(&[x, y], r).unwrap())
}

fn particle() -> impl Strategy<Value = Particle> {
    prop_oneof![segment(), ball()]
}

fn segments(max: usize) -> impl Strategy<Value = Configuration> {
    prop::collection::vec(segment(), 0..=max).prop_map(Configuration::from_vec_dedup)
}

fn balls(max: usize) -> impl Strategy<Value = Configuration> {
    prop::collection::vec(ball(), 0..=max).prop_map(Configuration::from_vec_dedup)
}

/// Segment models only; each one has a different potential family.
fn segment_model() -> impl Strategy<Value = ModelSpec> {
    prop_oneof![
        (0.0..3.0f64).prop_map(|a2| ModelSpec::facet(0.2, 0.6, a2, ParticleLaw::uniform_segments())),
        Just(ModelSpec::new(2, 0.2, 0.6, ParticleLaw::uniform_segments(), Potential::Hardcore)),
        (0.0..2.0f64, 0.0..1.0f64).prop_map(|(v1, v2)| ModelSpec::new(
            2,
            0.2,
            0.6,
            ParticleLaw::uniform_segments(),
            Potential::PairTable {
                steps: vec![PairStep { up_to: 0.5, value: v1 + v2 }, PairStep { up_to: 1.0, value: v2 }]
            },
        )),
    ]
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Plain enumeration of ordered tuples of distinct indices, without any spatial index.
fn brute_u(spec: &UStatSpec, xi: &Configuration) -> f64 {
    let items = xi.as_slice();
    let n = items.len();
    let k = spec.order;
    let mut total = 0.0;
    let mut idx = vec![0usize; k];
    fn rec(depth: usize, idx: &mut Vec<usize>, n: usize, f: &mut dyn FnMut(&[usize])) {
        if depth == idx.len() {
            f(idx);
            return;
        }
        for i in 0..n {
            if idx[..depth].contains(&i) {
                continue;
            }
            idx[depth] = i;
            rec(depth + 1, idx, n, f);
        }
    }
    rec(0, &mut idx, n, &mut |t| {
        let tuple: Vec<&Particle> = t.iter().map(|&i| &items[i]).collect();
        total += spec.kernel_value(&tuple);
    });
    total / factorial(k)
}

fn ustat_spec() -> impl Strategy<Value = UStatSpec> {
    prop_oneof![
        Just(UStatSpec::facet(2, 0.6).unwrap()),
        Just(UStatSpec::facet(1, 0.6).unwrap()),
        (1usize..=3, 0.5..2.0f64).prop_map(|(k, r)| UStatSpec::constant(k, 1.0, r)),
    ]
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn hausdorff_is_a_metric(a in particle(), b in particle(), c in particle()) {
        let ab = hausdorff_distance(&a, &b).unwrap();
        let ba = hausdorff_distance(&b, &a).unwrap();
        let bc = hausdorff_distance(&b, &c).unwrap();
        let ac = hausdorff_distance(&a, &c).unwrap();
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
        prop_assert!(ab >= 0.0);
        prop_assert!(ac <= ab + bc + 1e-9);
    }

    #[test]
    fn hausdorff_bounds_center_distance(a in ball(), b in ball()) {
        let d = hausdorff_distance(&a, &b).unwrap();
        let centers = a.center_dist2(&b).sqrt();
        prop_assert!(d + 1e-12 >= centers);
    }

    #[test]
    fn intersects_is_symmetric(a in particle(), b in particle()) {
        prop_assert_eq!(intersects(&a, &b), intersects(&b, &a));
        prop_assert!(intersects(&a, &a));
    }

    #[test]
    fn tuple_count_is_falling_factorial(xi in segments(7), m in 1usize..4) {
        let n = xi.len();
        let expected: usize = if m > n { 0 } else { (n - m + 1..=n).product() };
        let tuples: Vec<_> = xi.factorial_tuples(m).collect();
        prop_assert_eq!(tuples.len(), expected);
        for t in &tuples {
            for i in 0..t.len() {
                for j in i + 1..t.len() {
                    prop_assert_ne!(t[i], t[j]);
                }
            }
        }
    }

    #[test]
    fn restrict_is_idempotent_subset(xi in balls(12), side in 0.5..6.0f64) {
        let w = Window::with_side(side, 2).unwrap();
        let once = xi.restrict(&w);
        prop_assert!(once.is_subset(&xi));
        prop_assert_eq!(once.restrict(&w), once.clone());
        prop_assert!(once.iter().all(|p| w.contains(p.center())));
    }

    #[test]
    fn configurations_are_sorted(v in prop::collection::vec(particle(), 0..12)) {
        let xi = Configuration::from_vec_dedup(v);
        let items = xi.as_slice();
        prop_assert!(items.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn papangelou_in_unit_interval(model in segment_model(), k in segment(), xi in segments(10)) {
        let v = papangelou(&model, &k, &xi);
        prop_assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn papangelou_ignores_far_particles(model in segment_model(), k in segment(), xi in segments(8), far in segment()) {
        let far = far.with_center(&[k.center()[0] + model.range + 2.0, k.center()[1]]);
        prop_assume!(hausdorff_distance(&k, &far).unwrap() > model.range);
        let before = papangelou(&model, &k, &xi);
        let after = papangelou(&model, &k, &xi.with(far));
        prop_assert_eq!(before, after);
    }

    #[test]
    fn papangelou_of_member_is_zero(model in segment_model(), xi in segments(6), k in segment()) {
        let with = xi.with(k);
        prop_assert_eq!(papangelou(&model, &k, &with), 0.0);
    }

    #[test]
    fn joint_papangelou_is_symmetric(
        model in segment_model(),
        tuple in prop::collection::vec(segment(), 1..5),
        xi in segments(6),
    ) {
        let base = papangelou_p(&model, &tuple, &xi);
        prop_assert!((0.0..=1.0).contains(&base));
        let mut reversed = tuple.clone();
        reversed.reverse();
        let mut rotated = tuple.clone();
        rotated.rotate_left(1);
        for perm in [reversed, rotated] {
            let v = papangelou_p(&model, &perm, &xi);
            prop_assert!(rel_close(base, v, 1e-12), "{} vs {}", base, v);
        }
    }

    #[test]
    fn hamiltonian_cocycle(model in segment_model(), xi in segments(6), chi in segments(6), k in segment()) {
        let chi = chi.filter(|p| !xi.contains(p) && *p != k);
        prop_assume!(!xi.contains(&k));
        let h0 = hamiltonian(&model, &xi, &chi).unwrap().value();
        let h1 = hamiltonian(&model, &xi.with(k), &chi).unwrap().value();
        let kappa = papangelou(&model, &k, &xi.union(&chi));
        prop_assert!(h1 >= 0.0 && h0 >= 0.0);
        if h0.is_finite() && h1.is_finite() {
            let rhs = h0 - kappa.ln();
            prop_assert!((h1 - rhs).abs() <= 1e-9 * h1.abs().max(1.0), "{} vs {}", h1, rhs);
        } else if h0.is_finite() {
            prop_assert_eq!(kappa, 0.0);
        }
    }

    #[test]
    fn ustat_is_translation_invariant(spec in ustat_spec(), xi in segments(10), dx in -5.0..5.0f64, dy in -5.0..5.0f64) {
        let a = u_statistic(&spec, &xi);
        let b = u_statistic(&spec, &xi.translated(&[dx, dy]));
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{} vs {}", a, b);
    }

    #[test]
    fn ustat_matches_enumeration(spec in ustat_spec(), xi in segments(12)) {
        let fast = u_statistic(&spec, &xi);
        let slow = brute_u(&spec, &xi);
        prop_assert!((fast - slow).abs() <= 1e-12 * slow.abs().max(1.0), "{} vs {}", fast, slow);
    }

    #[test]
    fn scores_sum_to_ustat(spec in ustat_spec(), xi in segments(10)) {
        let total: f64 = xi.iter().map(|k| score(&spec, k, &xi.without(k))).sum();
        let f = u_statistic(&spec, &xi);
        prop_assert!((total - f).abs() <= 1e-9 * f.abs().max(1.0), "{} vs {}", total, f);
    }
}
