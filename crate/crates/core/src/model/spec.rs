use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::particles::{hausdorff_unchecked, intersects, q2_segments, GeometryError, Particle, Window};

/// Pair energy; hard-core exclusion is kept as its own variant so `κ = 0` is exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Energy {
    Finite(f64),
    Infinite,
}

impl Energy {
    pub const ZERO: Energy = Energy::Finite(0.0);

    pub fn is_infinite(self) -> bool {
        matches!(self, Energy::Infinite)
    }

    /// `exp(-E)`, exactly zero for infinite energy.
    pub fn boltzmann(self) -> f64 {
        match self {
            Energy::Finite(e) => (-e).exp(),
            Energy::Infinite => 0.0,
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Energy::Finite(e) => e,
            Energy::Infinite => f64::INFINITY,
        }
    }
}

impl std::ops::Add for Energy {
    type Output = Energy;
    fn add(self, rhs: Energy) -> Energy {
        match (self, rhs) {
            (Energy::Finite(a), Energy::Finite(b)) => Energy::Finite(a + b),
            _ => Energy::Infinite,
        }
    }
}

impl std::ops::AddAssign for Energy {
    fn add_assign(&mut self, rhs: Energy) {
        *self = *self + rhs;
    }
}

/// One step of a piecewise-constant pair potential in the Hausdorff distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairStep {
    /// The step applies for `d_H <= up_to` (and above the previous step's bound).
    pub up_to: f64,
    pub value: f64,
}

pub type PairFn = Arc<dyn Fn(&Particle, &Particle) -> Energy + Send + Sync>;

/// Pair potential families. Only pair terms are supported; in the plane the facet
/// family has no higher-order terms.
#[derive(Clone)]
pub enum Potential {
    /// No interaction: the Gibbs process is the Poisson process.
    Free,
    /// `φ₂(K, L) = ∞·1{K ∩ L ≠ ∅}`.
    Hardcore,
    /// `φ₂(K, L) = a₂·Q₂(K, L)` on segments.
    Facet { a2: f64 },
    /// Piecewise-constant in `d_H`; zero beyond the last step.
    PairTable { steps: Vec<PairStep> },
    /// User-supplied symmetric pair potential with a declared range.
    Custom { range: f64, phi: PairFn },
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential::Free => write!(f, "Free"),
            Potential::Hardcore => write!(f, "Hardcore"),
            Potential::Facet { a2 } => f.debug_struct("Facet").field("a2", a2).finish(),
            Potential::PairTable { steps } => f.debug_struct("PairTable").field("steps", steps).finish(),
            Potential::Custom { range, .. } => f.debug_struct("Custom").field("range", range).finish_non_exhaustive(),
        }
    }
}

impl PartialEq for Potential {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Potential::Free, Potential::Free) | (Potential::Hardcore, Potential::Hardcore) => true,
            (Potential::Facet { a2: a }, Potential::Facet { a2: b }) => a == b,
            (Potential::PairTable { steps: a }, Potential::PairTable { steps: b }) => a == b,
            (Potential::Custom { range: r, phi: f }, Potential::Custom { range: s, phi: g }) => {
                r == s && Arc::ptr_eq(f, g)
            }
            _ => false,
        }
    }
}

impl Potential {
    pub fn name(&self) -> &'static str {
        match self {
            Potential::Free => "free",
            Potential::Hardcore => "hardcore",
            Potential::Facet { .. } => "facet",
            Potential::PairTable { .. } => "pair_table",
            Potential::Custom { .. } => "custom",
        }
    }

    /// Smallest `r` with `φ₂(K, L) = 0` whenever `d_H(K, L) > r`, for particles of size `≤ size`.
    pub fn natural_range(&self, size: f64) -> f64 {
        match self {
            Potential::Free => 0.0,
            // intersecting sets of diameter <= 2R are within d_H <= 2R
            Potential::Hardcore | Potential::Facet { .. } => 2.0 * size,
            Potential::PairTable { steps } => steps.iter().map(|s| s.up_to).fold(0.0, f64::max),
            Potential::Custom { range, .. } => *range,
        }
    }

    pub fn is_free(&self) -> bool {
        match self {
            Potential::Free => true,
            Potential::Facet { a2 } => *a2 == 0.0,
            Potential::PairTable { steps } => steps.iter().all(|s| s.value == 0.0),
            _ => false,
        }
    }

    /// `φ₂(K, L)`; callers pass distinct particles.
    pub fn pair(&self, k: &Particle, l: &Particle) -> Energy {
        match self {
            Potential::Free => Energy::ZERO,
            Potential::Hardcore => {
                if intersects(k, l) {
                    Energy::Infinite
                } else {
                    Energy::ZERO
                }
            }
            Potential::Facet { a2 } => {
                if *a2 == 0.0 {
                    Energy::ZERO
                } else {
                    Energy::Finite(a2 * q2_segments(k, l))
                }
            }
            Potential::PairTable { steps } => {
                let d = hausdorff_unchecked(k, l);
                steps.iter().find(|s| d <= s.up_to).map_or(Energy::ZERO, |s| Energy::Finite(s.value))
            }
            Potential::Custom { phi, .. } => phi(k, l),
        }
    }
}

/// Orientation distribution of segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrientationLaw {
    Uniform,
    Discrete { angles: Vec<f64>, weights: Vec<f64> },
}

/// The particle law `Q`: shapes centered at the origin, of size `R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParticleLaw {
    /// Balls of radius `R`.
    Ball,
    /// Segments of half-length `R` with random direction.
    Segment { orientation: OrientationLaw },
}

impl ParticleLaw {
    /// Equal-weight discrete law on the two axis directions.
    pub fn axis_segments() -> Self {
        ParticleLaw::Segment {
            orientation: OrientationLaw::Discrete { angles: vec![0.0, PI / 2.0], weights: vec![1.0, 1.0] },
        }
    }

    pub fn uniform_segments() -> Self {
        ParticleLaw::Segment { orientation: OrientationLaw::Uniform }
    }
}

/// Per-model sampler for shapes, with the weighted index prepared once.
#[derive(Debug, Clone)]
pub(crate) enum ShapeSampler {
    Ball { radius: f64 },
    UniformSegment { half: f64 },
    DiscreteSegment { half: f64, angles: Vec<f64>, index: WeightedIndex<f64> },
}

impl ShapeSampler {
    pub(crate) fn particle<R: Rng + ?Sized>(&self, center: &[f64], rng: &mut R) -> Particle {
        let built = match self {
            ShapeSampler::Ball { radius } => Particle::ball(center, *radius),
            ShapeSampler::UniformSegment { half } => {
                Particle::segment([center[0], center[1]], rng.random::<f64>() * PI, *half)
            }
            ShapeSampler::DiscreteSegment { half, angles, index } => {
                Particle::segment([center[0], center[1]], angles[index.sample(rng)], *half)
            }
        };
        built.expect("validated model yields valid particles")
    }
}

/// A stationary Gibbs particle model: activity, particle law, size bound and pair potential.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub dim: usize,
    pub lambda: f64,
    /// Deterministic particle size bound `R`: every particle lies in `B(z(K), R)`.
    pub radius: f64,
    pub law: ParticleLaw,
    pub potential: Potential,
    /// Declared interaction range; must cover the potential's natural range.
    pub range: f64,
}

/// One violated constraint found by [`ModelSpec::validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Validation {
    /// `1/(v_d 2^d R^d)`, below which the dominating Boolean model does not percolate.
    pub percolation_bound: f64,
    pub subcritical_by_bound: bool,
}

/// Volume of the unit ball in dimension 1, 2 or 3.
pub fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        _ => f64::NAN,
    }
}

impl ModelSpec {
    pub fn new(dim: usize, lambda: f64, radius: f64, law: ParticleLaw, potential: Potential) -> Self {
        let range = potential.natural_range(radius);
        Self { dim, lambda, radius, law, potential, range }
    }

    /// Zero-potential ball model in dimension `dim`.
    pub fn poisson_balls(dim: usize, lambda: f64, radius: f64) -> Self {
        Self::new(dim, lambda, radius, ParticleLaw::Ball, Potential::Free)
    }

    pub fn hardcore_balls(dim: usize, lambda: f64, radius: f64) -> Self {
        Self::new(dim, lambda, radius, ParticleLaw::Ball, Potential::Hardcore)
    }

    /// Planar facet model with pair weight `a2`.
    pub fn facet(lambda: f64, radius: f64, a2: f64, law: ParticleLaw) -> Self {
        Self::new(2, lambda, radius, law, Potential::Facet { a2 })
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self { lambda, ..self.clone() }
    }

    /// Checks the standing assumptions; every violation is reported.
    pub fn validate(&self) -> Result<Validation, Vec<Diagnostic>> {
        let mut errs = Vec::new();
        let mut bad = |field: &str, message: String| errs.push(Diagnostic { field: field.into(), message });
        if !(1..=3).contains(&self.dim) {
            bad("dim", format!("must be 1, 2 or 3, got {}", self.dim));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            bad("lambda", format!("must be positive and finite, got {}", self.lambda));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            bad("radius", format!("must be positive and finite, got {}", self.radius));
        }
        match &self.law {
            ParticleLaw::Ball => {}
            ParticleLaw::Segment { orientation } => {
                if self.dim != 2 {
                    bad("law", format!("segments need dim = 2, got {}", self.dim));
                }
                if let OrientationLaw::Discrete { angles, weights } = orientation {
                    if angles.is_empty() || angles.len() != weights.len() {
                        bad("law.angles", "angles and weights must be non-empty and of equal length".into());
                    }
                    if angles.iter().any(|a| !a.is_finite()) {
                        bad("law.angles", "angles must be finite".into());
                    }
                    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) || weights.iter().sum::<f64>() <= 0.0 {
                        bad("law.weights", "weights must be non-negative with a positive sum".into());
                    }
                }
            }
        }
        match &self.potential {
            Potential::Facet { a2 } => {
                if !(a2.is_finite() && *a2 >= 0.0) {
                    bad("a2", format!("must be non-negative and finite (repulsive), got {a2}"));
                }
                if !matches!(self.law, ParticleLaw::Segment { .. }) {
                    bad("potential", "facet potential needs a segment particle law".into());
                }
            }
            Potential::PairTable { steps } => {
                if steps.is_empty() {
                    bad("pair_table", "needs at least one step".into());
                }
                let mut prev = 0.0;
                for (i, s) in steps.iter().enumerate() {
                    let increasing = if i == 0 { s.up_to >= 0.0 } else { s.up_to > prev };
                    if !(s.up_to.is_finite() && increasing) {
                        bad("pair_table", format!("step {i}: bounds must be finite and strictly increasing"));
                    }
                    if !(s.value.is_finite() && s.value >= 0.0) {
                        bad("pair_table", format!("step {i}: value must be non-negative and finite, got {}", s.value));
                    }
                    prev = s.up_to;
                }
            }
            Potential::Custom { range, .. } => {
                if !(range.is_finite() && *range >= 0.0) {
                    bad("potential", format!("custom range must be finite, got {range}"));
                }
            }
            Potential::Free | Potential::Hardcore => {}
        }
        if !self.range.is_finite() || self.range < 0.0 {
            bad("range", format!("interaction range must be finite and non-negative, got {}", self.range));
        } else if self.radius.is_finite() && self.range < self.potential.natural_range(self.radius) {
            bad(
                "range",
                format!("{} is below the potential's range {}", self.range, self.potential.natural_range(self.radius)),
            );
        }
        if !errs.is_empty() {
            return Err(errs);
        }
        let percolation_bound = 1.0 / (unit_ball_volume(self.dim) * (2.0 * self.radius).powi(self.dim as i32));
        Ok(Validation { percolation_bound, subcritical_by_bound: self.lambda < percolation_bound })
    }

    pub(crate) fn shape_sampler(&self) -> ShapeSampler {
        match &self.law {
            ParticleLaw::Ball => ShapeSampler::Ball { radius: self.radius },
            ParticleLaw::Segment { orientation: OrientationLaw::Uniform } => {
                ShapeSampler::UniformSegment { half: self.radius }
            }
            ParticleLaw::Segment { orientation: OrientationLaw::Discrete { angles, weights } } => {
                ShapeSampler::DiscreteSegment {
                    half: self.radius,
                    angles: angles.clone(),
                    index: WeightedIndex::new(weights.clone()).expect("validated weights"),
                }
            }
        }
    }

    /// A particle with the given center and shape drawn from `Q`.
    pub fn draw_particle<R: Rng + ?Sized>(&self, center: &[f64], rng: &mut R) -> Particle {
        self.shape_sampler().particle(center, rng)
    }

    pub fn check_window(&self, w: &Window) -> Result<(), GeometryError> {
        if w.dim() != self.dim {
            return Err(GeometryError::DimensionMismatch(self.dim, w.dim()));
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum PotentialRepr {
    Free,
    Hardcore,
    Facet { a2: f64 },
    PairTable { steps: Vec<PairStep> },
    Custom { range: f64 },
}

impl Serialize for Potential {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let repr = match self {
            Potential::Free => PotentialRepr::Free,
            Potential::Hardcore => PotentialRepr::Hardcore,
            Potential::Facet { a2 } => PotentialRepr::Facet { a2: *a2 },
            Potential::PairTable { steps } => PotentialRepr::PairTable { steps: steps.clone() },
            Potential::Custom { range, .. } => PotentialRepr::Custom { range: *range },
        };
        repr.serialize(s)
    }
}

impl Serialize for ModelSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Echo<'a> {
            dim: usize,
            lambda: f64,
            radius: f64,
            law: &'a ParticleLaw,
            potential: &'a Potential,
            range: f64,
        }
        Echo {
            dim: self.dim,
            lambda: self.lambda,
            radius: self.radius,
            law: &self.law,
            potential: &self.potential,
            range: self.range,
        }
        .serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_examples() {
        let ok = ModelSpec::poisson_balls(2, 0.1, 0.5).validate().unwrap();
        assert!(ok.subcritical_by_bound);
        assert!((ok.percolation_bound - 1.0 / PI).abs() < 1e-15);

        let neg = ModelSpec::facet(0.1, 0.5, -1.0, ParticleLaw::axis_segments()).validate().unwrap_err();
        assert!(neg.iter().any(|d| d.field == "a2"));

        let zero = ModelSpec::poisson_balls(2, 0.0, 0.5).validate().unwrap_err();
        assert_eq!(zero[0].field, "lambda");
    }

    #[test]
    fn validate_reports_every_problem() {
        let mut m = ModelSpec::facet(-1.0, 0.5, -2.0, ParticleLaw::Ball);
        m.range = 0.1;
        let errs = m.validate().unwrap_err();
        let fields: Vec<&str> = errs.iter().map(|d| d.field.as_str()).collect();
        for f in ["lambda", "a2", "potential", "range"] {
            assert!(fields.contains(&f), "{fields:?}");
        }
    }

    #[test]
    fn energy_arithmetic() {
        assert_eq!(Energy::Finite(1.0) + Energy::Infinite, Energy::Infinite);
        assert_eq!(Energy::Infinite.boltzmann(), 0.0);
        assert_eq!(Energy::ZERO.boltzmann(), 1.0);
    }

    #[test]
    fn pair_table_steps() {
        let p = Potential::PairTable {
            steps: vec![PairStep { up_to: 1.0, value: 2.0 }, PairStep { up_to: 2.0, value: 0.5 }],
        };
        let a = Particle::ball(&[0.0, 0.0], 0.5).unwrap();
        assert_eq!(p.pair(&a, &Particle::ball(&[0.5, 0.0], 0.5).unwrap()), Energy::Finite(2.0));
        assert_eq!(p.pair(&a, &Particle::ball(&[1.5, 0.0], 0.5).unwrap()), Energy::Finite(0.5));
        assert_eq!(p.pair(&a, &Particle::ball(&[2.5, 0.0], 0.5).unwrap()), Energy::ZERO);
        assert_eq!(p.natural_range(0.5), 2.0);
    }
}
