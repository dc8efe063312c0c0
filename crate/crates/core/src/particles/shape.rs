use std::cmp::Ordering;
use std::f64::consts::PI;
use std::hash::{Hash, Hasher};

use super::GeometryError;

/// Absolute tolerance for segment predicates (orientation tests, collinearity).
pub const EPS_GEOM: f64 = 1e-9;

/// Shape parameters of a particle, relative to its circumscribed center.
#[derive(Debug, Clone, Copy)]
pub enum Shape {
    /// Closed ball of the given radius.
    Ball { radius: f64 },
    /// Closed segment in the plane; `orientation` is the angle of its direction in `[0, π)`.
    Segment { orientation: f64, half_length: f64 },
}

impl Shape {
    fn discriminant(&self) -> u8 {
        match self {
            Shape::Ball { .. } => 0,
            Shape::Segment { .. } => 1,
        }
    }
}

/// A compact particle: a ball in dimension 1, 2 or 3, or a planar segment.
///
/// Equality is bitwise equality of all parameters, and the [`Ord`] impl is the
/// fixed lexicographic total order used by couplings and difference operators:
/// center coordinates, then shape kind, then size, then orientation.
#[derive(Debug, Clone, Copy)]
pub struct Particle {
    dim: usize,
    center: [f64; 3],
    shape: Shape,
}

impl Particle {
    pub fn ball(center: &[f64], radius: f64) -> Result<Self, GeometryError> {
        let dim = center.len();
        if !(1..=3).contains(&dim) {
            return Err(GeometryError::UnsupportedDimension(dim));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(GeometryError::InvalidSize(radius));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(GeometryError::NonFiniteCenter);
        }
        let mut c = [0.0; 3];
        c[..dim].copy_from_slice(center);
        Ok(Self { dim, center: c, shape: Shape::Ball { radius } })
    }

    /// Segment centered at `center` with direction angle `orientation` (reduced mod π).
    pub fn segment(center: [f64; 2], orientation: f64, half_length: f64) -> Result<Self, GeometryError> {
        if !(half_length > 0.0 && half_length.is_finite()) {
            return Err(GeometryError::InvalidSize(half_length));
        }
        if !(center[0].is_finite() && center[1].is_finite() && orientation.is_finite()) {
            return Err(GeometryError::NonFiniteCenter);
        }
        let mut theta = orientation.rem_euclid(PI);
        if theta >= PI {
            theta = 0.0;
        }
        Ok(Self {
            dim: 2,
            center: [center[0], center[1], 0.0],
            shape: Shape::Segment { orientation: theta, half_length },
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Center of the circumscribed ball, `z(K)`.
    pub fn center(&self) -> &[f64] {
        &self.center[..self.dim]
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    /// Radius of the circumscribed ball.
    pub fn circumradius(&self) -> f64 {
        match self.shape {
            Shape::Ball { radius } => radius,
            Shape::Segment { half_length, .. } => half_length,
        }
    }

    pub fn is_segment(&self) -> bool {
        matches!(self.shape, Shape::Segment { .. })
    }

    pub fn translated(&self, shift: &[f64]) -> Self {
        let mut out = *self;
        for (c, s) in out.center[..self.dim].iter_mut().zip(shift) {
            *c += s;
        }
        out
    }

    pub fn with_center(&self, center: &[f64]) -> Self {
        let mut out = *self;
        out.center[..self.dim].copy_from_slice(&center[..self.dim]);
        out
    }

    /// Endpoints of a segment; `None` for balls.
    pub fn endpoints(&self) -> Option<([f64; 2], [f64; 2])> {
        match self.shape {
            Shape::Segment { orientation, half_length } => {
                let (s, c) = orientation.sin_cos();
                let (dx, dy) = (c * half_length, s * half_length);
                let [x, y, _] = self.center;
                Some(([x - dx, y - dy], [x + dx, y + dy]))
            }
            Shape::Ball { .. } => None,
        }
    }

    /// Squared Euclidean distance between circumscribed centers.
    pub fn center_dist2(&self, other: &Particle) -> f64 {
        self.center.iter().zip(&other.center).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    fn cmp_total(&self, other: &Self) -> Ordering {
        let dims = self.dim.cmp(&other.dim);
        if dims != Ordering::Equal {
            return dims;
        }
        for i in 0..self.dim {
            let o = self.center[i].total_cmp(&other.center[i]);
            if o != Ordering::Equal {
                return o;
            }
        }
        let o = self.shape.discriminant().cmp(&other.shape.discriminant());
        if o != Ordering::Equal {
            return o;
        }
        match (self.shape, other.shape) {
            (Shape::Ball { radius: a }, Shape::Ball { radius: b }) => a.total_cmp(&b),
            (
                Shape::Segment { orientation: ta, half_length: la },
                Shape::Segment { orientation: tb, half_length: lb },
            ) => la.total_cmp(&lb).then(ta.total_cmp(&tb)),
            _ => unreachable!("discriminants compared equal"),
        }
    }
}

impl PartialEq for Particle {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_total(other) == Ordering::Equal
    }
}

impl Eq for Particle {}

impl PartialOrd for Particle {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Particle {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_total(other)
    }
}

impl Hash for Particle {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.dim.hash(state);
        for c in self.center() {
            c.to_bits().hash(state);
        }
        self.shape.discriminant().hash(state);
        match self.shape {
            Shape::Ball { radius } => radius.to_bits().hash(state),
            Shape::Segment { orientation, half_length } => {
                half_length.to_bits().hash(state);
                orientation.to_bits().hash(state);
            }
        }
    }
}
