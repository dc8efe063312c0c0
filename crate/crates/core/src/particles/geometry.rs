//! Hausdorff distances, intersection predicates and facet intersection measures.

use super::shape::{Particle, Shape, EPS_GEOM};
use super::GeometryError;

#[inline]
fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
fn norm(a: [f64; 2]) -> f64 {
    a[0].hypot(a[1])
}

/// Euclidean distance from `p` to the closed segment `[a, b]`.
pub fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = sub(b, a);
    let ap = sub(p, a);
    let len2 = dot(ab, ab);
    let t = if len2 > 0.0 { (dot(ap, ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    norm(sub(ap, [ab[0] * t, ab[1] * t]))
}

fn xy(p: &Particle) -> [f64; 2] {
    let c = p.center();
    [c[0], c[1]]
}

/// How two closed segments meet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegmentContact {
    Disjoint,
    /// Exactly one common point (transversal crossing or endpoint touch).
    Point,
    /// Collinear overlap of positive length.
    Overlap {
        length: f64,
    },
}

pub fn segment_contact(a1: [f64; 2], a2: [f64; 2], b1: [f64; 2], b2: [f64; 2]) -> SegmentContact {
    let da = sub(a2, a1);
    let db = sub(b2, b1);
    let la = norm(da);
    let lb = norm(db);
    let denom = cross(da, db);
    let w = sub(b1, a1);

    if denom.abs() > EPS_GEOM * la * lb {
        let t = cross(w, db) / denom;
        let u = cross(w, da) / denom;
        let (et, eu) = (EPS_GEOM / la, EPS_GEOM / lb);
        if (-et..=1.0 + et).contains(&t) && (-eu..=1.0 + eu).contains(&u) {
            return SegmentContact::Point;
        }
        return SegmentContact::Disjoint;
    }

    // parallel: collinear iff b1 lies on the carrier line of a
    if (cross(da, w) / la).abs() > EPS_GEOM {
        return SegmentContact::Disjoint;
    }
    let dir = [da[0] / la, da[1] / la];
    let s0 = dot(w, dir);
    let s1 = dot(sub(b2, a1), dir);
    let (lo, hi) = (s0.min(s1), s0.max(s1));
    let overlap = hi.min(la) - lo.max(0.0);
    if overlap > EPS_GEOM {
        SegmentContact::Overlap { length: overlap }
    } else if overlap >= -EPS_GEOM {
        SegmentContact::Point
    } else {
        SegmentContact::Disjoint
    }
}

fn check_dims(k: &Particle, l: &Particle) -> Result<(), GeometryError> {
    if k.dim() != l.dim() {
        return Err(GeometryError::DimensionMismatch(k.dim(), l.dim()));
    }
    Ok(())
}

/// Hausdorff distance between two particles of the same dimension.
pub fn hausdorff_distance(k: &Particle, l: &Particle) -> Result<f64, GeometryError> {
    check_dims(k, l)?;
    Ok(hausdorff_unchecked(k, l))
}

/// Hausdorff distance without the dimension check. Callers guarantee `k.dim() == l.dim()`.
pub fn hausdorff_unchecked(k: &Particle, l: &Particle) -> f64 {
    match (k.shape(), l.shape()) {
        (Shape::Ball { radius: r }, Shape::Ball { radius: s }) => k.center_dist2(l).sqrt() + (r - s).abs(),
        (Shape::Segment { .. }, Shape::Segment { .. }) => {
            // distance to a convex set is convex, so the sup over a segment sits at an endpoint
            let (a1, a2) = k.endpoints().unwrap();
            let (b1, b2) = l.endpoints().unwrap();
            point_segment_distance(a1, b1, b2)
                .max(point_segment_distance(a2, b1, b2))
                .max(point_segment_distance(b1, a1, a2))
                .max(point_segment_distance(b2, a1, a2))
        }
        (Shape::Ball { radius }, Shape::Segment { orientation, half_length }) => {
            ball_segment_hausdorff(xy(k), radius, xy(l), orientation, half_length)
        }
        (Shape::Segment { orientation, half_length }, Shape::Ball { radius }) => {
            ball_segment_hausdorff(xy(l), radius, xy(k), orientation, half_length)
        }
    }
}

/// Support-function form: `d_H = max_u |h_ball(u) - h_seg(u)|` over unit `u`.
/// The difference is linear on each half circle split by the segment normal, so the
/// maximum sits at the split points or at a normalised linear coefficient.
fn ball_segment_hausdorff(c: [f64; 2], r: f64, m: [f64; 2], theta: f64, half: f64) -> f64 {
    let (s, co) = theta.sin_cos();
    let e = [co, s];
    let delta = sub(c, m);
    let f = |u: [f64; 2]| (dot(delta, u) + r - half * dot(u, e).abs()).abs();
    let mut best = f([-e[1], e[0]]).max(f([e[1], -e[0]]));
    for sign in [1.0, -1.0] {
        let w = [delta[0] - sign * half * e[0], delta[1] - sign * half * e[1]];
        let n = norm(w);
        if n > 0.0 {
            let u = [w[0] / n, w[1] / n];
            best = best.max(f(u)).max(f([-u[0], -u[1]]));
        }
    }
    best
}

/// `K ∩ L ≠ ∅`. Exact for balls; segments use orientation tests at tolerance [`EPS_GEOM`].
pub fn intersects(k: &Particle, l: &Particle) -> bool {
    if k.dim() != l.dim() {
        return false;
    }
    match (k.shape(), l.shape()) {
        (Shape::Ball { radius: r }, Shape::Ball { radius: s }) => k.center_dist2(l) <= (r + s) * (r + s),
        (Shape::Segment { half_length: a, .. }, Shape::Segment { half_length: b, .. }) => {
            let reach = a + b + EPS_GEOM;
            if k.center_dist2(l) > reach * reach {
                return false;
            }
            let (a1, a2) = k.endpoints().unwrap();
            let (b1, b2) = l.endpoints().unwrap();
            segment_contact(a1, a2, b1, b2) != SegmentContact::Disjoint
        }
        (Shape::Ball { radius }, Shape::Segment { .. }) => {
            let (b1, b2) = l.endpoints().unwrap();
            point_segment_distance(xy(k), b1, b2) <= radius
        }
        (Shape::Segment { .. }, Shape::Ball { radius }) => {
            let (a1, a2) = k.endpoints().unwrap();
            point_segment_distance(xy(l), a1, a2) <= radius
        }
    }
}

/// Pairwise facet intersection measure `Q_2` for two segments: `H^0` of the
/// intersection, zeroed when that is infinite (collinear overlap).
pub fn q2_segments(k: &Particle, l: &Particle) -> f64 {
    let (Some((a1, a2)), Some((b1, b2))) = (k.endpoints(), l.endpoints()) else {
        return 0.0;
    };
    let reach = k.circumradius() + l.circumradius() + EPS_GEOM;
    if k.center_dist2(l) > reach * reach {
        return 0.0;
    }
    match segment_contact(a1, a2, b1, b2) {
        SegmentContact::Point => 1.0,
        SegmentContact::Disjoint | SegmentContact::Overlap { .. } => 0.0,
    }
}

/// Facet intersection measure `Q_j` in the plane, `j ∈ {1, 2}`.
///
/// `Q_1` is the length of a segment; `Q_2` counts the single crossing point of two
/// segments, with `0·∞ = 0` for collinear overlaps.
pub fn q_measure(j: usize, particles: &[Particle]) -> Result<f64, GeometryError> {
    if !(1..=2).contains(&j) {
        return Err(GeometryError::UnsupportedOrder(j));
    }
    if particles.len() != j {
        return Err(GeometryError::WrongArity { expected: j, got: particles.len() });
    }
    if let Some(p) = particles.iter().find(|p| !p.is_segment()) {
        return Err(GeometryError::NotASegment(p.dim()));
    }
    Ok(match j {
        1 => 2.0 * particles[0].circumradius(),
        _ => q2_segments(&particles[0], &particles[1]),
    })
}

/// `d(Ψ, Γ) = inf d_H(A, B)` over `A ∈ Ψ`, `B ∈ Γ`; infinite if either side is empty.
pub fn config_distance<'a, I, J>(psi: I, gamma: J) -> f64
where
    I: IntoIterator<Item = &'a Particle>,
    J: IntoIterator<Item = &'a Particle> + Clone,
{
    let mut best = f64::INFINITY;
    for a in psi {
        for b in gamma.clone() {
            if a.dim() == b.dim() {
                best = best.min(hausdorff_unchecked(a, b));
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn ball2(x: f64, y: f64, r: f64) -> Particle {
        Particle::ball(&[x, y], r).unwrap()
    }

    fn seg(x: f64, y: f64, theta: f64, h: f64) -> Particle {
        Particle::segment([x, y], theta, h).unwrap()
    }

    #[test]
    fn equal_balls_distance_is_center_distance() {
        assert_eq!(hausdorff_distance(&ball2(0.0, 0.0, 1.0), &ball2(3.0, 0.0, 1.0)).unwrap(), 3.0);
    }

    #[test]
    fn identity_distance_is_zero() {
        let k = seg(0.3, -1.2, 0.4, 0.5);
        assert_eq!(hausdorff_distance(&k, &k).unwrap(), 0.0);
        let b = ball2(1.0, 2.0, 0.5);
        assert_eq!(hausdorff_distance(&b, &b).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = Particle::ball(&[0.0], 1.0).unwrap();
        let b = ball2(0.0, 0.0, 1.0);
        assert!(matches!(hausdorff_distance(&a, &b), Err(GeometryError::DimensionMismatch(1, 2))));
    }

    #[test]
    fn ball_segment_concentric() {
        // segment inside the ball: sup over ball of dist to segment is the radius
        // attained perpendicular to the segment through its midpoint
        let d = hausdorff_distance(&ball2(0.0, 0.0, 1.0), &seg(0.0, 0.0, 0.0, 0.5)).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
        let d = hausdorff_distance(&ball2(0.0, 0.0, 0.1), &seg(0.0, 0.0, 0.0, 1.0)).unwrap();
        assert!((d - 0.9).abs() < 1e-12);
    }

    #[test]
    fn intersection_examples() {
        assert!(intersects(&ball2(0.0, 0.0, 1.0), &ball2(1.5, 0.0, 1.0)));
        assert!(!intersects(&ball2(0.0, 0.0, 1.0), &ball2(3.0, 0.0, 1.0)));
        assert!(intersects(&seg(0.0, 0.0, 0.0, 1.0), &seg(0.0, 0.0, FRAC_PI_2, 1.0)));
        assert!(!intersects(&seg(0.0, 0.0, 0.0, 1.0), &seg(0.0, 1.0, 0.0, 1.0)));
        // endpoint touch
        assert!(intersects(&seg(0.0, 0.0, 0.0, 1.0), &seg(1.0, 1.0, FRAC_PI_2, 1.0)));
        assert!(intersects(&ball2(0.0, 2.0, 1.0), &seg(0.0, 0.0, FRAC_PI_2, 1.0)));
        assert!(!intersects(&ball2(0.0, 2.5, 1.0), &seg(0.0, 0.0, 0.0, 1.0)));
    }

    #[test]
    fn q_measure_examples() {
        let h = seg(0.0, 0.0, 0.0, 1.0);
        let v = seg(0.0, 0.0, FRAC_PI_2, 1.0);
        assert_eq!(q_measure(2, &[h, v]).unwrap(), 1.0);
        assert_eq!(q_measure(2, &[h, seg(0.0, 1.0, 0.0, 1.0)]).unwrap(), 0.0);
        assert_eq!(q_measure(2, &[h, seg(0.5, 0.0, 0.0, 1.0)]).unwrap(), 0.0);
        assert_eq!(q_measure(1, &[h]).unwrap(), 2.0);
        // collinear segments touching at a single endpoint meet in one point
        assert_eq!(q_measure(2, &[h, seg(2.0, 0.0, 0.0, 1.0)]).unwrap(), 1.0);
    }

    #[test]
    fn q_measure_errors() {
        let h = seg(0.0, 0.0, 0.0, 1.0);
        assert!(matches!(q_measure(3, &[h, h, h]), Err(GeometryError::UnsupportedOrder(3))));
        assert!(matches!(q_measure(0, &[]), Err(GeometryError::UnsupportedOrder(0))));
        assert!(matches!(q_measure(2, &[h, ball2(0.0, 0.0, 1.0)]), Err(GeometryError::NotASegment(_))));
        assert!(matches!(q_measure(2, &[h]), Err(GeometryError::WrongArity { .. })));
    }

    #[test]
    fn config_distance_examples() {
        let k = ball2(0.0, 0.0, 1.0);
        assert_eq!(config_distance([&k], [&k]), 0.0);
        assert_eq!(config_distance([&k], [&ball2(5.0, 0.0, 1.0)]), 5.0);
        assert_eq!(config_distance([&k], std::iter::empty::<&Particle>()), f64::INFINITY);
        assert_eq!(config_distance(std::iter::empty::<&Particle>(), [&k]), f64::INFINITY);
    }
}
