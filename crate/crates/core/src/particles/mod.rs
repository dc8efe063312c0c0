//! Geometric particles, configurations and observation windows.
//!
//! Particles serialize as
//! `{"shape":"ball","center":[x,…],"radius":r}` or
//! `{"shape":"segment","center":[x,y],"half_length":h,"orientation":θ}`;
//! configurations as arrays of particles.

mod configuration;
mod geometry;
mod shape;
mod window;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use configuration::{Configuration, FactorialTuples};
pub use geometry::{
    config_distance, hausdorff_distance, hausdorff_unchecked, intersects, point_segment_distance, q2_segments,
    q_measure, segment_contact, SegmentContact,
};
pub use shape::{Particle, Shape, EPS_GEOM};
pub use window::Window;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("particles live in different dimensions ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("dimension {0} is not supported (expected 1, 2 or 3)")]
    UnsupportedDimension(usize),
    #[error("size parameter must be positive and finite, got {0}")]
    InvalidSize(f64),
    #[error("particle parameters must be finite")]
    NonFiniteCenter,
    #[error("facet measure Q_{0} is only available for j in {{1, 2}}")]
    UnsupportedOrder(usize),
    #[error("Q_j expects {expected} particles, got {got}")]
    WrongArity { expected: usize, got: usize },
    #[error("facet measures need segments, got a ball in dimension {0}")]
    NotASegment(usize),
    #[error("configuration contains the same particle twice")]
    DuplicateParticle,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase", deny_unknown_fields)]
enum ParticleRepr {
    Ball { center: Vec<f64>, radius: f64 },
    Segment { center: [f64; 2], half_length: f64, orientation: f64 },
}

impl Serialize for Particle {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let repr = match self.shape() {
            Shape::Ball { radius } => ParticleRepr::Ball { center: self.center().to_vec(), radius },
            Shape::Segment { orientation, half_length } => {
                ParticleRepr::Segment { center: [self.center()[0], self.center()[1]], half_length, orientation }
            }
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Particle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let p = match ParticleRepr::deserialize(d)? {
            ParticleRepr::Ball { center, radius } => Particle::ball(&center, radius),
            ParticleRepr::Segment { center, half_length, orientation } => {
                Particle::segment(center, orientation, half_length)
            }
        };
        p.map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_schema() {
        let b = Particle::ball(&[1.0, 2.0], 0.5).unwrap();
        assert_eq!(serde_json::to_string(&b).unwrap(), r#"{"shape":"ball","center":[1.0,2.0],"radius":0.5}"#);
        let s = Particle::segment([0.0, 1.0], 0.25, 0.5).unwrap();
        assert_eq!(
            serde_json::to_string(&s).unwrap(),
            r#"{"shape":"segment","center":[0.0,1.0],"half_length":0.5,"orientation":0.25}"#
        );
        let xi = Configuration::try_from_vec(vec![b, s]).unwrap();
        let text = serde_json::to_string(&xi).unwrap();
        assert_eq!(serde_json::from_str::<Configuration>(&text).unwrap(), xi);
    }

    #[test]
    fn json_rejects_invalid() {
        assert!(serde_json::from_str::<Particle>(r#"{"shape":"ball","center":[0.0],"radius":-1.0}"#).is_err());
        assert!(serde_json::from_str::<Particle>(r#"{"shape":"disc","center":[0.0],"radius":1.0}"#).is_err());
        let dup = r#"[{"shape":"ball","center":[0.0],"radius":1.0},{"shape":"ball","center":[0.0],"radius":1.0}]"#;
        assert!(serde_json::from_str::<Configuration>(dup).is_err());
    }
}
