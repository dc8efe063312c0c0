use serde::{Deserialize, Serialize};

use super::GeometryError;

/// Centered cube `[-a/2, a/2]^d` of volume `n`, `a = n^{1/d}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    volume: f64,
    dim: usize,
}

impl Window {
    pub fn new(volume: f64, dim: usize) -> Result<Self, GeometryError> {
        if !(1..=3).contains(&dim) {
            return Err(GeometryError::UnsupportedDimension(dim));
        }
        if !(volume > 0.0 && volume.is_finite()) {
            return Err(GeometryError::InvalidSize(volume));
        }
        Ok(Self { volume, dim })
    }

    /// Window with the given side length.
    pub fn with_side(side: f64, dim: usize) -> Result<Self, GeometryError> {
        Self::new(side.powi(dim as i32), dim)
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> f64 {
        match self.dim {
            1 => self.volume,
            2 => self.volume.sqrt(),
            _ => self.volume.cbrt(),
        }
    }

    pub fn half_side(&self) -> f64 {
        0.5 * self.side()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        let h = self.half_side();
        point.iter().take(self.dim).all(|x| (-h..=h).contains(x))
    }

    /// Euclidean distance from `point` to the cube; zero inside.
    pub fn distance_to(&self, point: &[f64]) -> f64 {
        let h = self.half_side();
        point.iter().take(self.dim).map(|x| (x.abs() - h).max(0.0).powi(2)).sum::<f64>().sqrt()
    }

    /// Distance from an interior `point` to the boundary; zero outside.
    pub fn depth(&self, point: &[f64]) -> f64 {
        let h = self.half_side();
        point.iter().take(self.dim).map(|x| h - x.abs()).fold(f64::INFINITY, f64::min).max(0.0)
    }

    /// Concentric cube shrunk by `margin` on every side, or `None` if nothing is left.
    pub fn eroded(&self, margin: f64) -> Option<Window> {
        let side = self.side() - 2.0 * margin;
        if side <= 0.0 {
            return None;
        }
        Window::with_side(side, self.dim).ok()
    }

    pub fn enlarged(&self, margin: f64) -> Window {
        Window::with_side(self.side() + 2.0 * margin, self.dim).expect("enlarging keeps a valid window")
    }
}
