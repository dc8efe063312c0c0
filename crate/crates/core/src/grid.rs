//! Uniform cell grid over particle centers for fixed-radius neighbour queries.
//!
//! Every supported shape is centrally symmetric about its circumscribed center,
//! so `d_H(K, L) >= |z(K) - z(L)|`; a one-ring scan with cell size `>= r`
//! therefore finds every particle within Hausdorff distance `r`.

use std::collections::HashMap;

use crate::particles::Particle;

type Cell = [i64; 3];

pub struct LocalityGrid {
    cell: f64,
    dim: usize,
    cells: HashMap<Cell, Vec<usize>>,
}

impl LocalityGrid {
    /// Indexes `particles` by center with the given cell size (clamped away from zero).
    pub fn new(particles: &[Particle], cell: f64) -> Self {
        let cell = if cell.is_finite() && cell > 0.0 { cell } else { 1.0 };
        let dim = particles.first().map_or(2, |p| p.dim());
        let mut cells: HashMap<Cell, Vec<usize>> = HashMap::new();
        for (i, p) in particles.iter().enumerate() {
            cells.entry(Self::key(cell, p.center())).or_default().push(i);
        }
        Self { cell, dim, cells }
    }

    fn key(cell: f64, c: &[f64]) -> Cell {
        let mut k = [0i64; 3];
        for (slot, x) in k.iter_mut().zip(c) {
            *slot = (x / cell).floor() as i64;
        }
        k
    }

    /// Indices of all particles in the 3^d cells around `center`, in ascending order.
    pub fn candidates(&self, center: &[f64]) -> Vec<usize> {
        let base = Self::key(self.cell, center);
        let span = |axis: usize| if axis < self.dim { -1..=1 } else { 0..=0 };
        let mut out = Vec::new();
        for dx in span(0) {
            for dy in span(1) {
                for dz in span(2) {
                    if let Some(v) = self.cells.get(&[base[0] + dx, base[1] + dy, base[2] + dz]) {
                        out.extend_from_slice(v);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Candidates whose center lies within Euclidean distance `radius` of `p`'s center,
    /// excluding index `skip`.
    pub fn near(&self, particles: &[Particle], p: &Particle, radius: f64, skip: Option<usize>) -> Vec<usize> {
        let r2 = radius * radius;
        let mut v = self.candidates(p.center());
        v.retain(|&j| Some(j) != skip && particles[j].center_dist2(p) <= r2);
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_all_within_radius() {
        let pts: Vec<Particle> = (0..50)
            .map(|i| {
                let x = (i as f64 * 0.37).sin() * 3.0;
                let y = (i as f64 * 0.91).cos() * 3.0;
                Particle::ball(&[x, y], 0.2).unwrap()
            })
            .collect();
        let grid = LocalityGrid::new(&pts, 1.0);
        for (i, p) in pts.iter().enumerate() {
            let got = grid.near(&pts, p, 1.0, Some(i));
            let want: Vec<usize> = (0..pts.len()).filter(|&j| j != i && pts[j].center_dist2(p) <= 1.0).collect();
            assert_eq!(got, want);
        }
    }
}
