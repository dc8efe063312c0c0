use std::fmt;
use std::sync::Arc;

use crate::grid::LocalityGrid;
use crate::particles::{hausdorff_unchecked, q2_segments, Configuration, Particle};

use super::ModelError;

pub type KernelFn = Arc<dyn Fn(&[&Particle]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Kernel {
    /// Facet intersection measure `Q_j`; order `j`.
    FacetG { j: usize },
    /// The constant `value` on tuples whose members are pairwise within the locality radius.
    Constant { value: f64 },
    /// Any symmetric bounded kernel.
    Custom(KernelFn),
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kernel::FacetG { j } => f.debug_struct("FacetG").field("j", j).finish(),
            Kernel::Constant { value } => f.debug_struct("Constant").field("value", value).finish(),
            Kernel::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// An admissible U-statistic `F(ξ) = (1/k!) Σ h(K₁, …, K_k)` over ordered tuples of distinct particles.
///
/// Evaluation goes through [`UStatSpec::kernel_value`], which forces `h` to vanish on repeated
/// particles and whenever some `d_H(K_i, K₁)` exceeds the locality radius.
#[derive(Clone, Debug)]
pub struct UStatSpec {
    pub order: usize,
    /// Locality radius `r`.
    pub radius: f64,
    /// Declared bound on `|h|`.
    pub sup_norm: f64,
    pub kernel: Kernel,
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

impl UStatSpec {
    /// `G_j` for segments of half-length `size`: total length (`j = 1`) or crossing count (`j = 2`).
    pub fn facet(j: usize, size: f64) -> Result<Self, ModelError> {
        match j {
            1 => Ok(Self { order: 1, radius: 0.0, sup_norm: 2.0 * size, kernel: Kernel::FacetG { j } }),
            2 => Ok(Self { order: 2, radius: 2.0 * size, sup_norm: 1.0, kernel: Kernel::FacetG { j } }),
            _ => Err(ModelError::UnsupportedKernel(format!("facet G_{j} needs j in {{1, 2}}"))),
        }
    }

    /// `h ≡ 0` of the given order.
    pub fn zero(order: usize) -> Self {
        Self { order, radius: 0.0, sup_norm: 0.0, kernel: Kernel::Constant { value: 0.0 } }
    }

    pub fn constant(order: usize, value: f64, radius: f64) -> Self {
        Self { order, radius, sup_norm: value.abs(), kernel: Kernel::Constant { value } }
    }

    pub fn custom(order: usize, radius: f64, sup_norm: f64, h: KernelFn) -> Self {
        Self { order, radius, sup_norm, kernel: Kernel::Custom(h) }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.order == 0 {
            return Err(ModelError::UnsupportedKernel("order must be at least 1".into()));
        }
        if !(self.radius.is_finite() && self.radius >= 0.0) {
            return Err(ModelError::UnsupportedKernel(format!("locality radius must be finite, got {}", self.radius)));
        }
        if !(self.sup_norm.is_finite() && self.sup_norm >= 0.0) {
            return Err(ModelError::UnsupportedKernel(format!("sup norm must be finite, got {}", self.sup_norm)));
        }
        if let Kernel::FacetG { j } = self.kernel {
            if j != self.order || !(1..=2).contains(&j) {
                return Err(ModelError::UnsupportedKernel(format!("G_{j} has order {j}, spec says {}", self.order)));
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kernel, Kernel::Constant { value } if value == 0.0)
    }

    /// `h(K₁, …, K_k)` with the admissibility conventions applied.
    pub fn kernel_value(&self, tuple: &[&Particle]) -> f64 {
        if tuple.len() != self.order || tuple.is_empty() {
            return 0.0;
        }
        for (i, a) in tuple.iter().enumerate() {
            if tuple[..i].iter().any(|b| b == a) {
                return 0.0;
            }
        }
        let first = tuple[0];
        if tuple[1..].iter().any(|l| l.dim() != first.dim() || hausdorff_unchecked(first, l) > self.radius) {
            return 0.0;
        }
        match &self.kernel {
            Kernel::FacetG { j: 1 } => {
                if first.is_segment() {
                    2.0 * first.circumradius()
                } else {
                    0.0
                }
            }
            Kernel::FacetG { .. } => q2_segments(tuple[0], tuple[1]),
            Kernel::Constant { value } => {
                let pairwise = tuple
                    .iter()
                    .enumerate()
                    .all(|(i, a)| tuple[i + 1..].iter().all(|b| hausdorff_unchecked(a, b) <= self.radius));
                if pairwise {
                    *value
                } else {
                    0.0
                }
            }
            Kernel::Custom(h) => h(tuple),
        }
    }
}

/// Calls `f` on every ordered `m`-tuple of distinct entries of `pool`, in lexicographic order
/// of positions in `pool`.
fn for_each_tuple<'a>(
    pool: &[&'a Particle],
    m: usize,
    prefix: &mut Vec<&'a Particle>,
    used: &mut [bool],
    f: &mut impl FnMut(&[&'a Particle]),
) {
    if m == 0 {
        f(prefix);
        return;
    }
    for i in 0..pool.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        prefix.push(pool[i]);
        for_each_tuple(pool, m - 1, prefix, used, f);
        prefix.pop();
        used[i] = false;
    }
}

/// Sum of `h(K, L₁, …, L_{k-1})` over ordered tuples drawn from `pool`.
fn anchored_sum<'a>(spec: &UStatSpec, anchor: &'a Particle, pool: &[&'a Particle]) -> f64 {
    let mut total = 0.0;
    let mut prefix = vec![anchor];
    let mut used = vec![false; pool.len()];
    for_each_tuple(pool, spec.order - 1, &mut prefix, &mut used, &mut |t| total += spec.kernel_value(t));
    total
}

/// `F_h(ξ)`, summing only over tuples inside the locality radius of their first member.
///
/// Terms are accumulated in the same order as a full lexicographic enumeration of ordered
/// tuples would produce them, so the result matches brute force bit for bit.
pub fn u_statistic(spec: &UStatSpec, xi: &Configuration) -> f64 {
    let k = spec.order;
    if k == 0 || xi.len() < k {
        return 0.0;
    }
    let items = xi.as_slice();
    if k == 1 {
        return items.iter().map(|p| spec.kernel_value(&[p])).sum::<f64>() / factorial(1);
    }
    let grid = LocalityGrid::new(items, spec.radius);
    let mut total = 0.0;
    for (i, p) in items.iter().enumerate() {
        let pool: Vec<&Particle> = grid
            .near(items, p, spec.radius, Some(i))
            .into_iter()
            .map(|j| &items[j])
            .filter(|l| hausdorff_unchecked(p, l) <= spec.radius)
            .collect();
        if pool.len() + 1 < k {
            continue;
        }
        let mut prefix = vec![p];
        let mut used = vec![false; pool.len()];
        for_each_tuple(&pool, k - 1, &mut prefix, &mut used, &mut |t| total += spec.kernel_value(t));
    }
    total / factorial(k)
}

/// Score `T(K, ξ) = (1/k!) Σ h(K, L₁, …, L_{k-1})` over ordered tuples of `ξ`.
pub fn score(spec: &UStatSpec, k: &Particle, xi: &Configuration) -> f64 {
    if spec.order == 0 {
        return 0.0;
    }
    let r2 = spec.radius * spec.radius;
    let pool: Vec<&Particle> = xi
        .slab(k.dim(), k.center()[0], spec.radius)
        .iter()
        .filter(|l| l.center_dist2(k) <= r2 && hausdorff_unchecked(k, l) <= spec.radius)
        .collect();
    anchored_sum(spec, k, &pool) / factorial(spec.order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn seg(x: f64, y: f64, t: f64) -> Particle {
        Particle::segment([x, y], t, 0.5).unwrap()
    }

    #[test]
    fn triangle_of_crossings() {
        let g2 = UStatSpec::facet(2, 0.5).unwrap();
        let xi = Configuration::try_from_vec(vec![
            seg(0.0, 0.0, 0.0),
            seg(0.0, 0.0, FRAC_PI_2 - 0.3),
            seg(0.05, 0.1, FRAC_PI_2 + 0.4),
        ])
        .unwrap();
        assert_eq!(u_statistic(&g2, &xi), 3.0);
        assert_eq!(u_statistic(&g2, &Configuration::new()), 0.0);
        let parallel = Configuration::try_from_vec(vec![seg(0.0, 0.0, 0.0), seg(0.0, 0.2, 0.0)]).unwrap();
        assert_eq!(u_statistic(&g2, &parallel), 0.0);
    }

    #[test]
    fn score_examples() {
        let g2 = UStatSpec::facet(2, 0.5).unwrap();
        let xi = Configuration::try_from_vec(vec![seg(0.0, 0.0, 0.0)]).unwrap();
        assert_eq!(score(&g2, &seg(0.0, 0.0, FRAC_PI_2), &xi), 0.5);
        assert_eq!(score(&g2, &seg(0.0, 0.0, FRAC_PI_2), &Configuration::new()), 0.0);
        let g1 = UStatSpec::facet(1, 1.0).unwrap();
        let long = Particle::segment([0.0, 0.0], 0.0, 1.0).unwrap();
        assert_eq!(score(&g1, &long, &Configuration::new()), 2.0);
    }

    #[test]
    fn kernel_conventions() {
        let spec = UStatSpec::constant(2, 1.0, 1.0);
        let a = seg(0.0, 0.0, 0.0);
        assert_eq!(spec.kernel_value(&[&a, &a]), 0.0);
        assert_eq!(spec.kernel_value(&[&a, &seg(3.0, 0.0, 0.0)]), 0.0);
        assert_eq!(spec.kernel_value(&[&a, &seg(0.5, 0.0, 0.0)]), 1.0);
        assert!(UStatSpec::facet(3, 1.0).is_err());
    }
}
