//! Small statistical helpers shared by the experiments.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

/// Wilson score interval for `successes` out of `n` at normal quantile `z`.
pub fn wilson_interval(successes: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let mid = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((mid - half).max(0.0), (mid + half).min(1.0))
}

/// Result of fitting `log y = intercept + slope·x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogLinearFit {
    pub intercept: f64,
    pub slope: f64,
    /// Weighted coefficient of determination.
    pub r2: f64,
    /// Number of points used.
    pub points: usize,
}

impl LogLinearFit {
    /// Prefactor `exp(intercept)`.
    pub fn prefactor(&self) -> f64 {
        self.intercept.exp()
    }

    /// Decay rate `-slope`.
    pub fn rate(&self) -> f64 {
        -self.slope
    }
}

/// Weighted least squares of `log y` on `x`. Points with `y <= 0` or a non-positive weight
/// are dropped; `None` if fewer than two remain.
pub fn weighted_log_linear_fit(x: &[f64], y: &[f64], w: &[f64]) -> Option<LogLinearFit> {
    let pts: Vec<(f64, f64, f64)> = x
        .iter()
        .zip(y)
        .zip(w)
        .filter(|((_, y), w)| **y > 0.0 && y.is_finite() && **w > 0.0 && w.is_finite())
        .map(|((x, y), w)| (*x, y.ln(), *w))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let sw: f64 = pts.iter().map(|p| p.2).sum();
    let mx = pts.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
    let my = pts.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| p.2 * (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = pts.iter().map(|p| p.2 * (p.1 - my).powi(2)).sum();
    let ss_res: f64 = pts.iter().map(|p| p.2 * (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Some(LogLinearFit { intercept, slope, r2, points: pts.len() })
}

/// Sample mean and unbiased variance.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var)
}

/// Sample skewness and excess kurtosis (moment estimators).
pub fn skew_kurtosis(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m3 = xs.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / n;
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
}

/// Kolmogorov–Smirnov distance between the empirical law of `xs` and the standard normal.
pub fn ks_distance_normal(xs: &[f64]) -> f64 {
    let normal = Normal::standard();
    let mut v: Vec<f64> = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < v.len() {
        // ties: the empirical CDF jumps once over the whole run
        let mut j = i;
        while j + 1 < v.len() && v[j + 1] == v[i] {
            j += 1;
        }
        let f = normal.cdf(v[i]);
        d = d.max((f - i as f64 / n).abs()).max(((j + 1) as f64 / n - f).abs());
        i = j + 1;
    }
    d
}

/// Standardizes `xs` to mean 0 and unit sample variance; `None` when the variance vanishes.
pub fn standardize(xs: &[f64]) -> Option<Vec<f64>> {
    let (m, v) = mean_var(xs);
    if v.is_nan() || v <= 0.0 {
        return None;
    }
    let s = v.sqrt();
    Some(xs.iter().map(|x| (x - m) / s).collect())
}
