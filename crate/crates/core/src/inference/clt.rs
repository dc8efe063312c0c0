use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::model::{u_statistic, ModelSpec, UStatSpec};
use crate::particles::{Configuration, Window};
use crate::rng::RngStream;
use crate::stats::{ks_distance_normal, mean_var, skew_kurtosis, standardize};

use super::{draw, replicate, InferenceError};

/// Minimum replicates at the largest window before normality statistics are trusted.
pub const CLT_MIN_REPLICATES: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CltOptions {
    /// Samples are drawn in the window enlarged by this margin and then restricted,
    /// which damps the influence of the empty boundary.
    pub margin: f64,
}

impl Default for CltOptions {
    fn default() -> Self {
        Self { margin: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltWindow {
    pub n: f64,
    pub replicates: u64,
    pub mean_over_n: f64,
    pub mean_over_n_se: f64,
    pub var_over_n: f64,
    /// 95% chi-square interval for `var/n`.
    pub var_over_n_ci: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltReport {
    pub windows: Vec<CltWindow>,
    /// Kolmogorov–Smirnov distance of the standardized largest-window sample to N(0, 1).
    pub ks_distance: Option<f64>,
    pub skewness: Option<f64>,
    pub excess_kurtosis: Option<f64>,
    /// The statistic has zero variance at the largest window.
    pub degenerate: bool,
    /// Relative change of `mean/n` and `var/n` between the last two windows.
    pub mean_change: Option<f64>,
    pub var_change: Option<f64>,
    pub warnings: Vec<String>,
    /// Raw values at the largest window, in replicate order.
    #[serde(skip)]
    pub largest_values: Vec<f64>,
}

fn rel_change(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (b - a).abs() / a.abs().max(b.abs())
    }
}

/// Simulates `F_n = u_statistic(spec, Ξ_n)` over windows of volume `n` and reports the
/// scaled mean and variance and normality diagnostics at the largest window.
/// `replicates[i]` is the replicate count for `windows[i]`.
pub fn clt_experiment(
    model: &ModelSpec,
    spec: &UStatSpec,
    windows: &[f64],
    replicates: &[u64],
    root: RngStream,
    opts: CltOptions,
) -> Result<CltReport, InferenceError> {
    spec.validate()?;
    if windows.is_empty() || windows.len() != replicates.len() {
        return Err(InferenceError::InvalidInput("need one replicate count per window".into()));
    }
    if let Some(&r) = replicates.iter().find(|&&r| r < 2) {
        return Err(InferenceError::InsufficientReplicates { needed: 2, got: r });
    }
    if !(opts.margin >= 0.0 && opts.margin.is_finite()) {
        return Err(InferenceError::InvalidInput(format!("margin must be non-negative, got {}", opts.margin)));
    }
    let empty = Configuration::new();
    let mut rows = Vec::new();
    let mut last = Vec::new();
    for (wi, (&n, &reps)) in windows.iter().zip(replicates).enumerate() {
        let w = Window::new(n, model.dim).map_err(|e| InferenceError::InvalidInput(e.to_string()))?;
        let outer = w.enlarged(opts.margin);
        let values = replicate(root, "clt", wi as u64, reps, |rng| {
            if spec.is_zero() {
                return Ok(0.0);
            }
            let xi = draw(model, &outer, &empty, rng)?.restrict(&w);
            Ok(u_statistic(spec, &xi))
        })?;
        let (m, v) = mean_var(&values);
        let df = (reps - 1) as f64;
        let chi = ChiSquared::new(df).expect("positive degrees of freedom");
        let var_ci = (df * v / chi.inverse_cdf(0.975) / n, df * v / chi.inverse_cdf(0.025) / n);
        rows.push(CltWindow {
            n,
            replicates: reps,
            mean_over_n: m / n,
            mean_over_n_se: (v / reps as f64).sqrt() / n,
            var_over_n: v / n,
            var_over_n_ci: var_ci,
        });
        last = values;
    }
    let mut warnings = Vec::new();
    let top = *replicates.last().expect("non-empty");
    if top < CLT_MIN_REPLICATES {
        warnings.push(format!("only {top} replicates at the largest window (want at least {CLT_MIN_REPLICATES})"));
    }
    let standardized = standardize(&last);
    let degenerate = standardized.is_none();
    if degenerate {
        warnings.push("statistic has zero variance; normality diagnostics skipped".into());
    }
    let (skewness, excess_kurtosis) = match &standardized {
        Some(_) => {
            let (s, k) = skew_kurtosis(&last);
            (Some(s), Some(k))
        }
        None => (None, None),
    };
    let (mean_change, var_change) = match rows.as_slice() {
        [.., a, b] => (Some(rel_change(a.mean_over_n, b.mean_over_n)), Some(rel_change(a.var_over_n, b.var_over_n))),
        _ => (None, None),
    };
    Ok(CltReport {
        ks_distance: standardized.as_deref().map(ks_distance_normal),
        skewness,
        excess_kurtosis,
        degenerate,
        mean_change,
        var_change,
        windows: rows,
        warnings,
        largest_values: last,
    })
}
