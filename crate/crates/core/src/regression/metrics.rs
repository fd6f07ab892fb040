use serde::{Deserialize, Serialize};

use crate::dataset::{Triplet, AXIS_NAMES};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterMetrics {
    pub name: String,
    /// `100 · mean |pred - truth|` in normalized units.
    pub mae_percent: f64,
    /// Coefficient of determination; `None` when the truths have zero variance.
    pub r2: Option<f64>,
    pub r2_defined: bool,
    /// Standard deviation of the residuals `pred - truth`.
    pub residual_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub sample_count: usize,
    /// Mean of the three per-parameter MAE percentages.
    pub aggregate_mae_percent: f64,
    /// Mean of the per-parameter R², if all three are defined.
    pub aggregate_r2: Option<f64>,
    pub parameters: Vec<ParameterMetrics>,
}

impl MetricsReport {
    pub fn parameter(&self, name: &str) -> Option<&ParameterMetrics> {
        self.parameters.iter().find(|p| p.name == name)
    }
}

fn axis_metrics(name: &str, preds: &[f64], truths: &[f64]) -> ParameterMetrics {
    let n = truths.len() as f64;
    let residuals: Vec<f64> = preds.iter().zip(truths).map(|(p, t)| p - t).collect();
    let mae = residuals.iter().map(|r| r.abs()).sum::<f64>() / n;
    let truth_mean = truths.iter().sum::<f64>() / n;
    let ss_tot: f64 = truths.iter().map(|t| (t - truth_mean).powi(2)).sum();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let r2 = (ss_tot > 0.0).then(|| 1.0 - ss_res / ss_tot);
    let res_mean = residuals.iter().sum::<f64>() / n;
    let var = residuals.iter().map(|r| (r - res_mean).powi(2)).sum::<f64>() / n;
    ParameterMetrics {
        name: name.to_string(),
        mae_percent: 100.0 * mae,
        r2,
        r2_defined: r2.is_some(),
        residual_std: var.sqrt(),
    }
}

/// Per-parameter MAE (percent of the normalized range), R² and residual σ.
pub fn metrics(pred_means: &[Triplet], truths: &[Triplet]) -> Result<MetricsReport> {
    if pred_means.len() != truths.len() {
        return Err(Error::LengthMismatch {
            left: pred_means.len(),
            right: truths.len(),
        });
    }
    if truths.len() < 2 {
        return Err(Error::invalid("metrics", "need at least 2 samples"));
    }
    if pred_means
        .iter()
        .chain(truths)
        .any(|t| !t.iter().all(|v| v.is_finite()))
    {
        return Err(Error::NonFinite);
    }
    let parameters: Vec<ParameterMetrics> = (0..3)
        .map(|k| {
            let p: Vec<f64> = pred_means.iter().map(|t| t[k]).collect();
            let t: Vec<f64> = truths.iter().map(|t| t[k]).collect();
            axis_metrics(AXIS_NAMES[k], &p, &t)
        })
        .collect();
    let aggregate_mae_percent = parameters.iter().map(|p| p.mae_percent).sum::<f64>() / 3.0;
    let aggregate_r2 = parameters
        .iter()
        .map(|p| p.r2)
        .sum::<Option<f64>>()
        .map(|s| s / 3.0);
    Ok(MetricsReport {
        sample_count: truths.len(),
        aggregate_mae_percent,
        aggregate_r2,
        parameters,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub empty: bool,
    pub mean_truth: f64,
    pub mean_pred: f64,
    /// Standard deviation of the residuals in the bin.
    pub residual_std: f64,
}

/// Groups samples into `n_bins` equal-width truth bins on `[0, 1]` and
/// reports per-bin mean prediction and residual spread. Truths outside
/// `[0, 1]` are clamped into the end bins. Empty bins carry NaN statistics.
pub fn binned_trend(preds: &[f64], truths: &[f64], n_bins: usize) -> Result<Vec<TrendBin>> {
    if n_bins < 2 {
        return Err(Error::invalid("n_bins", "need at least 2 bins"));
    }
    if preds.len() != truths.len() {
        return Err(Error::LengthMismatch {
            left: preds.len(),
            right: truths.len(),
        });
    }
    let mut members: Vec<Vec<(f64, f64)>> = vec![Vec::new(); n_bins];
    for (&p, &t) in preds.iter().zip(truths) {
        let b = ((t * n_bins as f64).floor().max(0.0) as usize).min(n_bins - 1);
        members[b].push((p, t));
    }
    Ok(members
        .into_iter()
        .enumerate()
        .map(|(b, m)| {
            let lo = b as f64 / n_bins as f64;
            let hi = (b + 1) as f64 / n_bins as f64;
            if m.is_empty() {
                return TrendBin {
                    lo,
                    hi,
                    count: 0,
                    empty: true,
                    mean_truth: f64::NAN,
                    mean_pred: f64::NAN,
                    residual_std: f64::NAN,
                };
            }
            let n = m.len() as f64;
            let mean_truth = m.iter().map(|x| x.1).sum::<f64>() / n;
            let mean_pred = m.iter().map(|x| x.0).sum::<f64>() / n;
            let mean_res = mean_pred - mean_truth;
            let var = m
                .iter()
                .map(|(p, t)| (p - t - mean_res).powi(2))
                .sum::<f64>()
                / n;
            TrendBin {
                lo,
                hi,
                count: m.len(),
                empty: false,
                mean_truth,
                mean_pred,
                residual_std: var.sqrt(),
            }
        })
        .collect())
}
