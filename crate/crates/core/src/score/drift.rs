//! Population stability index over reference deciles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DRIFT_THRESHOLD: f64 = 0.2;
pub const PSI_FLOOR: f64 = 1e-4;
pub const MIN_REFERENCE: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureDrift {
    pub feature: String,
    pub psi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub bins: usize,
    pub features: Vec<FeatureDrift>,
    pub feature_drift: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prediction_psi: Option<f64>,
    pub prediction_drift: bool,
}

impl DriftReport {
    pub fn any(&self) -> bool {
        self.feature_drift || self.prediction_drift
    }

    /// Adds the PSI of model outputs on reference and current data.
    pub fn with_predictions(mut self, reference: &[f64], current: &[f64]) -> Result<Self> {
        let p = psi(reference, current, self.bins)?;
        self.prediction_psi = Some(p);
        self.prediction_drift = p > DRIFT_THRESHOLD;
        Ok(self)
    }
}

/// Interior cut points at the `k / bins` quantiles (linear interpolation).
fn cut_points(reference: &[f64], bins: usize) -> Vec<f64> {
    let mut sorted = reference.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    (1..bins)
        .map(|k| {
            let h = (n - 1) as f64 * k as f64 / bins as f64;
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
        })
        .collect()
}

fn proportions(values: &[f64], cuts: &[f64]) -> Vec<f64> {
    let mut counts = vec![0usize; cuts.len() + 1];
    for v in values {
        counts[cuts.partition_point(|c| c < v)] += 1;
    }
    counts.iter().map(|&c| (c as f64 / values.len() as f64).max(PSI_FLOOR)).collect()
}

/// `sum_b (p_b - q_b) ln(p_b / q_b)` with bins taken from `reference`.
pub fn psi(reference: &[f64], current: &[f64], bins: usize) -> Result<f64> {
    if bins < 2 {
        return Err(Error::InvalidConfig("drift needs at least 2 bins".into()));
    }
    if reference.len() < MIN_REFERENCE {
        return Err(Error::InsufficientReference { needed: MIN_REFERENCE, got: reference.len() });
    }
    if current.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let cuts = cut_points(reference, bins);
    let p = proportions(reference, &cuts);
    let q = proportions(current, &cuts);
    Ok(p.iter().zip(&q).map(|(p, q)| (p - q) * (p / q).ln()).sum())
}

/// Per-feature PSI between two row sets with the same width.
pub fn detect_drift(reference: &[&[f64]], current: &[&[f64]], names: &[String], bins: usize) -> Result<DriftReport> {
    let d = names.len();
    if let Some(r) = reference.iter().chain(current).find(|r| r.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: r.len() });
    }
    let mut features = Vec::with_capacity(d);
    for (j, name) in names.iter().enumerate() {
        let r: Vec<f64> = reference.iter().map(|row| row[j]).collect();
        let c: Vec<f64> = current.iter().map(|row| row[j]).collect();
        features.push(FeatureDrift { feature: name.clone(), psi: psi(&r, &c, bins)? });
    }
    let feature_drift = features.iter().any(|f| f.psi > DRIFT_THRESHOLD);
    Ok(DriftReport { bins, features, feature_drift, prediction_psi: None, prediction_drift: false })
}
