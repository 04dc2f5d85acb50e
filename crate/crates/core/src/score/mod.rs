//! Rubric normalization, domain weighting and drift-driven weight adaptation.

mod drift;
mod profile;

use serde::{Deserialize, Serialize};

use crate::criteria::{Criteria, MetricVector};
use crate::error::{Error, Result};

pub use drift::{detect_drift, psi, DriftReport, FeatureDrift, DRIFT_THRESHOLD, MIN_REFERENCE, PSI_FLOOR};
pub use profile::{
    adapt_weights, builtin_profiles, load_profile, load_rules, parse_rules, Adaptation, AdaptationRule, DomainProfile,
    Trigger, BUILTIN_NAMES,
};

pub const WEIGHT_TOLERANCE: f64 = 1e-9;

/// Qualitative label of a rubric band.
pub fn band_label(band: u8) -> &'static str {
    match band {
        1 => "Very Low",
        2 => "Low",
        3 => "Moderate",
        4 => "High",
        _ => "Very High",
    }
}

/// `band = 1 + floor((s - 1) / 0.8)`, clamped to `1..=5`.
pub fn band(s: f64) -> u8 {
    let b = 1.0 + ((s - 1.0) * 1.25).floor();
    b.clamp(1.0, 5.0) as u8
}

/// Maps raw values in `[0, 1]` to continuous rubric scores `1 + 4 raw`.
pub fn normalize(raw: &MetricVector) -> (Criteria<f64>, Criteria<u8>) {
    let s = raw.map(|r| 1.0 + 4.0 * r);
    (s, s.map(band))
}

pub fn check_weights(weights: &Criteria<f64>) -> Result<()> {
    let sum: f64 = weights.to_array().iter().sum();
    if weights.to_array().iter().any(|w| !(0.0..=1.0).contains(w)) || (sum - 1.0).abs() > WEIGHT_TOLERANCE {
        return Err(Error::WeightsNotNormalized { sum });
    }
    Ok(())
}

/// `S = sum_i w_i s_i`.
pub fn weighted_score(s: &Criteria<f64>, weights: &Criteria<f64>) -> Result<f64> {
    check_weights(weights)?;
    if let Some((c, v)) = s.iter().find(|(_, v)| !(1.0..=5.0).contains(v)) {
        return Err(Error::InvalidConfig(format!("score for {c} is {v}, outside [1, 5]")));
    }
    let total: f64 = s.iter().map(|(c, v)| weights[c] * v).sum();
    // Weights may sum to 1 only within rounding.
    Ok(total.clamp(1.0, 5.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreBreakdown {
    /// Absent when scores were supplied directly.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub raw: Option<MetricVector>,
    pub scores: Criteria<f64>,
    pub bands: Criteria<u8>,
    pub weights: Criteria<f64>,
    pub total: f64,
}

impl ScoreBreakdown {
    pub fn from_raw(raw: &MetricVector, weights: &Criteria<f64>) -> Result<Self> {
        let raw = raw.clipped();
        let (scores, bands) = normalize(&raw);
        let total = weighted_score(&scores, weights)?;
        Ok(ScoreBreakdown { raw: Some(raw), scores, bands, weights: *weights, total })
    }

    /// Audit mode: rubric scores given directly, e.g. by an expert panel.
    pub fn from_scores(scores: &Criteria<f64>, weights: &Criteria<f64>) -> Result<Self> {
        let total = weighted_score(scores, weights)?;
        Ok(ScoreBreakdown { raw: None, scores: *scores, bands: scores.map(band), weights: *weights, total })
    }
}
