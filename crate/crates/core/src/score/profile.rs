use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{check_weights, DriftReport, WEIGHT_TOLERANCE};
use crate::criteria::{Criteria, Criterion};
use crate::error::{Error, Result};

pub const BUILTIN_NAMES: [&str; 4] = ["healthcare", "finance", "agriculture", "security"];

/// Built-in weights in percent, in criterion order.
const BUILTIN_PERCENT: [[u32; 5]; 4] = [
    [25, 30, 10, 10, 25],
    [20, 25, 15, 25, 15],
    [20, 30, 15, 10, 25],
    [25, 20, 15, 20, 20],
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainProfile {
    pub name: String,
    pub weights: Criteria<f64>,
}

impl DomainProfile {
    pub fn new(name: impl Into<String>, weights: Criteria<f64>) -> Result<Self> {
        check_weights(&weights)?;
        Ok(DomainProfile { name: name.into(), weights })
    }

    pub fn builtin(name: &str) -> Option<Self> {
        let i = BUILTIN_NAMES.iter().position(|n| *n == name)?;
        let weights = Criteria::from_array(BUILTIN_PERCENT[i].map(|p| f64::from(p) / 100.0));
        Some(DomainProfile { name: name.to_string(), weights })
    }

    /// Parses `{name, weights: {...}}` with weights in percent.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: DomainProfile = serde_json::from_str(text)?;
        let sum: f64 = file.weights.to_array().iter().sum();
        if (sum - 100.0).abs() > 1e-6 || file.weights.to_array().iter().any(|w| !(0.0..=100.0).contains(w)) {
            return Err(Error::WeightsNotNormalized { sum });
        }
        Ok(DomainProfile { name: file.name, weights: file.weights.map(|w| w / 100.0) })
    }
}

pub fn builtin_profiles() -> Vec<DomainProfile> {
    BUILTIN_NAMES.iter().filter_map(|n| DomainProfile::builtin(n)).collect()
}

/// A built-in name, or a path to a profile file.
pub fn load_profile(name_or_path: &str) -> Result<DomainProfile> {
    if let Some(p) = DomainProfile::builtin(name_or_path) {
        return Ok(p);
    }
    let path = Path::new(name_or_path);
    if !path.is_file() {
        return Err(Error::UnknownProfile(name_or_path.to_string()));
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    DomainProfile::from_json(&text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trigger {
    DriftOnFeatures,
    DriftOnPredictions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptationRule {
    pub trigger: Trigger,
    pub criterion: Criterion,
    /// Change in percentage points.
    pub delta: f64,
    #[serde(default)]
    pub floor: f64,
    #[serde(default = "one")]
    pub cap: f64,
}

fn one() -> f64 {
    1.0
}

impl AdaptationRule {
    pub fn validate(&self) -> Result<()> {
        if !self.delta.is_finite() || !(0.0..=1.0).contains(&self.floor) || !(0.0..=1.0).contains(&self.cap) {
            return Err(Error::InvalidConfig(format!("rule for {}: delta must be finite, floor and cap in [0, 1]", self.criterion)));
        }
        if self.floor > self.cap {
            return Err(Error::InvalidConfig(format!("rule for {}: floor exceeds cap", self.criterion)));
        }
        Ok(())
    }

    fn fires(&self, drift: &DriftReport) -> bool {
        match self.trigger {
            Trigger::DriftOnFeatures => drift.feature_drift,
            Trigger::DriftOnPredictions => drift.prediction_drift,
        }
    }
}

fn bounds(rules: &[AdaptationRule]) -> (Criteria<f64>, Criteria<f64>) {
    let mut lo = Criteria::splat(0.0);
    let mut hi = Criteria::splat(1.0);
    for r in rules {
        lo[r.criterion] = f64::max(lo[r.criterion], r.floor);
        hi[r.criterion] = f64::min(hi[r.criterion], r.cap);
    }
    (lo, hi)
}

pub fn parse_rules(text: &str) -> Result<Vec<AdaptationRule>> {
    let rules: Vec<AdaptationRule> = serde_json::from_str(text)?;
    for r in &rules {
        r.validate()?;
    }
    let (lo, hi) = bounds(&rules);
    if Criterion::ALL.iter().any(|&c| lo[c] > hi[c]) {
        return Err(Error::InvalidConfig("rules give a criterion a floor above its cap".into()));
    }
    let lo_sum: f64 = lo.to_array().iter().sum();
    let hi_sum: f64 = hi.to_array().iter().sum();
    if lo_sum > 1.0 + WEIGHT_TOLERANCE || hi_sum < 1.0 - WEIGHT_TOLERANCE {
        return Err(Error::InvalidConfig("rule floors and caps admit no normalized weights".into()));
    }
    Ok(rules)
}

pub fn load_rules(path: &Path) -> Result<Vec<AdaptationRule>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_rules(&text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adaptation {
    pub fired: Vec<AdaptationRule>,
    pub before: Criteria<f64>,
    pub after: Criteria<f64>,
}

/// Rescales weights to sum to 1, pinning any that leave `[lo, hi]` at the
/// violated bound and redistributing over the rest.
fn renormalize(mut w: Criteria<f64>, lo: &Criteria<f64>, hi: &Criteria<f64>) -> Criteria<f64> {
    let mut pinned = Criteria::splat(false);
    for _ in 0..Criterion::ALL.len() {
        let fixed: f64 = Criterion::ALL.iter().filter(|&&c| pinned[c]).map(|&c| w[c]).sum();
        let free: Vec<Criterion> = Criterion::ALL.into_iter().filter(|&c| !pinned[c]).collect();
        let free_sum: f64 = free.iter().map(|&c| w[c]).sum();
        let target = 1.0 - fixed;
        for &c in &free {
            w[c] = if free_sum > 0.0 { w[c] * target / free_sum } else { target / free.len() as f64 };
        }
        let mut changed = false;
        for &c in &free {
            if w[c] > hi[c] {
                w[c] = hi[c];
                pinned[c] = true;
                changed = true;
            } else if w[c] < lo[c] {
                w[c] = lo[c];
                pinned[c] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    w
}

/// Applies every rule whose trigger fired. Returns the profile unchanged
/// when nothing fired.
pub fn adapt_weights(profile: &DomainProfile, rules: &[AdaptationRule], drift: &DriftReport) -> (DomainProfile, Option<Adaptation>) {
    let fired: Vec<AdaptationRule> = rules.iter().filter(|r| r.fires(drift)).cloned().collect();
    if fired.is_empty() {
        return (profile.clone(), None);
    }
    let (lo, hi) = bounds(&fired);
    let mut w = profile.weights;
    for r in &fired {
        w[r.criterion] = (w[r.criterion] + r.delta / 100.0).clamp(lo[r.criterion], hi[r.criterion]);
    }
    let w = renormalize(w, &lo, &hi);
    let adapted = DomainProfile { name: profile.name.clone(), weights: w };
    let log = Adaptation { fired, before: profile.weights, after: w };
    (adapted, Some(log))
}
