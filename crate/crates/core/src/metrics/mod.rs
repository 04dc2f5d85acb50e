//! Raw criterion values for a (model, dataset, explainer) triple.

mod measures;

pub(crate) use measures::explain_stream_tag;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::criteria::{Criterion, MetricVector};
use crate::data::{Attribution, DataKind, Dataset, Instance};
use crate::error::{Error, Result};
use crate::explain::Explainer;
use crate::oracle::Oracle;
use crate::rng::RngSpec;

pub use measures::{
    completeness_ablation, fairness_gap, fidelity_deletion, interpretability_sparsity, perturb, rank_features,
    robustness_stability, Measurement, Perturbation,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WarningKind {
    /// Input and baseline predictions coincide, so the measure was set to 0.
    ZeroNormalizer,
    /// A raw value fell outside `[0, 1]`.
    Clipped,
    /// Fairness defaulted to 1 because only one group exists.
    SingleGroup,
    /// A method failed and was left out of the ranking.
    MethodFailed,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Warning {
    pub kind: WarningKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criterion: Option<Criterion>,
    pub message: String,
}

impl Warning {
    pub fn new(kind: WarningKind, criterion: Option<Criterion>, message: String) -> Self {
        Warning { kind, method: None, instance: None, criterion, message }
    }

    pub fn for_instance(mut self, id: usize) -> Self {
        self.instance = Some(id);
        self
    }

    pub fn for_method(mut self, method: &str) -> Self {
        self.method = Some(method.to_string());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricConfig {
    /// Fraction of features removed along the deletion curve; by default all
    /// features when `d <= 32`, else a quarter of them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deletion_fraction: Option<f64>,
    /// Input noise scale; defaults to 0.05 x the mean feature std.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturb_sigma: Option<f64>,
    #[serde(default = "default_perturb_samples")]
    pub perturb_samples: usize,
    #[serde(default = "default_mask_threshold")]
    pub mask_threshold: f64,
    /// Reserved; not used by any measure yet.
    #[serde(default = "default_top_fraction")]
    pub top_fraction: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

fn default_perturb_samples() -> usize {
    20
}

fn default_mask_threshold() -> f64 {
    0.1
}

fn default_top_fraction() -> f64 {
    0.1
}

fn default_epsilon() -> f64 {
    1e-12
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig {
            deletion_fraction: None,
            perturb_sigma: None,
            perturb_samples: default_perturb_samples(),
            mask_threshold: default_mask_threshold(),
            top_fraction: default_top_fraction(),
            epsilon: default_epsilon(),
        }
    }
}

impl MetricConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(format!("metrics: {msg}")));
        if let Some(f) = self.deletion_fraction {
            if !(f > 0.0 && f <= 1.0) {
                return bad("deletion_fraction must be in (0, 1]");
            }
        }
        if let Some(s) = self.perturb_sigma {
            if !(s > 0.0 && s.is_finite()) {
                return bad("perturb_sigma must be > 0");
            }
        }
        if self.perturb_samples == 0 {
            return bad("perturb_samples must be >= 1");
        }
        if !(self.mask_threshold > 0.0 && self.mask_threshold < 1.0) {
            return bad("mask_threshold must be in (0, 1)");
        }
        if !(self.top_fraction > 0.0 && self.top_fraction < 1.0) {
            return bad("top_fraction must be in (0, 1)");
        }
        if !(self.epsilon > 0.0) {
            return bad("epsilon must be > 0");
        }
        Ok(())
    }

    pub fn deletion_steps(&self, d: usize) -> usize {
        match self.deletion_fraction {
            Some(f) => ((f * d as f64).ceil() as usize).clamp(1, d),
            None if d <= 32 => d,
            None => ((0.25 * d as f64).ceil() as usize).max(1),
        }
    }

    /// Resolves defaults that depend on the dataset.
    pub fn context(&self, dataset: &Dataset, baseline: Vec<f64>, rng: RngSpec) -> Result<EvalContext> {
        self.validate()?;
        if baseline.len() != dataset.dim() {
            return Err(Error::DimensionMismatch { expected: dataset.dim(), got: baseline.len() });
        }
        Ok(EvalContext {
            baseline,
            deletion_steps: self.deletion_steps(dataset.dim()),
            mask_threshold: self.mask_threshold,
            perturbation: Perturbation {
                sigma: self.perturb_sigma.unwrap_or_else(|| 0.05 * dataset.mean_feature_std()),
                samples: self.perturb_samples,
                unit_range: dataset.kind() == DataKind::Image,
            },
            epsilon: self.epsilon,
            rng,
        })
    }
}

/// Fully resolved per-run metric parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalContext {
    pub baseline: Vec<f64>,
    pub deletion_steps: usize,
    pub mask_threshold: f64,
    pub perturbation: Perturbation,
    pub epsilon: f64,
    pub rng: RngSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerInstanceMetrics {
    pub id: usize,
    pub fidelity: f64,
    pub interpretability: f64,
    pub robustness: f64,
    pub completeness: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceEvaluation {
    pub metrics: PerInstanceMetrics,
    pub attribution: Attribution,
    pub warnings: Vec<Warning>,
}

/// Explains one instance and computes its four per-instance measures.
pub fn evaluate_instance(
    model: &dyn Oracle,
    explainer: &dyn Explainer,
    x: &Instance,
    class: usize,
    group: Option<&str>,
    ctx: &EvalContext,
) -> Result<InstanceEvaluation> {
    let run = || -> Result<InstanceEvaluation> {
        let mut stream = ctx.rng.stream(x.id as u64, &measures::explain_stream_tag(explainer.name()));
        let attribution = explainer.explain(model, x, class, &mut stream)?;
        if attribution.dim() != x.dim() {
            return Err(Error::DimensionMismatch { expected: x.dim(), got: attribution.dim() });
        }
        if let Some(index) = attribution.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { instance: x.id, index });
        }
        let a = &attribution.values;
        let fidelity = fidelity_deletion(model, &x.values, class, a, &ctx.baseline, ctx.deletion_steps, ctx.epsilon)?;
        let interpretability = interpretability_sparsity(a);
        let robustness =
            robustness_stability(model, explainer, x, class, a, &ctx.perturbation, ctx.rng, ctx.epsilon)?;
        let completeness =
            completeness_ablation(model, &x.values, class, a, &ctx.baseline, ctx.mask_threshold, ctx.epsilon)?;
        let warnings = [fidelity.warnings, robustness.warnings, completeness.warnings]
            .into_iter()
            .flatten()
            .map(|w| w.for_instance(x.id))
            .collect();
        Ok(InstanceEvaluation {
            metrics: PerInstanceMetrics {
                id: x.id,
                fidelity: fidelity.value,
                interpretability,
                robustness: robustness.value,
                completeness: completeness.value,
                group: group.map(str::to_string),
            },
            attribution,
            warnings,
        })
    };
    run().map_err(|e| e.in_instance(x.id))
}

/// Dataset means of the per-instance measures plus the fairness gap.
pub fn aggregate(per_instance: &[PerInstanceMetrics], groups: Option<&[String]>) -> Result<(MetricVector, Vec<Warning>)> {
    if per_instance.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = per_instance.len() as f64;
    let mean = |f: fn(&PerInstanceMetrics) -> f64| per_instance.iter().map(f).sum::<f64>() / n;
    let fairness = match groups {
        Some(groups) => {
            let fid: Vec<f64> = per_instance.iter().map(|m| m.fidelity).collect();
            fairness_gap(&fid, groups)?
        }
        None => measures::single_group(),
    };
    let raw = MetricVector {
        fidelity: mean(|m| m.fidelity),
        interpretability: mean(|m| m.interpretability),
        robustness: mean(|m| m.robustness),
        fairness: fairness.value,
        completeness: mean(|m| m.completeness),
    };
    Ok((raw, fairness.warnings))
}

/// Writes `id,fidelity,interpretability,robustness,completeness,group`.
pub fn write_per_instance_csv<W: Write>(rows: &[PerInstanceMetrics], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["id", "fidelity", "interpretability", "robustness", "completeness", "group"])?;
    for r in rows {
        wtr.write_record([
            r.id.to_string(),
            r.fidelity.to_string(),
            r.interpretability.to_string(),
            r.robustness.to_string(),
            r.completeness.to_string(),
            r.group.clone().unwrap_or_default(),
        ])?;
    }
    wtr.flush().map_err(|e| Error::io("per-instance csv", e))
}
