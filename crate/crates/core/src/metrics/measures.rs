//! The five raw criterion measures.

use std::collections::BTreeMap;

use rand_distr::{Distribution, StandardNormal};

use super::{Warning, WarningKind};
use crate::criteria::Criterion;
use crate::data::Instance;
use crate::error::{Error, Result};
use crate::explain::Explainer;
use crate::oracle::Oracle;
use crate::rng::RngSpec;

/// A raw value in `[0, 1]` and the events raised while computing it.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub value: f64,
    pub warnings: Vec<Warning>,
}

/// Values further than this outside `[0, 1]` count as clipped.
const CLIP_SLACK: f64 = 1e-12;

fn clip(value: f64, criterion: Criterion, warnings: &mut Vec<Warning>) -> f64 {
    if !(-CLIP_SLACK..=1.0 + CLIP_SLACK).contains(&value) {
        warnings.push(Warning::new(
            WarningKind::Clipped,
            Some(criterion),
            format!("raw {criterion} {value:.6} clipped to [0, 1]"),
        ));
    }
    value.clamp(0.0, 1.0)
}

fn zero_normalizer(criterion: Criterion, drop: f64) -> Measurement {
    Measurement {
        value: 0.0,
        warnings: vec![Warning::new(
            WarningKind::ZeroNormalizer,
            Some(criterion),
            format!("prediction at input equals prediction at baseline (difference {drop:.3e}); {criterion} set to 0"),
        )],
    }
}

/// Feature indices by descending `|a_i|`, ties by ascending index.
pub fn rank_features(a: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..a.len()).collect();
    order.sort_by(|&i, &j| a[j].abs().total_cmp(&a[i].abs()).then(i.cmp(&j)));
    order
}

/// Deletion-curve faithfulness (normalized AOPC).
///
/// The `k` highest-ranked features are replaced by the baseline for
/// `k = 1..=steps`; the mean prediction drop is divided by the total drop
/// `f(x) - f(baseline)` and clipped to `[0, 1]`.
#[allow(clippy::too_many_arguments)]
pub fn fidelity_deletion(
    model: &dyn Oracle,
    x: &[f64],
    class: usize,
    attribution: &[f64],
    baseline: &[f64],
    steps: usize,
    epsilon: f64,
) -> Result<Measurement> {
    if !model.is_live() {
        return Err(Error::OracleRequired);
    }
    let d = x.len();
    if attribution.len() != d || baseline.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: attribution.len().min(baseline.len()) });
    }
    let steps = steps.clamp(1, d);
    let order = rank_features(attribution);
    let mut batch: Vec<Vec<f64>> = vec![x.to_vec(), baseline.to_vec()];
    let mut current = x.to_vec();
    for &i in order.iter().take(steps) {
        current[i] = baseline[i];
        batch.push(current.clone());
    }
    let rows: Vec<&[f64]> = batch.iter().map(Vec::as_slice).collect();
    let out = model.outputs(&rows, class)?;
    let (f_x, f_base) = (out[0], out[1]);
    let total = f_x - f_base;
    if total.abs() <= epsilon {
        return Ok(zero_normalizer(Criterion::Fidelity, total));
    }
    let aopc = out[2..].iter().map(|f| f_x - f).sum::<f64>() / steps as f64;
    let mut warnings = Vec::new();
    let value = clip(aopc / (total + epsilon), Criterion::Fidelity, &mut warnings);
    Ok(Measurement { value, warnings })
}

/// Gini coefficient of `|a|`; 0 for uniform or all-zero attributions.
pub fn interpretability_sparsity(attribution: &[f64]) -> f64 {
    let mut v: Vec<f64> = attribution.iter().map(|a| a.abs()).collect();
    v.sort_by(f64::total_cmp);
    let d = v.len() as f64;
    let total: f64 = v.iter().sum();
    if v.is_empty() || total <= 0.0 {
        return 0.0;
    }
    let weighted: f64 = v.iter().enumerate().map(|(i, x)| (i + 1) as f64 * x).sum();
    (2.0 * weighted / (d * total) - (d + 1.0) / d).clamp(0.0, 1.0)
}

/// Gaussian input perturbation used for the stability measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation {
    pub sigma: f64,
    pub samples: usize,
    /// Clip perturbed values to `[0, 1]` (image inputs).
    pub unit_range: bool,
}

pub(crate) fn explain_stream_tag(method: &str) -> String {
    format!("explain/{method}")
}

fn perturbed_stream_tag(method: &str, n: usize) -> String {
    format!("explain/{method}/perturbed/{n}")
}

/// Draws the perturbed copies of `x` for instance `id`.
pub fn perturb(x: &[f64], id: usize, perturbation: &Perturbation, rng: RngSpec) -> Vec<Vec<f64>> {
    let mut stream = rng.stream(id as u64, "perturb");
    (0..perturbation.samples)
        .map(|_| {
            x.iter()
                .map(|v| {
                    let p = v + perturbation.sigma * Distribution::<f64>::sample(&StandardNormal, &mut stream);
                    if perturbation.unit_range { p.clamp(0.0, 1.0) } else { p }
                })
                .collect()
        })
        .collect()
}

/// Explanation stability under input noise: `exp(-mean ||a - a'||^2 / (||a||^2 + eps))`.
#[allow(clippy::too_many_arguments)]
pub fn robustness_stability(
    model: &dyn Oracle,
    explainer: &dyn Explainer,
    x: &Instance,
    class: usize,
    attribution: &[f64],
    perturbation: &Perturbation,
    rng: RngSpec,
    epsilon: f64,
) -> Result<Measurement> {
    let perturbed_maps: Vec<Vec<f64>> = if explainer.rerunnable() {
        perturb(&x.values, x.id, perturbation, rng)
            .into_iter()
            .enumerate()
            .map(|(n, values)| {
                let mut stream = rng.stream(x.id as u64, &perturbed_stream_tag(explainer.name(), n));
                explainer
                    .explain(model, &Instance::new(x.id, values), class, &mut stream)
                    .map(|a| a.values)
            })
            .collect::<Result<_>>()?
    } else {
        match explainer.perturbed_maps(x.id) {
            Some(maps) => maps.iter().map(|a| a.values.clone()).collect(),
            None => return Err(Error::ExplainerNotReRunnable),
        }
    };
    if perturbed_maps.is_empty() {
        return Err(Error::InvalidConfig("robustness needs at least one perturbation".into()));
    }
    let norm: f64 = attribution.iter().map(|a| a * a).sum();
    let mut mse = 0.0;
    for other in &perturbed_maps {
        if other.len() != attribution.len() {
            return Err(Error::DimensionMismatch { expected: attribution.len(), got: other.len() });
        }
        mse += attribution.iter().zip(other).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    }
    mse /= perturbed_maps.len() as f64;
    Ok(Measurement { value: (-mse / (norm + epsilon)).exp(), warnings: Vec::new() })
}

/// One minus the spread of per-group mean fidelity.
///
/// Non-finite entries of `values` are treated as filtered out; a group left
/// with no values is an error.
pub fn fairness_gap(values: &[f64], groups: &[String]) -> Result<Measurement> {
    if values.len() != groups.len() {
        return Err(Error::ShapeMismatch(format!("{} values for {} group labels", values.len(), groups.len())));
    }
    let mut sums: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for (v, g) in values.iter().zip(groups) {
        let entry = sums.entry(g.as_str()).or_default();
        if v.is_finite() {
            entry.0 += v;
            entry.1 += 1;
        }
    }
    if sums.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut means = Vec::with_capacity(sums.len());
    for (group, (sum, count)) in &sums {
        if *count == 0 {
            return Err(Error::GroupSizeZero(group.to_string()));
        }
        means.push(sum / *count as f64);
    }
    if means.len() == 1 {
        return Ok(single_group());
    }
    let max = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = means.iter().copied().fold(f64::INFINITY, f64::min);
    let mut warnings = Vec::new();
    let value = clip(1.0 - (max - min), Criterion::Fairness, &mut warnings);
    Ok(Measurement { value, warnings })
}

pub(crate) fn single_group() -> Measurement {
    Measurement {
        value: 1.0,
        warnings: vec![Warning::new(
            WarningKind::SingleGroup,
            Some(Criterion::Fairness),
            "fairness not assessable: only one group present".into(),
        )],
    }
}

/// Prediction drop when every feature with `|a_i| >= tau * max |a|` is
/// ablated, relative to the drop at the full baseline.
pub fn completeness_ablation(
    model: &dyn Oracle,
    x: &[f64],
    class: usize,
    attribution: &[f64],
    baseline: &[f64],
    tau: f64,
    epsilon: f64,
) -> Result<Measurement> {
    if !model.is_live() {
        return Err(Error::OracleRequired);
    }
    let d = x.len();
    if attribution.len() != d || baseline.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: attribution.len().min(baseline.len()) });
    }
    let max = attribution.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let ablated: Vec<f64> = (0..d)
        .map(|i| if max > 0.0 && attribution[i].abs() >= tau * max { baseline[i] } else { x[i] })
        .collect();
    let out = model.outputs(&[x, baseline, &ablated], class)?;
    let total = out[0] - out[1];
    if total.abs() <= epsilon {
        return Ok(zero_normalizer(Criterion::Completeness, total));
    }
    if max == 0.0 {
        return Ok(Measurement { value: 0.0, warnings: Vec::new() });
    }
    let mut warnings = Vec::new();
    let value = clip((out[0] - out[2]) / (total + epsilon), Criterion::Completeness, &mut warnings);
    Ok(Measurement { value, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::LinearModel;

    fn model() -> LinearModel {
        LinearModel::identity(vec![1.0, 2.0, 0.0], 0.0)
    }

    const X: [f64; 3] = [1.0, 1.0, 1.0];
    const ZERO: [f64; 3] = [0.0; 3];

    #[test]
    fn ranking_breaks_ties_by_index() {
        assert_eq!(rank_features(&[1.0, -3.0, 3.0, 0.0]), vec![1, 2, 0, 3]);
    }

    #[test]
    fn deletion_hand_enumeration() {
        // Deleting features 1, 0, 2 in turn leaves f = 1, 0, 0: drops 2, 3, 3.
        let m = fidelity_deletion(&model(), &X, 0, &[1.0, 2.0, 0.0], &ZERO, 3, 1e-12).unwrap();
        assert!((m.value - 8.0 / 9.0).abs() < 1e-12);
        assert!(m.warnings.is_empty());
        // Order 0, 2, 1: drops 1, 1, 3.
        let m = fidelity_deletion(&model(), &X, 0, &[2.0, 0.0, 1.0], &ZERO, 3, 1e-12).unwrap();
        assert!((m.value - 5.0 / 9.0).abs() < 1e-12);
        // Order 2, 0, 1 (fully reversed): drops 0, 1, 3.
        let m = fidelity_deletion(&model(), &X, 0, &[1.0, 0.0, 2.0], &ZERO, 3, 1e-12).unwrap();
        assert!((m.value - 4.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn constant_model_zero_fidelity() {
        let m = LinearModel::identity(vec![0.0; 3], 0.4);
        let r = fidelity_deletion(&m, &X, 0, &[1.0, 2.0, 3.0], &ZERO, 3, 1e-12).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.warnings.len(), 1);
        assert_eq!(r.warnings[0].kind, WarningKind::ZeroNormalizer);
    }

    #[test]
    fn overshooting_deletion_is_clipped() {
        // Removing feature 0 alone drops more than the total.
        let m = LinearModel::identity(vec![3.0, -2.0], 0.0);
        let r = fidelity_deletion(&m, &[1.0, 1.0], 0, &[3.0, -2.0], &[0.0, 0.0], 1, 1e-12).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.warnings[0].kind, WarningKind::Clipped);
    }

    #[test]
    fn gini_values() {
        assert_eq!(interpretability_sparsity(&[2.0; 5]), 0.0);
        assert!((interpretability_sparsity(&[0.0, 0.0, -4.0, 0.0]) - 0.75).abs() < 1e-15);
        assert!((interpretability_sparsity(&[1.0, -3.0]) - 0.25).abs() < 1e-15);
        assert!((interpretability_sparsity(&[1.0, 2.0, 0.0]) - 4.0 / 9.0).abs() < 1e-15);
        assert_eq!(interpretability_sparsity(&[0.0; 4]), 0.0);
    }

    #[test]
    fn ablation_hand_cases() {
        let r = completeness_ablation(&model(), &X, 0, &[1.0, 2.0, 0.0], &ZERO, 0.1, 1e-12).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        let r = completeness_ablation(&model(), &X, 0, &[0.0, 0.0, 1.0], &ZERO, 0.1, 1e-12).unwrap();
        assert_eq!(r.value, 0.0);
        let r = completeness_ablation(&model(), &X, 0, &ZERO, &ZERO, 0.1, 1e-12).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn fairness_hand_cases() {
        let groups: Vec<String> = ["a", "a", "b", "b"].iter().map(|s| s.to_string()).collect();
        let r = fairness_gap(&[0.5, 0.7, 0.7, 0.5], &groups).unwrap();
        assert_eq!(r.value, 1.0);
        let r = fairness_gap(&[0.9, 0.9, 0.6, 0.6], &groups).unwrap();
        assert!((r.value - 0.7).abs() < 1e-12);
        let one = vec!["a".to_string(); 2];
        let r = fairness_gap(&[0.1, 0.9], &one).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.warnings[0].kind, WarningKind::SingleGroup);
        let r = fairness_gap(&[0.9, f64::NAN, f64::NAN, 0.6], &["a", "b", "b", "a"].map(String::from));
        assert!(matches!(r, Err(Error::GroupSizeZero(g)) if g == "b"));
    }
}
