//! Benchmark runs over several explanation methods and their reports.

mod config;
mod render;

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::data::{Attribution, DataKind, Dataset};
use crate::error::{Error, Result};
use crate::explain::{Explainer, ExplainerConfig, Method};
use crate::io::NdArray;
use crate::metrics::{aggregate, evaluate_instance, PerInstanceMetrics, Warning, WarningKind};
use crate::oracle::{argmax, Oracle};
use crate::rng::RngSpec;
use crate::score::{adapt_weights, detect_drift, Adaptation, DomainProfile, DriftReport, ScoreBreakdown};

pub use config::{DatasetSpec, ModelSpec, RunConfig};
pub use render::{compare_table, emit, markdown, Format};

pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable capping the worker count; 0 means one per core.
pub const THREADS_ENV: &str = "UXEVAL_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub kind: DataKind,
    pub instances: usize,
    pub dims: Vec<usize>,
    pub feature_names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    pub score: ScoreBreakdown,
    /// Mean `|attribution|` per feature over the dataset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub global_importance: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_instance_csv: Option<String>,
    pub warnings: usize,
    #[serde(skip)]
    pub per_instance: Vec<PerInstanceMetrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub schema_version: u32,
    pub run_id: String,
    pub seed: u64,
    pub dataset: DatasetSummary,
    /// Weights in effect, after any drift adaptation.
    pub profile: DomainProfile,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drift: Option<DriftReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adaptation: Option<Adaptation>,
    /// Sorted by descending total score, ties by name.
    pub methods: Vec<MethodReport>,
    pub ranking: Vec<String>,
    pub warnings: Vec<Warning>,
}

impl BenchmarkReport {
    pub fn method(&self, name: &str) -> Option<&MethodReport> {
        self.methods.iter().find(|m| m.name == name)
    }

    /// Pretty JSON with object keys sorted at every level.
    pub fn to_json(&self) -> Result<String> {
        let value = canonicalize(serde_json::to_value(self)?);
        let mut text = serde_json::to_string_pretty(&value)?;
        text.push('\n');
        Ok(text)
    }
}

/// Rebuilds every object with its keys in sorted order.
pub fn canonicalize(value: Value) -> Value {
    match value {
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(entries.into_iter().map(|(k, v)| (k, canonicalize(v))).collect())
        }
        Value::Array(items) => Value::Array(items.into_iter().map(canonicalize).collect()),
        other => other,
    }
}

pub fn run_id(config: &RunConfig) -> Result<String> {
    let canonical = canonicalize(serde_json::from_str(&config.canonical_json()?)?).to_string();
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    hasher.update(config.seed.to_le_bytes());
    Ok(hex::encode(hasher.finalize()))
}

pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::InvalidConfig(format!("{THREADS_ENV} must be a non-negative integer, got `{v}`")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))
}

/// A file-name-safe form of a method name.
pub fn file_stem(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

/// Everything a run needs after loading.
struct Prepared {
    dataset: Dataset,
    model: Box<dyn Oracle>,
    baseline: Vec<f64>,
    classes: Vec<usize>,
}

fn prepare(config: &RunConfig, base_dir: &Path) -> Result<Prepared> {
    let dataset = config.dataset.load(base_dir)?;
    let model = config.load_model(&dataset, base_dir)?;
    let baseline = config.baseline(&dataset)?;
    let classes = match config.target_class {
        Some(c) if c >= model.output_dim() => {
            return Err(Error::InvalidConfig(format!(
                "target_class {c} out of range for a model with {} outputs",
                model.output_dim()
            )))
        }
        Some(c) => vec![c; dataset.len()],
        None => model.predict(&dataset.rows())?.iter().map(|p| argmax(p)).collect(),
    };
    Ok(Prepared { dataset, model, baseline, classes })
}

fn drift_and_adapt(
    config: &RunConfig,
    base_dir: &Path,
    prepared: &Prepared,
    profile: DomainProfile,
) -> Result<(DomainProfile, Option<DriftReport>, Option<Adaptation>)> {
    let Some(spec) = &config.reference else {
        return Ok((profile, None, None));
    };
    let reference = spec.load(base_dir)?;
    let current = &prepared.dataset;
    let names = current.feature_names();
    let drift = detect_drift(&reference.rows(), &current.rows(), &names, config.drift_bins)?;
    let top = |ds: &Dataset| -> Result<Vec<f64>> {
        let preds = prepared.model.predict(&ds.rows())?;
        Ok(preds.iter().map(|p| p.iter().copied().fold(f64::NEG_INFINITY, f64::max)).collect())
    };
    let drift = drift.with_predictions(&top(&reference)?, &top(current)?)?;
    let rules = config.load_rules(base_dir)?;
    let (adapted, adaptation) = adapt_weights(&profile, &rules, &drift);
    Ok((adapted, Some(drift), adaptation))
}

struct Evaluated {
    per_instance: Vec<PerInstanceMetrics>,
    attributions: Vec<Attribution>,
    warnings: Vec<Warning>,
}

fn evaluate_method(
    prepared: &Prepared,
    explainer: &dyn Explainer,
    config: &RunConfig,
    pool: &rayon::ThreadPool,
) -> Result<(crate::MetricVector, Evaluated)> {
    let ds = &prepared.dataset;
    let ctx = config.metrics.context(ds, prepared.baseline.clone(), RngSpec::new(config.seed))?;
    let results: Vec<_> = pool.install(|| {
        ds.instances
            .par_iter()
            .enumerate()
            .map(|(pos, x)| {
                evaluate_instance(prepared.model.as_ref(), explainer, x, prepared.classes[pos], ds.group_of(pos), &ctx)
            })
            .collect::<Vec<_>>()
    });
    // The first failing instance in dataset order, whatever thread hit it first.
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    let mut per_instance = Vec::with_capacity(results.len());
    let mut attributions = Vec::with_capacity(results.len());
    let mut warnings = Vec::new();
    for r in results {
        per_instance.push(r.metrics);
        attributions.push(r.attribution);
        warnings.extend(r.warnings);
    }
    let (raw, agg_warnings) = aggregate(&per_instance, ds.groups.as_deref())?;
    warnings.extend(agg_warnings);
    Ok((raw, Evaluated { per_instance, attributions, warnings }))
}

fn global_importance(attributions: &[Attribution]) -> Vec<f64> {
    let d = attributions.first().map_or(0, Attribution::dim);
    let n = attributions.len() as f64;
    (0..d).map(|i| attributions.iter().map(|a| a.values[i].abs()).sum::<f64>() / n).collect()
}

fn method_report(
    entry: &ExplainerConfig,
    explainer: Option<&dyn Explainer>,
    prepared: &Prepared,
    config: &RunConfig,
    weights: &crate::Criteria<f64>,
    pool: &rayon::ThreadPool,
) -> Result<(MethodReport, Vec<Warning>)> {
    let name = entry.display_name();
    let mut report = MethodReport {
        name: name.clone(),
        method: entry.method,
        score: ScoreBreakdown::from_scores(&crate::Criteria::splat(1.0), weights)?,
        global_importance: None,
        per_instance_csv: None,
        warnings: 0,
        per_instance: Vec::new(),
    };
    let mut warnings = Vec::new();
    let mut raw = None;
    if let Some(explainer) = explainer {
        let (r, evaluated) = evaluate_method(prepared, explainer, config, pool)?;
        raw = Some(r);
        report.global_importance = Some(global_importance(&evaluated.attributions));
        report.per_instance_csv = Some(format!("per_instance_{}.csv", file_stem(&name)));
        report.per_instance = evaluated.per_instance;
        warnings = evaluated.warnings.into_iter().map(|w| w.for_method(&name)).collect();
    }
    report.score = match (&entry.audit_scores, raw) {
        (Some(scores), raw) => ScoreBreakdown { raw, ..ScoreBreakdown::from_scores(scores, weights)? },
        (None, Some(raw)) => ScoreBreakdown::from_raw(&raw, weights)?,
        (None, None) => unreachable!("validated: entries have a method or audit scores"),
    };
    report.warnings = warnings.len();
    Ok((report, warnings))
}

/// Runs every configured method and scores it under the (possibly adapted) profile.
pub fn run_benchmark(config: &RunConfig, base_dir: &Path) -> Result<BenchmarkReport> {
    config.validate()?;
    let pool = thread_pool()?;
    let profile = config.load_profile(base_dir)?;
    let prepared = prepare(config, base_dir)?;
    let (profile, drift, adaptation) = drift_and_adapt(config, base_dir, &prepared, profile)?;

    // Configuration problems abort the run; failures while evaluating only
    // drop the affected method.
    let explainers = config
        .explainers
        .iter()
        .map(|entry| match entry.method {
            Some(_) => entry
                .build(&prepared.dataset, &prepared.baseline, base_dir)
                .map(Some)
                .map_err(|e| e.in_method(&entry.display_name())),
            None => Ok(None),
        })
        .collect::<Result<Vec<_>>>()?;

    let mut methods = Vec::new();
    let mut warnings = Vec::new();
    let mut first_failure = None;
    for (entry, explainer) in config.explainers.iter().zip(&explainers) {
        match method_report(entry, explainer.as_deref(), &prepared, config, &profile.weights, &pool) {
            Ok((report, w)) => {
                methods.push(report);
                warnings.extend(w);
            }
            Err(e) => {
                let name = entry.display_name();
                warnings.push(Warning::new(WarningKind::MethodFailed, None, e.to_string()).for_method(&name));
                first_failure.get_or_insert(e.in_method(&name));
            }
        }
    }
    if methods.is_empty() {
        return Err(first_failure.expect("at least one explainer is configured"));
    }
    methods.sort_by(|a, b| b.score.total.total_cmp(&a.score.total).then_with(|| a.name.cmp(&b.name)));
    warnings.sort();
    let ds = &prepared.dataset;
    Ok(BenchmarkReport {
        schema_version: SCHEMA_VERSION,
        run_id: run_id(config)?,
        seed: config.seed,
        dataset: DatasetSummary {
            kind: ds.kind(),
            instances: ds.len(),
            dims: ds.shape.dims(),
            feature_names: ds.feature_names(),
        },
        profile,
        drift,
        adaptation,
        ranking: methods.iter().map(|m| m.name.clone()).collect(),
        methods,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplainSidecar {
    pub name: String,
    pub method: Method,
    pub classes: Vec<usize>,
    pub baseline: String,
    pub shape: Vec<usize>,
}

/// Attributions of one configured method for every instance, as an `(N,d)`
/// or `(N,H,W)` array.
pub fn explain_dataset(config: &RunConfig, base_dir: &Path, name: &str) -> Result<(NdArray, ExplainSidecar)> {
    let entry = config
        .explainers
        .iter()
        .find(|e| e.display_name() == name || e.method.is_some_and(|m| m.as_str() == name))
        .ok_or_else(|| Error::InvalidConfig(format!("no explainer named `{name}` in the config")))?;
    let method = entry.method()?;
    let prepared = prepare(config, base_dir)?;
    let explainer = entry.build(&prepared.dataset, &prepared.baseline, base_dir)?;
    let rng = RngSpec::new(config.seed);
    let tag = crate::metrics::explain_stream_tag(explainer.name());
    let pool = thread_pool()?;
    let ds = &prepared.dataset;
    let attributions = pool.install(|| {
        ds.instances
            .par_iter()
            .enumerate()
            .map(|(pos, x)| {
                let mut stream = rng.stream(x.id as u64, &tag);
                explainer
                    .explain(prepared.model.as_ref(), x, prepared.classes[pos], &mut stream)
                    .map_err(|e| e.in_instance(x.id))
            })
            .collect::<Vec<_>>()
    });
    let attributions = attributions.into_iter().collect::<Result<Vec<_>>>()?;
    let mut shape = vec![ds.len()];
    shape.extend(ds.shape.dims());
    let data = attributions.iter().flat_map(|a| a.values.iter().copied()).collect();
    let array = NdArray::new(shape.clone(), data)?;
    let baseline = match (&entry.baseline, &config.baseline) {
        (None, None) => "zeros".to_string(),
        (Some(b), _) | (None, Some(b)) => format!("custom: {b:?}"),
    };
    let sidecar = ExplainSidecar { name: entry.display_name(), method, classes: prepared.classes, baseline, shape };
    Ok((array, sidecar))
}
