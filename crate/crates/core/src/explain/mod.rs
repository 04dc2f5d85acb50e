//! Attribution methods.
//!
//! Each method is available as a free function over `&[f64]` inputs and as
//! an [`Explainer`] that the evaluator can re-run on perturbed inputs.

mod ig;
mod ingest;
mod lime;
mod occlusion;
mod random;
mod shapley;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::criteria::Criteria;
use crate::data::{Attribution, DataKind, Dataset, Instance};
use crate::error::{Error, Result};
use crate::oracle::Oracle;
use crate::rng::Stream;

pub use ig::{explain_ig, IntegratedGradients};
pub use ingest::{ingest_saliency, ingest_with_companions, rescale_nearest, Ingested};
pub use lime::{explain_lime, Lime};
pub use occlusion::{explain_occlusion, Occlusion};
pub use random::RandomAttribution;
pub use shapley::{exact_shapley, explain_kshap, ExactShapley, KernelShap, MAX_EXACT_FEATURES};

pub trait Explainer: Send + Sync {
    fn name(&self) -> &str;

    fn explain(&self, model: &dyn Oracle, x: &Instance, class: usize, rng: &mut Stream) -> Result<Attribution>;

    /// Whether `explain` accepts inputs other than the dataset's own instances.
    fn rerunnable(&self) -> bool {
        true
    }

    /// Externally supplied maps for perturbed copies of instance `id`.
    fn perturbed_maps(&self, _id: usize) -> Option<&[Attribution]> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Lime,
    Kshap,
    ExactShapley,
    Ig,
    Occlusion,
    Ingest,
    /// Uniform noise in `[-1, 1]`; a control that any real method should beat.
    Random,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Lime => "lime",
            Method::Kshap => "kshap",
            Method::ExactShapley => "exact-shapley",
            Method::Ig => "ig",
            Method::Occlusion => "occlusion",
            Method::Ingest => "ingest",
            Method::Random => "random",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::InvalidConfig(format!("unknown explanation method `{s}`")))
    }
}

pub const DEFAULT_LIME_SAMPLES: usize = 1000;
pub const DEFAULT_LIME_RIDGE: f64 = 1e-3;
pub const DEFAULT_KSHAP_SAMPLES: usize = 2048;
pub const DEFAULT_IG_STEPS: usize = 256;
pub const DEFAULT_PATCH: usize = 2;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplainerConfig {
    pub method: Option<Method>,
    /// Report name; defaults to the method name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ridge: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patch: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<Vec<f64>>,
    /// Saliency maps for `ingest`, NPY `(N,H,W)` or `(N,d)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    /// Optional maps of perturbed inputs for `ingest`, NPY `(N,P,H,W)` or `(N,P,d)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbed_file: Option<PathBuf>,
    /// Externally assigned 1-5 scores that replace the computed ones.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit_scores: Option<Criteria<f64>>,
}

impl ExplainerConfig {
    pub fn new(method: Method) -> Self {
        ExplainerConfig { method: Some(method), ..Default::default() }
    }

    pub fn method(&self) -> Result<Method> {
        self.method.ok_or_else(|| Error::InvalidConfig("explainer entry has no `method`".into()))
    }

    pub fn display_name(&self) -> String {
        match (&self.name, self.method) {
            (Some(name), _) => name.clone(),
            (None, Some(m)) => m.to_string(),
            (None, None) => "unnamed".into(),
        }
    }

    /// Builds the explainer for `dataset`, resolving relative paths against `base_dir`.
    pub fn build(&self, dataset: &Dataset, default_baseline: &[f64], base_dir: &Path) -> Result<Box<dyn Explainer>> {
        let name = self.display_name();
        let d = dataset.dim();
        let baseline = match &self.baseline {
            Some(b) if b.len() != d => return Err(Error::DimensionMismatch { expected: d, got: b.len() }),
            Some(b) => b.clone(),
            None => default_baseline.to_vec(),
        };
        let method = self.method()?;
        if method != Method::Ingest && (self.file.is_some() || self.perturbed_file.is_some()) {
            return Err(Error::InvalidConfig("`file` is only valid for ingest".into()));
        }
        Ok(match method {
            Method::Ig => {
                let steps = self.steps.unwrap_or(DEFAULT_IG_STEPS);
                if steps == 0 {
                    return Err(Error::InvalidConfig("ig needs steps >= 1".into()));
                }
                Box::new(IntegratedGradients { name, baseline, steps })
            }
            Method::Kshap => {
                let samples = self.samples.unwrap_or(DEFAULT_KSHAP_SAMPLES);
                if samples < d + 2 {
                    return Err(Error::InvalidConfig(format!("kshap needs samples >= d + 2 = {}", d + 2)));
                }
                let ridge = self.ridge.unwrap_or(0.0);
                if !(ridge >= 0.0) {
                    return Err(Error::InvalidConfig("ridge must be >= 0".into()));
                }
                Box::new(KernelShap { name, baseline, samples, ridge })
            }
            Method::ExactShapley => {
                if d > MAX_EXACT_FEATURES {
                    return Err(Error::TooManyFeatures(d));
                }
                Box::new(ExactShapley { name, baseline })
            }
            Method::Lime => {
                if dataset.kind() != DataKind::Tabular {
                    return Err(Error::InvalidConfig("lime supports tabular data only".into()));
                }
                let scale = dataset.noise_scale();
                let kernel_width = self
                    .kernel_width
                    .unwrap_or_else(|| 0.75 * (d as f64).sqrt() * scale.iter().sum::<f64>() / d as f64);
                let ridge = self.ridge.unwrap_or(DEFAULT_LIME_RIDGE);
                let samples = self.samples.unwrap_or(DEFAULT_LIME_SAMPLES);
                if !(kernel_width > 0.0) || !(ridge >= 0.0) || samples < 2 {
                    return Err(Error::InvalidConfig(
                        "lime needs kernel_width > 0, ridge >= 0 and samples >= 2".into(),
                    ));
                }
                Box::new(Lime { name, scale, samples, kernel_width, ridge })
            }
            Method::Occlusion => {
                let patch = self.patch.unwrap_or(DEFAULT_PATCH);
                Box::new(Occlusion::new(name, dataset.shape, patch, baseline)?)
            }
            Method::Ingest => {
                let file = self
                    .file
                    .as_ref()
                    .ok_or_else(|| Error::InvalidConfig("ingest needs a `file`".into()))?;
                let maps = crate::io::read_npy_file(&base_dir.join(file))?;
                let companions = match &self.perturbed_file {
                    Some(p) => Some(crate::io::read_npy_file(&base_dir.join(p))?),
                    None => None,
                };
                Box::new(ingest_with_companions(&maps, companions.as_ref(), dataset, &name)?)
            }
            Method::Random => Box::new(RandomAttribution { name }),
        })
    }
}
