use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{DataKind, Dataset};
use crate::error::{Error, Result};
use crate::explain::ExplainerConfig;
use crate::io::{read_csv_file, read_image_dataset};
use crate::metrics::MetricConfig;
use crate::oracle::{train, ExternalConfig, ExternalOracle, Model, Oracle, TrainConfig};
use crate::score::{load_profile, load_rules, AdaptationRule, DomainProfile};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub path: PathBuf,
    /// Inferred from the extension when absent: `.npy` is an image set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<DataKind>,
}

impl DatasetSpec {
    pub fn kind(&self) -> DataKind {
        self.kind.unwrap_or_else(|| match self.path.extension().and_then(|e| e.to_str()) {
            Some("npy") => DataKind::Image,
            _ => DataKind::Tabular,
        })
    }

    pub fn load(&self, base_dir: &Path) -> Result<Dataset> {
        let path = base_dir.join(&self.path);
        match self.kind() {
            DataKind::Tabular => read_csv_file(&path),
            DataKind::Image => read_image_dataset(&path),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelSpec {
    /// Parameter file of a built-in linear or MLP model.
    Params(PathBuf),
    /// Train a built-in model on the labelled dataset.
    Train(TrainConfig),
    External(ExternalConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: DatasetSpec,
    pub model: ModelSpec,
    pub explainers: Vec<ExplainerConfig>,
    #[serde(default)]
    pub metrics: MetricConfig,
    pub profile: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rules: Option<PathBuf>,
    /// Dataset the current one is compared against for drift.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<DatasetSpec>,
    #[serde(default = "default_bins")]
    pub drift_bins: usize,
    /// Defaults to all zeros.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<Vec<f64>>,
    /// Explain this output for every instance instead of the predicted class.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_class: Option<usize>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

fn default_bins() -> usize {
    10
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::InvalidConfig(format!("run config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a config file; relative paths inside it resolve against its directory.
    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let config = Self::from_json(&text)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((config, base))
    }

    pub fn validate(&self) -> Result<()> {
        if self.explainers.is_empty() {
            return Err(Error::InvalidConfig("at least one explainer is required".into()));
        }
        for e in &self.explainers {
            if e.method.is_none() && e.audit_scores.is_none() {
                return Err(Error::InvalidConfig("explainer entry needs a `method` or `audit_scores`".into()));
            }
        }
        let mut names: Vec<String> = self.explainers.iter().map(ExplainerConfig::display_name).collect();
        names.sort();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidConfig(format!("duplicate explainer name `{}`", w[0])));
        }
        if self.rules.is_some() && self.reference.is_none() {
            return Err(Error::InvalidConfig("`rules` need a `reference` dataset".into()));
        }
        self.metrics.validate()
    }

    /// Canonical JSON used for the run id; the output location is excluded.
    pub fn canonical_json(&self) -> Result<String> {
        let mut c = self.clone();
        c.output_dir = None;
        Ok(serde_json::to_value(&c)?.to_string())
    }

    pub fn load_profile(&self, base_dir: &Path) -> Result<DomainProfile> {
        let local = base_dir.join(&self.profile);
        if DomainProfile::builtin(&self.profile).is_none() && local.is_file() {
            return load_profile(&local.to_string_lossy());
        }
        load_profile(&self.profile)
    }

    pub fn load_rules(&self, base_dir: &Path) -> Result<Vec<AdaptationRule>> {
        match &self.rules {
            Some(p) => load_rules(&base_dir.join(p)),
            None => Ok(Vec::new()),
        }
    }

    pub fn baseline(&self, dataset: &Dataset) -> Result<Vec<f64>> {
        match &self.baseline {
            Some(b) if b.len() != dataset.dim() => {
                Err(Error::DimensionMismatch { expected: dataset.dim(), got: b.len() })
            }
            Some(b) => Ok(b.clone()),
            None => Ok(vec![0.0; dataset.dim()]),
        }
    }

    pub fn load_model(&self, dataset: &Dataset, base_dir: &Path) -> Result<Box<dyn Oracle>> {
        let model: Box<dyn Oracle> = match &self.model {
            ModelSpec::Params(p) => Box::new(Model::load(&base_dir.join(p))?),
            ModelSpec::Train(t) => Box::new(train(t, dataset, self.seed)?.model),
            ModelSpec::External(e) => Box::new(ExternalOracle::new(e.clone())?),
        };
        if model.input_dim() != dataset.dim() {
            return Err(Error::DimensionMismatch { expected: dataset.dim(), got: model.input_dim() });
        }
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "dataset": {"path": "d.csv"},
        "model": {"params": "m.json"},
        "explainers": [{"method": "ig"}],
        "profile": "finance",
        "seed": 3
    }"#;

    #[test]
    fn minimal_config_defaults() {
        let c = RunConfig::from_json(MINIMAL).unwrap();
        assert_eq!(c.dataset.kind(), DataKind::Tabular);
        assert_eq!(c.drift_bins, 10);
        assert_eq!(c.metrics, MetricConfig::default());
    }

    #[test]
    fn output_dir_not_hashed() {
        let a = RunConfig::from_json(MINIMAL).unwrap();
        let mut b = a.clone();
        b.output_dir = Some("elsewhere".into());
        assert_eq!(a.canonical_json().unwrap(), b.canonical_json().unwrap());
    }

    #[test]
    fn rejects_bad_configs() {
        let no_seed = MINIMAL.replace(",\n        \"seed\": 3", "");
        assert!(RunConfig::from_json(&no_seed).is_err());
        let none = MINIMAL.replace(r#"[{"method": "ig"}]"#, "[]");
        assert!(RunConfig::from_json(&none).is_err());
        let dup = MINIMAL.replace(r#"[{"method": "ig"}]"#, r#"[{"method": "ig"}, {"method": "ig"}]"#);
        assert!(RunConfig::from_json(&dup).is_err());
        let unknown = MINIMAL.replace("\"seed\"", "\"colour\": 1, \"seed\"");
        assert!(RunConfig::from_json(&unknown).is_err());
    }
}
