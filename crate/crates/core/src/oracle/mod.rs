//! Models the evaluator can query.

mod external;
mod linear;
mod mlp;
mod precomputed;
mod synth;
mod table;
mod train;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use external::{ExternalConfig, ExternalOracle};
pub use linear::{Link, LinearModel};
pub use mlp::MlpModel;
pub use precomputed::PrecomputedOracle;
pub use synth::{generate_synthetic, two_blobs, Synthetic, SyntheticKind};
pub use table::TableModel;
pub use train::{accuracy, cross_entropy, train, ModelTemplate, TrainConfig, Trained};

/// Anything that answers batch prediction queries.
pub trait Oracle: Send + Sync {
    fn input_dim(&self) -> usize;

    fn output_dim(&self) -> usize;

    /// Returns one row of class probabilities (or scores) per input.
    fn predict(&self, batch: &[&[f64]]) -> Result<Vec<Vec<f64>>>;

    /// Gradient of output `class` with respect to the input.
    fn gradient(&self, _x: &[f64], _class: usize) -> Result<Vec<f64>> {
        Err(Error::NotDifferentiable)
    }

    /// Whether the oracle can answer queries on inputs it has not seen.
    fn is_live(&self) -> bool {
        true
    }

    fn predict_one(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.predict(&[x])?.remove(0))
    }

    fn output(&self, x: &[f64], class: usize) -> Result<f64> {
        let row = self.predict_one(x)?;
        row.get(class).copied().ok_or(Error::DimensionMismatch {
            expected: self.output_dim(),
            got: class + 1,
        })
    }

    /// Output `class` for every input of the batch.
    fn outputs(&self, batch: &[&[f64]], class: usize) -> Result<Vec<f64>> {
        if class >= self.output_dim() {
            return Err(Error::DimensionMismatch { expected: self.output_dim(), got: class + 1 });
        }
        Ok(self.predict(batch)?.into_iter().map(|row| row[class]).collect())
    }

    fn predicted_class(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax(&self.predict_one(x)?))
    }
}

pub(crate) fn check_batch(batch: &[&[f64]], dim: usize) -> Result<()> {
    match batch.iter().find(|x| x.len() != dim) {
        Some(x) => Err(Error::DimensionMismatch { expected: dim, got: x.len() }),
        None => Ok(()),
    }
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let total: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / total).collect()
}

/// Index of the largest value, lowest index on ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn check_finite(what: &str, values: impl IntoIterator<Item = f64>) -> Result<()> {
    if values.into_iter().all(f64::is_finite) {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("{what} contains non-finite parameters")))
    }
}

/// Built-in differentiable model, as stored in a parameter file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Model {
    Linear(LinearModel),
    Mlp(MlpModel),
}

impl Model {
    pub fn validate(self) -> Result<Self> {
        match self {
            Model::Linear(m) => Ok(Model::Linear(m.validate()?)),
            Model::Mlp(m) => Ok(Model::Mlp(m.validate()?)),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let model: Model = serde_json::from_str(&text).map_err(|e| {
            Error::InvalidConfig(format!("{}: not a model parameter file: {e}", path.display()))
        })?;
        model.validate()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    fn inner(&self) -> &dyn Oracle {
        match self {
            Model::Linear(m) => m,
            Model::Mlp(m) => m,
        }
    }
}

impl Oracle for Model {
    fn input_dim(&self) -> usize {
        self.inner().input_dim()
    }

    fn output_dim(&self) -> usize {
        self.inner().output_dim()
    }

    fn predict(&self, batch: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
        self.inner().predict(batch)
    }

    fn gradient(&self, x: &[f64], class: usize) -> Result<Vec<f64>> {
        self.inner().gradient(x, class)
    }
}
