use serde::{Deserialize, Serialize};

use super::{check_batch, check_finite, softmax, Oracle};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Link {
    Identity,
    Softmax,
}

/// `f(x) = link(W x + b)` with `W` of shape `C x d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearModel {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub link: Link,
}

impl LinearModel {
    pub fn new(weights: Vec<Vec<f64>>, bias: Vec<f64>, link: Link) -> Result<Self> {
        LinearModel { weights, bias, link }.validate()
    }

    /// Single-output regression model `w . x + b`.
    pub fn identity(weights: Vec<f64>, bias: f64) -> Self {
        LinearModel { weights: vec![weights], bias: vec![bias], link: Link::Identity }
    }

    pub fn validate(self) -> Result<Self> {
        let classes = self.weights.len();
        if classes == 0 {
            return Err(Error::InvalidConfig("linear model needs at least one output".into()));
        }
        let d = self.weights[0].len();
        if d == 0 || self.weights.iter().any(|row| row.len() != d) {
            return Err(Error::InvalidConfig("linear model weight rows must be non-empty and equal length".into()));
        }
        if self.bias.len() != classes {
            return Err(Error::InvalidConfig(format!(
                "linear model has {classes} weight rows but {} biases",
                self.bias.len()
            )));
        }
        check_finite("linear model", self.weights.iter().flatten().chain(&self.bias).copied())?;
        Ok(self)
    }

    pub fn logits(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(row, b)| row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b)
            .collect()
    }

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        let z = self.logits(x);
        match self.link {
            Link::Identity => z,
            Link::Softmax => softmax(&z),
        }
    }
}

impl Oracle for LinearModel {
    fn input_dim(&self) -> usize {
        self.weights[0].len()
    }

    fn output_dim(&self) -> usize {
        self.weights.len()
    }

    fn predict(&self, batch: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
        check_batch(batch, self.input_dim())?;
        Ok(batch.iter().map(|x| self.forward(x)).collect())
    }

    fn gradient(&self, x: &[f64], class: usize) -> Result<Vec<f64>> {
        check_batch(&[x], self.input_dim())?;
        if class >= self.output_dim() {
            return Err(Error::DimensionMismatch { expected: self.output_dim(), got: class + 1 });
        }
        match self.link {
            Link::Identity => Ok(self.weights[class].clone()),
            Link::Softmax => {
                // dp_c/dx = p_c (w_c - sum_k p_k w_k)
                let p = softmax(&self.logits(x));
                let d = self.input_dim();
                let mut mixed = vec![0.0; d];
                for (pk, row) in p.iter().zip(&self.weights) {
                    for (m, w) in mixed.iter_mut().zip(row) {
                        *m += pk * w;
                    }
                }
                Ok(self.weights[class]
                    .iter()
                    .zip(&mixed)
                    .map(|(w, m)| p[class] * (w - m))
                    .collect())
            }
        }
    }
}
