use serde::{Deserialize, Serialize};

use super::{check_batch, check_finite, softmax, Oracle};
use crate::error::{Error, Result};

/// One hidden tanh layer followed by a softmax output layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlpModel {
    /// `h x d`
    pub w1: Vec<Vec<f64>>,
    pub b1: Vec<f64>,
    /// `C x h`
    pub w2: Vec<Vec<f64>>,
    pub b2: Vec<f64>,
}

pub(crate) struct Activations {
    pub hidden: Vec<f64>,
    pub probs: Vec<f64>,
}

impl MlpModel {
    pub fn new(w1: Vec<Vec<f64>>, b1: Vec<f64>, w2: Vec<Vec<f64>>, b2: Vec<f64>) -> Result<Self> {
        MlpModel { w1, b1, w2, b2 }.validate()
    }

    pub fn validate(self) -> Result<Self> {
        let hidden = self.w1.len();
        let bad = |msg: &str| Err(Error::InvalidConfig(format!("mlp: {msg}")));
        if hidden == 0 || self.w2.is_empty() {
            return bad("empty layer");
        }
        let d = self.w1[0].len();
        if d == 0 || self.w1.iter().any(|r| r.len() != d) {
            return bad("w1 rows must be non-empty and equal length");
        }
        if self.b1.len() != hidden {
            return bad("b1 length must equal the number of w1 rows");
        }
        if self.w2.iter().any(|r| r.len() != hidden) {
            return bad("w2 rows must have one entry per hidden unit");
        }
        if self.b2.len() != self.w2.len() {
            return bad("b2 length must equal the number of w2 rows");
        }
        check_finite(
            "mlp",
            self.w1.iter().flatten().chain(&self.b1).chain(self.w2.iter().flatten()).chain(&self.b2).copied(),
        )?;
        Ok(self)
    }

    pub fn hidden_size(&self) -> usize {
        self.w1.len()
    }

    pub(crate) fn activations(&self, x: &[f64]) -> Activations {
        let hidden: Vec<f64> = self
            .w1
            .iter()
            .zip(&self.b1)
            .map(|(row, b)| (row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b).tanh())
            .collect();
        let logits: Vec<f64> = self
            .w2
            .iter()
            .zip(&self.b2)
            .map(|(row, b)| row.iter().zip(&hidden).map(|(w, h)| w * h).sum::<f64>() + b)
            .collect();
        Activations { hidden, probs: softmax(&logits) }
    }
}

impl Oracle for MlpModel {
    fn input_dim(&self) -> usize {
        self.w1[0].len()
    }

    fn output_dim(&self) -> usize {
        self.w2.len()
    }

    fn predict(&self, batch: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
        check_batch(batch, self.input_dim())?;
        Ok(batch.iter().map(|x| self.activations(x).probs).collect())
    }

    fn gradient(&self, x: &[f64], class: usize) -> Result<Vec<f64>> {
        check_batch(&[x], self.input_dim())?;
        if class >= self.output_dim() {
            return Err(Error::DimensionMismatch { expected: self.output_dim(), got: class + 1 });
        }
        let Activations { hidden, probs } = self.activations(x);
        // dp_c/dz_k = p_c (delta_ck - p_k)
        let dz: Vec<f64> = probs
            .iter()
            .enumerate()
            .map(|(k, pk)| probs[class] * (f64::from(u8::from(k == class)) - pk))
            .collect();
        let mut da = vec![0.0; self.hidden_size()];
        for (dzk, row) in dz.iter().zip(&self.w2) {
            for (a, w) in da.iter_mut().zip(row) {
                *a += dzk * w;
            }
        }
        for (a, h) in da.iter_mut().zip(&hidden) {
            *a *= 1.0 - h * h;
        }
        let mut grad = vec![0.0; self.input_dim()];
        for (a, row) in da.iter().zip(&self.w1) {
            for (g, w) in grad.iter_mut().zip(row) {
                *g += a * w;
            }
        }
        Ok(grad)
    }
}
