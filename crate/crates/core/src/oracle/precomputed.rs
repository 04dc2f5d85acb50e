use std::collections::HashMap;

use super::{check_batch, Oracle};
use crate::error::{Error, Result};

/// Predictions recorded ahead of time for a fixed set of inputs.
///
/// It answers only for inputs it has stored, so metrics that need to
/// re-query the model on modified inputs reject it.
#[derive(Debug, Clone, Default)]
pub struct PrecomputedOracle {
    dim: usize,
    classes: usize,
    table: HashMap<Vec<u64>, Vec<f64>>,
}

fn key(x: &[f64]) -> Vec<u64> {
    x.iter().map(|v| v.to_bits()).collect()
}

impl PrecomputedOracle {
    pub fn new(inputs: &[&[f64]], predictions: Vec<Vec<f64>>) -> Result<Self> {
        let dim = inputs.first().map_or(0, |x| x.len());
        let classes = predictions.first().map_or(0, Vec::len);
        if inputs.len() != predictions.len() || dim == 0 || classes == 0 {
            return Err(Error::ShapeMismatch("precomputed predictions must pair one row per input".into()));
        }
        check_batch(inputs, dim)?;
        let table = inputs.iter().map(|x| key(x)).zip(predictions).collect();
        Ok(PrecomputedOracle { dim, classes, table })
    }
}

impl Oracle for PrecomputedOracle {
    fn input_dim(&self) -> usize {
        self.dim
    }

    fn output_dim(&self) -> usize {
        self.classes
    }

    fn predict(&self, batch: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
        check_batch(batch, self.dim)?;
        batch
            .iter()
            .map(|x| self.table.get(&key(x)).cloned().ok_or(Error::OracleRequired))
            .collect()
    }

    fn is_live(&self) -> bool {
        false
    }
}
