use super::{check_batch, Oracle};
use crate::error::{Error, Result};

/// Exhaustive lookup table over a small discrete grid.
///
/// Feature `j` may take any of `levels[j]`; the table holds one output row
/// per grid point, in mixed-radix order with feature 0 most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct TableModel {
    levels: Vec<Vec<f64>>,
    rows: Vec<Vec<f64>>,
}

impl TableModel {
    pub fn from_fn(levels: Vec<Vec<f64>>, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        if levels.is_empty() || levels.iter().any(Vec::is_empty) {
            return Err(Error::InvalidConfig("table model needs at least one level per feature".into()));
        }
        let size: usize = levels.iter().map(Vec::len).product();
        let mut rows = Vec::with_capacity(size);
        let mut point = vec![0.0; levels.len()];
        for flat in 0..size {
            let mut rem = flat;
            for j in (0..levels.len()).rev() {
                point[j] = levels[j][rem % levels[j].len()];
                rem /= levels[j].len();
            }
            rows.push(f(&point));
        }
        let classes = rows[0].len();
        if classes == 0 || rows.iter().any(|r| r.len() != classes) {
            return Err(Error::InvalidConfig("table rows must have equal, non-zero length".into()));
        }
        if rows.iter().flatten().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidConfig("table outputs must lie in [0, 1]".into()));
        }
        Ok(TableModel { levels, rows })
    }

    fn lookup(&self, x: &[f64]) -> Result<&[f64]> {
        let mut flat = 0;
        for (j, (v, levels)) in x.iter().zip(&self.levels).enumerate() {
            let pos = levels.iter().position(|l| l == v).ok_or_else(|| {
                Error::InvalidData(format!("feature {j} value {v} is not on the table grid"))
            })?;
            flat = flat * levels.len() + pos;
        }
        Ok(&self.rows[flat])
    }
}

impl Oracle for TableModel {
    fn input_dim(&self) -> usize {
        self.levels.len()
    }

    fn output_dim(&self) -> usize {
        self.rows[0].len()
    }

    fn predict(&self, batch: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
        check_batch(batch, self.input_dim())?;
        batch.iter().map(|x| self.lookup(x).map(<[f64]>::to_vec)).collect()
    }
}
