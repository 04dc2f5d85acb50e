//! Instances, datasets and attributions.
//!
//! Both tabular vectors and image grids are stored flat (row-major for
//! images) together with a [`Shape`], so every downstream computation works
//! on plain `&[f64]` slices.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataKind {
    Tabular,
    Image,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Shape {
    Tabular { features: usize },
    Image { height: usize, width: usize },
}

impl Shape {
    pub fn len(&self) -> usize {
        match *self {
            Shape::Tabular { features } => features,
            Shape::Image { height, width } => height * width,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> DataKind {
        match self {
            Shape::Tabular { .. } => DataKind::Tabular,
            Shape::Image { .. } => DataKind::Image,
        }
    }

    pub fn dims(&self) -> Vec<usize> {
        match *self {
            Shape::Tabular { features } => vec![features],
            Shape::Image { height, width } => vec![height, width],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub id: usize,
    pub values: Vec<f64>,
}

impl Instance {
    pub fn new(id: usize, values: Vec<f64>) -> Self {
        Instance { id, values }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub shape: Shape,
    pub instances: Vec<Instance>,
    pub groups: Option<Vec<String>>,
    pub labels: Option<Vec<usize>>,
    pub feature_names: Option<Vec<String>>,
}

impl Dataset {
    /// Builds a tabular dataset with sequential ids and validates it.
    pub fn tabular(rows: Vec<Vec<f64>>) -> Result<Self> {
        let features = rows.first().map(Vec::len).ok_or(Error::EmptyDataset)?;
        validate_dataset(Dataset {
            shape: Shape::Tabular { features },
            instances: rows
                .into_iter()
                .enumerate()
                .map(|(id, values)| Instance::new(id, values))
                .collect(),
            groups: None,
            labels: None,
            feature_names: None,
        })
    }

    /// Builds an image dataset from flattened `height * width` grids.
    pub fn images(height: usize, width: usize, grids: Vec<Vec<f64>>) -> Result<Self> {
        validate_dataset(Dataset {
            shape: Shape::Image { height, width },
            instances: grids
                .into_iter()
                .enumerate()
                .map(|(id, values)| Instance::new(id, values))
                .collect(),
            groups: None,
            labels: None,
            feature_names: None,
        })
    }

    pub fn with_groups(mut self, groups: Vec<String>) -> Result<Self> {
        self.groups = Some(groups);
        validate_dataset(self)
    }

    pub fn with_labels(mut self, labels: Vec<usize>) -> Result<Self> {
        self.labels = Some(labels);
        validate_dataset(self)
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn kind(&self) -> DataKind {
        self.shape.kind()
    }

    pub fn rows(&self) -> Vec<&[f64]> {
        self.instances.iter().map(|i| i.values.as_slice()).collect()
    }

    pub fn feature_names(&self) -> Vec<String> {
        match &self.feature_names {
            Some(names) => names.clone(),
            None => (0..self.dim()).map(|j| format!("x{j}")).collect(),
        }
    }

    pub fn group_of(&self, position: usize) -> Option<&str> {
        self.groups.as_ref().map(|g| g[position].as_str())
    }

    pub fn distinct_groups(&self) -> BTreeSet<&str> {
        self.groups
            .iter()
            .flatten()
            .map(String::as_str)
            .collect()
    }

    /// Per-feature population standard deviation.
    pub fn feature_std(&self) -> Vec<f64> {
        let n = self.len() as f64;
        let d = self.dim();
        let mut mean = vec![0.0; d];
        for inst in &self.instances {
            for (m, v) in mean.iter_mut().zip(&inst.values) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for inst in &self.instances {
            for ((s, v), m) in var.iter_mut().zip(&inst.values).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        var.into_iter().map(|s| (s / n).sqrt()).collect()
    }

    /// Per-feature std with zero entries replaced by 1, for use as a noise scale.
    pub fn noise_scale(&self) -> Vec<f64> {
        self.feature_std()
            .into_iter()
            .map(|s| if s > 0.0 { s } else { 1.0 })
            .collect()
    }

    pub fn mean_feature_std(&self) -> f64 {
        let std = self.noise_scale();
        std.iter().sum::<f64>() / std.len().max(1) as f64
    }
}

/// Enforces dataset invariants; image values are clipped to `[0, 1]`.
pub fn validate_dataset(mut raw: Dataset) -> Result<Dataset> {
    let n = raw.instances.len();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let dim = raw.shape.len();
    if dim == 0 {
        return Err(Error::ShapeMismatch("instances have no features".into()));
    }
    for inst in &raw.instances {
        if inst.values.len() != dim {
            return Err(Error::ShapeMismatch(format!(
                "instance {} has {} values, expected {dim}",
                inst.id,
                inst.values.len()
            )));
        }
        if let Some(index) = inst.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { instance: inst.id, index });
        }
    }
    let check_len = |what: &str, len: Option<usize>| match len {
        Some(len) if len != n => Err(Error::ShapeMismatch(format!(
            "{len} {what} for {n} instances"
        ))),
        _ => Ok(()),
    };
    check_len("group labels", raw.groups.as_ref().map(Vec::len))?;
    check_len("class labels", raw.labels.as_ref().map(Vec::len))?;
    if let Some(names) = &raw.feature_names {
        if names.len() != dim {
            return Err(Error::ShapeMismatch(format!(
                "{} feature names for {dim} features",
                names.len()
            )));
        }
    }
    if raw.shape.kind() == DataKind::Image {
        for inst in &mut raw.instances {
            inst.values.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
        }
    }
    Ok(raw)
}

/// Per-feature (or per-pixel) importance for one instance and target class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribution {
    pub values: Vec<f64>,
    pub target_class: usize,
    pub method_name: String,
}

impl Attribution {
    pub fn new(values: Vec<f64>, target_class: usize, method_name: impl Into<String>) -> Self {
        Attribution { values, target_class, method_name: method_name.into() }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn abs(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.abs()).collect()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_well_formed_tabular() {
        let rows = vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]];
        let ds = Dataset::tabular(rows.clone()).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.rows(), rows.iter().map(Vec::as_slice).collect::<Vec<_>>());
    }

    #[test]
    fn rejects_short_group_list() {
        let ds = Dataset::tabular(vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        let err = ds.with_groups(vec!["a".into(), "b".into()]).unwrap_err();
        assert!(matches!(err, Error::ShapeMismatch(_)));
    }

    #[test]
    fn reports_nan_location() {
        let err = Dataset::tabular(vec![vec![1.0, 2.0], vec![3.0, f64::NAN], vec![5.0, 6.0]])
            .unwrap_err();
        assert!(matches!(err, Error::NonFiniteValue { instance: 1, index: 1 }));
    }

    #[test]
    fn rejects_empty_and_ragged() {
        assert!(matches!(Dataset::tabular(vec![]), Err(Error::EmptyDataset)));
        assert!(matches!(
            Dataset::tabular(vec![vec![1.0, 2.0], vec![1.0]]),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn clips_image_values() {
        let ds = Dataset::images(1, 2, vec![vec![-0.5, 1.5]]).unwrap();
        assert_eq!(ds.instances[0].values, vec![0.0, 1.0]);
    }

    #[test]
    fn infinite_values_rejected_in_images() {
        let err = Dataset::images(1, 2, vec![vec![0.5, f64::INFINITY]]).unwrap_err();
        assert!(matches!(err, Error::NonFiniteValue { instance: 0, index: 1 }));
    }
}
