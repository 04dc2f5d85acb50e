//! The five evaluation criteria and a fixed-order record keyed by them.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Fidelity,
    Interpretability,
    Robustness,
    Fairness,
    Completeness,
}

impl Criterion {
    /// Canonical column order used in tables, weight vectors and reports.
    pub const ALL: [Criterion; 5] = [
        Criterion::Fidelity,
        Criterion::Interpretability,
        Criterion::Robustness,
        Criterion::Fairness,
        Criterion::Completeness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Criterion::Fidelity => "fidelity",
            Criterion::Interpretability => "interpretability",
            Criterion::Robustness => "robustness",
            Criterion::Fairness => "fairness",
            Criterion::Completeness => "completeness",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Criterion::Fidelity => "Fidelity",
            Criterion::Interpretability => "Interpretability",
            Criterion::Robustness => "Robustness",
            Criterion::Fairness => "Fairness",
            Criterion::Completeness => "Completeness",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One value per criterion, serialized with named fields.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Criteria<T> {
    pub fidelity: T,
    pub interpretability: T,
    pub robustness: T,
    pub fairness: T,
    pub completeness: T,
}

impl<T: Copy> Criteria<T> {
    pub fn from_array(values: [T; 5]) -> Self {
        let [fidelity, interpretability, robustness, fairness, completeness] = values;
        Criteria { fidelity, interpretability, robustness, fairness, completeness }
    }

    pub fn splat(value: T) -> Self {
        Self::from_array([value; 5])
    }

    pub fn to_array(&self) -> [T; 5] {
        [self.fidelity, self.interpretability, self.robustness, self.fairness, self.completeness]
    }

    pub fn map<U: Copy>(&self, f: impl Fn(T) -> U) -> Criteria<U> {
        Criteria::from_array(self.to_array().map(f))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Criterion, T)> + '_ {
        Criterion::ALL.into_iter().map(move |c| (c, self[c]))
    }
}

impl<T> Index<Criterion> for Criteria<T> {
    type Output = T;

    fn index(&self, c: Criterion) -> &T {
        match c.index() {
            0 => &self.fidelity,
            1 => &self.interpretability,
            2 => &self.robustness,
            3 => &self.fairness,
            _ => &self.completeness,
        }
    }
}

impl<T> IndexMut<Criterion> for Criteria<T> {
    fn index_mut(&mut self, c: Criterion) -> &mut T {
        match c.index() {
            0 => &mut self.fidelity,
            1 => &mut self.interpretability,
            2 => &mut self.robustness,
            3 => &mut self.fairness,
            _ => &mut self.completeness,
        }
    }
}

/// Raw criterion values, each in `[0, 1]`.
pub type MetricVector = Criteria<f64>;

impl MetricVector {
    /// Clips every component into `[0, 1]`.
    pub fn clipped(&self) -> Self {
        self.map(|v| v.clamp(0.0, 1.0))
    }
}
