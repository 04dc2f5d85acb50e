//! Seeded synthetic datasets.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::RngSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SyntheticKind {
    /// Standard-normal features with a linear ground truth `w . x`.
    TabularLinear,
    /// Like `TabularLinear` with an alternating `A`/`B` group column.
    TabularGroups,
    /// 8x8 dark grids containing one bright rectangle.
    ImageShapes,
}

impl FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tabular-linear" => Ok(SyntheticKind::TabularLinear),
            "tabular-groups" => Ok(SyntheticKind::TabularGroups),
            "image-shapes" => Ok(SyntheticKind::ImageShapes),
            other => Err(Error::InvalidConfig(format!("unknown synthetic kind `{other}`"))),
        }
    }
}

impl fmt::Display for SyntheticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SyntheticKind::TabularLinear => "tabular-linear",
            SyntheticKind::TabularGroups => "tabular-groups",
            SyntheticKind::ImageShapes => "image-shapes",
        })
    }
}

#[derive(Debug, Clone)]
pub struct Synthetic {
    pub dataset: Dataset,
    /// Generative weights of the tabular kinds.
    pub true_weights: Option<Vec<f64>>,
    /// Per-instance rectangle masks of `image-shapes`, row-major.
    pub masks: Option<Vec<Vec<bool>>>,
}

pub const LINEAR_FEATURES: usize = 6;
pub const GROUP_FEATURES: usize = 4;
pub const IMAGE_SIDE: usize = 8;

fn weights(spec: RngSpec, d: usize) -> Vec<f64> {
    let mut rng = spec.stream(0, "synth/weights");
    (0..d)
        .map(|_| {
            let magnitude = rng.gen_range(0.5..3.0);
            if rng.gen_bool(0.5) { magnitude } else { -magnitude }
        })
        .collect()
}

fn gaussian_rows(spec: RngSpec, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let mut rng = spec.stream(i as u64, "synth/features");
            (0..d).map(|_| StandardNormal.sample(&mut rng)).collect()
        })
        .collect()
}

fn linear_labels(rows: &[Vec<f64>], w: &[f64]) -> Vec<usize> {
    rows.iter()
        .map(|x| usize::from(x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() > 0.0))
        .collect()
}

pub fn generate_synthetic(kind: SyntheticKind, n: usize, seed: u64) -> Result<Synthetic> {
    if n == 0 {
        return Err(Error::InvalidConfig("synthetic datasets need n >= 1".into()));
    }
    let spec = RngSpec::new(seed);
    match kind {
        SyntheticKind::TabularLinear | SyntheticKind::TabularGroups => {
            let d = if kind == SyntheticKind::TabularLinear { LINEAR_FEATURES } else { GROUP_FEATURES };
            let w = weights(spec, d);
            let rows = gaussian_rows(spec, n, d);
            let labels = linear_labels(&rows, &w);
            let mut dataset = Dataset::tabular(rows)?.with_labels(labels)?;
            if kind == SyntheticKind::TabularGroups {
                let groups = (0..n).map(|i| if i % 2 == 0 { "A" } else { "B" }.to_string()).collect();
                dataset = dataset.with_groups(groups)?;
            }
            Ok(Synthetic { dataset, true_weights: Some(w), masks: None })
        }
        SyntheticKind::ImageShapes => {
            let side = IMAGE_SIDE;
            let mut grids = Vec::with_capacity(n);
            let mut masks = Vec::with_capacity(n);
            let mut labels = Vec::with_capacity(n);
            for i in 0..n {
                let mut rng = spec.stream(i as u64, "synth/image");
                let h = rng.gen_range(2..=4);
                let w = rng.gen_range(2..=4);
                let top = rng.gen_range(0..=side - h);
                let left = rng.gen_range(0..=side - w);
                let mut grid = vec![0.0; side * side];
                let mut mask = vec![false; side * side];
                for r in 0..side {
                    for c in 0..side {
                        let inside = (top..top + h).contains(&r) && (left..left + w).contains(&c);
                        mask[r * side + c] = inside;
                        grid[r * side + c] = if inside { rng.gen_range(0.8..=1.0) } else { rng.gen_range(0.0..=0.2) };
                    }
                }
                labels.push(usize::from(2 * left + w > side));
                grids.push(grid);
                masks.push(mask);
            }
            let dataset = Dataset::images(side, side, grids)?.with_labels(labels)?;
            Ok(Synthetic { dataset, true_weights: None, masks: Some(masks) })
        }
    }
}

/// Two well-separated Gaussian blobs in 2-D, labelled 0 and 1.
pub fn two_blobs(n: usize, seed: u64) -> Dataset {
    let spec = RngSpec::new(seed);
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = spec.stream(i as u64, "synth/blobs");
        let label = i % 2;
        let center = if label == 0 { -2.0 } else { 2.0 };
        let noise: [f64; 2] = [StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)];
        rows.push(noise.iter().map(|e| center + 0.5 * e).collect());
        labels.push(label);
    }
    Dataset::tabular(rows)
        .and_then(|d| d.with_labels(labels))
        .expect("blob generator produces valid data")
}
