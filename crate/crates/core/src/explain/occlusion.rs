use super::Explainer;
use crate::data::{Attribution, Instance, Shape};
use crate::error::{Error, Result};
use crate::oracle::Oracle;
use crate::rng::Stream;

/// Occlusion saliency with non-overlapping `patch x patch` windows.
///
/// Each window is filled with the baseline and every pixel in it receives
/// the resulting drop `f(x) - f(x_occluded)`. Windows at the right and
/// bottom edges are truncated when the side is not a multiple of `patch`.
pub fn explain_occlusion(
    model: &dyn Oracle,
    x: &[f64],
    shape: Shape,
    patch: usize,
    baseline: &[f64],
    class: usize,
) -> Result<Vec<f64>> {
    let Shape::Image { height, width } = shape else {
        return Err(Error::InvalidConfig("occlusion needs image instances".into()));
    };
    if patch == 0 || patch > height.min(width) {
        return Err(Error::PatchTooLarge { patch, height, width });
    }
    if x.len() != height * width || baseline.len() != x.len() {
        return Err(Error::DimensionMismatch { expected: height * width, got: x.len().min(baseline.len()) });
    }
    let mut windows = Vec::new();
    let mut occluded = Vec::new();
    for top in (0..height).step_by(patch) {
        for left in (0..width).step_by(patch) {
            let mut img = x.to_vec();
            let rows = top..(top + patch).min(height);
            let cols = left..(left + patch).min(width);
            for r in rows.clone() {
                for c in cols.clone() {
                    img[r * width + c] = baseline[r * width + c];
                }
            }
            windows.push((rows, cols));
            occluded.push(img);
        }
    }
    let mut batch: Vec<&[f64]> = vec![x];
    batch.extend(occluded.iter().map(Vec::as_slice));
    let outputs = model.outputs(&batch, class)?;
    let full = outputs[0];
    let mut map = vec![0.0; x.len()];
    for ((rows, cols), out) in windows.into_iter().zip(&outputs[1..]) {
        for r in rows {
            for c in cols.clone() {
                map[r * width + c] = full - out;
            }
        }
    }
    Ok(map)
}

#[derive(Debug, Clone)]
pub struct Occlusion {
    name: String,
    shape: Shape,
    patch: usize,
    baseline: Vec<f64>,
}

impl Occlusion {
    pub fn new(name: String, shape: Shape, patch: usize, baseline: Vec<f64>) -> Result<Self> {
        let Shape::Image { height, width } = shape else {
            return Err(Error::InvalidConfig("occlusion needs image instances".into()));
        };
        if patch == 0 || patch > height.min(width) {
            return Err(Error::PatchTooLarge { patch, height, width });
        }
        Ok(Occlusion { name, shape, patch, baseline })
    }
}

impl Explainer for Occlusion {
    fn name(&self) -> &str {
        &self.name
    }

    fn explain(&self, model: &dyn Oracle, x: &Instance, class: usize, _rng: &mut Stream) -> Result<Attribution> {
        let values = explain_occlusion(model, &x.values, self.shape, self.patch, &self.baseline, class)?;
        Ok(Attribution::new(values, class, &self.name))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::LinearModel;

    const SHAPE: Shape = Shape::Image { height: 4, width: 4 };

    #[test]
    fn single_patch_is_uniform() {
        let m = LinearModel::identity((0..16).map(f64::from).collect(), 0.0);
        let x: Vec<f64> = (0..16).map(|i| f64::from(i) / 16.0).collect();
        let map = explain_occlusion(&m, &x, SHAPE, 4, &[0.0; 16], 0).unwrap();
        let expected = m.output(&x, 0).unwrap();
        assert!(map.iter().all(|v| *v == expected));
    }

    #[test]
    fn baseline_input_is_zero_map() {
        let m = LinearModel::identity(vec![1.0; 16], 0.0);
        let x = vec![0.25; 16];
        let map = explain_occlusion(&m, &x, SHAPE, 2, &x, 0).unwrap();
        assert!(map.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn patch_bounds() {
        let m = LinearModel::identity(vec![1.0; 16], 0.0);
        assert!(matches!(
            explain_occlusion(&m, &[0.0; 16], SHAPE, 5, &[0.0; 16], 0),
            Err(Error::PatchTooLarge { patch: 5, .. })
        ));
        assert!(explain_occlusion(&m, &[0.0; 16], SHAPE, 0, &[0.0; 16], 0).is_err());
    }

    #[test]
    fn ragged_edges_are_covered() {
        let shape = Shape::Image { height: 5, width: 5 };
        let m = LinearModel::identity(vec![1.0; 25], 0.0);
        let map = explain_occlusion(&m, &[1.0; 25], shape, 2, &[0.0; 25], 0).unwrap();
        assert_eq!(map[0], 4.0);
        assert_eq!(map[4], 2.0);
        assert_eq!(map[24], 1.0);
    }
}
