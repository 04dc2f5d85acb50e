use rand_distr::{Distribution, StandardNormal};

use super::Explainer;
use crate::data::{Attribution, Instance};
use crate::error::{Error, Result};
use crate::linalg::weighted_ridge;
use crate::oracle::Oracle;
use crate::rng::Stream;

/// Local linear surrogate: Gaussian perturbations scaled per feature,
/// an exponential proximity kernel, and a weighted ridge fit with an
/// unpenalized intercept. Returns the surrogate's slope coefficients.
#[allow(clippy::too_many_arguments)]
pub fn explain_lime(
    model: &dyn Oracle,
    x: &[f64],
    scale: &[f64],
    samples: usize,
    kernel_width: f64,
    ridge: f64,
    class: usize,
    rng: &mut Stream,
) -> Result<Vec<f64>> {
    let d = x.len();
    if scale.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: scale.len() });
    }
    let perturbed: Vec<Vec<f64>> = (0..samples)
        .map(|_| {
            x.iter()
                .zip(scale)
                .map(|(v, s)| v + s * Distribution::<f64>::sample(&StandardNormal, rng))
                .collect()
        })
        .collect();
    let rows: Vec<&[f64]> = perturbed.iter().map(Vec::as_slice).collect();
    let targets = model.outputs(&rows, class)?;
    let weights: Vec<f64> = perturbed
        .iter()
        .map(|p| {
            let dist2: f64 = p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            (-dist2 / (kernel_width * kernel_width)).exp()
        })
        .collect();
    let wsum: f64 = weights.iter().sum();
    if !(wsum > 0.0) {
        return Err(Error::DegenerateSystem { condition: f64::INFINITY });
    }
    // Centering on weighted means removes the intercept from the system.
    let mut mean_x = vec![0.0; d];
    let mut mean_y = 0.0;
    for ((p, y), w) in perturbed.iter().zip(&targets).zip(&weights) {
        for (m, v) in mean_x.iter_mut().zip(p) {
            *m += w * v;
        }
        mean_y += w * y;
    }
    mean_x.iter_mut().for_each(|m| *m /= wsum);
    mean_y /= wsum;
    let centered: Vec<Vec<f64>> = perturbed
        .iter()
        .map(|p| p.iter().zip(&mean_x).map(|(v, m)| v - m).collect())
        .collect();
    let centered_y: Vec<f64> = targets.iter().map(|y| y - mean_y).collect();
    weighted_ridge(&centered, &centered_y, &weights, ridge)
}

#[derive(Debug, Clone)]
pub struct Lime {
    pub name: String,
    pub scale: Vec<f64>,
    pub samples: usize,
    pub kernel_width: f64,
    pub ridge: f64,
}

impl Explainer for Lime {
    fn name(&self) -> &str {
        &self.name
    }

    fn explain(&self, model: &dyn Oracle, x: &Instance, class: usize, rng: &mut Stream) -> Result<Attribution> {
        let values = explain_lime(model, &x.values, &self.scale, self.samples, self.kernel_width, self.ridge, class, rng)?;
        Ok(Attribution::new(values, class, &self.name))
    }
}
