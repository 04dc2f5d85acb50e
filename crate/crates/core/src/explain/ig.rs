use super::Explainer;
use crate::data::{Attribution, Instance};
use crate::error::{Error, Result};
use crate::oracle::Oracle;
use crate::rng::Stream;

/// Integrated Gradients along the straight path from `baseline` to `x`,
/// integrated with the midpoint rule over `steps` intervals.
pub fn explain_ig(model: &dyn Oracle, x: &[f64], class: usize, baseline: &[f64], steps: usize) -> Result<Vec<f64>> {
    if baseline.len() != x.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: baseline.len() });
    }
    if steps == 0 {
        return Err(Error::InvalidConfig("ig needs steps >= 1".into()));
    }
    let delta: Vec<f64> = x.iter().zip(baseline).map(|(a, b)| a - b).collect();
    let mut avg = vec![0.0; x.len()];
    let mut point = vec![0.0; x.len()];
    for k in 0..steps {
        let alpha = (k as f64 + 0.5) / steps as f64;
        for ((p, b), dlt) in point.iter_mut().zip(baseline).zip(&delta) {
            *p = b + alpha * dlt;
        }
        for (a, g) in avg.iter_mut().zip(model.gradient(&point, class)?) {
            *a += g;
        }
    }
    Ok(avg.iter().zip(&delta).map(|(g, dlt)| dlt * g / steps as f64).collect())
}

#[derive(Debug, Clone)]
pub struct IntegratedGradients {
    pub name: String,
    pub baseline: Vec<f64>,
    pub steps: usize,
}

impl Explainer for IntegratedGradients {
    fn name(&self) -> &str {
        &self.name
    }

    fn explain(&self, model: &dyn Oracle, x: &Instance, class: usize, _rng: &mut Stream) -> Result<Attribution> {
        let values = explain_ig(model, &x.values, class, &self.baseline, self.steps)?;
        Ok(Attribution::new(values, class, &self.name))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{LinearModel, TableModel};

    #[test]
    fn linear_identity_is_exact_for_any_steps() {
        let m = LinearModel::identity(vec![1.5, -2.0, 0.25], 0.3);
        let x = [1.0, 2.0, -4.0];
        let b = [0.5, 0.0, 1.0];
        for steps in [1, 3, 64] {
            let ig = explain_ig(&m, &x, 0, &b, steps).unwrap();
            assert_eq!(ig, vec![0.75, -4.0, -1.25]);
        }
    }

    #[test]
    fn zero_path_gives_zero() {
        let m = LinearModel::identity(vec![1.0, 2.0], 0.0);
        assert_eq!(explain_ig(&m, &[0.3, 0.4], 0, &[0.3, 0.4], 16).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn needs_gradients() {
        let m = TableModel::from_fn(vec![vec![0.0, 1.0]], |x| vec![x[0]]).unwrap();
        assert!(matches!(explain_ig(&m, &[1.0], 0, &[0.0], 4), Err(Error::NotDifferentiable)));
    }
}
