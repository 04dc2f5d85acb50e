//! Full-batch gradient descent on mean cross-entropy.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{argmax, Link, LinearModel, MlpModel, Model, Oracle};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::RngSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelTemplate {
    /// Softmax regression.
    Linear {
        #[serde(default)]
        classes: Option<usize>,
    },
    Mlp {
        hidden: usize,
        #[serde(default)]
        classes: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub template: ModelTemplate,
    pub epochs: usize,
    pub learning_rate: f64,
}

#[derive(Debug, Clone)]
pub struct Trained {
    pub model: Model,
    /// Loss before training followed by the loss after each epoch.
    pub losses: Vec<f64>,
}

fn normal_matrix(rows: usize, cols: usize, scale: f64, rng: &mut impl rand::Rng) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|_| (0..cols).map(|_| scale * Distribution::<f64>::sample(&StandardNormal, rng)).collect::<Vec<f64>>())
        .collect()
}

fn initial_model(template: &ModelTemplate, d: usize, classes: usize, seed: u64) -> Result<Model> {
    let mut rng = RngSpec::new(seed).stream(0, "train/init");
    match *template {
        ModelTemplate::Linear { .. } => Ok(Model::Linear(LinearModel::new(
            normal_matrix(classes, d, 0.01, &mut rng),
            vec![0.0; classes],
            Link::Softmax,
        )?)),
        ModelTemplate::Mlp { hidden, .. } => {
            if hidden == 0 {
                return Err(Error::InvalidConfig("mlp needs at least one hidden unit".into()));
            }
            let w1 = normal_matrix(hidden, d, 1.0 / (d as f64).sqrt(), &mut rng);
            let w2 = normal_matrix(classes, hidden, 1.0 / (hidden as f64).sqrt(), &mut rng);
            Ok(Model::Mlp(MlpModel::new(w1, vec![0.0; hidden], w2, vec![0.0; classes])?))
        }
    }
}

/// Mean negative log-likelihood of the labels.
pub fn cross_entropy(model: &dyn Oracle, dataset: &Dataset) -> Result<f64> {
    let labels = dataset.labels.as_ref().ok_or(Error::MissingLabels)?;
    let probs = model.predict(&dataset.rows())?;
    let total: f64 = probs
        .iter()
        .zip(labels)
        .map(|(p, &y)| -p.get(y).copied().unwrap_or(0.0).max(1e-300).ln())
        .sum();
    Ok(total / dataset.len() as f64)
}

pub fn accuracy(model: &dyn Oracle, dataset: &Dataset) -> Result<f64> {
    let labels = dataset.labels.as_ref().ok_or(Error::MissingLabels)?;
    let probs = model.predict(&dataset.rows())?;
    let hits = probs.iter().zip(labels).filter(|(p, &y)| argmax(p) == y).count();
    Ok(hits as f64 / dataset.len() as f64)
}

fn step(model: &mut Model, dataset: &Dataset, labels: &[usize], lr: f64) {
    let n = dataset.len() as f64;
    match model {
        Model::Linear(m) => {
            let mut gw = vec![vec![0.0; m.weights[0].len()]; m.weights.len()];
            let mut gb = vec![0.0; m.bias.len()];
            for (inst, &y) in dataset.instances.iter().zip(labels) {
                let p = super::softmax(&m.logits(&inst.values));
                for (k, pk) in p.iter().enumerate() {
                    let dz = pk - f64::from(u8::from(k == y));
                    gb[k] += dz;
                    for (g, x) in gw[k].iter_mut().zip(&inst.values) {
                        *g += dz * x;
                    }
                }
            }
            for (row, grow) in m.weights.iter_mut().zip(&gw) {
                for (w, g) in row.iter_mut().zip(grow) {
                    *w -= lr * g / n;
                }
            }
            for (b, g) in m.bias.iter_mut().zip(&gb) {
                *b -= lr * g / n;
            }
        }
        Model::Mlp(m) => {
            let mut gw1 = vec![vec![0.0; m.w1[0].len()]; m.w1.len()];
            let mut gb1 = vec![0.0; m.b1.len()];
            let mut gw2 = vec![vec![0.0; m.w2[0].len()]; m.w2.len()];
            let mut gb2 = vec![0.0; m.b2.len()];
            for (inst, &y) in dataset.instances.iter().zip(labels) {
                let act = m.activations(&inst.values);
                let dz: Vec<f64> = act
                    .probs
                    .iter()
                    .enumerate()
                    .map(|(k, pk)| pk - f64::from(u8::from(k == y)))
                    .collect();
                let mut da = vec![0.0; m.hidden_size()];
                for (k, dzk) in dz.iter().enumerate() {
                    gb2[k] += dzk;
                    for (j, h) in act.hidden.iter().enumerate() {
                        gw2[k][j] += dzk * h;
                        da[j] += dzk * m.w2[k][j];
                    }
                }
                for (j, h) in act.hidden.iter().enumerate() {
                    let daj = da[j] * (1.0 - h * h);
                    gb1[j] += daj;
                    for (g, x) in gw1[j].iter_mut().zip(&inst.values) {
                        *g += daj * x;
                    }
                }
            }
            let update = |params: &mut Vec<Vec<f64>>, grads: &[Vec<f64>]| {
                for (row, grow) in params.iter_mut().zip(grads) {
                    for (w, g) in row.iter_mut().zip(grow) {
                        *w -= lr * g / n;
                    }
                }
            };
            update(&mut m.w1, &gw1);
            update(&mut m.w2, &gw2);
            for (b, g) in m.b1.iter_mut().zip(&gb1) {
                *b -= lr * g / n;
            }
            for (b, g) in m.b2.iter_mut().zip(&gb2) {
                *b -= lr * g / n;
            }
        }
    }
}

/// Trains a model from seeded initial parameters for a fixed number of epochs.
pub fn train(config: &TrainConfig, dataset: &Dataset, seed: u64) -> Result<Trained> {
    let labels = dataset.labels.as_ref().ok_or(Error::MissingLabels)?;
    if !(config.learning_rate > 0.0 && config.learning_rate.is_finite()) {
        return Err(Error::InvalidConfig("learning rate must be positive".into()));
    }
    let observed = labels.iter().max().map_or(2, |&m| (m + 1).max(2));
    let classes = match config.template {
        ModelTemplate::Linear { classes } | ModelTemplate::Mlp { classes, .. } => classes.unwrap_or(observed),
    };
    if classes < observed {
        return Err(Error::InvalidConfig(format!(
            "template declares {classes} classes but labels go up to {}",
            observed - 1
        )));
    }
    let mut model = initial_model(&config.template, dataset.dim(), classes, seed)?;
    let mut losses = vec![cross_entropy(&model, dataset)?];
    for _ in 0..config.epochs {
        step(&mut model, dataset, labels, config.learning_rate);
        losses.push(cross_entropy(&model, dataset)?);
    }
    Ok(Trained { model, losses })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::two_blobs;

    fn linear(epochs: usize, lr: f64) -> TrainConfig {
        TrainConfig { template: ModelTemplate::Linear { classes: None }, epochs, learning_rate: lr }
    }

    #[test]
    fn blobs_become_separable() {
        let data = two_blobs(40, 1);
        let trained = train(&linear(500, 0.5), &data, 1).unwrap();
        assert!(accuracy(&trained.model, &data).unwrap() >= 0.95);
        assert!(trained.losses.last().unwrap() <= &trained.losses[0]);
        let mlp = TrainConfig { template: ModelTemplate::Mlp { hidden: 6, classes: None }, epochs: 500, learning_rate: 0.5 };
        let trained = train(&mlp, &data, 1).unwrap();
        assert!(accuracy(&trained.model, &data).unwrap() >= 0.95);
    }

    #[test]
    fn zero_epochs_keeps_initial_parameters() {
        let data = two_blobs(40, 1);
        let a = train(&linear(0, 0.5), &data, 9).unwrap();
        let b = initial_model(&ModelTemplate::Linear { classes: None }, 2, 2, 9).unwrap();
        assert_eq!(a.model, b);
        assert_eq!(a.losses.len(), 1);
    }

    #[test]
    fn same_seed_same_parameters() {
        let data = two_blobs(40, 1);
        let cfg = TrainConfig { template: ModelTemplate::Mlp { hidden: 4, classes: None }, epochs: 30, learning_rate: 0.3 };
        let a = train(&cfg, &data, 5).unwrap().model.to_json().unwrap();
        let b = train(&cfg, &data, 5).unwrap().model.to_json().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn small_steps_never_increase_loss() {
        let data = two_blobs(40, 1);
        for template in [ModelTemplate::Linear { classes: None }, ModelTemplate::Mlp { hidden: 5, classes: None }] {
            let cfg = TrainConfig { template, epochs: 10, learning_rate: 0.05 };
            let losses = train(&cfg, &data, 2).unwrap().losses;
            assert!(losses.windows(2).all(|w| w[1] <= w[0]), "{losses:?}");
        }
    }

    #[test]
    fn labels_required() {
        let data = Dataset::tabular(vec![vec![1.0], vec![2.0]]).unwrap();
        assert!(matches!(train(&linear(1, 0.1), &data, 0), Err(Error::MissingLabels)));
    }
}
