//! Shapley values: brute-force enumeration and the Kernel SHAP estimator.
//!
//! Features outside a coalition take their baseline value. Kernel SHAP
//! fits an additive model to coalition values under the Shapley kernel
//!
//! ```text
//! pi(z) = (d - 1) / (C(d, |z|) |z| (d - |z|))
//! ```
//!
//! and enforces `sum(phi) = f(x) - f(baseline)` exactly by solving for the
//! first `d - 1` coefficients and deriving the last.

use std::collections::BTreeMap;

use rand::seq::index;
use rand::Rng;

use super::Explainer;
use crate::data::{Attribution, Instance};
use crate::error::{Error, Result};
use crate::linalg::weighted_ridge;
use crate::oracle::Oracle;
use crate::rng::Stream;

pub const MAX_EXACT_FEATURES: usize = 20;

const QUERY_CHUNK: usize = 4096;

fn check_dims(x: &[f64], baseline: &[f64]) -> Result<()> {
    if x.is_empty() {
        return Err(Error::InvalidData("cannot explain an instance with no features".into()));
    }
    if baseline.len() != x.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: baseline.len() });
    }
    Ok(())
}

fn compose(x: &[f64], baseline: &[f64], present: impl Fn(usize) -> bool) -> Vec<f64> {
    (0..x.len()).map(|i| if present(i) { x[i] } else { baseline[i] }).collect()
}

/// Output `class` for each coalition, queried in bounded batches.
fn coalition_values<'a, I>(model: &dyn Oracle, x: &[f64], baseline: &[f64], class: usize, coalitions: I) -> Result<Vec<f64>>
where
    I: IntoIterator<Item = &'a [bool]>,
{
    let mut out = Vec::new();
    let mut pending: Vec<Vec<f64>> = Vec::with_capacity(QUERY_CHUNK);
    let flush = |pending: &mut Vec<Vec<f64>>, out: &mut Vec<f64>| -> Result<()> {
        if !pending.is_empty() {
            let rows: Vec<&[f64]> = pending.iter().map(Vec::as_slice).collect();
            out.extend(model.outputs(&rows, class)?);
            pending.clear();
        }
        Ok(())
    };
    for z in coalitions {
        pending.push(compose(x, baseline, |i| z[i]));
        if pending.len() == QUERY_CHUNK {
            flush(&mut pending, &mut out)?;
        }
    }
    flush(&mut pending, &mut out)?;
    Ok(out)
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Exact Shapley values by enumerating all `2^d` coalitions.
pub fn exact_shapley(model: &dyn Oracle, x: &[f64], baseline: &[f64], class: usize) -> Result<Vec<f64>> {
    check_dims(x, baseline)?;
    let d = x.len();
    if d > MAX_EXACT_FEATURES {
        return Err(Error::TooManyFeatures(d));
    }
    let total = 1usize << d;
    // Bit i of the mask marks feature i as present.
    let masks: Vec<Vec<bool>> = (0..total).map(|m| (0..d).map(|i| m >> i & 1 == 1).collect()).collect();
    let values = coalition_values(model, x, baseline, class, masks.iter().map(Vec::as_slice))?;
    // |S|! (d - |S| - 1)! / d! = 1 / (d C(d-1, |S|))
    let weight: Vec<f64> = (0..d).map(|s| 1.0 / (d as f64 * binomial(d - 1, s))).collect();
    let mut phi = vec![0.0; d];
    for (i, p) in phi.iter_mut().enumerate() {
        let bit = 1usize << i;
        let mut acc = 0.0;
        for mask in (0..total).filter(|m| m & bit == 0) {
            let size = mask.count_ones() as usize;
            acc += weight[size] * (values[mask | bit] - values[mask]);
        }
        *p = acc;
    }
    Ok(phi)
}

/// Number of non-trivial coalitions, `2^d - 2`, saturating for large `d`.
fn proper_coalitions(d: usize) -> usize {
    if d >= usize::BITS as usize - 1 {
        usize::MAX
    } else {
        (1usize << d) - 2
    }
}

fn shapley_kernel(d: usize, size: usize) -> f64 {
    (d - 1) as f64 / (binomial(d, size) * size as f64 * (d - size) as f64)
}

/// Coalitions with their regression weights.
fn coalitions(d: usize, samples: usize, rng: &mut Stream) -> Vec<(Vec<bool>, f64)> {
    if samples >= proper_coalitions(d) {
        return (1..(1usize << d) - 1)
            .map(|m| {
                let z: Vec<bool> = (0..d).map(|i| m >> i & 1 == 1).collect();
                let size = m.count_ones() as usize;
                (z, shapley_kernel(d, size))
            })
            .collect();
    }
    // Summed over all coalitions of one size the kernel is (d-1)/(s(d-s)),
    // so drawing the size from that and the members uniformly samples
    // coalitions proportionally to pi(z). Each draw is paired with its
    // complement, which has the same kernel weight.
    let size_weights: Vec<f64> = (1..d).map(|s| 1.0 / (s as f64 * (d - s) as f64)).collect();
    let total: f64 = size_weights.iter().sum();
    let mut counts: BTreeMap<Vec<bool>, f64> = BTreeMap::new();
    let mut drawn = 0;
    while drawn < samples {
        let mut u = rng.gen::<f64>() * total;
        let mut size = d - 1;
        for (k, w) in size_weights.iter().enumerate() {
            if u < *w {
                size = k + 1;
                break;
            }
            u -= w;
        }
        let mut z = vec![false; d];
        for i in index::sample(rng, d, size) {
            z[i] = true;
        }
        let complement: Vec<bool> = z.iter().map(|b| !b).collect();
        *counts.entry(z).or_default() += 1.0;
        *counts.entry(complement).or_default() += 1.0;
        drawn += 2;
    }
    counts.into_iter().collect()
}

/// Kernel SHAP with exact efficiency. When `samples >= 2^d - 2` every
/// coalition is enumerated and the result equals the exact Shapley values.
pub fn explain_kshap(
    model: &dyn Oracle,
    x: &[f64],
    baseline: &[f64],
    class: usize,
    samples: usize,
    ridge: f64,
    rng: &mut Stream,
) -> Result<Vec<f64>> {
    check_dims(x, baseline)?;
    let d = x.len();
    let ends = model.outputs(&[baseline, x], class)?;
    let (f_base, f_x) = (ends[0], ends[1]);
    let total = f_x - f_base;
    if d == 1 {
        return Ok(vec![total]);
    }
    let sampled = coalitions(d, samples, rng);
    let values = coalition_values(model, x, baseline, class, sampled.iter().map(|(z, _)| z.as_slice()))?;
    let last = d - 1;
    let ind = |b: bool| f64::from(u8::from(b));
    let mut rows = Vec::with_capacity(sampled.len());
    let mut targets = Vec::with_capacity(sampled.len());
    let mut weights = Vec::with_capacity(sampled.len());
    for ((z, w), v) in sampled.iter().zip(&values) {
        let z_last = ind(z[last]);
        rows.push(z[..last].iter().map(|&b| ind(b) - z_last).collect::<Vec<f64>>());
        targets.push(v - f_base - z_last * total);
        weights.push(*w);
    }
    let mut phi = weighted_ridge(&rows, &targets, &weights, ridge)?;
    let rest: f64 = phi.iter().sum();
    phi.push(total - rest);
    Ok(phi)
}

#[derive(Debug, Clone)]
pub struct ExactShapley {
    pub name: String,
    pub baseline: Vec<f64>,
}

impl Explainer for ExactShapley {
    fn name(&self) -> &str {
        &self.name
    }

    fn explain(&self, model: &dyn Oracle, x: &Instance, class: usize, _rng: &mut Stream) -> Result<Attribution> {
        let values = exact_shapley(model, &x.values, &self.baseline, class)?;
        Ok(Attribution::new(values, class, &self.name))
    }
}

#[derive(Debug, Clone)]
pub struct KernelShap {
    pub name: String,
    pub baseline: Vec<f64>,
    pub samples: usize,
    pub ridge: f64,
}

impl Explainer for KernelShap {
    fn name(&self) -> &str {
        &self.name
    }

    fn explain(&self, model: &dyn Oracle, x: &Instance, class: usize, rng: &mut Stream) -> Result<Attribution> {
        let values = explain_kshap(model, &x.values, &self.baseline, class, self.samples, self.ridge, rng)?;
        Ok(Attribution::new(values, class, &self.name))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{LinearModel, TableModel};
    use crate::rng::RngSpec;

    #[test]
    fn product_game_splits_evenly() {
        // f(x1, x2) = x1 x2: from (0,0) to (1,1) both orderings give one
        // feature 0 and the other 1, so each feature gets 1/2.
        let m = TableModel::from_fn(vec![vec![0.0, 1.0]; 2], |x| vec![x[0] * x[1]]).unwrap();
        let phi = exact_shapley(&m, &[1.0, 1.0], &[0.0, 0.0], 0).unwrap();
        assert_eq!(phi, vec![0.5, 0.5]);
    }

    #[test]
    fn linear_models_get_marginal_contributions() {
        let w = vec![1.0, -2.0, 0.5, 3.0];
        let m = LinearModel::identity(w.clone(), 1.0);
        let x = [1.0, 2.0, 3.0, -1.0];
        let b = [0.5, 0.0, 0.0, 1.0];
        let expected: Vec<f64> = (0..4).map(|i| w[i] * (x[i] - b[i])).collect();
        let exact = exact_shapley(&m, &x, &b, 0).unwrap();
        let mut rng = RngSpec::new(1).stream(0, "kshap");
        let kshap = explain_kshap(&m, &x, &b, 0, 14, 0.0, &mut rng).unwrap();
        for i in 0..4 {
            assert!((exact[i] - expected[i]).abs() < 1e-12);
            assert!((kshap[i] - expected[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn baseline_input_gets_zero() {
        let m = LinearModel::identity(vec![1.0, 2.0, 3.0], 0.0);
        let x = [0.2, 0.4, 0.6];
        let mut rng = RngSpec::new(1).stream(0, "kshap");
        let phi = explain_kshap(&m, &x, &x, 0, 100, 0.0, &mut rng).unwrap();
        assert!(phi.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn too_many_features() {
        let m = LinearModel::identity(vec![1.0; 21], 0.0);
        assert!(matches!(exact_shapley(&m, &[0.0; 21], &[0.0; 21], 0), Err(Error::TooManyFeatures(21))));
    }

    #[test]
    fn kernel_weights_sum_by_size() {
        for d in 2..8 {
            for s in 1..d {
                let by_size = binomial(d, s) * shapley_kernel(d, s);
                assert!((by_size - (d - 1) as f64 / (s * (d - s)) as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sampling_pairs_complements() {
        let mut rng = RngSpec::new(3).stream(0, "kshap");
        let zs = coalitions(10, 200, &mut rng);
        assert!(zs.len() < proper_coalitions(10));
        for (z, w) in &zs {
            let size = z.iter().filter(|b| **b).count();
            assert!(size > 0 && size < 10);
            let comp: Vec<bool> = z.iter().map(|b| !b).collect();
            let cw = zs.iter().find(|(c, _)| *c == comp).unwrap().1;
            assert_eq!(*w, cw);
        }
    }
}
