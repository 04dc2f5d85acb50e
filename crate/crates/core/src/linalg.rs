use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Largest acceptable eigenvalue ratio for a symmetric system.
const MAX_CONDITION: f64 = 1e13;

fn condition(a: &DMatrix<f64>) -> f64 {
    let eig = a.clone().symmetric_eigen();
    let max = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min = eig.eigenvalues.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if min == 0.0 { f64::INFINITY } else { max / min }
}

/// Solves `a x = b` for symmetric positive definite `a`.
pub fn solve_spd(a: DMatrix<f64>, b: DVector<f64>) -> Result<DVector<f64>> {
    if a.nrows() == 0 {
        return Ok(DVector::zeros(0));
    }
    let cond = condition(&a);
    if !cond.is_finite() || cond > MAX_CONDITION {
        return Err(Error::DegenerateSystem { condition: cond });
    }
    match a.cholesky() {
        Some(chol) => Ok(chol.solve(&b)),
        None => Err(Error::DegenerateSystem { condition: cond }),
    }
}

/// Minimizes `sum_i w_i (y_i - a_i . x)^2 + ridge |x|^2`.
pub fn weighted_ridge(rows: &[Vec<f64>], targets: &[f64], weights: &[f64], ridge: f64) -> Result<Vec<f64>> {
    let p = rows.first().map_or(0, Vec::len);
    let mut gram = DMatrix::<f64>::zeros(p, p);
    let mut rhs = DVector::<f64>::zeros(p);
    for ((row, y), w) in rows.iter().zip(targets).zip(weights) {
        for i in 0..p {
            let wi = w * row[i];
            if wi == 0.0 {
                continue;
            }
            rhs[i] += wi * y;
            for j in i..p {
                gram[(i, j)] += wi * row[j];
            }
        }
    }
    for i in 0..p {
        gram[(i, i)] += ridge;
        for j in 0..i {
            gram[(i, j)] = gram[(j, i)];
        }
    }
    Ok(solve_spd(gram, rhs)?.iter().copied().collect())
}
