use rand::seq::SliceRandom;
use serde::Serialize;

use super::descriptive::{mean, sample_sd};
use super::rank::spearman;
use super::{Result, StatsError};
use crate::rng;

/// OLS residuals of `y = a + b x`. With constant `x`, residuals are
/// `y - mean(y)`.
pub fn residualize(y: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(y.len(), x.len()));
    }
    if x.len() < 3 {
        return Err(StatsError::TooFewObservations { needed: 3, found: x.len() });
    }
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    Ok(x.iter()
        .zip(y)
        .map(|(a, b)| (b - my) - slope * (a - mx))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RidgeCvResult {
    pub rmse: f64,
    /// Spearman rho of out-of-fold predictions against `y`; `None` when the
    /// predictions are constant.
    pub spearman_rho: Option<f64>,
    pub predictions: Vec<f64>,
    pub folds: Vec<usize>,
}

/// Solves `a x = b` in place by Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    let scale = a
        .iter()
        .enumerate()
        .map(|(i, r)| r[i].abs())
        .fold(0.0, f64::max)
        .max(1.0);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[piv][col].abs() < 1e-12 * scale {
            return Err(StatsError::SingularSystem);
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Ok(x)
}

/// K-fold ridge regression. Features are standardized on each training fold
/// and the intercept (training mean of `y`) is unpenalized. Fold membership
/// is a seeded shuffle dealt round-robin.
pub fn ridge_cv(x: &[Vec<f64>], y: &[f64], k_folds: usize, lambda: f64, seed: u64) -> Result<RidgeCvResult> {
    let n = y.len();
    if x.len() != n {
        return Err(StatsError::LengthMismatch(x.len(), n));
    }
    if k_folds < 2 || k_folds > n {
        return Err(StatsError::InvalidArgument(format!("k_folds = {k_folds} with n = {n}")));
    }
    if lambda < 0.0 {
        return Err(StatsError::InvalidArgument("lambda must be non-negative".into()));
    }
    let p = x.first().map_or(0, Vec::len);
    if x.iter().any(|r| r.len() != p || r.iter().any(|v| !v.is_finite())) || y.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::InvalidArgument("rows must be complete and equally long".into()));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::stream(seed, &[0x72_6964_6765]));
    let mut folds = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        folds[i] = pos % k_folds;
    }

    let mut predictions = vec![0.0; n];
    for fold in 0..k_folds {
        let train: Vec<usize> = (0..n).filter(|&i| folds[i] != fold).collect();
        let test: Vec<usize> = (0..n).filter(|&i| folds[i] == fold).collect();
        let y_mean = mean(&train.iter().map(|&i| y[i]).collect::<Vec<_>>());
        let mut centers = vec![0.0; p];
        let mut scales = vec![0.0; p];
        for j in 0..p {
            let col: Vec<f64> = train.iter().map(|&i| x[i][j]).collect();
            centers[j] = mean(&col);
            let sd = sample_sd(&col);
            scales[j] = if sd.is_finite() && sd > 1e-12 { sd } else { 0.0 };
        }
        let z = |i: usize| -> Vec<f64> {
            (0..p)
                .map(|j| if scales[j] > 0.0 { (x[i][j] - centers[j]) / scales[j] } else { 0.0 })
                .collect()
        };
        let zs: Vec<Vec<f64>> = train.iter().map(|&i| z(i)).collect();
        let mut gram = vec![vec![0.0; p]; p];
        let mut rhs = vec![0.0; p];
        for (row, &i) in zs.iter().zip(&train) {
            let yc = y[i] - y_mean;
            for a in 0..p {
                rhs[a] += row[a] * yc;
                for b in a..p {
                    gram[a][b] += row[a] * row[b];
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                gram[a][b] = gram[b][a];
            }
            gram[a][a] += lambda;
        }
        let beta = if p == 0 { Vec::new() } else { solve(gram, rhs)? };
        for &i in &test {
            predictions[i] = y_mean + z(i).iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>();
        }
    }

    let mse = predictions.iter().zip(y).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / n as f64;
    let spearman_rho = spearman(&predictions, y).ok().map(|r| r.statistic);
    Ok(RidgeCvResult {
        rmse: mse.sqrt(),
        spearman_rho,
        predictions,
        folds,
    })
}
