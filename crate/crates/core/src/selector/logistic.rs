use serde::{Deserialize, Serialize};

use super::{check_dim, Label, SelectorError, Standardizer, TrainingSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    /// L2 penalty on the weights (not the bias).
    pub l2: f64,
    pub max_iter: usize,
    /// Gradient-norm stopping tolerance.
    pub tol: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            l2: 1e-2,
            max_iter: 20_000,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub params: LogisticParams,
    pub standardizer: Standardizer,
    pub weights: Vec<f64>,
    pub bias: f64,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Gradient of mean log-loss plus the L2 term; the last entry is the bias.
fn gradient(z: &[Vec<f64>], y: &[f64], theta: &[f64], l2: f64) -> Vec<f64> {
    let d = theta.len() - 1;
    let n = z.len() as f64;
    let mut g = vec![0.0; d + 1];
    for (row, t) in z.iter().zip(y) {
        let s = row.iter().zip(theta).map(|(a, b)| a * b).sum::<f64>() + theta[d];
        let r = (sigmoid(s) - t) / n;
        for (gj, x) in g.iter_mut().zip(row) {
            *gj += r * x;
        }
        g[d] += r;
    }
    for j in 0..d {
        g[j] += l2 * theta[j];
    }
    g
}

/// Fits by accelerated gradient descent on standardized features. The step
/// is `1/L` with `L` bounded through the trace of the standardized Gram
/// matrix; momentum uses the L2 strong-convexity constant.
pub fn train_logistic(data: &TrainingSet, params: LogisticParams) -> Result<LogisticModel, SelectorError> {
    if params.l2 <= 0.0 || params.tol <= 0.0 {
        return Err(SelectorError::InvalidParams("l2 and tol must be positive".into()));
    }
    data.require_classes(2)?;
    let standardizer = Standardizer::fit(&data.vectors);
    let z: Vec<Vec<f64>> = data.vectors.iter().map(|v| standardizer.apply(v)).collect();
    let y: Vec<f64> = data
        .labels
        .iter()
        .map(|l| if *l == Label::SqlCorrect { 1.0 } else { 0.0 })
        .collect();
    let d = data.dim();
    let lipschitz = 0.25 * (d as f64 + 1.0) + params.l2;
    let step = 1.0 / lipschitz;
    let kappa = (lipschitz / params.l2).sqrt();
    let momentum = (kappa - 1.0) / (kappa + 1.0);

    let mut theta = vec![0.0; d + 1];
    let mut prev = theta.clone();
    let mut grad_norm = f64::INFINITY;
    for _ in 0..params.max_iter {
        let look: Vec<f64> = theta
            .iter()
            .zip(&prev)
            .map(|(t, p)| t + momentum * (t - p))
            .collect();
        let g = gradient(&z, &y, &look, params.l2);
        grad_norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if grad_norm <= params.tol {
            theta = look;
            break;
        }
        prev = std::mem::replace(&mut theta, look.iter().zip(&g).map(|(t, gj)| t - step * gj).collect());
    }
    if grad_norm > params.tol {
        return Err(SelectorError::NonConvergence {
            iterations: params.max_iter,
            grad_norm,
        });
    }
    let bias = theta.pop().unwrap_or(0.0);
    Ok(LogisticModel {
        params,
        standardizer,
        weights: theta,
        bias,
    })
}

impl LogisticModel {
    /// Probability of SQL_CORRECT.
    pub fn score(&self, v: &[f64]) -> Result<f64, SelectorError> {
        check_dim(self.weights.len(), v)?;
        let z = self.standardizer.apply(v);
        let s = z.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>() + self.bias;
        Ok(sigmoid(s))
    }

    pub fn predict(&self, v: &[f64]) -> Result<(Label, f64), SelectorError> {
        let s = self.score(v)?;
        Ok((Label::from_score(s), s))
    }
}
