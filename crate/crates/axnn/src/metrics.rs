//! Evaluation metrics: MSE/R² for regression, AUC/log-loss for binary tasks.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Metrics {
    Regression { mse: f64, r2: f64 },
    Binary { auc: f64, logloss: f64 },
}

/// Mean squared error and `R² = 1 - MSE / var(y_true)`.
pub fn regression_metrics(y_true: &[f64], y_pred: &[f64]) -> Result<(f64, f64)> {
    check_lengths(y_true, y_pred)?;
    let n = y_true.len() as f64;
    let mse = y_true
        .iter()
        .zip(y_pred)
        .map(|(t, p)| (t - p) * (t - p))
        .sum::<f64>()
        / n;
    let mean = y_true.iter().sum::<f64>() / n;
    let var = y_true.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / n;
    if var == 0.0 {
        return Err(Error::DegenerateModel(
            "y_true is constant; R² undefined".into(),
        ));
    }
    Ok((mse, 1.0 - mse / var))
}

/// AUC via the rank statistic with tie-averaging, plus clipped log-loss.
/// `scores` are probabilities for the log-loss.
pub fn binary_metrics(y_true: &[f64], scores: &[f64]) -> Result<(f64, f64)> {
    check_lengths(y_true, scores)?;
    if y_true.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(Error::Schema("binary metrics require y in {0, 1}".into()));
    }
    let n_pos = y_true.iter().filter(|&&v| v == 1.0).count();
    let n_neg = y_true.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Schema(
            "AUC needs both classes present in y_true".into(),
        ));
    }

    // Average ranks over tied score groups.
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let avg_rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            if y_true[idx] == 1.0 {
                rank_sum_pos += avg_rank;
            }
        }
        i = j + 1;
    }
    let auc = (rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0) / (n_pos * n_neg) as f64;

    let logloss = y_true
        .iter()
        .zip(scores)
        .map(|(&y, &p)| {
            let p = p.clamp(1e-12, 1.0 - 1e-12);
            -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
        })
        .sum::<f64>()
        / y_true.len() as f64;
    Ok((auc, logloss))
}

fn check_lengths(a: &[f64], b: &[f64]) -> Result<()> {
    if a.is_empty() {
        return Err(Error::EmptyInput("metrics need at least one sample".into()));
    }
    if a.len() != b.len() {
        return Err(Error::Shape(format!(
            "metric inputs differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}
