//! L1-penalized mixture-weight optimization by full-batch proximal gradient
//! descent with soft-thresholding.
//!
//! Minimizes `(1/N) sum Phi(offset_i + sum_j w_j c_ij, y_i) + sum_j pen_j |w_j|`
//! over unconstrained-sign weights. The step size comes from a power-iteration
//! estimate of the Gram spectral norm, with backtracking so the penalized
//! objective never increases.

use crate::config::Loss;
use crate::error::{Error, Result};
use crate::matrix::{gemm, Matrix};

const MAX_ITERATIONS: usize = 500;
const REL_CHANGE_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct MixtureFit {
    pub weights: Vec<f64>,
    /// Penalized objective at the returned weights.
    pub objective: f64,
    pub iterations: usize,
}

/// Optimize mixture weights against frozen learner output columns.
///
/// `columns` is N x J (link-scale learner outputs), `offset` the fixed part
/// of the prediction, `penalties` the per-learner L1 coefficients, and
/// `init` the warm-start weights.
pub fn optimize_mixture_weights(
    columns: &Matrix,
    y: &[f64],
    offset: &[f64],
    loss: Loss,
    penalties: &[f64],
    init: &[f64],
) -> Result<MixtureFit> {
    let n = columns.rows();
    let j = columns.cols();
    if n == 0 || j == 0 {
        return Err(Error::EmptyInput(
            "mixture optimization needs at least one sample and one column".into(),
        ));
    }
    if y.len() != n || offset.len() != n {
        return Err(Error::Shape(format!(
            "columns are {}x{}, y has {} and offset {} entries",
            n,
            j,
            y.len(),
            offset.len()
        )));
    }
    if penalties.len() != j || init.len() != j {
        return Err(Error::Shape(format!(
            "{} columns but {} penalties and {} initial weights",
            j,
            penalties.len(),
            init.len()
        )));
    }
    if !columns.is_finite() {
        return Err(Error::Divergence(
            "mixture optimization received a non-finite learner column".into(),
        ));
    }

    let objective = |w: &[f64], preds: &[f64]| -> f64 {
        let risk = loss.mean_risk(preds, y);
        let pen: f64 = w.iter().zip(penalties).map(|(wv, p)| p * wv.abs()).sum();
        risk + pen
    };
    let predict = |w: &[f64]| -> Vec<f64> {
        let mut preds = offset.to_vec();
        for i in 0..n {
            let row = columns.row(i);
            let mut acc = 0.0;
            for (c, wv) in row.iter().zip(w) {
                acc += c * wv;
            }
            preds[i] += acc;
        }
        preds
    };

    // Spectral norm of C^T C / N by power iteration; fixed start for
    // determinism.
    let mut v = vec![1.0 / (j as f64).sqrt(); j];
    let mut lambda_max = 0.0;
    for _ in 0..30 {
        let vm = Matrix::from_vec(j, 1, v.clone())?;
        let u = gemm(columns, &vm, false, false)?;
        let w = gemm(columns, &u, true, false)?;
        let norm = w.data().iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        lambda_max = norm;
        v = w.data().iter().map(|x| x / norm).collect();
    }
    let lipschitz = (loss.curvature_bound() * lambda_max / n as f64).max(1e-12);
    let mut step = 1.0 / lipschitz;

    let mut w = init.to_vec();
    let mut preds = predict(&w);
    let mut obj = objective(&w, &preds);
    let mut iterations = 0;

    for _ in 0..MAX_ITERATIONS {
        iterations += 1;
        // grad_j = (1/N) sum_i Phi'(pred_i, y_i) c_ij
        let mut grad = vec![0.0; j];
        for i in 0..n {
            let d = loss.derivative(preds[i], y[i]) / n as f64;
            if d == 0.0 {
                continue;
            }
            for (g, c) in grad.iter_mut().zip(columns.row(i)) {
                *g += d * c;
            }
        }

        // Proximal step with backtracking on the penalized objective.
        let mut accepted = false;
        let mut w_new = w.clone();
        let mut preds_new = preds.clone();
        let mut obj_new = obj;
        for _ in 0..60 {
            for ((wn, &wv), (&g, &p)) in w_new
                .iter_mut()
                .zip(w.iter())
                .zip(grad.iter().zip(penalties))
            {
                *wn = soft_threshold(wv - step * g, step * p);
            }
            preds_new = predict(&w_new);
            obj_new = objective(&w_new, &preds_new);
            if obj_new <= obj + 1e-15 {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break; // cannot make progress at any step size
        }

        let rel_change = w
            .iter()
            .zip(&w_new)
            .map(|(a, b)| (a - b).abs() / a.abs().max(1e-12))
            .fold(0.0, f64::max);
        w = w_new;
        preds = preds_new;
        obj = obj_new.min(obj);
        if rel_change < REL_CHANGE_TOL {
            break;
        }
    }

    Ok(MixtureFit {
        weights: w,
        objective: obj,
        iterations,
    })
}

fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}
