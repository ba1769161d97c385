//! Central finite differences — the independent oracle for every hand-derived
//! gradient in the crate.

/// Central-difference gradient estimate `(f(p+h) - f(p-h)) / 2h` per coordinate.
///
/// `loss_fn` must be deterministic; `h` must be positive.
pub fn finite_diff_gradient(
    mut loss_fn: impl FnMut(&[f64]) -> f64,
    params: &[f64],
    h: f64,
) -> Vec<f64> {
    assert!(h > 0.0, "finite difference step must be positive");
    let mut work = params.to_vec();
    let mut grad = Vec::with_capacity(params.len());
    for i in 0..params.len() {
        let orig = work[i];
        work[i] = orig + h;
        let up = loss_fn(&work);
        work[i] = orig - h;
        let down = loss_fn(&work);
        work[i] = orig;
        grad.push((up - down) / (2.0 * h));
    }
    grad
}

/// Largest relative error between an analytic gradient and its finite-difference
/// estimate, ignoring coordinates where the reference magnitude is below `floor`.
pub fn max_relative_error(analytic: &[f64], estimate: &[f64], floor: f64) -> f64 {
    analytic
        .iter()
        .zip(estimate)
        .filter(|(a, _)| a.abs() > floor)
        .map(|(a, e)| (a - e).abs() / a.abs().max(e.abs()))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_derivative() {
        let g = finite_diff_gradient(|p| p[0] * p[0], &[3.0], 1e-5);
        assert!((g[0] - 6.0).abs() < 1e-6);
    }

    #[test]
    fn constant_function_has_zero_gradient() {
        let g = finite_diff_gradient(|_| 4.2, &[1.0, -2.0, 0.0], 1e-5);
        assert!(g.iter().all(|&v| v == 0.0));
    }
}
