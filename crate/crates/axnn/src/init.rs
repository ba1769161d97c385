//! Parameter initialization policies.
//!
//! ReLU-activated layers use He-normal (zero mean, variance `2 / fan_in`);
//! purely linear layers (ridge output units, projection rows, combination
//! weights) use Glorot-uniform. Biases start at zero.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::Rng;

/// He-normal weights with shape `(fan_in, fan_out)` plus a zero bias vector.
pub fn init_layer(fan_in: usize, fan_out: usize, rng: &mut Rng) -> Result<(Matrix, Vec<f64>)> {
    check_fans(fan_in, fan_out)?;
    let std = (2.0 / fan_in as f64).sqrt();
    let weights = Matrix::from_fn(fan_in, fan_out, |_, _| std * rng.normal());
    Ok((weights, vec![0.0; fan_out]))
}

/// Glorot-uniform weights with shape `(fan_in, fan_out)`.
pub fn glorot_uniform(fan_in: usize, fan_out: usize, rng: &mut Rng) -> Result<Matrix> {
    check_fans(fan_in, fan_out)?;
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    Ok(Matrix::from_fn(fan_in, fan_out, |_, _| {
        rng.uniform_in(-limit, limit)
    }))
}

fn check_fans(fan_in: usize, fan_out: usize) -> Result<()> {
    if fan_in == 0 || fan_out == 0 {
        return Err(Error::InvalidArchitecture(format!(
            "layer fans must be >= 1, got fan_in={fan_in}, fan_out={fan_out}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_bitwise_identical() {
        let (w1, b1) = init_layer(4, 3, &mut Rng::new(99)).unwrap();
        let (w2, b2) = init_layer(4, 3, &mut Rng::new(99)).unwrap();
        assert_eq!(w1, w2);
        assert_eq!(b1, b2);
    }

    #[test]
    fn sample_variance_matches_he_scheme() {
        // fan_in = 8 gives variance 2/8 = 0.25; Monte-Carlo over 1e6 draws.
        let mut rng = Rng::new(5);
        let n = 1_000_000;
        let (mut sum, mut sumsq) = (0.0, 0.0);
        let mut drawn = 0usize;
        while drawn < n {
            let (w, _) = init_layer(8, 125, &mut rng).unwrap();
            for &v in w.data() {
                sum += v;
                sumsq += v * v;
            }
            drawn += w.data().len();
        }
        let mean = sum / drawn as f64;
        let var = sumsq / drawn as f64 - mean * mean;
        assert!((var - 0.25).abs() < 0.01, "sample variance {var}");
        assert!(mean.abs() < 0.01, "sample mean {mean}");
    }

    #[test]
    fn bias_is_all_zeros() {
        let (_, b) = init_layer(4, 7, &mut Rng::new(1)).unwrap();
        assert!(b.iter().all(|&v| v == 0.0));
        assert_eq!(b.len(), 7);
    }

    #[test]
    fn zero_fan_is_invalid_architecture() {
        assert!(init_layer(0, 3, &mut Rng::new(1)).is_err());
        assert!(init_layer(3, 0, &mut Rng::new(1)).is_err());
        assert!(glorot_uniform(0, 1, &mut Rng::new(1)).is_err());
    }

    #[test]
    fn glorot_stays_within_limit() {
        let w = glorot_uniform(5, 3, &mut Rng::new(2)).unwrap();
        let limit = (6.0f64 / 8.0).sqrt();
        assert!(w.data().iter().all(|v| v.abs() <= limit));
    }
}
