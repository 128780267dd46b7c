//! The normalization operator (x - mean) / std and its backward pass.

use crate::error::{Error, Result};
use crate::vecmath::Vector;

/// Normalizes `x` to zero mean and unit standard deviation.
///
/// Uses the population standard deviation (divide by n) with no epsilon
/// smoothing, which keeps the rescaling invariance exact: the only failure
/// mode is a constant input, reported as `DegenerateStd`.
pub fn norm_op(x: &Vector) -> Result<Vector> {
    let (y, _) = forward(x.as_slice())?;
    Vector::new(y)
}

/// Forward pass over a raw slice: returns the normalized values and the
/// population standard deviation.
pub(crate) fn forward(x: &[f64]) -> Result<(Vec<f64>, f64)> {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let sigma = var.sqrt();
    if sigma == 0.0 {
        return Err(Error::DegenerateStd);
    }
    Ok((x.iter().map(|v| (v - mean) / sigma).collect(), sigma))
}

/// Backward pass: given normalized outputs `y`, the forward's `sigma`, and
/// upstream gradients `gy`, returns d/dx.
///
/// gx_j = (gy_j - mean(gy) - y_j * mean(gy .* y)) / sigma
pub(crate) fn backward(y: &[f64], sigma: f64, gy: &[f64]) -> Vec<f64> {
    debug_assert_eq!(y.len(), gy.len());
    let n = y.len() as f64;
    let mean_gy = gy.iter().sum::<f64>() / n;
    let mean_gy_y = gy.iter().zip(y).map(|(g, yi)| g * yi).sum::<f64>() / n;
    y.iter()
        .zip(gy)
        .map(|(yi, gi)| (gi - mean_gy - yi * mean_gy_y) / sigma)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn two_point_case() {
        let y = norm_op(&Vector::from_slice(&[1.0, 3.0]).unwrap()).unwrap();
        assert_eq!(y.as_slice(), &[-1.0, 1.0]);
    }

    #[test]
    fn constant_input_is_degenerate() {
        let r = norm_op(&Vector::from_slice(&[5.0, 5.0, 5.0]).unwrap());
        assert!(matches!(r, Err(Error::DegenerateStd)));
    }

    #[test]
    fn single_element_is_degenerate() {
        let r = norm_op(&Vector::from_slice(&[2.0]).unwrap());
        assert!(matches!(r, Err(Error::DegenerateStd)));
    }

    #[test]
    fn matches_independent_two_pass_oracle() {
        // Oracle for (0, 1, 2, 3): mean 1.5, deviations (+-0.5, +-1.5) are
        // exact, population variance 5/4, sigma = sqrt(1.25).
        let sigma = 1.25f64.sqrt();
        let expected = [-1.5 / sigma, -0.5 / sigma, 0.5 / sigma, 1.5 / sigma];
        let y = norm_op(&Vector::from_slice(&[0.0, 1.0, 2.0, 3.0]).unwrap()).unwrap();
        for (got, want) in y.iter().zip(expected.iter()) {
            assert_relative_eq!(got, want, max_relative = 1e-12);
        }
    }

    #[test]
    fn output_has_zero_mean_unit_std() {
        let mut rng = crate::rng::Rng::with_seed(3);
        let x = rng.standard_normal_vector(64).unwrap();
        let y = norm_op(&x).unwrap();
        let n = y.len() as f64;
        let mean = y.iter().sum::<f64>() / n;
        let var = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        assert!(mean.abs() < 1e-10);
        assert_relative_eq!(var.sqrt(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = crate::rng::Rng::with_seed(9);
        let x: Vec<f64> = (0..8).map(|_| rng.standard_normal()).collect();
        let gy: Vec<f64> = (0..8).map(|_| rng.standard_normal()).collect();
        let (y, sigma) = forward(&x).unwrap();
        let gx = backward(&y, sigma, &gy);

        let h = 1e-6;
        for j in 0..x.len() {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let (yp, _) = forward(&xp).unwrap();
            let (ym, _) = forward(&xm).unwrap();
            let scalar = |y: &[f64]| -> f64 { y.iter().zip(&gy).map(|(a, b)| a * b).sum() };
            let fd = (scalar(&yp) - scalar(&ym)) / (2.0 * h);
            assert_relative_eq!(gx[j], fd, epsilon = 1e-5, max_relative = 1e-5);
        }
    }
}
