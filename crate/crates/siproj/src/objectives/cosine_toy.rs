//! 2D cosine-alignment toy objective.
//!
//! The loss is the signed cosine between `w` and a fixed target, to be
//! minimized; the optimum is `w` antiparallel to the target. The loss only
//! sees the direction of `w`, so it is scale-invariant and its gradient is
//! orthogonal to `w`.

use crate::error::{Error, Result};
use crate::objectives::Objective;
use crate::vecmath::{ParamBlock, Vector};

/// Signed cosine (w . w*) / (||w|| ||w*||) and its gradient in `w`.
///
/// The gradient is the tangential part of the unit target, shrunk by the
/// weight norm: grad = (u* - f w_hat) / ||w||, which is orthogonal to `w`.
pub fn cosine_toy_2d(w: &Vector, w_star: &Vector) -> Result<(f64, Vector)> {
    if w.len() != 2 || w_star.len() != 2 {
        return Err(Error::ShapeMismatch {
            expected: 2,
            actual: if w.len() != 2 { w.len() } else { w_star.len() },
        });
    }
    let wn = w.l2_norm();
    let sn = w_star.l2_norm();
    if wn == 0.0 || sn == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let u_star = [w_star[0] / sn, w_star[1] / sn];
    let w_hat = [w[0] / wn, w[1] / wn];
    let value = w_hat[0] * u_star[0] + w_hat[1] * u_star[1];
    let grad = Vector::new(vec![
        (u_star[0] - value * w_hat[0]) / wn,
        (u_star[1] - value * w_hat[1]) / wn,
    ])?;
    Ok((value, grad))
}

/// The toy as an [`Objective`] over one 2D block.
#[derive(Debug, Clone)]
pub struct CosineToy2d {
    target: Vector,
}

impl CosineToy2d {
    pub fn new(target: Vector) -> Result<Self> {
        if target.len() != 2 {
            return Err(Error::ShapeMismatch {
                expected: 2,
                actual: target.len(),
            });
        }
        if target.l2_norm() == 0.0 {
            return Err(Error::ZeroNorm);
        }
        Ok(Self { target })
    }

    pub fn target(&self) -> &Vector {
        &self.target
    }
}

impl Objective for CosineToy2d {
    fn block_dims(&self) -> Vec<usize> {
        vec![2]
    }

    fn is_scale_invariant(&self, _index: usize) -> bool {
        true
    }

    fn evaluate(&self, params: &[ParamBlock]) -> Result<(f64, Vec<Vector>)> {
        let (value, grad) = cosine_toy_2d(params[0].values(), &self.target)?;
        Ok((value, vec![grad]))
    }
}
