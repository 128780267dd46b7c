//! Test objectives with analytic gradients.
//!
//! Each objective declares, per parameter block, whether the loss is
//! invariant to rescaling that block. Declared-invariant blocks satisfy
//! f(c w) = f(w) for c > 0, which forces the gradient orthogonal to the
//! weights; both properties are exercised by the test suite against the
//! finite-difference oracle in [`finite_diff_grad`].

mod cosine_toy;
mod normalize;
mod rosenbrock;
mod tiny_net;

pub use cosine_toy::{cosine_toy_2d, CosineToy2d};
pub use normalize::norm_op;
pub use rosenbrock::{
    cartesian_from_spherical, rosenbrock_angles, spherical_from_cartesian, Rosenbrock3d,
    SphericalPoint,
};
pub use tiny_net::TinyNormNet;

use crate::error::Result;
use crate::vecmath::{ParamBlock, Vector};

/// A value-and-gradient provider over a list of parameter blocks.
pub trait Objective {
    /// Length of each parameter block this objective expects.
    fn block_dims(&self) -> Vec<usize>;

    /// Whether the loss is invariant to rescaling block `index`.
    fn is_scale_invariant(&self, index: usize) -> bool;

    /// Loss and per-block gradients at `params`.
    fn evaluate(&self, params: &[ParamBlock]) -> Result<(f64, Vec<Vector>)>;

    /// Loss only; the default goes through `evaluate`.
    fn value(&self, params: &[ParamBlock]) -> Result<f64> {
        self.evaluate(params).map(|(v, _)| v)
    }
}

/// Central-difference gradient oracle: (f(x + h e_i) - f(x - h e_i)) / 2h
/// per coordinate of every block.
pub fn finite_diff_grad(
    objective: &dyn Objective,
    params: &[ParamBlock],
    h: f64,
) -> Result<Vec<Vector>> {
    if h <= 0.0 {
        return Err(crate::error::Error::DomainError(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    let mut grads = Vec::with_capacity(params.len());
    for b in 0..params.len() {
        let dim = params[b].len();
        let mut g = vec![0.0; dim];
        for i in 0..dim {
            let mut plus = params.to_vec();
            let mut minus = params.to_vec();
            let mut data_plus = params[b].values().as_slice().to_vec();
            let mut data_minus = data_plus.clone();
            data_plus[i] += h;
            data_minus[i] -= h;
            plus[b].set_values(Vector::new(data_plus)?)?;
            minus[b].set_values(Vector::new(data_minus)?)?;
            g[i] = (objective.value(&plus)? - objective.value(&minus)?) / (2.0 * h);
        }
        grads.push(Vector::new(g)?);
    }
    Ok(grads)
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;

    /// f(w) = ||w||^2 over a single block; gradient 2w. Scale-variant.
    pub struct SquaredNorm {
        pub dim: usize,
    }

    impl Objective for SquaredNorm {
        fn block_dims(&self) -> Vec<usize> {
            vec![self.dim]
        }
        fn is_scale_invariant(&self, _index: usize) -> bool {
            false
        }
        fn evaluate(&self, params: &[ParamBlock]) -> Result<(f64, Vec<Vector>)> {
            let w = params[0].values();
            let value = w.iter().map(|x| x * x).sum();
            let grad = w.scale(2.0)?;
            Ok((value, vec![grad]))
        }
    }
}
