//! Rosenbrock with a redundant radial axis.
//!
//! The 2D Rosenbrock valley is placed on the angles of a hemisphere chart,
//! so the 3D objective depends only on the direction of the parameter
//! vector and not on its length. The radius is a free axis an optimizer can
//! wander along without changing the loss; this makes the objective
//! scale-invariant with an analytically radius-orthogonal gradient.

use crate::error::{Error, Result};
use crate::objectives::Objective;
use crate::vecmath::{ParamBlock, Vector};
use std::f64::consts::FRAC_PI_2;

/// Scaled-angle Rosenbrock: with a = c*psi and b = c*phi,
/// (1 - a)^2 + 300 (b - a^2)^2. Zero exactly at (a, b) = (1, 1).
pub fn rosenbrock_angles(psi: f64, phi: f64, angle_scale: f64) -> f64 {
    let a = angle_scale * psi;
    let b = angle_scale * phi;
    (1.0 - a) * (1.0 - a) + 300.0 * (b - a * a) * (b - a * a)
}

/// A point in the hemisphere chart: radius and two polar angles in
/// [-pi/2, pi/2].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalPoint {
    pub r: f64,
    pub psi: f64,
    pub phi: f64,
}

impl SphericalPoint {
    pub fn new(r: f64, psi: f64, phi: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::ZeroNorm);
        }
        if psi.abs() > FRAC_PI_2 || phi.abs() > FRAC_PI_2 {
            return Err(Error::OutOfDomain(format!(
                "angles ({psi}, {phi}) outside [-pi/2, pi/2]"
            )));
        }
        Ok(Self { r, psi, phi })
    }
}

/// Chart from Cartesian coordinates, single-valued on the open z > 0
/// hemisphere:
///
///   r = sqrt(x^2 + y^2 + z^2), psi = atan2(x, z), phi = asin(y / r).
///
/// The y-axis poles (x = z = 0) are admitted with psi = 0. Points with
/// z <= 0 off the poles are outside the chart.
pub fn spherical_from_cartesian(x: f64, y: f64, z: f64) -> Result<SphericalPoint> {
    let r = (x * x + y * y + z * z).sqrt();
    if r == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let rho = (x * x + z * z).sqrt();
    if rho == 0.0 {
        // Pole of the parametrization: phi = +-pi/2, psi arbitrary (0).
        let phi = if y > 0.0 { FRAC_PI_2 } else { -FRAC_PI_2 };
        return Ok(SphericalPoint { r, psi: 0.0, phi });
    }
    if z <= 0.0 {
        return Err(Error::OutOfDomain(format!(
            "point ({x}, {y}, {z}) is outside the z > 0 hemisphere"
        )));
    }
    Ok(SphericalPoint {
        r,
        psi: x.atan2(z),
        phi: y.atan2(rho),
    })
}

/// Inverse chart: x = r cos(phi) sin(psi), y = r sin(phi),
/// z = r cos(phi) cos(psi).
pub fn cartesian_from_spherical(p: SphericalPoint) -> (f64, f64, f64) {
    let rho = p.r * p.phi.cos();
    (rho * p.psi.sin(), p.r * p.phi.sin(), rho * p.psi.cos())
}

/// The 3D scale-invariant Rosenbrock objective over one 3D block.
#[derive(Debug, Clone)]
pub struct Rosenbrock3d {
    angle_scale: f64,
}

impl Default for Rosenbrock3d {
    fn default() -> Self {
        Self { angle_scale: 1.5 }
    }
}

impl Rosenbrock3d {
    pub fn new(angle_scale: f64) -> Self {
        Self { angle_scale }
    }

    pub fn angle_scale(&self) -> f64 {
        self.angle_scale
    }

    /// Value and gradient at a Cartesian point. Needs z > 0: the gradient
    /// requires the chart to be regular, so poles are rejected too.
    pub fn eval_cartesian(&self, x: f64, y: f64, z: f64) -> Result<(f64, [f64; 3])> {
        let rho_sq = x * x + z * z;
        let r_sq = rho_sq + y * y;
        if r_sq == 0.0 {
            return Err(Error::ZeroNorm);
        }
        if z <= 0.0 || rho_sq == 0.0 {
            return Err(Error::OutOfDomain(format!(
                "point ({x}, {y}, {z}) is outside the open z > 0 chart"
            )));
        }
        let rho = rho_sq.sqrt();
        let psi = x.atan2(z);
        let phi = y.atan2(rho);

        let c = self.angle_scale;
        let a = c * psi;
        let b = c * phi;
        let value = (1.0 - a) * (1.0 - a) + 300.0 * (b - a * a) * (b - a * a);

        // Chain rule through the chart. Both angle gradients are orthogonal
        // to (x, y, z), so the full gradient is too.
        let ha = -2.0 * (1.0 - a) - 1200.0 * a * (b - a * a);
        let hb = 600.0 * (b - a * a);
        let dpsi = [z / rho_sq, 0.0, -x / rho_sq];
        let dphi = [-x * y / (rho * r_sq), rho / r_sq, -z * y / (rho * r_sq)];
        let grad = [
            c * (ha * dpsi[0] + hb * dphi[0]),
            c * (ha * dpsi[1] + hb * dphi[1]),
            c * (ha * dpsi[2] + hb * dphi[2]),
        ];
        Ok((value, grad))
    }
}

impl Objective for Rosenbrock3d {
    fn block_dims(&self) -> Vec<usize> {
        vec![3]
    }

    fn is_scale_invariant(&self, _index: usize) -> bool {
        true
    }

    fn evaluate(&self, params: &[ParamBlock]) -> Result<(f64, Vec<Vector>)> {
        let w = params[0].values();
        if w.len() != 3 {
            return Err(Error::ShapeMismatch {
                expected: 3,
                actual: w.len(),
            });
        }
        let (value, grad) = self.eval_cartesian(w[0], w[1], w[2])?;
        Ok((value, vec![Vector::new(grad.to_vec())?]))
    }
}
