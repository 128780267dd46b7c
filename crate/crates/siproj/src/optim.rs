//! Optimizer step kernels.
//!
//! Plain GD, heavy-ball/Nesterov momentum, Adam, AdamW, and the projected
//! variants SGDP and AdamP. The projected kernels test, per scope slice,
//! whether the weight-gradient cosine falls below delta / sqrt(dim); if so
//! the update direction is replaced by its tangential part before the
//! step, which removes the radial component that inflates weight norms
//! without moving the normalized weights.
//!
//! Kernels mutate only the `(w, state)` pair they are given; distinct
//! blocks may be stepped concurrently.

use crate::error::{Error, Result};
use crate::vecmath::{
    check_same_len, cosine_abs_slices, norm, project_out_in_place, ProjectionScope, Vector,
};

/// Step hyperparameters shared by every kernel family.
///
/// `beta` drives the SGD-family momentum buffer; `beta1`/`beta2`/`epsilon`
/// drive the Adam family. `delta` is the invariance-detection threshold
/// (0.1 unless overridden). Adam bias correction is off by default so the
/// moment recursions are used as-is; the flag enables the standard
/// correction for users who want it.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperParams {
    pub lr: f64,
    pub beta: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub weight_decay: f64,
    pub nesterov: bool,
    pub delta: f64,
    pub bias_correction: bool,
}

impl HyperParams {
    pub fn new(lr: f64) -> Result<Self> {
        let hp = Self {
            lr,
            beta: 0.9,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            weight_decay: 0.0,
            nesterov: false,
            delta: 0.1,
            bias_correction: false,
        };
        hp.validate()?;
        Ok(hp)
    }

    pub fn with_momentum(mut self, beta: f64) -> Result<Self> {
        self.beta = beta;
        self.validate()?;
        Ok(self)
    }

    pub fn with_adam_betas(mut self, beta1: f64, beta2: f64) -> Result<Self> {
        self.beta1 = beta1;
        self.beta2 = beta2;
        self.validate()?;
        Ok(self)
    }

    pub fn with_weight_decay(mut self, lambda: f64) -> Result<Self> {
        self.weight_decay = lambda;
        self.validate()?;
        Ok(self)
    }

    pub fn with_delta(mut self, delta: f64) -> Result<Self> {
        self.delta = delta;
        self.validate()?;
        Ok(self)
    }

    pub fn with_nesterov(mut self, nesterov: bool) -> Self {
        self.nesterov = nesterov;
        self
    }

    pub fn with_bias_correction(mut self, enabled: bool) -> Self {
        self.bias_correction = enabled;
        self
    }

    pub fn with_lr(mut self, lr: f64) -> Result<Self> {
        self.lr = lr;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.lr) {
            return Err(Error::DomainError(format!(
                "learning rate must be positive, got {}",
                self.lr
            )));
        }
        for (name, beta) in [
            ("beta", self.beta),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
        ] {
            if !(0.0..1.0).contains(&beta) {
                return Err(Error::DomainError(format!(
                    "{name} must lie in [0, 1), got {beta}"
                )));
            }
        }
        if !positive(self.epsilon) {
            return Err(Error::DomainError(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if !(self.weight_decay.is_finite() && self.weight_decay >= 0.0) {
            return Err(Error::DomainError(format!(
                "weight decay must be nonnegative, got {}",
                self.weight_decay
            )));
        }
        if !positive(self.delta) {
            return Err(Error::DomainError(format!(
                "detection threshold must be positive, got {}",
                self.delta
            )));
        }
        Ok(())
    }
}

/// Per-parameter optimizer buffers. `p` is the SGD-family momentum buffer;
/// `m`/`v` are the Adam moments. All start at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct OptState {
    pub p: Vector,
    pub m: Vector,
    pub v: Vector,
    pub t: u64,
}

impl OptState {
    pub fn zeros(dim: usize) -> Result<Self> {
        Ok(Self {
            p: Vector::zeros(dim)?,
            m: Vector::zeros(dim)?,
            v: Vector::zeros(dim)?,
            t: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.p.len()
    }
}

/// What a step did: whether any slice was projected, the largest cosine
/// that was fed to the threshold test (None if no slice had a nonzero
/// gradient), and the update-direction norms before and after projection.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub projected: bool,
    pub cosine: Option<f64>,
    pub raw_update_norm: f64,
    pub applied_update_norm: f64,
}

impl StepReport {
    fn unprojected(update_norm: f64, cosine: Option<f64>) -> Self {
        Self {
            projected: false,
            cosine,
            raw_update_norm: update_norm,
            applied_update_norm: update_norm,
        }
    }
}

fn check_step_shapes(w: &Vector, grad: &Vector, state: Option<&OptState>) -> Result<()> {
    check_same_len(w.as_slice(), grad.as_slice())?;
    if let Some(s) = state {
        check_same_len(w.as_slice(), s.p.as_slice())?;
        check_same_len(w.as_slice(), s.m.as_slice())?;
        check_same_len(w.as_slice(), s.v.as_slice())?;
    }
    Ok(())
}

/// Vanilla gradient descent: w <- w - lr * grad.
pub fn gd_step(w: &mut Vector, grad: &Vector, lr: f64) -> Result<()> {
    check_step_shapes(w, grad, None)?;
    let next: Vec<f64> = w
        .iter()
        .zip(grad)
        .map(|(wi, gi)| wi - lr * gi)
        .collect();
    *w = Vector::new(next)?;
    Ok(())
}

/// Classifies a (weights, gradient) pair as scale-invariant when the
/// absolute cosine falls strictly below delta / sqrt(dim).
pub fn detect_scale_invariance(w: &Vector, grad: &Vector, delta: f64) -> Result<bool> {
    check_same_len(w.as_slice(), grad.as_slice())?;
    detect_slices(w.as_slice(), grad.as_slice(), delta)
}

fn detect_slices(w: &[f64], grad: &[f64], delta: f64) -> Result<bool> {
    let cos = cosine_abs_slices(w, grad)?;
    Ok(cos < delta / (w.len() as f64).sqrt())
}

fn momentum_direction(grad: &Vector, state: &mut OptState, hp: &HyperParams) -> Result<Vec<f64>> {
    let p_next: Vec<f64> = state
        .p
        .iter()
        .zip(grad)
        .map(|(pi, gi)| hp.beta * pi + gi)
        .collect();
    state.p = Vector::new(p_next)?;
    let dir = if hp.nesterov {
        grad.iter()
            .zip(&state.p)
            .map(|(gi, pi)| gi + hp.beta * pi)
            .collect()
    } else {
        state.p.as_slice().to_vec()
    };
    Ok(dir)
}

/// Heavy-ball momentum: p <- beta p + grad, w <- w - lr p. With
/// `nesterov`, the applied direction is grad + beta p (look-ahead form).
pub fn momentum_step(
    w: &mut Vector,
    grad: &Vector,
    state: &mut OptState,
    hp: &HyperParams,
) -> Result<StepReport> {
    check_step_shapes(w, grad, Some(state))?;
    let cosine = cosine_abs_slices(w.as_slice(), grad.as_slice()).ok();
    let dir = momentum_direction(grad, state, hp)?;
    let next: Vec<f64> = w
        .iter()
        .zip(&dir)
        .map(|(wi, di)| wi - hp.lr * di)
        .collect();
    *w = Vector::new(next)?;
    state.t += 1;
    Ok(StepReport::unprojected(norm(&dir), cosine))
}

/// Applies the thresholded tangent projection to `update`, slice by slice.
///
/// A slice with zero gradient cannot be classified, so it keeps its raw
/// update (the non-projecting branch). A slice with zero weight norm is an
/// error.
fn project_update(
    w: &Vector,
    grad: &Vector,
    update: &mut [f64],
    scope: &ProjectionScope,
    delta: f64,
) -> Result<(bool, Option<f64>)> {
    let mut any_projected = false;
    let mut max_cosine: Option<f64> = None;
    for range in scope.slices(w.len()) {
        let ws = &w.as_slice()[range.clone()];
        let gs = &grad.as_slice()[range.clone()];
        if norm(ws) == 0.0 {
            return Err(Error::ZeroNorm);
        }
        if norm(gs) == 0.0 {
            continue;
        }
        let cos = cosine_abs_slices(ws, gs)?;
        max_cosine = Some(max_cosine.map_or(cos, |m: f64| m.max(cos)));
        if cos < delta / (ws.len() as f64).sqrt() {
            project_out_in_place(ws, &mut update[range])?;
            any_projected = true;
        }
    }
    Ok((any_projected, max_cosine))
}

fn apply_update(w: &mut Vector, update: &[f64], lr: f64, weight_decay: f64) -> Result<()> {
    let shrink = 1.0 - lr * weight_decay;
    let next: Vec<f64> = w
        .iter()
        .zip(update)
        .map(|(wi, ui)| wi * shrink - lr * ui)
        .collect();
    *w = Vector::new(next)?;
    Ok(())
}

/// Momentum step with invariance detection, tangent projection, and
/// decoupled weight decay.
pub fn sgdp_step(
    w: &mut Vector,
    grad: &Vector,
    state: &mut OptState,
    hp: &HyperParams,
    scope: &ProjectionScope,
) -> Result<StepReport> {
    check_step_shapes(w, grad, Some(state))?;
    let mut update = momentum_direction(grad, state, hp)?;
    let raw_update_norm = norm(&update);
    let (projected, cosine) = project_update(w, grad, &mut update, scope, hp.delta)?;
    let applied_update_norm = norm(&update);
    apply_update(w, &update, hp.lr, hp.weight_decay)?;
    state.t += 1;
    Ok(StepReport {
        projected,
        cosine,
        raw_update_norm,
        applied_update_norm,
    })
}

fn adam_direction(grad: &Vector, state: &mut OptState, hp: &HyperParams) -> Result<Vec<f64>> {
    let m_next: Vec<f64> = state
        .m
        .iter()
        .zip(grad)
        .map(|(mi, gi)| hp.beta1 * mi + (1.0 - hp.beta1) * gi)
        .collect();
    let v_next: Vec<f64> = state
        .v
        .iter()
        .zip(grad)
        .map(|(vi, gi)| hp.beta2 * vi + (1.0 - hp.beta2) * gi * gi)
        .collect();
    state.m = Vector::new(m_next)?;
    state.v = Vector::new(v_next)?;
    state.t += 1;
    let (mc, vc) = if hp.bias_correction {
        let t = state.t as i32;
        (
            1.0 - hp.beta1.powi(t),
            1.0 - hp.beta2.powi(t),
        )
    } else {
        (1.0, 1.0)
    };
    Ok(state
        .m
        .iter()
        .zip(&state.v)
        .map(|(mi, vi)| (mi / mc) / ((vi / vc).sqrt() + hp.epsilon))
        .collect())
}

/// Adam moment recursions with no bias correction unless enabled:
/// m <- b1 m + (1-b1) g, v <- b2 v + (1-b2) g^2, w <- w - lr m/(sqrt(v)+eps).
pub fn adam_step(
    w: &mut Vector,
    grad: &Vector,
    state: &mut OptState,
    hp: &HyperParams,
) -> Result<()> {
    check_step_shapes(w, grad, Some(state))?;
    let dir = adam_direction(grad, state, hp)?;
    apply_update(w, &dir, hp.lr, 0.0)
}

/// Adam plus decoupled weight decay: the shrink w <- w (1 - lr lambda) is
/// applied alongside the gradient-derived update.
pub fn adamw_step(
    w: &mut Vector,
    grad: &Vector,
    state: &mut OptState,
    hp: &HyperParams,
) -> Result<()> {
    check_step_shapes(w, grad, Some(state))?;
    let dir = adam_direction(grad, state, hp)?;
    apply_update(w, &dir, hp.lr, hp.weight_decay)
}

/// AdamW with the thresholded tangent projection applied to the Adam
/// update direction.
pub fn adamp_step(
    w: &mut Vector,
    grad: &Vector,
    state: &mut OptState,
    hp: &HyperParams,
    scope: &ProjectionScope,
) -> Result<StepReport> {
    check_step_shapes(w, grad, Some(state))?;
    let mut update = adam_direction(grad, state, hp)?;
    let raw_update_norm = norm(&update);
    let (projected, cosine) = project_update(w, grad, &mut update, scope, hp.delta)?;
    let applied_update_norm = norm(&update);
    apply_update(w, &update, hp.lr, hp.weight_decay)?;
    Ok(StepReport {
        projected,
        cosine,
        raw_update_norm,
        applied_update_norm,
    })
}

/// The kernels behind one name, for harness dispatch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    Gd,
    Momentum,
    Adam,
    AdamW,
    Sgdp,
    AdamP,
}

impl OptimizerKind {
    pub fn name(&self) -> &'static str {
        match self {
            OptimizerKind::Gd => "gd",
            OptimizerKind::Momentum => "momentum",
            OptimizerKind::Adam => "adam",
            OptimizerKind::AdamW => "adamw",
            OptimizerKind::Sgdp => "sgdp",
            OptimizerKind::AdamP => "adamp",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "gd" | "sgd" => Ok(OptimizerKind::Gd),
            "momentum" | "sgdm" => Ok(OptimizerKind::Momentum),
            "adam" => Ok(OptimizerKind::Adam),
            "adamw" => Ok(OptimizerKind::AdamW),
            "sgdp" => Ok(OptimizerKind::Sgdp),
            "adamp" => Ok(OptimizerKind::AdamP),
            other => Err(Error::Config(format!("unknown optimizer '{other}'"))),
        }
    }

    /// Whether this kind applies the thresholded projection.
    pub fn projects(&self) -> bool {
        matches!(self, OptimizerKind::Sgdp | OptimizerKind::AdamP)
    }

    /// Runs one step, synthesizing a [`StepReport`] for the kernels that do
    /// not produce one themselves.
    pub fn step(
        &self,
        w: &mut Vector,
        grad: &Vector,
        state: &mut OptState,
        hp: &HyperParams,
        scope: &ProjectionScope,
    ) -> Result<StepReport> {
        match self {
            OptimizerKind::Gd => {
                let cosine = cosine_abs_slices(w.as_slice(), grad.as_slice()).ok();
                gd_step(w, grad, hp.lr)?;
                state.t += 1;
                Ok(StepReport::unprojected(grad.l2_norm(), cosine))
            }
            OptimizerKind::Momentum => momentum_step(w, grad, state, hp),
            OptimizerKind::Adam => {
                let cosine = cosine_abs_slices(w.as_slice(), grad.as_slice()).ok();
                let dir = adam_direction(grad, state, hp)?;
                let n = norm(&dir);
                apply_update(w, &dir, hp.lr, 0.0)?;
                Ok(StepReport::unprojected(n, cosine))
            }
            OptimizerKind::AdamW => {
                let cosine = cosine_abs_slices(w.as_slice(), grad.as_slice()).ok();
                let dir = adam_direction(grad, state, hp)?;
                let n = norm(&dir);
                apply_update(w, &dir, hp.lr, hp.weight_decay)?;
                Ok(StepReport::unprojected(n, cosine))
            }
            OptimizerKind::Sgdp => sgdp_step(w, grad, state, hp, scope),
            OptimizerKind::AdamP => adamp_step(w, grad, state, hp, scope),
        }
    }

    /// The update direction the kernel would apply at this state, without
    /// stepping. Used by trajectory certification.
    pub fn peek_direction(
        &self,
        grad: &Vector,
        state: &OptState,
        hp: &HyperParams,
    ) -> Result<Vec<f64>> {
        let mut scratch = state.clone();
        match self {
            OptimizerKind::Gd => Ok(grad.as_slice().to_vec()),
            OptimizerKind::Momentum | OptimizerKind::Sgdp => {
                momentum_direction(grad, &mut scratch, hp)
            }
            OptimizerKind::Adam | OptimizerKind::AdamW | OptimizerKind::AdamP => {
                adam_direction(grad, &mut scratch, hp)
            }
        }
    }
}
