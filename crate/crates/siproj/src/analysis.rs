//! Closed-form norm-growth recurrences and trajectory certification.
//!
//! The recurrences replay how the squared weight norm of a scale-invariant
//! parameter must evolve given only the per-step update norms; comparing
//! the replay against an actual optimizer run certifies the run to machine
//! precision. `certify_trajectory` bundles those checks, the radial
//! accumulation ledger, the projected-growth equality, and the
//! coplanarity test over a logged run.

use crate::error::{Error, Result};
use crate::optim::OptimizerKind;
use crate::vecmath::Vector;
use serde::{Deserialize, Serialize};

/// Which growth law a recurrence follows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GrowthMode {
    Gd,
    Momentum(f64),
}

/// Squared-norm recurrence replay.
///
/// GD mode: ||w||^2 gains lr^2 ||p||^2 per step. Momentum mode gains an
/// extra 2 lr^2 S where S accumulates beta-discounted past update norms
/// online via S <- beta (S + ||p||^2); a quadratic-time reference of the
/// same sum is used by tests to cross-check the accumulator.
#[derive(Debug, Clone)]
pub struct NormRecurrence {
    mode: GrowthMode,
    norm_sq: f64,
    accum: f64,
    history: Vec<f64>,
}

impl NormRecurrence {
    pub fn new(mode: GrowthMode, initial_norm_sq: f64) -> Result<Self> {
        if initial_norm_sq < 0.0 {
            return Err(Error::DomainError(format!(
                "squared norm must be nonnegative, got {initial_norm_sq}"
            )));
        }
        if let GrowthMode::Momentum(beta) = mode {
            check_beta(beta)?;
        }
        Ok(Self {
            mode,
            norm_sq: initial_norm_sq,
            accum: 0.0,
            history: Vec::new(),
        })
    }

    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    /// Squared update norms consumed so far.
    pub fn history(&self) -> &[f64] {
        &self.history
    }

    /// Advances one step given the squared update norm of that step.
    pub fn advance(&mut self, lr: f64, p_norm_sq: f64) -> Result<f64> {
        if lr < 0.0 || p_norm_sq < 0.0 {
            return Err(Error::DomainError(
                "learning rate and squared update norm must be nonnegative".into(),
            ));
        }
        match self.mode {
            GrowthMode::Gd => {
                self.norm_sq = recur_gd(self.norm_sq, lr, p_norm_sq);
            }
            GrowthMode::Momentum(beta) => {
                self.norm_sq = self.norm_sq + lr * lr * p_norm_sq + 2.0 * lr * lr * self.accum;
                self.accum = beta * (self.accum + p_norm_sq);
            }
        }
        self.history.push(p_norm_sq);
        Ok(self.norm_sq)
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::DomainError(format!(
            "momentum coefficient must lie in [0, 1), got {beta}"
        )));
    }
    Ok(())
}

/// One GD growth step: norm_sq + lr^2 p_norm_sq.
pub fn recur_gd(norm_sq: f64, lr: f64, p_norm_sq: f64) -> f64 {
    norm_sq + lr * lr * p_norm_sq
}

/// Limit of the momentum-to-GD squared-norm growth ratio under matched
/// update norms: 1 + 2 beta / (1 - beta).
pub fn asymptotic_ratio(beta: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok(1.0 + 2.0 * beta / (1.0 - beta))
}

/// Feeds one shared sequence of squared update norms through both
/// recurrences and returns the growth ratio after each step (t = 1..=T).
///
/// `p_norm_sq_seq` must be positive and summable for the ratio to settle;
/// the returned sequence approaches [`asymptotic_ratio`] of `beta`.
pub fn ratio_convergence_sim(beta: f64, p_norm_sq_seq: &[f64], steps: usize) -> Result<Vec<f64>> {
    check_beta(beta)?;
    if p_norm_sq_seq.len() < steps {
        return Err(Error::DomainError(format!(
            "need {steps} update norms, got {}",
            p_norm_sq_seq.len()
        )));
    }
    if p_norm_sq_seq.iter().any(|&p| p < 0.0) {
        return Err(Error::DomainError("update norms must be nonnegative".into()));
    }
    let initial = 1.0;
    let mut gd = NormRecurrence::new(GrowthMode::Gd, initial)?;
    let mut gdm = NormRecurrence::new(GrowthMode::Momentum(beta), initial)?;
    let mut ratios = Vec::with_capacity(steps);
    for &p_sq in &p_norm_sq_seq[..steps] {
        gd.advance(1.0, p_sq)?;
        gdm.advance(1.0, p_sq)?;
        let gd_growth = gd.norm_sq() - initial;
        let gdm_growth = gdm.norm_sq() - initial;
        if gd_growth == 0.0 {
            // No growth yet on either side; the ratio is 1 by convention.
            ratios.push(1.0);
        } else {
            ratios.push(gdm_growth / gd_growth);
        }
    }
    Ok(ratios)
}

/// Geometric squared-update-norm sequence a * rho^k, the canonical
/// summable input for [`ratio_convergence_sim`].
pub fn geometric_update_norms(a: f64, rho: f64, len: usize) -> Vec<f64> {
    let mut seq = Vec::with_capacity(len);
    let mut value = a;
    for _ in 0..len {
        seq.push(value);
        value *= rho;
    }
    seq
}

/// Displacement of the normalized weights per step.
///
/// `exact` is the distance between the unit vectors; `approx` is the
/// nominal displacement over the new weight norm, which matches `exact` to
/// first order when the update is orthogonal to the weights.
pub fn effective_step(w_prev: &Vector, w_next: &Vector) -> Result<(f64, f64)> {
    let exact = w_next.unit()?.sub(&w_prev.unit()?)?.l2_norm();
    let approx = w_next.sub(w_prev)?.l2_norm() / w_next.l2_norm();
    Ok((exact, approx))
}

/// Everything certification needs about one optimizer step.
#[derive(Debug, Clone)]
pub struct StepSnapshot {
    pub lr: f64,
    pub w_before: Vector,
    pub w_after: Vector,
    /// Update direction before any projection (p).
    pub raw_update: Vector,
    /// Update direction actually applied (q; equals p when nothing fired).
    pub applied_update: Vector,
    pub projected: bool,
}

/// A logged run of one parameter block, rich enough to re-derive every
/// growth identity. Valid only for runs with zero weight decay.
#[derive(Debug, Clone)]
pub struct RunTrace {
    pub optimizer: OptimizerKind,
    pub beta: f64,
    pub snapshots: Vec<StepSnapshot>,
}

/// Scalar per-step log row; this is exactly what the trajectory CSV holds.
/// `weight_norm` and `effective_step` describe the post-update state;
/// `objective` and `cosine_wg` are measured at the step's start point.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub step: u64,
    pub weight_norm: f64,
    pub effective_step: f64,
    /// NaN when no slice had a nonzero gradient to test.
    pub cosine_wg: f64,
    pub objective: f64,
    pub projected: bool,
    pub raw_update_norm: f64,
    pub applied_update_norm: f64,
}

/// Residual tolerances per certification check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertTolerances {
    pub gd_growth: f64,
    pub momentum_growth: f64,
    pub ledger: f64,
    pub projected_growth: f64,
    pub coplanarity: f64,
}

impl Default for CertTolerances {
    fn default() -> Self {
        Self {
            gd_growth: 1e-8,
            momentum_growth: 1e-7,
            ledger: 1e-7,
            projected_growth: 1e-9,
            coplanarity: 1e-9,
        }
    }
}

impl CertTolerances {
    pub fn uniform(tol: f64) -> Self {
        Self {
            gd_growth: tol,
            momentum_growth: tol,
            ledger: tol,
            projected_growth: tol,
            coplanarity: tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    NotApplicable,
}

/// Outcome of one certified invariant.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub status: CheckStatus,
    pub max_residual: Option<f64>,
    pub tolerance: f64,
}

/// Pass/fail table produced by [`certify_trajectory`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificationReport {
    pub checks: Vec<CheckResult>,
}

impl CertificationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    /// Merges reports from several blocks: worst residual and status per
    /// check name.
    pub fn merge(reports: &[CertificationReport]) -> CertificationReport {
        let mut merged: Vec<CheckResult> = Vec::new();
        for report in reports {
            for check in &report.checks {
                match merged.iter_mut().find(|c| c.name == check.name) {
                    None => merged.push(check.clone()),
                    Some(existing) => {
                        existing.max_residual = match (existing.max_residual, check.max_residual) {
                            (Some(a), Some(b)) => Some(a.max(b)),
                            (a, b) => a.or(b),
                        };
                        existing.status = match (existing.status, check.status) {
                            (CheckStatus::Fail, _) | (_, CheckStatus::Fail) => CheckStatus::Fail,
                            (CheckStatus::Pass, _) | (_, CheckStatus::Pass) => CheckStatus::Pass,
                            _ => CheckStatus::NotApplicable,
                        };
                    }
                }
            }
        }
        CertificationReport { checks: merged }
    }
}

/// Relative residual between two sides of an identity, floored so that
/// near-zero magnitudes cannot inflate it.
fn relative_residual(lhs: f64, rhs: f64, scale: f64) -> f64 {
    (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(scale).max(1e-12)
}

/// 3x3 Gram determinant of unit-normalized vectors; near zero when the
/// three directions are coplanar.
pub fn unit_gram_det(a: &Vector, b: &Vector, c: &Vector) -> Result<f64> {
    let ua = a.unit()?;
    let ub = b.unit()?;
    let uc = c.unit()?;
    let d = |x: &Vector, y: &Vector| -> f64 {
        x.iter().zip(y).map(|(p, q)| p * q).sum()
    };
    let (ab, ac, bc) = (d(&ua, &ub), d(&ua, &uc), d(&ub, &uc));
    Ok(1.0 + 2.0 * ab * ac * bc - ab * ab - ac * ac - bc * bc)
}

/// Verifies the growth identities a run must satisfy on a scale-invariant
/// objective with zero weight decay. Checks that do not apply to the
/// optimizer family are reported as such rather than failing.
pub fn certify_trajectory(trace: &RunTrace, tol: &CertTolerances) -> CertificationReport {
    let mut checks = Vec::new();

    let is_gd = trace.optimizer == OptimizerKind::Gd;
    let is_momentum = trace.optimizer == OptimizerKind::Momentum;
    let projects = trace.optimizer.projects();

    // Plain GD growth: ||w'||^2 = ||w||^2 + lr^2 ||p||^2.
    checks.push(if is_gd {
        let mut max_res = 0.0f64;
        for s in &trace.snapshots {
            let lhs = s.w_after.l2_norm().powi(2);
            let rhs =
                s.w_before.l2_norm().powi(2) + s.lr * s.lr * s.raw_update.l2_norm().powi(2);
            max_res = max_res.max(relative_residual(lhs, rhs, 0.0));
        }
        check("gd_norm_growth", max_res, tol.gd_growth)
    } else {
        not_applicable("gd_norm_growth", tol.gd_growth)
    });

    // Momentum growth with the discounted accumulation term.
    checks.push(if is_momentum {
        let mut max_res = 0.0f64;
        let mut accum = 0.0f64; // sum of beta^(t-k) lr_k^2-weighted norms
        for s in &trace.snapshots {
            let p_sq = s.raw_update.l2_norm().powi(2);
            let lhs = s.w_after.l2_norm().powi(2);
            let rhs = s.w_before.l2_norm().powi(2) + s.lr * s.lr * p_sq + 2.0 * s.lr * accum;
            max_res = max_res.max(relative_residual(lhs, rhs, 0.0));
            accum = trace.beta * (accum + s.lr * p_sq);
        }
        check("momentum_norm_growth", max_res, tol.momentum_growth)
    } else {
        not_applicable("momentum_norm_growth", tol.momentum_growth)
    });

    // Radial accumulation ledger: w_t . p_t = -sum_k beta^(t-k) lr_k ||p_k||^2.
    // A GD update is the bare gradient, so its ledger runs with beta = 0
    // and the identity reduces to plain weight-gradient orthogonality.
    // Residuals are measured against the scale ||w|| ||p||.
    checks.push(if is_gd || is_momentum {
        let beta = if is_gd { 0.0 } else { trace.beta };
        let mut max_res = 0.0f64;
        let mut ledger = 0.0f64;
        for s in &trace.snapshots {
            let p_sq = s.raw_update.l2_norm().powi(2);
            let lhs: f64 = s
                .w_before
                .iter()
                .zip(&s.raw_update)
                .map(|(wi, pi)| wi * pi)
                .sum();
            let rhs = -ledger;
            let scale = s.w_before.l2_norm() * s.raw_update.l2_norm();
            max_res = max_res.max(relative_residual(lhs, rhs, scale));
            ledger = beta * (ledger + s.lr * p_sq);
        }
        check("radial_accumulation_ledger", max_res, tol.ledger)
    } else {
        not_applicable("radial_accumulation_ledger", tol.ledger)
    });

    // Projected growth: on steps where the projection fired,
    // ||w'||^2 = ||w||^2 + lr^2 ||q||^2 and ||q|| <= ||p||.
    checks.push(if projects {
        let mut max_res = 0.0f64;
        let mut saw_projection = false;
        for s in &trace.snapshots {
            if !s.projected {
                continue;
            }
            saw_projection = true;
            let q_norm = s.applied_update.l2_norm();
            let p_norm = s.raw_update.l2_norm();
            let lhs = s.w_after.l2_norm().powi(2);
            let rhs = s.w_before.l2_norm().powi(2) + s.lr * s.lr * q_norm * q_norm;
            max_res = max_res.max(relative_residual(lhs, rhs, 0.0));
            if q_norm > p_norm {
                max_res = max_res.max((q_norm - p_norm) / p_norm.max(1e-12));
            }
        }
        if saw_projection {
            check("projected_norm_growth", max_res, tol.projected_growth)
        } else {
            not_applicable("projected_norm_growth", tol.projected_growth)
        }
    } else {
        not_applicable("projected_norm_growth", tol.projected_growth)
    });

    // Coplanarity: the projected iterate direction stays in the plane of
    // the previous weights and the raw update, on the same side as the
    // unprojected iterate.
    checks.push(if projects {
        let mut max_res = 0.0f64;
        let mut saw = false;
        for s in &trace.snapshots {
            if !s.projected {
                continue;
            }
            let unprojected = Vector::new(
                s.w_before
                    .iter()
                    .zip(&s.raw_update)
                    .map(|(wi, pi)| wi - s.lr * pi)
                    .collect(),
            );
            let unprojected = match unprojected {
                Ok(v) if v.l2_norm() > 0.0 => v,
                _ => continue,
            };
            saw = true;
            let det = match unit_gram_det(&s.w_before, &unprojected, &s.w_after) {
                Ok(det) => det.abs(),
                Err(_) => continue,
            };
            max_res = max_res.max(det);
            // Same-side test in the tangent plane.
            let u_prev = s.w_before.unit().unwrap();
            let u_o = unprojected.unit().unwrap();
            let u_p = s.w_after.unit().unwrap();
            let d_o = u_o.sub(&u_prev).unwrap();
            let d_p = u_p.sub(&u_prev).unwrap();
            if d_o.l2_norm() > 1e-14 && d_p.l2_norm() > 1e-14 {
                let side: f64 = d_o.iter().zip(&d_p).map(|(a, b)| a * b).sum();
                if side <= 0.0 {
                    max_res = max_res.max(1.0);
                }
            }
        }
        if saw {
            check("update_coplanarity", max_res, tol.coplanarity)
        } else {
            not_applicable("update_coplanarity", tol.coplanarity)
        }
    } else {
        not_applicable("update_coplanarity", tol.coplanarity)
    });

    CertificationReport { checks }
}

fn check(name: &str, max_residual: f64, tolerance: f64) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        status: if max_residual <= tolerance {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        max_residual: Some(max_residual),
        tolerance,
    }
}

fn not_applicable(name: &str, tolerance: f64) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        status: CheckStatus::NotApplicable,
        max_residual: None,
        tolerance,
    }
}
