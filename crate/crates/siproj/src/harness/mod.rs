//! Config-driven desk experiments with reproducible artifacts.
//!
//! Every run writes a trajectory CSV and a summary JSON under its output
//! directory. Runs are pure functions of the config: the same config and
//! seed produce byte-identical artifacts.

mod config;
mod csv;

pub use config::{lr_schedule, ExperimentConfig, ExperimentId, Schedule};
pub use csv::{format_f64, read_trajectory_csv, write_trajectory_csv, TRAJECTORY_HEADER};

use crate::analysis::{
    certify_trajectory, effective_step, CertTolerances, CertificationReport, RunTrace,
    StepSnapshot, TrajectoryRecord,
};
use crate::error::{Error, Result};
use crate::objectives::{
    cartesian_from_spherical, CosineToy2d, Objective, Rosenbrock3d, SphericalPoint, TinyNormNet,
};
use crate::optim::{HyperParams, OptState, OptimizerKind};
use crate::rng::Rng;
use crate::vecmath::{ParamBlock, Vector};
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::time::Instant;

/// Separates the data stream from the init stream for seeded experiments.
const INIT_SEED_SALT: u64 = 0x5DEE_CE66_D00D_5EED;

/// Committed settings for the growth-identity suite: a short plain-GD run
/// and a short momentum run on the radial Rosenbrock, started where the
/// whole run stays inside the chart.
const LEMMA_STEPS: u64 = 50;
const LEMMA_LR: f64 = 1e-4;
const LEMMA_BETA: f64 = 0.9;
const LEMMA_START: (f64, f64) = (-0.5, 0.5); // chart angles (psi, phi)

/// One row of the detection-threshold sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeltaSweepRow {
    pub delta: f64,
    pub variant_detection_pct: f64,
    pub invariant_detection_pct: f64,
}

/// Result of replaying the momentum-to-GD growth-ratio recurrences.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatioSimSummary {
    pub beta: f64,
    pub final_ratio: f64,
    pub asymptotic: f64,
    pub relative_gap: f64,
}

/// Everything a finished run reports. `wall_clock_seconds` is informative
/// only and stays out of the serialized artifact so repeated runs produce
/// identical bytes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub experiment: String,
    pub optimizer: Option<String>,
    pub seed: u64,
    pub steps: u64,
    pub lr0: Option<f64>,
    pub schedule: Option<String>,
    pub terminal_objective: Option<f64>,
    pub initial_weight_norms: Vec<f64>,
    pub terminal_weight_norms: Vec<f64>,
    pub norm_growth: Vec<f64>,
    pub projected_steps: Option<u64>,
    pub certification: Option<CertificationReport>,
    pub delta_sweep: Option<Vec<DeltaSweepRow>>,
    pub ratio_sim: Option<RatioSimSummary>,
    #[serde(skip)]
    pub wall_clock_seconds: f64,
}

impl RunSummary {
    fn skeleton(config: &ExperimentConfig) -> Self {
        RunSummary {
            schema_version: 1,
            experiment: config.experiment.name().to_string(),
            optimizer: None,
            seed: config.seed,
            steps: config.steps,
            lr0: None,
            schedule: None,
            terminal_objective: None,
            initial_weight_norms: Vec::new(),
            terminal_weight_norms: Vec::new(),
            norm_growth: Vec::new(),
            projected_steps: None,
            certification: None,
            delta_sweep: None,
            ratio_sim: None,
            wall_clock_seconds: 0.0,
        }
    }
}

/// Serializes a summary with sorted keys, ending with a newline.
pub fn write_summary_json(summary: &RunSummary, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let value = serde_json::to_value(summary)
        .map_err(|e| Error::Config(format!("summary serialization failed: {e}")))?;
    let text = serde_json::to_string_pretty(&value)
        .map_err(|e| Error::Config(format!("summary serialization failed: {e}")))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

/// The full in-memory product of an optimizer run.
struct LoopOutput {
    records: Vec<TrajectoryRecord>,
    terminal_objective: f64,
    initial_weight_norms: Vec<f64>,
    terminal_weight_norms: Vec<f64>,
    projected_steps: u64,
    certification: Option<CertificationReport>,
}

/// Runs one experiment end to end and writes its artifacts.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunSummary> {
    let started = Instant::now();
    let mut summary = match config.experiment {
        ExperimentId::Toy2d | ExperimentId::Rosenbrock3d | ExperimentId::TinyNet => {
            let (objective, params) = build_objective(config)?;
            let out = optimizer_loop(config, objective.as_ref(), params, config.optimizer, &config.hp)?;
            write_trajectory_csv(&out.records, &config.out_dir.join("trajectory.csv"))?;
            let mut summary = RunSummary::skeleton(config);
            summary.optimizer = Some(config.optimizer.name().to_string());
            summary.lr0 = Some(config.hp.lr);
            summary.schedule = Some(config.schedule.name().to_string());
            summary.terminal_objective = Some(out.terminal_objective);
            summary.norm_growth = out
                .terminal_weight_norms
                .iter()
                .zip(&out.initial_weight_norms)
                .map(|(t, i)| t - i)
                .collect();
            summary.initial_weight_norms = out.initial_weight_norms;
            summary.terminal_weight_norms = out.terminal_weight_norms;
            summary.projected_steps = Some(out.projected_steps);
            summary.certification = out.certification;
            summary
        }
        ExperimentId::LemmaSuite => lemma_suite(config)?,
        ExperimentId::DeltaSweep => {
            let rows = delta_sweep(config)?;
            write_delta_csv(&rows, &config.out_dir.join("delta_sweep.csv"))?;
            let mut summary = RunSummary::skeleton(config);
            summary.steps = config.sweep_steps;
            summary.optimizer = Some(OptimizerKind::AdamP.name().to_string());
            summary.delta_sweep = Some(rows);
            summary
        }
        ExperimentId::RatioSim => {
            let beta = config.hp.beta;
            let seq = crate::analysis::geometric_update_norms(1.0, 0.99, config.steps as usize);
            let ratios =
                crate::analysis::ratio_convergence_sim(beta, &seq, config.steps as usize)?;
            let final_ratio = *ratios.last().ok_or_else(|| {
                Error::Config("ratio simulation needs at least one step".into())
            })?;
            let asymptotic = crate::analysis::asymptotic_ratio(beta)?;
            let mut summary = RunSummary::skeleton(config);
            summary.ratio_sim = Some(RatioSimSummary {
                beta,
                final_ratio,
                asymptotic,
                relative_gap: (final_ratio - asymptotic).abs() / asymptotic,
            });
            summary
        }
    };
    summary.wall_clock_seconds = started.elapsed().as_secs_f64();
    write_summary_json(&summary, &config.out_dir.join("summary.json"))?;
    Ok(summary)
}

fn build_objective(config: &ExperimentConfig) -> Result<(Box<dyn Objective>, Vec<ParamBlock>)> {
    match config.experiment {
        ExperimentId::Toy2d => {
            let target = Vector::from_slice(&[0.0, -1.0])?;
            let start = Vector::from_slice(&[0.001, 1.0])?;
            Ok((
                Box::new(CosineToy2d::new(target)?),
                vec![ParamBlock::whole(start)],
            ))
        }
        ExperimentId::Rosenbrock3d => {
            let objective = Rosenbrock3d::default();
            let c = objective.angle_scale();
            // Start above the unit sphere at scaled angles (-2, 2); the
            // minimum sits at scaled angles (1, 1).
            let start = SphericalPoint::new(1.0, -2.0 / c, 2.0 / c)?;
            let (x, y, z) = cartesian_from_spherical(start);
            Ok((
                Box::new(objective),
                vec![ParamBlock::whole(Vector::from_slice(&[x, y, z])?)],
            ))
        }
        ExperimentId::TinyNet => {
            let net = TinyNormNet::synthetic(config.seed, config.hidden)?;
            let mut rng = Rng::with_seed(config.seed ^ INIT_SEED_SALT);
            let params = net.init_params(&mut rng)?;
            Ok((Box::new(net), params))
        }
        other => Err(Error::Config(format!(
            "experiment '{}' does not run an optimizer loop",
            other.name()
        ))),
    }
}

fn flatten(parts: &[ParamBlock]) -> Result<Vector> {
    Vector::new(
        parts
            .iter()
            .flat_map(|p| p.values().iter().copied())
            .collect(),
    )
}

fn flatten_grads(grads: &[Vector]) -> Result<Vector> {
    Vector::new(grads.iter().flat_map(|g| g.iter().copied()).collect())
}

fn optimizer_loop(
    config: &ExperimentConfig,
    objective: &dyn Objective,
    mut params: Vec<ParamBlock>,
    optimizer: OptimizerKind,
    hp: &HyperParams,
) -> Result<LoopOutput> {
    let mut states: Vec<OptState> = params
        .iter()
        .map(|p| OptState::zeros(p.len()))
        .collect::<Result<_>>()?;

    // Growth identities only hold without weight decay and only for the
    // families they describe; other runs skip certification.
    let certifiable = hp.weight_decay == 0.0
        && matches!(
            optimizer,
            OptimizerKind::Gd | OptimizerKind::Momentum | OptimizerKind::Sgdp | OptimizerKind::AdamP
        );
    // Plain GD carries no momentum buffer regardless of the configured beta.
    let trace_beta = if optimizer == OptimizerKind::Gd { 0.0 } else { hp.beta };
    let mut traces: Vec<Option<RunTrace>> = (0..params.len())
        .map(|b| {
            (certifiable && objective.is_scale_invariant(b)).then(|| RunTrace {
                optimizer,
                beta: trace_beta,
                snapshots: Vec::new(),
            })
        })
        .collect();

    let initial_weight_norms: Vec<f64> =
        params.iter().map(|p| p.values().l2_norm()).collect();
    let mut records = Vec::with_capacity(config.steps as usize);
    let mut projected_steps = 0u64;

    for t in 0..config.steps {
        let lr_t = lr_schedule(config.schedule, hp.lr, t, config.steps)?;
        let hp_t = hp.clone().with_lr(lr_t)?;
        let (objective_value, grads) = objective.evaluate(&params)?;

        let before = flatten(&params)?;
        let grad_concat = flatten_grads(&grads)?;
        let cosine_wg = crate::vecmath::cosine_abs(&before, &grad_concat)
            .ok()
            .unwrap_or(f64::NAN);

        let mut any_projected = false;
        let mut raw_sq = 0.0;
        let mut applied_sq = 0.0;
        for (b, grad) in grads.iter().enumerate() {
            let w_before = params[b].values().clone();
            let peeked = traces[b]
                .as_ref()
                .map(|_| optimizer.peek_direction(grad, &states[b], &hp_t))
                .transpose()?;
            let mut w = w_before.clone();
            let scope = params[b].scope().clone();
            let report = optimizer.step(&mut w, grad, &mut states[b], &hp_t, &scope)?;
            params[b].set_values(w.clone())?;
            raw_sq += report.raw_update_norm * report.raw_update_norm;
            applied_sq += report.applied_update_norm * report.applied_update_norm;
            any_projected |= report.projected;
            if let Some(trace) = traces[b].as_mut() {
                let raw_update = Vector::new(peeked.expect("peeked alongside trace"))?;
                let applied: Vec<f64> = w_before
                    .iter()
                    .zip(&w)
                    .map(|(wb, wa)| (wb - wa) / lr_t)
                    .collect();
                trace.snapshots.push(StepSnapshot {
                    lr: lr_t,
                    w_before,
                    w_after: w,
                    raw_update,
                    applied_update: Vector::new(applied)?,
                    projected: report.projected,
                });
            }
        }

        let after = flatten(&params)?;
        let (effective, _) = effective_step(&before, &after)?;
        if any_projected {
            projected_steps += 1;
        }
        records.push(TrajectoryRecord {
            step: t,
            weight_norm: after.l2_norm(),
            effective_step: effective,
            cosine_wg,
            objective: objective_value,
            projected: any_projected,
            raw_update_norm: raw_sq.sqrt(),
            applied_update_norm: applied_sq.sqrt(),
        });
    }

    let tolerances = config
        .tolerance
        .map(CertTolerances::uniform)
        .unwrap_or_default();
    let block_reports: Vec<CertificationReport> = traces
        .iter()
        .flatten()
        .map(|trace| certify_trajectory(trace, &tolerances))
        .collect();
    let certification = if block_reports.is_empty() {
        None
    } else {
        Some(CertificationReport::merge(&block_reports))
    };

    Ok(LoopOutput {
        terminal_objective: objective.value(&params)?,
        initial_weight_norms,
        terminal_weight_norms: params.iter().map(|p| p.values().l2_norm()).collect(),
        records,
        projected_steps,
        certification,
    })
}

/// Certifies the growth identities on two committed short runs (plain GD
/// and heavy-ball momentum) over the radial Rosenbrock.
fn lemma_suite(config: &ExperimentConfig) -> Result<RunSummary> {
    let objective = Rosenbrock3d::default();
    let start = SphericalPoint::new(1.0, LEMMA_START.0, LEMMA_START.1)?;
    let (x, y, z) = cartesian_from_spherical(start);

    let run_one = |kind: OptimizerKind, beta: f64, tag: &str| -> Result<LoopOutput> {
        let params = vec![ParamBlock::whole(Vector::from_slice(&[x, y, z])?)];
        let hp = HyperParams::new(LEMMA_LR)?.with_momentum(beta)?;
        let mut sub = config.clone();
        sub.steps = LEMMA_STEPS;
        sub.schedule = Schedule::Constant;
        let out = optimizer_loop(&sub, &objective, params, kind, &hp)?;
        write_trajectory_csv(
            &out.records,
            &config.out_dir.join(format!("{tag}_trajectory.csv")),
        )?;
        Ok(out)
    };

    let gd = run_one(OptimizerKind::Gd, 0.0, "gd")?;
    let momentum = run_one(OptimizerKind::Momentum, LEMMA_BETA, "momentum")?;

    let reports: Vec<CertificationReport> = [&gd, &momentum]
        .iter()
        .filter_map(|o| o.certification.clone())
        .collect();

    let mut summary = RunSummary::skeleton(config);
    summary.steps = LEMMA_STEPS;
    summary.lr0 = Some(LEMMA_LR);
    summary.schedule = Some(Schedule::Constant.name().to_string());
    summary.terminal_objective = Some(momentum.terminal_objective);
    summary.initial_weight_norms = gd.initial_weight_norms.clone();
    summary.terminal_weight_norms = momentum.terminal_weight_norms.clone();
    summary.norm_growth = momentum
        .terminal_weight_norms
        .iter()
        .zip(&momentum.initial_weight_norms)
        .map(|(t, i)| t - i)
        .collect();
    summary.certification = Some(CertificationReport::merge(&reports));
    Ok(summary)
}

/// Runs the detector sweep: for each threshold, a fresh AdamP training run
/// on the tiny normalized net logs whether each block is classified as
/// scale-invariant at every step, and the table reports per-class accuracy.
pub fn delta_sweep(config: &ExperimentConfig) -> Result<Vec<DeltaSweepRow>> {
    let net = TinyNormNet::synthetic(config.seed, config.hidden)?;
    let mut rng = Rng::with_seed(config.seed ^ INIT_SEED_SALT);
    let init = net.init_params(&mut rng)?;
    delta_sweep_with_init(config, &net, &init)
}

/// [`delta_sweep`] from explicit initial parameters.
pub fn delta_sweep_with_init(
    config: &ExperimentConfig,
    net: &TinyNormNet,
    init: &[ParamBlock],
) -> Result<Vec<DeltaSweepRow>> {
    let mut rows = Vec::with_capacity(config.deltas.len());
    for &delta in &config.deltas {
        let hp = config.hp.clone().with_delta(delta)?;
        let mut params = init.to_vec();
        let mut states: Vec<OptState> = params
            .iter()
            .map(|p| OptState::zeros(p.len()))
            .collect::<Result<_>>()?;
        let mut invariant_hits = 0u64;
        let mut invariant_total = 0u64;
        let mut variant_hits = 0u64;
        let mut variant_total = 0u64;
        for _ in 0..config.sweep_steps {
            let (_, grads) = net.evaluate(&params)?;
            for (b, grad) in grads.iter().enumerate() {
                let detected =
                    match crate::optim::detect_scale_invariance(params[b].values(), grad, delta) {
                        Ok(d) => d,
                        // A zero gradient cannot be classified; the kernel
                        // takes the non-projecting branch, so count it as a
                        // variant classification.
                        Err(Error::ZeroNorm) => false,
                        Err(e) => return Err(e),
                    };
                if net.is_scale_invariant(b) {
                    invariant_total += 1;
                    invariant_hits += u64::from(detected);
                } else {
                    variant_total += 1;
                    variant_hits += u64::from(!detected);
                }
            }
            for (b, grad) in grads.iter().enumerate() {
                let mut w = params[b].values().clone();
                let scope = params[b].scope().clone();
                OptimizerKind::AdamP.step(&mut w, grad, &mut states[b], &hp, &scope)?;
                params[b].set_values(w)?;
            }
        }
        rows.push(DeltaSweepRow {
            delta,
            variant_detection_pct: 100.0 * variant_hits as f64 / variant_total.max(1) as f64,
            invariant_detection_pct: 100.0 * invariant_hits as f64 / invariant_total.max(1) as f64,
        });
    }
    Ok(rows)
}

fn write_delta_csv(rows: &[DeltaSweepRow], path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut text = String::from("delta,variant_detection_pct,invariant_detection_pct\n");
    for row in rows {
        text.push_str(&format!(
            "{},{},{}\n",
            format_f64(row.delta),
            format_f64(row.variant_detection_pct),
            format_f64(row.invariant_detection_pct),
        ));
    }
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_config(text: &str, dir: &Path) -> ExperimentConfig {
        ExperimentConfig::from_str(text)
            .unwrap()
            .with_out_dir(dir.to_path_buf())
    }

    #[test]
    fn toy2d_run_writes_deterministic_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let text = "experiment = toy2d\noptimizer = sgdp\nlr = 0.5\nsteps = 50\nseed = 3";
        let a_dir = dir.path().join("a");
        let b_dir = dir.path().join("b");
        run_experiment(&base_config(text, &a_dir)).unwrap();
        run_experiment(&base_config(text, &b_dir)).unwrap();
        for file in ["trajectory.csv", "summary.json"] {
            let a = std::fs::read(a_dir.join(file)).unwrap();
            let b = std::fs::read(b_dir.join(file)).unwrap();
            assert_eq!(a, b, "{file} differs between identical runs");
        }
    }

    #[test]
    fn toy2d_certification_passes_for_projected_run() {
        let dir = tempfile::tempdir().unwrap();
        let text = "experiment = toy2d\noptimizer = sgdp\nlr = 0.5\nsteps = 100";
        let summary = run_experiment(&base_config(text, dir.path())).unwrap();
        let cert = summary.certification.expect("certifiable run");
        assert!(cert.all_pass(), "{cert:?}");
        assert!(summary.projected_steps.unwrap() > 90);
    }

    #[test]
    fn summary_json_has_sorted_keys_and_schema_version() {
        let dir = tempfile::tempdir().unwrap();
        let text = "experiment = toy2d\noptimizer = gd\nlr = 0.1\nsteps = 5";
        run_experiment(&base_config(text, dir.path())).unwrap();
        let raw = std::fs::read_to_string(dir.path().join("summary.json")).unwrap();
        let value: serde_json::Value = serde_json::from_str(&raw).unwrap();
        assert_eq!(value["schema_version"], 1);
        let keys: Vec<&str> = value.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        let mut sorted = keys.clone();
        sorted.sort_unstable();
        assert_eq!(keys, sorted);
        assert!(!raw.contains("wall_clock"));
    }

    #[test]
    fn adam_runs_skip_certification() {
        let dir = tempfile::tempdir().unwrap();
        let text = "experiment = toy2d\noptimizer = adam\nlr = 0.05\nsteps = 10";
        let summary = run_experiment(&base_config(text, dir.path())).unwrap();
        assert!(summary.certification.is_none());
    }

    #[test]
    fn weight_decay_disables_certification() {
        let dir = tempfile::tempdir().unwrap();
        let text = "experiment = toy2d\noptimizer = sgdp\nlr = 0.1\nsteps = 10\nweight_decay = 0.01";
        let summary = run_experiment(&base_config(text, dir.path())).unwrap();
        assert!(summary.certification.is_none());
    }

    #[test]
    fn lemma_suite_passes_at_default_tolerances() {
        let dir = tempfile::tempdir().unwrap();
        let text = "experiment = lemma-suite";
        let summary = run_experiment(&base_config(text, dir.path())).unwrap();
        let cert = summary.certification.unwrap();
        assert!(cert.all_pass(), "{cert:?}");
        // Both growth laws must actually have been exercised.
        for name in ["gd_norm_growth", "momentum_norm_growth", "radial_accumulation_ledger"] {
            let check = cert.checks.iter().find(|c| c.name == name).unwrap();
            assert_eq!(check.status, crate::analysis::CheckStatus::Pass, "{name}");
        }
    }

    #[test]
    fn rosenbrock_trajectory_csv_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let text = "experiment = rosenbrock3d\noptimizer = gd\nlr = 0.00001\nsteps = 20";
        run_experiment(&base_config(text, dir.path())).unwrap();
        let path = dir.path().join("trajectory.csv");
        let records = read_trajectory_csv(&path).unwrap();
        assert_eq!(records.len(), 20);
        write_trajectory_csv(&records, &dir.path().join("copy.csv")).unwrap();
        assert_eq!(
            std::fs::read(dir.path().join("copy.csv")).unwrap(),
            std::fs::read(&path).unwrap()
        );
    }

    #[test]
    fn delta_sweep_classifies_both_classes_perfectly_in_recommended_range() {
        let dir = tempfile::tempdir().unwrap();
        let text = "experiment = delta-sweep\nlr = 0.01\nsweep_steps = 20\nseed = 11";
        let rows = delta_sweep(&base_config(text, dir.path())).unwrap();
        for row in &rows {
            assert_eq!(row.variant_detection_pct, 100.0, "delta {}", row.delta);
            assert_eq!(row.invariant_detection_pct, 100.0, "delta {}", row.delta);
        }
    }

    #[test]
    fn delta_sweep_classification_survives_rescaling_invariant_blocks() {
        // The detection test only sees the direction of w: rescaling an
        // invariant block leaves every classification along the run
        // unchanged (the gradient shrinks by 1/c, the cosine not at all).
        let net = TinyNormNet::synthetic(13, 8).unwrap();
        let mut rng = Rng::with_seed(13 ^ super::INIT_SEED_SALT);
        let mut params = net.init_params(&mut rng).unwrap();
        let mut states: Vec<OptState> = params
            .iter()
            .map(|p| OptState::zeros(p.len()).unwrap())
            .collect();
        let hp = HyperParams::new(0.01).unwrap();
        for _ in 0..20 {
            let (_, grads) = net.evaluate(&params).unwrap();
            for &delta in &[0.02, 0.05, 0.1, 0.2] {
                for b in 0..params.len() {
                    let baseline = crate::optim::detect_scale_invariance(
                        params[b].values(),
                        &grads[b],
                        delta,
                    )
                    .unwrap();
                    if !net.is_scale_invariant(b) {
                        continue;
                    }
                    for c in [0.5, 2.0] {
                        let mut rescaled = params.clone();
                        let scaled = rescaled[b].values().scale(c).unwrap();
                        rescaled[b].set_values(scaled).unwrap();
                        let (_, grads_rescaled) = net.evaluate(&rescaled).unwrap();
                        let detected = crate::optim::detect_scale_invariance(
                            rescaled[b].values(),
                            &grads_rescaled[b],
                            delta,
                        )
                        .unwrap();
                        assert_eq!(detected, baseline, "block {b}, c {c}, delta {delta}");
                    }
                }
            }
            for (b, grad) in grads.iter().enumerate() {
                let mut w = params[b].values().clone();
                let scope = params[b].scope().clone();
                OptimizerKind::AdamP
                    .step(&mut w, grad, &mut states[b], &hp, &scope)
                    .unwrap();
                params[b].set_values(w).unwrap();
            }
        }
    }

    #[test]
    fn independent_runs_execute_in_parallel_threads() {
        let dir = tempfile::tempdir().unwrap();
        let serial = base_config(
            "experiment = toy2d\noptimizer = sgdp\nlr = 0.5\nsteps = 30",
            &dir.path().join("serial"),
        );
        let expected = run_experiment(&serial).unwrap();
        let outputs: Vec<RunSummary> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..4)
                .map(|i| {
                    let config = serial
                        .clone()
                        .with_out_dir(dir.path().join(format!("worker{i}")));
                    scope.spawn(move || run_experiment(&config).unwrap())
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        for summary in outputs {
            assert_eq!(summary.terminal_objective, expected.terminal_objective);
            assert_eq!(summary.terminal_weight_norms, expected.terminal_weight_norms);
        }
    }

    #[test]
    fn ratio_sim_summary_reports_gap() {
        let dir = tempfile::tempdir().unwrap();
        let text = "experiment = ratio-sim\nbeta = 0.9\nsteps = 5000";
        let summary = run_experiment(&base_config(text, dir.path())).unwrap();
        let sim = summary.ratio_sim.unwrap();
        assert!((sim.final_ratio - 19.0).abs() / 19.0 <= 0.02);
        approx::assert_relative_eq!(sim.asymptotic, 19.0, max_relative = 1e-12);
    }
}
