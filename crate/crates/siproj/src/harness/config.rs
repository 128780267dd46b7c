//! Flat key-value experiment configs.
//!
//! Configs are INI-style `key = value` lines with `#` comments; every key
//! can also be overridden from the CLI. Unknown keys are errors so typos
//! cannot silently change an experiment.

use crate::error::{Error, Result};
use crate::optim::{HyperParams, OptimizerKind};
use std::path::{Path, PathBuf};

/// Which desk experiment to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentId {
    Toy2d,
    Rosenbrock3d,
    TinyNet,
    LemmaSuite,
    DeltaSweep,
    RatioSim,
}

impl ExperimentId {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentId::Toy2d => "toy2d",
            ExperimentId::Rosenbrock3d => "rosenbrock3d",
            ExperimentId::TinyNet => "tinynet",
            ExperimentId::LemmaSuite => "lemma-suite",
            ExperimentId::DeltaSweep => "delta-sweep",
            ExperimentId::RatioSim => "ratio-sim",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "toy2d" => Ok(ExperimentId::Toy2d),
            "rosenbrock3d" => Ok(ExperimentId::Rosenbrock3d),
            "tinynet" => Ok(ExperimentId::TinyNet),
            "lemma-suite" => Ok(ExperimentId::LemmaSuite),
            "delta-sweep" => Ok(ExperimentId::DeltaSweep),
            "ratio-sim" => Ok(ExperimentId::RatioSim),
            other => Err(Error::Config(format!("unknown experiment '{other}'"))),
        }
    }
}

/// Learning-rate schedule over a fixed step budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    Constant,
    LinearDecay,
    Cosine,
}

impl Schedule {
    pub fn name(&self) -> &'static str {
        match self {
            Schedule::Constant => "constant",
            Schedule::LinearDecay => "linear-decay",
            Schedule::Cosine => "cosine",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "constant" => Ok(Schedule::Constant),
            "linear-decay" | "linear" => Ok(Schedule::LinearDecay),
            "cosine" => Ok(Schedule::Cosine),
            other => Err(Error::Config(format!("unknown schedule '{other}'"))),
        }
    }
}

/// Learning rate at step `t` of a `total`-step run.
pub fn lr_schedule(kind: Schedule, lr0: f64, t: u64, total: u64) -> Result<f64> {
    if total == 0 || t > total {
        return Err(Error::DomainError(format!(
            "schedule step {t} outside 0..={total}"
        )));
    }
    let frac = t as f64 / total as f64;
    Ok(match kind {
        Schedule::Constant => lr0,
        Schedule::LinearDecay => lr0 * (1.0 - frac),
        Schedule::Cosine => lr0 * (1.0 + (std::f64::consts::PI * frac).cos()) / 2.0,
    })
}

/// A fully resolved experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub optimizer: OptimizerKind,
    pub hp: HyperParams,
    pub schedule: Schedule,
    pub steps: u64,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Hidden width of the tiny normalized net.
    pub hidden: usize,
    /// Thresholds visited by the detection sweep.
    pub deltas: Vec<f64>,
    /// Steps logged per threshold during the detection sweep.
    pub sweep_steps: u64,
    /// Uniform certification tolerance; per-check defaults when absent.
    pub tolerance: Option<f64>,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_str(&text)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn from_str(text: &str) -> Result<Self> {
        let mut experiment = None;
        let mut optimizer = OptimizerKind::Gd;
        let mut lr = 0.01;
        let mut beta = 0.9;
        let mut beta1 = 0.9;
        let mut beta2 = 0.999;
        let mut epsilon = 1e-8;
        let mut weight_decay = 0.0;
        let mut delta = 0.1;
        let mut nesterov = false;
        let mut schedule = Schedule::Constant;
        let mut steps = 500u64;
        let mut seed = 0u64;
        let mut out_dir: Option<PathBuf> = None;
        let mut hidden = 8usize;
        let mut deltas = vec![0.02, 0.05, 0.1, 0.2];
        let mut sweep_steps = 100u64;
        let mut tolerance = None;

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            let key = key.trim().to_ascii_lowercase();
            let value = value.trim();
            match key.as_str() {
                "experiment" => experiment = Some(ExperimentId::parse(value)?),
                "optimizer" => optimizer = OptimizerKind::parse(value)?,
                "lr" => lr = parse_num(&key, value)?,
                "beta" => beta = parse_num(&key, value)?,
                "beta1" => beta1 = parse_num(&key, value)?,
                "beta2" => beta2 = parse_num(&key, value)?,
                "epsilon" => epsilon = parse_num(&key, value)?,
                "weight_decay" => weight_decay = parse_num(&key, value)?,
                "delta" => delta = parse_num(&key, value)?,
                "nesterov" => nesterov = parse_bool(&key, value)?,
                "schedule" => schedule = Schedule::parse(value)?,
                "steps" => steps = parse_int(&key, value)?,
                "seed" => seed = parse_int(&key, value)?,
                "out" => out_dir = Some(PathBuf::from(value)),
                "hidden" => hidden = parse_int::<usize>(&key, value)?,
                "deltas" => {
                    deltas = value
                        .split(',')
                        .map(|v| parse_num("deltas", v.trim()))
                        .collect::<Result<Vec<f64>>>()?;
                }
                "sweep_steps" => sweep_steps = parse_int(&key, value)?,
                "tolerance" => tolerance = Some(parse_num(&key, value)?),
                other => {
                    return Err(Error::Config(format!(
                        "line {}: unknown key '{other}'",
                        lineno + 1
                    )))
                }
            }
        }

        let experiment =
            experiment.ok_or_else(|| Error::Config("missing 'experiment' key".into()))?;
        if steps < 1 {
            return Err(Error::Config("steps must be at least 1".into()));
        }
        if !(lr > 0.0 && lr <= 10.0) {
            return Err(Error::Config(format!(
                "lr must lie in (0, 10], got {lr}"
            )));
        }
        if deltas.is_empty() {
            return Err(Error::Config("deltas must not be empty".into()));
        }
        let hp = HyperParams::new(lr)
            .and_then(|hp| hp.with_momentum(beta))
            .and_then(|hp| hp.with_adam_betas(beta1, beta2))
            .and_then(|hp| hp.with_weight_decay(weight_decay))
            .and_then(|hp| hp.with_delta(delta))
            .map(|hp| hp.with_nesterov(nesterov))
            .map_err(|e| Error::Config(format!("bad hyperparameters: {e}")))?;
        let hp = HyperParams {
            epsilon,
            ..hp
        };
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::Config(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }

        let out_dir = out_dir.unwrap_or_else(|| {
            // The sweep, lemma, and ratio experiments fix their own
            // optimizers; naming the directory after the config's would
            // mislead.
            let takes_optimizer = matches!(
                experiment,
                ExperimentId::Toy2d | ExperimentId::Rosenbrock3d | ExperimentId::TinyNet
            );
            if takes_optimizer {
                PathBuf::from(format!(
                    "runs/{}-{}-seed{seed}",
                    experiment.name(),
                    optimizer.name()
                ))
            } else {
                PathBuf::from(format!("runs/{}-seed{seed}", experiment.name()))
            }
        });

        Ok(ExperimentConfig {
            experiment,
            optimizer,
            hp,
            schedule,
            steps,
            seed,
            out_dir,
            hidden,
            deltas,
            sweep_steps,
            tolerance,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_out_dir(mut self, out_dir: PathBuf) -> Self {
        self.out_dir = out_dir;
        self
    }
}

fn parse_num(key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("key '{key}': '{value}' is not a number")))
}

fn parse_int<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse::<T>()
        .map_err(|_| Error::Config(format!("key '{key}': '{value}' is not an integer")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(Error::Config(format!(
            "key '{key}': '{other}' is not a boolean"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn schedule_endpoints() {
        assert_eq!(lr_schedule(Schedule::LinearDecay, 0.4, 100, 100).unwrap(), 0.0);
        assert_eq!(lr_schedule(Schedule::Cosine, 0.4, 0, 100).unwrap(), 0.4);
        assert!(lr_schedule(Schedule::Cosine, 0.4, 100, 100).unwrap() < 1e-17);
        assert_relative_eq!(
            lr_schedule(Schedule::Cosine, 0.4, 50, 100).unwrap(),
            0.2,
            max_relative = 1e-12
        );
        assert_eq!(lr_schedule(Schedule::Constant, 0.4, 77, 100).unwrap(), 0.4);
    }

    #[test]
    fn schedule_domain_checks() {
        assert!(lr_schedule(Schedule::Constant, 0.4, 101, 100).is_err());
        assert!(lr_schedule(Schedule::Constant, 0.4, 0, 0).is_err());
    }

    #[test]
    fn parses_full_config() {
        let text = "\
# toy pair
experiment = rosenbrock3d
optimizer = sgdp
lr = 0.0003
beta = 0.9
schedule = linear-decay
steps = 500
seed = 7
weight_decay = 0.0
delta = 0.1
";
        let cfg = ExperimentConfig::from_str(text).unwrap();
        assert_eq!(cfg.experiment, ExperimentId::Rosenbrock3d);
        assert_eq!(cfg.optimizer, crate::optim::OptimizerKind::Sgdp);
        assert_eq!(cfg.schedule, Schedule::LinearDecay);
        assert_eq!(cfg.steps, 500);
        assert_eq!(cfg.seed, 7);
        assert_relative_eq!(cfg.hp.lr, 0.0003);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(matches!(
            ExperimentConfig::from_str("experiment = toy2d\nlearningrate = 1"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ExperimentConfig::from_str("experiment = toy2d\nlr = fast"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ExperimentConfig::from_str("optimizer = gd"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ExperimentConfig::from_str("experiment = toy2d\nlr = 11"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ExperimentConfig::from_str("experiment = toy2d\nsteps = 0"),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn deltas_list_parses() {
        let cfg = ExperimentConfig::from_str(
            "experiment = delta-sweep\ndeltas = 0.02, 0.05, 0.1\nsweep_steps = 10",
        )
        .unwrap();
        assert_eq!(cfg.deltas, vec![0.02, 0.05, 0.1]);
        assert_eq!(cfg.sweep_steps, 10);
    }

    #[test]
    fn overrides_apply() {
        let cfg = ExperimentConfig::from_str("experiment = toy2d")
            .unwrap()
            .with_seed(99)
            .with_out_dir(PathBuf::from("/tmp/x"));
        assert_eq!(cfg.seed, 99);
        assert_eq!(cfg.out_dir, PathBuf::from("/tmp/x"));
    }
}
