//! `siproj` command line: run experiments, sweep detection thresholds,
//! certify growth identities, replay the growth-ratio recurrences.
//!
//! Exit codes: 0 on success, 2 when `--strict` certification fails, 1 on
//! config or IO errors.

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use siproj::analysis::CheckStatus;
use siproj::harness::{delta_sweep, run_experiment, ExperimentConfig, ExperimentId, RunSummary};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "siproj", version, about = "Projection-aware optimizers for scale-invariant parameters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a config file.
    Run {
        /// Path to a key = value config file.
        config: PathBuf,
        /// Override the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Exit nonzero if trajectory certification fails.
        #[arg(long)]
        strict: bool,
    },
    /// Sweep detection thresholds over the tiny normalized net.
    SweepDelta {
        /// Path to a delta-sweep config file.
        config: PathBuf,
    },
    /// Certify the norm-growth identities on committed desk runs.
    Lemmas {
        /// Uniform residual tolerance for every check.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Output directory for artifacts.
        #[arg(long, default_value = "runs/lemma-suite")]
        out: PathBuf,
    },
    /// Replay the momentum-to-GD norm-growth ratio recurrences.
    RatioSim {
        /// Momentum coefficient in [0, 1).
        #[arg(long)]
        beta: f64,
        /// Number of recurrence steps.
        #[arg(long)]
        steps: u64,
        /// Output directory for the summary.
        #[arg(long, default_value = "runs/ratio-sim")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> siproj::Result<ExitCode> {
    match cli.command {
        Command::Run {
            config,
            seed,
            out,
            strict,
        } => {
            let mut config = ExperimentConfig::from_file(&config)?;
            if let Some(seed) = seed {
                config = config.with_seed(seed);
            }
            if let Some(out) = out {
                config = config.with_out_dir(out);
            }
            let summary = run_experiment(&config)?;
            print_summary(&summary);
            let failed = summary
                .certification
                .as_ref()
                .is_some_and(|cert| !cert.all_pass());
            if failed {
                eprintln!("certification FAILED");
                if strict {
                    return Ok(ExitCode::from(2));
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::SweepDelta { config } => {
            let config = ExperimentConfig::from_file(&config)?;
            if config.experiment != ExperimentId::DeltaSweep {
                return Err(siproj::Error::Config(
                    "sweep-delta needs a config with experiment = delta-sweep".into(),
                ));
            }
            let rows = delta_sweep(&config)?;
            println!("delta     variant%   invariant%");
            for row in &rows {
                println!(
                    "{:<9} {:<10.2} {:<10.2}",
                    row.delta, row.variant_detection_pct, row.invariant_detection_pct
                );
            }
            run_experiment(&config)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Lemmas { tolerance, out } => {
            let mut config = ExperimentConfig::from_str("experiment = lemma-suite")?;
            config.tolerance = tolerance;
            config = config.with_out_dir(out);
            let summary = run_experiment(&config)?;
            let cert = summary.certification.as_ref().expect("lemma suite certifies");
            for check in &cert.checks {
                let status = match check.status {
                    CheckStatus::Pass => "pass",
                    CheckStatus::Fail => "FAIL",
                    CheckStatus::NotApplicable => "n/a ",
                };
                match check.max_residual {
                    Some(res) => println!(
                        "{status}  {:<28} max residual {res:.3e} (tolerance {:.1e})",
                        check.name, check.tolerance
                    ),
                    None => println!("{status}  {:<28}", check.name),
                }
            }
            if cert.all_pass() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(2))
            }
        }
        Command::RatioSim { beta, steps, out } => {
            let text = format!("experiment = ratio-sim\nbeta = {beta}\nsteps = {steps}");
            let config = ExperimentConfig::from_str(&text)?.with_out_dir(out);
            let summary = run_experiment(&config)?;
            let sim = summary.ratio_sim.as_ref().expect("ratio sim output");
            println!(
                "beta {}: ratio after {} steps = {:.6} (limit {:.6}, relative gap {:.3e})",
                sim.beta, steps, sim.final_ratio, sim.asymptotic, sim.relative_gap
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn print_summary(summary: &RunSummary) {
    println!(
        "{} [{}] seed {} steps {}",
        summary.experiment,
        summary.optimizer.as_deref().unwrap_or("-"),
        summary.seed,
        summary.steps
    );
    if let Some(objective) = summary.terminal_objective {
        println!("  terminal objective  {objective:.12e}");
    }
    if !summary.terminal_weight_norms.is_empty() {
        let initial: f64 = summary
            .initial_weight_norms
            .iter()
            .map(|n| n * n)
            .sum::<f64>()
            .sqrt();
        let terminal: f64 = summary
            .terminal_weight_norms
            .iter()
            .map(|n| n * n)
            .sum::<f64>()
            .sqrt();
        println!("  weight norm         {initial:.6} -> {terminal:.6}");
    }
    if let Some(projected) = summary.projected_steps {
        println!("  projected steps     {projected}");
    }
    if let Some(cert) = &summary.certification {
        let verdict = if cert.all_pass() { "pass" } else { "FAIL" };
        println!("  certification       {verdict}");
    }
    println!("  wall clock          {:.3}s", summary.wall_clock_seconds);
}
