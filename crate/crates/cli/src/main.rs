use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mtsfm_cli::commands;
use mtsfm_cli::config::{ObjectiveSection, OutputSection};
use mtsfm_cli::report::WaveformMetrics;
use mtsfm_cli::{CliError, Overrides, Result, ScenarioConfig};
use mtsfm_core::RunStatus;

#[derive(Parser)]
#[command(name = "mtsfm", version, about = "MTSFM waveform synthesis and sidelobe optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the seed waveform and write its coefficients, ACF and spectrum.
    Synth(Common),
    /// Optimize the seed and write before/after data, the trace and a summary.
    Optimize(Common),
    /// Report metrics of a coefficient file.
    Evaluate {
        /// Coefficient file written by synth or optimize.
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Compare analytic and finite-difference gradients.
    Gradcheck(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario config (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, replacing outputs.directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed, replacing seed.rng_seed.
    #[arg(long)]
    seed: Option<u64>,
    /// GISL order, replacing objective.p.
    #[arg(long)]
    p: Option<u32>,
    /// Outer region fraction, replacing objective.outer_fraction.
    #[arg(long)]
    region: Option<f64>,
    /// Suppress the console summary.
    #[arg(long)]
    quiet: bool,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            rng_seed: self.seed,
            p: self.p,
            outer_fraction: self.region,
            out: self.out.clone(),
        }
    }

    fn scenario(&self) -> Result<ScenarioConfig> {
        let path = self
            .config
            .as_deref()
            .ok_or_else(|| CliError::Validation("--config is required".into()))?;
        let mut cfg = ScenarioConfig::load(path)?;
        cfg.apply(&self.overrides())?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(c) => {
            let cfg = c.scenario()?;
            let report = commands::synth(&cfg)?;
            if !c.quiet {
                println!("[synth] wrote {}", cfg.outputs.directory.display());
                match &report.metrics {
                    Some(m) => print_metrics("seed", m),
                    None => println!("[synth] no mainlobe null found; metrics skipped"),
                }
            }
            Ok(())
        }
        Command::Optimize(c) => {
            let cfg = c.scenario()?;
            let report = commands::optimize(&cfg)?;
            if !c.quiet {
                let r = &report.run;
                println!(
                    "[optimize] {} after {} iterations ({:.2} s)",
                    r.status, r.iterations, r.wall_time_s
                );
                print_metrics("seed", &report.seed);
                print_metrics("optimized", &report.optimized);
                let d = &report.change;
                println!(
                    "[optimize] PSLR improvement {:.2} dB, ISL reduction {:.2} dB, rms ratio {:.4}",
                    d.pslr_improvement_db, d.isl_reduction_db, d.rms_ratio
                );
            }
            if report.run.status == RunStatus::LineSearchStalled {
                return Err(CliError::Stalled {
                    iterations: report.run.iterations,
                    dir: cfg.outputs.directory,
                });
            }
            Ok(())
        }
        Command::Evaluate { file, common } => {
            let (objective, outputs) = evaluate_settings(&common)?;
            let report = commands::evaluate(&file, &objective, outputs.as_ref())?;
            if !common.quiet {
                print_metrics(&display_name(&file), &report.metrics);
            }
            Ok(())
        }
        Command::Gradcheck(c) => {
            let cfg = c.scenario()?;
            let report = commands::gradcheck(&cfg)?;
            if !c.quiet {
                for case in &report.cases {
                    println!(
                        "[gradcheck] p={:<2} {:<10} draw {:<3} gisl {:.3e} objective {:.3e} {}",
                        case.p,
                        if case.feasible { "feasible" } else { "infeasible" },
                        case.draw,
                        case.gisl_error,
                        case.objective_error,
                        if case.passed { "ok" } else { "FAIL" }
                    );
                }
                println!(
                    "[gradcheck] L={} max relative error {:.3e} (tolerance {:.0e}): {}",
                    report.num_harmonics,
                    report.max_gisl_error.max(report.max_objective_error),
                    report.tolerance,
                    if report.passed { "pass" } else { "fail" }
                );
            }
            Ok(())
        }
    }
}

/// `evaluate` works without a config; defaults apply and nothing is written
/// unless `--out` or a config is given.
fn evaluate_settings(c: &Common) -> Result<(ObjectiveSection, Option<OutputSection>)> {
    if c.config.is_some() {
        let cfg = c.scenario()?;
        return Ok((cfg.objective, Some(cfg.outputs)));
    }
    let mut objective = ObjectiveSection::default();
    if let Some(p) = c.p {
        objective.p = p;
    }
    if let Some(f) = c.region {
        objective.outer_fraction = f;
    }
    if objective.p < 2 {
        return Err(CliError::Validation(format!("--p must be >= 2, got {}", objective.p)));
    }
    let outputs = c.out.as_ref().map(|dir| OutputSection {
        directory: dir.clone(),
        ..OutputSection::default()
    });
    Ok((objective, outputs))
}

fn display_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn print_metrics(label: &str, m: &WaveformMetrics) {
    println!(
        "[{label}] M={} null={} PSLR {:.2} dB, ISL {:.2} dB, GISL(p={}) {:.2} dB, rms bandwidth {:.6e} (rad/s)^2",
        m.num_samples, m.null_index, m.pslr_db, m.isl_db, m.p, m.gisl_db, m.rms_bandwidth
    );
}
