//! Subcommand implementations. Each writes its artifacts under the configured
//! output directory and returns the report it wrote.

use std::path::Path;

use mtsfm_core::objective::{default_fd_step, max_relative_error};
use mtsfm_core::{
    ambiguity_surface, autocorrelation, finite_difference_gradient, generate_seed, rms_bandwidth,
    spectrum, synthesize_waveform, CoefficientVector, CorrelationProfile, Objective,
    ObjectiveConfig, SampledWaveform, WaveformConfig,
};

use crate::config::{ObjectiveSection, OutputSection, ScenarioConfig};
use crate::error::{CliError, Result};
use crate::files::{
    ensure_dir, write_acf, write_ambiguity, write_spectrum, write_toml, write_trace,
    CoefficientFile,
};
use crate::report::{
    measure, EvaluateReport, GradcheckCase, GradcheckReport, MetricChange, OptimizeReport,
    RunSummary, SynthReport,
};

/// Largest `L` accepted by `gradcheck`.
pub const GRADCHECK_MAX_HARMONICS: usize = 32;
pub const GRADCHECK_TOLERANCE: f64 = 1e-4;
/// Random draws per (p, feasibility) pair.
const GRADCHECK_DRAWS: u64 = 3;
/// Scale that pushes a seed-bandwidth draw past the upper RMS bound.
const INFEASIBLE_SCALE: f64 = 1.25;
/// Cases closer than this (in violation units) to a constraint kink are redrawn.
const KINK_MARGIN: f64 = 0.01;
/// The zoomed ACF spans this many mainlobe widths on each side of lag 0.
pub const ZOOM_MAINLOBE_WIDTHS: usize = 10;

/// ACF and spectrum files for one waveform, tagged `acf_<tag>.csv` and so on.
fn emit_waveform_files(
    dir: &Path,
    tag: &str,
    s: &SampledWaveform,
    r: &CorrelationProfile,
    null: Option<usize>,
    out: &OutputSection,
) -> Result<()> {
    if out.acf {
        write_acf(&dir.join(format!("acf_{tag}.csv")), r, None)?;
    }
    if let (true, Some(k)) = (out.zoomed_acf, null) {
        // a mainlobe is 2k samples wide
        let half = 2 * k * ZOOM_MAINLOBE_WIDTHS;
        write_acf(&dir.join(format!("acf_zoom_{tag}.csv")), r, Some(half))?;
    }
    if out.spectrum {
        write_spectrum(&dir.join(format!("spectrum_{tag}.csv")), &spectrum(s, out.spectrum_pad)?)?;
    }
    Ok(())
}

pub fn synth(cfg: &ScenarioConfig) -> Result<SynthReport> {
    let (coeffs, wcfg) = cfg.seed()?;
    let dir = &cfg.outputs.directory;
    ensure_dir(dir)?;
    CoefficientFile::from_parts(&coeffs, &wcfg).write(&dir.join("seed.toml"))?;

    let s = synthesize_waveform(&coeffs, &wcfg)?;
    let r = autocorrelation(&s);
    let metrics = match measure(&coeffs, &wcfg, &r, cfg.objective.p, cfg.region(), None) {
        Ok(m) => Some(m),
        Err(CliError::Core(e)) if e.is_numerical_degeneracy() => None,
        Err(e) => return Err(e),
    };
    emit_waveform_files(dir, "seed", &s, &r, metrics.as_ref().map(|m| m.null_index), &cfg.outputs)?;
    let report = SynthReport { metrics };
    write_toml(&dir.join("summary.toml"), &report)?;
    Ok(report)
}

/// Runs the descent. A stalled line search still returns `Ok`; callers read
/// the status from the report.
pub fn optimize(cfg: &ScenarioConfig) -> Result<OptimizeReport> {
    let (seed, wcfg) = cfg.seed()?;
    let objcfg = cfg.objective_config(&seed, &wcfg)?;
    let dir = &cfg.outputs.directory;
    ensure_dir(dir)?;
    CoefficientFile::from_parts(&seed, &wcfg).write(&dir.join("seed.toml"))?;

    let null = objcfg.frozen_null_index;
    let p = objcfg.p;
    let s0 = synthesize_waveform(&seed, &wcfg)?;
    let r0 = autocorrelation(&s0);
    let before = measure(&seed, &wcfg, &r0, p, cfg.region(), Some(null))?;
    emit_waveform_files(dir, "seed", &s0, &r0, Some(null), &cfg.outputs)?;

    let result = mtsfm_core::optimize(&seed, &wcfg, &objcfg, &cfg.optimizer)?;
    let trace = &result.trace;
    if cfg.outputs.trace {
        write_trace(&dir.join("trace.csv"), trace)?;
    }
    let best = &result.coefficients;
    CoefficientFile::from_parts(best, &wcfg).write(&dir.join("optimized.toml"))?;
    let s1 = synthesize_waveform(best, &wcfg)?;
    let r1 = autocorrelation(&s1);
    let after = measure(best, &wcfg, &r1, p, cfg.region(), Some(null))?;
    emit_waveform_files(dir, "optimized", &s1, &r1, Some(null), &cfg.outputs)?;

    let first = trace.records.first().expect("trace holds the seed record");
    let last = trace.records.last().expect("trace holds the seed record");
    let report = OptimizeReport {
        run: RunSummary {
            status: trace.status,
            iterations: trace.iterations(),
            wall_time_s: trace.wall_time.as_secs_f64(),
            initial_objective: first.objective,
            final_objective: last.objective,
            objective_non_increasing: trace.objective_non_increasing(),
        },
        change: MetricChange::between(&before, &after),
        seed: before,
        optimized: after,
    };
    write_toml(&dir.join("summary.toml"), &report)?;
    Ok(report)
}

/// Metrics of a coefficient file. The mainlobe null is detected from the file
/// itself, so an unmodulated waveform fails with a degeneracy error.
pub fn evaluate(
    path: &Path,
    objective: &ObjectiveSection,
    outputs: Option<&OutputSection>,
) -> Result<EvaluateReport> {
    let (coeffs, wcfg) = CoefficientFile::read(path)?.into_parts()?;
    let s = synthesize_waveform(&coeffs, &wcfg)?;
    let r = autocorrelation(&s);
    let region = mtsfm_core::RegionSpec {
        outer_fraction: objective.outer_fraction,
    };
    let metrics = measure(&coeffs, &wcfg, &r, objective.p, region, None)?;
    let report = EvaluateReport { metrics };
    if let Some(out) = outputs {
        let dir = &out.directory;
        ensure_dir(dir)?;
        write_toml(&dir.join("evaluation.toml"), &report)?;
        emit_waveform_files(dir, "evaluated", &s, &r, Some(report.metrics.null_index), out)?;
        if out.ambiguity_bins > 0 {
            let bins = doppler_grid(out.ambiguity_bins, out.ambiguity_span_hz);
            let af = ambiguity_surface(&s, &bins)?;
            write_ambiguity(&dir.join("ambiguity.csv"), &af)?;
        }
    }
    Ok(report)
}

/// `n` evenly spaced Doppler shifts over `[-span, span]`.
pub fn doppler_grid(n: usize, span: f64) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    (0..n)
        .map(|i| -span + 2.0 * span * i as f64 / (n - 1) as f64)
        .collect()
}

/// Compares analytic and central-difference gradients at randomized points on
/// both sides of the RMS-bandwidth bounds, for `p = 2` and `p = 20`.
pub fn gradcheck(cfg: &ScenarioConfig) -> Result<GradcheckReport> {
    let (seed, wcfg) = cfg.seed()?;
    if wcfg.num_harmonics > GRADCHECK_MAX_HARMONICS {
        return Err(CliError::Validation(format!(
            "gradcheck supports at most {GRADCHECK_MAX_HARMONICS} harmonics, got {}",
            wcfg.num_harmonics
        )));
    }
    let target = rms_bandwidth(&seed, &wcfg);
    let mut cases = Vec::new();
    for p in [2, 20] {
        let mut objcfg = cfg.objective_config(&seed, &wcfg)?;
        objcfg.p = p;
        let objective = Objective::new(&wcfg, objcfg)?;
        for feasible in [true, false] {
            let scale = if feasible { 1.0 } else { INFEASIBLE_SCALE };
            let mut draw = cfg.seed.rng_seed;
            let mut accepted = 0;
            while accepted < GRADCHECK_DRAWS {
                draw += 1;
                let phi = generate_seed(&wcfg, target, draw)?.scaled(scale);
                let (c1, c2) = objective.constraint_values(&phi)?;
                if near_kink(c1, c2, &objcfg) {
                    continue;
                }
                cases.push(check_case(&objective, &phi, p, feasible, draw, c1, c2)?);
                accepted += 1;
            }
        }
    }
    let max_gisl = cases.iter().map(|c| c.gisl_error).fold(0.0, f64::max);
    let max_obj = cases.iter().map(|c| c.objective_error).fold(0.0, f64::max);
    let report = GradcheckReport {
        num_harmonics: wcfg.num_harmonics,
        tolerance: GRADCHECK_TOLERANCE,
        max_gisl_error: max_gisl,
        max_objective_error: max_obj,
        passed: cases.iter().all(|c| c.passed),
        cases,
    };
    let dir = &cfg.outputs.directory;
    ensure_dir(dir)?;
    write_toml(&dir.join("gradcheck.toml"), &report)?;
    Ok(report)
}

fn near_kink(c1: f64, c2: f64, cfg: &ObjectiveConfig) -> bool {
    let unit = cfg.violation_unit();
    c1.abs() / unit < KINK_MARGIN || c2.abs() / unit < KINK_MARGIN
}

fn check_case(
    objective: &Objective,
    phi: &CoefficientVector,
    p: u32,
    feasible: bool,
    draw: u64,
    c1: f64,
    c2: f64,
) -> Result<GradcheckCase> {
    let x = phi.to_stacked();
    let h = default_fd_step(&x);
    let fd_gisl = finite_difference_gradient(|v| objective.gisl_stacked(v), &x, h)?;
    let fd_obj = finite_difference_gradient(|v| objective.value_stacked(v), &x, h)?;
    let gisl_error = max_relative_error(&objective.gisl_gradient_stacked(&x)?, &fd_gisl);
    let objective_error = max_relative_error(&objective.gradient_stacked(&x)?, &fd_obj);
    Ok(GradcheckCase {
        p,
        feasible,
        draw,
        c1,
        c2,
        gisl_error,
        objective_error,
        passed: gisl_error < GRADCHECK_TOLERANCE && objective_error < GRADCHECK_TOLERANCE,
    })
}

/// Reads the coefficient file written by a previous run.
pub fn load_coefficients(path: &Path) -> Result<(CoefficientVector, WaveformConfig)> {
    CoefficientFile::read(path)?.into_parts()
}
