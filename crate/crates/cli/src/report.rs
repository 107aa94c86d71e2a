//! Metric summaries written as structured text.

use mtsfm_core::{
    build_masks, find_mainlobe_null, gisl, pslr, rms_bandwidth, swept_bandwidth, CoefficientVector,
    CorrelationProfile, RegionSpec, RunStatus, WaveformConfig,
};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::files::to_db;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveformMetrics {
    pub num_samples: usize,
    /// Mainlobe null `k` used for the masks, in samples.
    pub null_index: usize,
    /// First local minimum of this ACF, when one exists inside the search window.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detected_null_index: Option<usize>,
    pub null_delay_s: f64,
    /// Twice the null delay.
    pub mainlobe_width_s: f64,
    pub pslr_db: f64,
    /// p = 2 GISL over the configured region.
    pub isl_db: f64,
    /// p = 2 GISL over all lags beyond the null.
    pub isl_full_db: f64,
    pub p: u32,
    pub gisl_db: f64,
    /// (rad/s)^2.
    pub rms_bandwidth: f64,
    /// Peak-to-peak instantaneous frequency excursion in Hz.
    pub swept_bandwidth_hz: f64,
}

/// Measures `r` against masks built from `null` (detected from `r` when `None`).
pub fn measure(
    coeffs: &CoefficientVector,
    wcfg: &WaveformConfig,
    r: &CorrelationProfile,
    p: u32,
    region: RegionSpec,
    null: Option<usize>,
) -> Result<WaveformMetrics> {
    let detected = find_mainlobe_null(r);
    let null_index = match (null, &detected) {
        (Some(k), _) => k,
        (None, Ok(k)) => *k,
        (None, Err(e)) => return Err(e.clone().into()),
    };
    let m = r.num_samples();
    let masks = build_masks(region, null_index, m)?;
    let full = build_masks(RegionSpec::FULL, null_index, m)?;
    let delay = null_index as f64 * r.lag_spacing;
    Ok(WaveformMetrics {
        num_samples: m,
        null_index,
        detected_null_index: detected.ok(),
        null_delay_s: delay,
        mainlobe_width_s: 2.0 * delay,
        pslr_db: pslr(r, null_index)?,
        isl_db: to_db(gisl(r, &masks, 2)?),
        isl_full_db: to_db(gisl(r, &full, 2)?),
        p,
        gisl_db: to_db(gisl(r, &masks, p)?),
        rms_bandwidth: rms_bandwidth(coeffs, wcfg),
        swept_bandwidth_hz: swept_bandwidth(coeffs, wcfg)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthReport {
    /// Absent when the ACF has no usable mainlobe null (for example an unmodulated pulse).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<WaveformMetrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluateReport {
    pub metrics: WaveformMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub status: RunStatus,
    pub iterations: usize,
    /// Recorded for reference only.
    pub wall_time_s: f64,
    pub initial_objective: f64,
    pub final_objective: f64,
    pub objective_non_increasing: bool,
}

/// Seed-to-optimized changes; positive reductions are improvements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricChange {
    pub pslr_improvement_db: f64,
    pub isl_reduction_db: f64,
    pub isl_full_reduction_db: f64,
    pub gisl_reduction_db: f64,
    pub rms_ratio: f64,
    /// Relative change of the detected mainlobe null.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detected_null_change: Option<f64>,
}

impl MetricChange {
    pub fn between(before: &WaveformMetrics, after: &WaveformMetrics) -> Self {
        let null_change = match (before.detected_null_index, after.detected_null_index) {
            (Some(a), Some(b)) => Some((b as f64 - a as f64) / a as f64),
            _ => None,
        };
        MetricChange {
            pslr_improvement_db: before.pslr_db - after.pslr_db,
            isl_reduction_db: before.isl_db - after.isl_db,
            isl_full_reduction_db: before.isl_full_db - after.isl_full_db,
            gisl_reduction_db: before.gisl_db - after.gisl_db,
            rms_ratio: after.rms_bandwidth / before.rms_bandwidth,
            detected_null_change: null_change,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeReport {
    pub run: RunSummary,
    pub seed: WaveformMetrics,
    pub optimized: WaveformMetrics,
    pub change: MetricChange,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradcheckCase {
    pub p: u32,
    pub feasible: bool,
    pub draw: u64,
    pub c1: f64,
    pub c2: f64,
    pub gisl_error: f64,
    pub objective_error: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradcheckReport {
    pub num_harmonics: usize,
    pub tolerance: f64,
    pub max_gisl_error: f64,
    pub max_objective_error: f64,
    pub passed: bool,
    pub cases: Vec<GradcheckCase>,
}
