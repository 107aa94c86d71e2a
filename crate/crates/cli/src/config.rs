//! Scenario configuration schema.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use mtsfm_core::{
    generate_seed, BasisKind, CoefficientVector, ConstraintScaling, ObjectiveConfig, OptimizerConfig,
    RegionSpec, TaperSpec, WaveformConfig,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::files::CoefficientFile;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    /// Required unless the seed is read from a coefficient file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waveform: Option<WaveformSection>,
    pub seed: SeedSection,
    #[serde(default)]
    pub objective: ObjectiveSection,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub outputs: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveformSection {
    #[serde(default = "default_duration")]
    pub duration: f64,
    /// Defaults to ten times the swept bandwidth.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_rate: Option<f64>,
    pub num_harmonics: usize,
    #[serde(default = "default_basis")]
    pub basis_kind: BasisKind,
    #[serde(default)]
    pub constant_phase: f64,
    #[serde(default = "default_taper")]
    pub taper: TaperSpec,
}

/// Exactly one of `delta_f`, `rms_bandwidth` or `coefficients` must be set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedSection {
    #[serde(default)]
    pub rng_seed: u64,
    /// Swept bandwidth in Hz of the uniform sweep with the target RMS bandwidth.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_f: Option<f64>,
    /// Target RMS bandwidth in (rad/s)^2.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rms_bandwidth: Option<f64>,
    /// Coefficient file; relative paths resolve against the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObjectiveSection {
    pub p: u32,
    pub gamma: f64,
    pub delta: f64,
    pub outer_fraction: f64,
    pub scaling: ConstraintScaling,
}

impl Default for ObjectiveSection {
    fn default() -> Self {
        ObjectiveSection {
            p: 20,
            gamma: 2.0,
            delta: 0.1,
            outer_fraction: 1.0,
            scaling: ConstraintScaling::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub acf: bool,
    /// ACF restricted to +-10 mainlobe widths around lag 0.
    pub zoomed_acf: bool,
    pub spectrum: bool,
    pub trace: bool,
    /// Zero-padding factor for the spectrum files.
    pub spectrum_pad: usize,
    /// Doppler bins of the ambiguity export from `evaluate`; 0 disables it.
    pub ambiguity_bins: usize,
    /// Half-span of the ambiguity Doppler grid in Hz.
    pub ambiguity_span_hz: f64,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            directory: PathBuf::from("out"),
            acf: true,
            zoomed_acf: true,
            spectrum: true,
            trace: true,
            spectrum_pad: 4,
            ambiguity_bins: 0,
            ambiguity_span_hz: 10.0,
        }
    }
}

fn default_duration() -> f64 {
    1.0
}

fn default_basis() -> BasisKind {
    BasisKind::SineOnly
}

fn default_taper() -> TaperSpec {
    TaperSpec::tukey(0.05)
}

/// Command-line values that replace config entries.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub rng_seed: Option<u64>,
    pub p: Option<u32>,
    pub outer_fraction: Option<f64>,
    pub out: Option<PathBuf>,
}

/// Swept bandwidth of a uniform sweep with RMS bandwidth `beta2` (rad/s)^2.
pub fn delta_f_from_rms(beta2: f64) -> f64 {
    (12.0 * beta2).sqrt() / (2.0 * PI)
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Validation(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CliError::Validation(e.to_string()))
    }

    /// Parses and validates a config file. Relative coefficient paths are
    /// rewritten against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg: ScenarioConfig = toml::from_str(&text)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        if let Some(file) = &cfg.seed.coefficients {
            if file.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                cfg.seed.coefficients = Some(base.join(file));
            }
        }
        cfg.validate()
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        Ok(cfg)
    }

    /// Applies `o`; on a validation error `self` is left unchanged.
    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        let mut next = self.clone();
        if let Some(s) = o.rng_seed {
            next.seed.rng_seed = s;
        }
        if let Some(p) = o.p {
            next.objective.p = p;
        }
        if let Some(f) = o.outer_fraction {
            next.objective.outer_fraction = f;
        }
        if let Some(dir) = &o.out {
            next.outputs.directory = dir.clone();
        }
        next.validate()?;
        *self = next;
        Ok(())
    }

    /// Checks every field that does not need the coefficient file.
    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(CliError::Validation(msg));
        if self.schema_version != SCHEMA_VERSION {
            return invalid(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        let s = &self.seed;
        let sources = [s.delta_f.is_some(), s.rms_bandwidth.is_some(), s.coefficients.is_some()];
        if sources.iter().filter(|&&x| x).count() != 1 {
            return invalid(
                "seed: set exactly one of delta_f, rms_bandwidth or coefficients".into(),
            );
        }
        for (name, v) in [("seed.delta_f", s.delta_f), ("seed.rms_bandwidth", s.rms_bandwidth)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return invalid(format!("{name} must be positive, got {v}"));
                }
            }
        }
        match (&self.waveform, &s.coefficients) {
            (None, None) => return invalid("[waveform] is required for generated seeds".into()),
            (Some(_), Some(_)) => {
                return invalid(
                    "[waveform] must be omitted when the seed comes from a coefficient file".into(),
                )
            }
            (Some(_), None) => {
                self.waveform_config()?;
            }
            (None, Some(_)) => {}
        }
        let o = &self.objective;
        if o.p < 2 {
            return invalid(format!("objective.p must be >= 2, got {}", o.p));
        }
        if !(o.gamma > 0.0 && o.gamma.is_finite()) {
            return invalid(format!("objective.gamma must be positive, got {}", o.gamma));
        }
        if !(o.delta > 0.0 && o.delta < 1.0) {
            return invalid(format!("objective.delta must lie in (0, 1), got {}", o.delta));
        }
        self.region().validate()?;
        self.optimizer.validate()?;
        if self.outputs.spectrum_pad == 0 {
            return invalid("outputs.spectrum_pad must be >= 1".into());
        }
        if self.outputs.ambiguity_bins > 0 && !(self.outputs.ambiguity_span_hz > 0.0) {
            return invalid("outputs.ambiguity_span_hz must be positive".into());
        }
        Ok(())
    }

    pub fn region(&self) -> RegionSpec {
        RegionSpec {
            outer_fraction: self.objective.outer_fraction,
        }
    }

    /// Target swept bandwidth for generated seeds.
    pub fn delta_f(&self) -> Option<f64> {
        self.seed
            .delta_f
            .or_else(|| self.seed.rms_bandwidth.map(delta_f_from_rms))
    }

    pub fn target_rms_bandwidth(&self) -> Option<f64> {
        self.seed
            .rms_bandwidth
            .or_else(|| self.seed.delta_f.map(mtsfm_core::uniform_sweep_rms_bandwidth))
    }

    /// Waveform parameters for a generated seed.
    pub fn waveform_config(&self) -> Result<WaveformConfig> {
        let w = self.waveform.as_ref().ok_or_else(|| {
            CliError::Validation("[waveform] is required for generated seeds".into())
        })?;
        let sample_rate = match (w.sample_rate, self.delta_f()) {
            (Some(fs), _) => fs,
            (None, Some(df)) => 10.0 * df,
            (None, None) => {
                return Err(CliError::Validation(
                    "waveform.sample_rate is required without a target bandwidth".into(),
                ))
            }
        };
        let cfg = WaveformConfig {
            duration: w.duration,
            sample_rate,
            num_harmonics: w.num_harmonics,
            basis_kind: w.basis_kind,
            constant_phase: w.constant_phase,
            taper: w.taper,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Seed coefficients with their waveform parameters.
    pub fn seed(&self) -> Result<(CoefficientVector, WaveformConfig)> {
        if let Some(path) = &self.seed.coefficients {
            return CoefficientFile::read(path)?.into_parts();
        }
        let wcfg = self.waveform_config()?;
        let target = self.target_rms_bandwidth().expect("validated seed source");
        let coeffs = generate_seed(&wcfg, target, self.seed.rng_seed)?;
        Ok((coeffs, wcfg))
    }

    /// Objective settings with the mainlobe null frozen from `seed`.
    pub fn objective_config(
        &self,
        seed: &CoefficientVector,
        wcfg: &WaveformConfig,
    ) -> Result<ObjectiveConfig> {
        let o = &self.objective;
        let mut cfg = ObjectiveConfig::from_seed(seed, wcfg, o.p, o.gamma, o.delta, self.region())?;
        cfg.scaling = o.scaling;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
schema_version = 1

[waveform]
num_harmonics = 8

[seed]
delta_f = 32.0
"#;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = ScenarioConfig::from_toml_str(MINIMAL).unwrap();
        cfg.validate().unwrap();
        let w = cfg.waveform_config().unwrap();
        assert_eq!(w.sample_rate, 320.0);
        assert_eq!(w.basis_kind, BasisKind::SineOnly);
        assert_eq!(w.taper, TaperSpec::tukey(0.05));
        assert_eq!(cfg.objective.p, 20);
        assert_eq!(cfg.optimizer, OptimizerConfig::default());
    }

    #[test]
    fn round_trip_is_identity() {
        let cfg = ScenarioConfig::from_toml_str(MINIMAL).unwrap();
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(ScenarioConfig::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn unknown_field_reports_line() {
        let text = MINIMAL.replace("delta_f = 32.0", "delta_f = 32.0\nbogus = 1");
        let err = ScenarioConfig::from_toml_str(&text).unwrap_err().to_string();
        assert!(err.contains("bogus"), "{err}");
        assert!(err.contains("line 9"), "{err}");
    }

    #[test]
    fn seed_source_must_be_unique() {
        let text = MINIMAL.replace("delta_f = 32.0", "delta_f = 32.0\nrms_bandwidth = 1.0");
        let cfg = ScenarioConfig::from_toml_str(&text).unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn rms_target_implies_uniform_sweep_width() {
        let b = mtsfm_core::uniform_sweep_rms_bandwidth(40.0);
        assert!((delta_f_from_rms(b) - 40.0).abs() < 1e-12);
    }

    #[test]
    fn overrides_are_validated() {
        let mut cfg = ScenarioConfig::from_toml_str(MINIMAL).unwrap();
        let o = Overrides {
            p: Some(1),
            ..Default::default()
        };
        assert!(cfg.apply(&o).is_err());
        let o = Overrides {
            rng_seed: Some(9),
            outer_fraction: Some(0.1),
            ..Default::default()
        };
        cfg.apply(&o).unwrap();
        assert_eq!(cfg.seed.rng_seed, 9);
        assert_eq!(cfg.region().outer_fraction, 0.1);
    }
}
