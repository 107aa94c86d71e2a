//! Coefficient files, delimited data files and structured reports.

use std::fs;
use std::path::Path;

use mtsfm_core::{
    AmbiguitySurface, BasisKind, CoefficientVector, CorrelationProfile, RunTrace, Spectrum,
    TaperSpec, WaveformConfig,
};
use serde::{Deserialize, Serialize};

use crate::config::SCHEMA_VERSION;
use crate::error::{CliError, Result};

/// Floor for dB conversions of exact zeros.
pub const DB_FLOOR: f64 = -300.0;

/// On-disk form of a coefficient vector plus the waveform it renders into.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientFile {
    pub schema_version: u32,
    pub num_harmonics: usize,
    pub basis_kind: BasisKind,
    /// Seconds.
    pub duration: f64,
    /// Hz.
    pub sample_rate: f64,
    #[serde(default)]
    pub constant_phase: f64,
    pub taper: TaperSpec,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl CoefficientFile {
    pub fn from_parts(coeffs: &CoefficientVector, w: &WaveformConfig) -> Self {
        CoefficientFile {
            schema_version: SCHEMA_VERSION,
            num_harmonics: w.num_harmonics,
            basis_kind: w.basis_kind,
            duration: w.duration,
            sample_rate: w.sample_rate,
            constant_phase: w.constant_phase,
            taper: w.taper,
            alpha: coeffs.alpha().to_vec(),
            beta: coeffs.beta().to_vec(),
        }
    }

    pub fn into_parts(self) -> Result<(CoefficientVector, WaveformConfig)> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Validation(format!(
                "unsupported coefficient schema_version {}",
                self.schema_version
            )));
        }
        if self.alpha.len() != self.num_harmonics || self.beta.len() != self.num_harmonics {
            return Err(CliError::Validation(format!(
                "num_harmonics = {} but alpha has {} and beta has {} entries",
                self.num_harmonics,
                self.alpha.len(),
                self.beta.len()
            )));
        }
        let w = WaveformConfig {
            duration: self.duration,
            sample_rate: self.sample_rate,
            num_harmonics: self.num_harmonics,
            basis_kind: self.basis_kind,
            constant_phase: self.constant_phase,
            taper: self.taper,
        };
        w.validate()?;
        let c = CoefficientVector::new(self.alpha, self.beta)?;
        Ok((c, w))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_toml(path, self)
    }
}

pub fn write_toml<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = toml::to_string(value)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn to_db(power_ratio: f64) -> f64 {
    if power_ratio > 0.0 {
        (10.0 * power_ratio.log10()).max(DB_FLOOR)
    } else {
        DB_FLOOR
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    })
}

fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let wrap = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(wrap)?;
    for row in rows {
        w.write_record(row).map_err(wrap)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// ACF over lags `|k| <= max_lag` (all lags when `None`), dB relative to lag 0.
pub fn write_acf(path: &Path, r: &CorrelationProfile, max_lag: Option<usize>) -> Result<()> {
    let c = r.center();
    let peak = r.values[c].norm_sqr();
    let half = max_lag.unwrap_or(c).min(c);
    let rows = (c - half..=c + half).map(|i| {
        let v = r.values[i];
        vec![
            r.lag_seconds(i).to_string(),
            v.re.to_string(),
            v.im.to_string(),
            to_db(v.norm_sqr() / peak).to_string(),
        ]
    });
    write_rows(path, &["lag_seconds", "real", "imag", "magnitude_db"], rows)
}

/// Power spectrum in dB relative to its peak bin.
pub fn write_spectrum(path: &Path, s: &Spectrum) -> Result<()> {
    let peak = s.power.iter().cloned().fold(0.0, f64::max);
    let rows = s
        .frequencies
        .iter()
        .zip(&s.power)
        .map(|(f, p)| vec![f.to_string(), to_db(p / peak).to_string()]);
    write_rows(path, &["freq_hz", "power_db"], rows)
}

pub fn write_trace(path: &Path, t: &RunTrace) -> Result<()> {
    let rows = t.records.iter().map(|r| {
        vec![
            r.iteration.to_string(),
            r.objective.to_string(),
            r.gisl.to_string(),
            r.penalty.to_string(),
            r.gradient_norm.to_string(),
            r.step.to_string(),
            r.backtracks.to_string(),
            r.c1.to_string(),
            r.c2.to_string(),
        ]
    });
    write_rows(
        path,
        &[
            "iteration",
            "objective",
            "gisl",
            "penalty",
            "gradient_norm",
            "step",
            "backtracks",
            "c1_rad2_per_s2",
            "c2_rad2_per_s2",
        ],
        rows,
    )
}

/// Long-format ambiguity magnitude, dB relative to the zero-delay zero-Doppler peak.
pub fn write_ambiguity(path: &Path, af: &AmbiguitySurface) -> Result<()> {
    let len = af.columns.first().map_or(0, Vec::len);
    let center = len / 2;
    let peak = af
        .columns
        .iter()
        .map(|c| c[center].norm_sqr())
        .fold(0.0, f64::max);
    let rows = af.doppler_bins.iter().zip(&af.columns).flat_map(|(nu, col)| {
        col.iter().enumerate().map(move |(i, v)| {
            vec![
                ((i as f64 - center as f64) * af.lag_spacing).to_string(),
                nu.to_string(),
                to_db(v.norm_sqr() / peak).to_string(),
            ]
        })
    });
    write_rows(path, &["lag_seconds", "doppler_hz", "magnitude_db"], rows)
}
