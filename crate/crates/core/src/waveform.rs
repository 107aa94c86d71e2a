//! Parametric MTSFM waveform model.
//!
//! The instantaneous phase is a finite Fourier series
//! `phi(t) = alpha_0/2 + sum_l alpha_l cos(2 pi l t / T) + beta_l sin(2 pi l t / T)`
//! sampled on the left-closed grid `t_n = -T/2 + n/fs`, `n = 0..M`. The
//! modulation indices are carried as a [`CoefficientVector`] and exchanged
//! as the stacked `[alpha; beta]` vector of length `2L`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Safety factor applied to `fs/2` by the Nyquist guard.
pub const NYQUIST_MARGIN: f64 = 0.9;

/// Which harmonic blocks of the Fourier basis carry free coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisKind {
    CosineOnly,
    SineOnly,
    Full,
}

impl BasisKind {
    pub fn cosine_active(self) -> bool {
        matches!(self, BasisKind::CosineOnly | BasisKind::Full)
    }

    pub fn sine_active(self) -> bool {
        matches!(self, BasisKind::SineOnly | BasisKind::Full)
    }

    /// 0/1 mask over the stacked `[alpha; beta]` vector.
    pub fn active_mask(self, num_harmonics: usize) -> Vec<f64> {
        let c = if self.cosine_active() { 1.0 } else { 0.0 };
        let s = if self.sine_active() { 1.0 } else { 0.0 };
        let mut mask = vec![c; num_harmonics];
        mask.extend(std::iter::repeat_n(s, num_harmonics));
        mask
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaperKind {
    None,
    Tukey,
}

/// Amplitude envelope applied before energy normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaperSpec {
    pub kind: TaperKind,
    #[serde(default)]
    pub tukey_alpha: f64,
}

impl TaperSpec {
    pub const fn none() -> Self {
        TaperSpec {
            kind: TaperKind::None,
            tukey_alpha: 0.0,
        }
    }

    pub const fn tukey(alpha: f64) -> Self {
        TaperSpec {
            kind: TaperKind::Tukey,
            tukey_alpha: alpha,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.tukey_alpha) {
            return Err(Error::InvalidConfig(format!(
                "tukey_alpha must lie in [0, 1], got {}",
                self.tukey_alpha
            )));
        }
        Ok(())
    }

    /// Envelope samples `a_n` for a length-`m` pulse (unnormalized, peak 1).
    pub fn envelope(&self, m: usize) -> Vec<f64> {
        match self.kind {
            TaperKind::None => vec![1.0; m],
            TaperKind::Tukey => tukey_window(m, self.tukey_alpha),
        }
    }
}

impl Default for TaperSpec {
    fn default() -> Self {
        TaperSpec::none()
    }
}

/// Tapered-cosine window over `m` samples; `alpha = 0` is rectangular and
/// `alpha = 1` is a Hann window.
pub fn tukey_window(m: usize, alpha: f64) -> Vec<f64> {
    if m <= 1 || alpha <= 0.0 {
        return vec![1.0; m];
    }
    let edge = alpha / 2.0;
    (0..m)
        .map(|n| {
            let x = n as f64 / (m - 1) as f64;
            if x < edge {
                0.5 * (1.0 + (2.0 * PI / alpha * (x - edge)).cos())
            } else if x > 1.0 - edge {
                0.5 * (1.0 + (2.0 * PI / alpha * (x - 1.0 + edge)).cos())
            } else {
                1.0
            }
        })
        .collect()
}

/// Everything needed to render a coefficient vector into samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveformConfig {
    /// Pulse duration `T` in seconds.
    pub duration: f64,
    /// Sample rate `fs` in Hz.
    pub sample_rate: f64,
    /// Number of harmonics `L`.
    pub num_harmonics: usize,
    pub basis_kind: BasisKind,
    /// Constant phase term `alpha_0` in radians.
    #[serde(default)]
    pub constant_phase: f64,
    #[serde(default)]
    pub taper: TaperSpec,
}

impl WaveformConfig {
    /// `M = round(T * fs)`.
    pub fn num_samples(&self) -> usize {
        (self.duration * self.sample_rate).round() as usize
    }

    /// Left-closed grid `t_n = -T/2 + n/fs`.
    pub fn time_grid(&self) -> Vec<f64> {
        let half = self.duration / 2.0;
        (0..self.num_samples())
            .map(|n| -half + n as f64 / self.sample_rate)
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "duration must be positive, got {}",
                self.duration
            )));
        }
        if !(self.sample_rate.is_finite() && self.sample_rate > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "sample_rate must be positive, got {}",
                self.sample_rate
            )));
        }
        if self.num_harmonics == 0 {
            return Err(Error::InvalidConfig("num_harmonics must be at least 1".into()));
        }
        self.taper.validate()?;
        let m = self.num_samples();
        if m < 2 * self.num_harmonics + 1 {
            return Err(Error::Dimension(format!(
                "M = {m} samples is below 2L+1 = {} for L = {}",
                2 * self.num_harmonics + 1,
                self.num_harmonics
            )));
        }
        Ok(())
    }
}

/// Modulation indices `{alpha_l, beta_l}` for harmonics `1..=L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientVector {
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl CoefficientVector {
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if alpha.len() != beta.len() {
            return Err(Error::Dimension(format!(
                "alpha has {} entries but beta has {}",
                alpha.len(),
                beta.len()
            )));
        }
        Ok(CoefficientVector { alpha, beta })
    }

    pub fn zeros(num_harmonics: usize) -> Self {
        CoefficientVector {
            alpha: vec![0.0; num_harmonics],
            beta: vec![0.0; num_harmonics],
        }
    }

    /// Splits a stacked `[alpha; beta]` vector.
    pub fn from_stacked(stacked: &[f64]) -> Result<Self> {
        if !stacked.len().is_multiple_of(2) {
            return Err(Error::Dimension(format!(
                "stacked coefficient vector has odd length {}",
                stacked.len()
            )));
        }
        let (a, b) = stacked.split_at(stacked.len() / 2);
        Ok(CoefficientVector {
            alpha: a.to_vec(),
            beta: b.to_vec(),
        })
    }

    pub fn to_stacked(&self) -> Vec<f64> {
        let mut v = self.alpha.clone();
        v.extend_from_slice(&self.beta);
        v
    }

    pub fn num_harmonics(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn scaled(&self, k: f64) -> Self {
        CoefficientVector {
            alpha: self.alpha.iter().map(|a| a * k).collect(),
            beta: self.beta.iter().map(|b| b * k).collect(),
        }
    }

    /// Zeroes the block that `kind` leaves inactive.
    pub fn restricted_to(mut self, kind: BasisKind) -> Self {
        if !kind.cosine_active() {
            self.alpha.iter_mut().for_each(|a| *a = 0.0);
        }
        if !kind.sine_active() {
            self.beta.iter_mut().for_each(|b| *b = 0.0);
        }
        self
    }

    fn check_harmonics(&self, config: &WaveformConfig) -> Result<()> {
        if self.num_harmonics() != config.num_harmonics {
            return Err(Error::Dimension(format!(
                "coefficient vector has L = {} but config has L = {}",
                self.num_harmonics(),
                config.num_harmonics
            )));
        }
        Ok(())
    }
}

/// The `M x 2L` Fourier basis `[B_c  B_s]`, stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisMatrix {
    samples: usize,
    harmonics: usize,
    columns: Vec<f64>,
}

impl BasisMatrix {
    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn harmonics(&self) -> usize {
        self.harmonics
    }

    /// Column `j` of the stacked basis; `j < L` is `cos(2 pi (j+1) t / T)`,
    /// `j >= L` is `sin(2 pi (j-L+1) t / T)`.
    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j * self.samples..(j + 1) * self.samples]
    }

    /// `B * phi`.
    pub fn apply(&self, stacked: &[f64]) -> Vec<f64> {
        debug_assert_eq!(stacked.len(), 2 * self.harmonics);
        let mut out = vec![0.0; self.samples];
        for (j, &c) in stacked.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            for (o, &b) in out.iter_mut().zip(self.column(j)) {
                *o += c * b;
            }
        }
        out
    }

    /// `B^T * v` for a length-`M` vector `v`.
    pub fn apply_transpose(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.samples);
        (0..2 * self.harmonics)
            .map(|j| self.column(j).iter().zip(v).map(|(b, x)| b * x).sum())
            .collect()
    }
}

pub fn build_basis(config: &WaveformConfig) -> Result<BasisMatrix> {
    config.validate()?;
    let m = config.num_samples();
    let l = config.num_harmonics;
    let grid = config.time_grid();
    let mut columns = vec![0.0; m * 2 * l];
    for h in 1..=l {
        let w = 2.0 * PI * h as f64 / config.duration;
        let (cos_block, rest) = columns.split_at_mut(l * m);
        let cos_col = &mut cos_block[(h - 1) * m..h * m];
        let sin_col = &mut rest[(h - 1) * m..h * m];
        for (n, &t) in grid.iter().enumerate() {
            let (s, c) = (w * t).sin_cos();
            cos_col[n] = c;
            sin_col[n] = s;
        }
    }
    Ok(BasisMatrix {
        samples: m,
        harmonics: l,
        columns,
    })
}

/// Unit-energy complex baseband samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledWaveform {
    pub samples: Vec<Complex64>,
    pub config: WaveformConfig,
}

impl SampledWaveform {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum()
    }

    /// Wraps raw samples, rescaling them to unit energy.
    pub fn from_samples(mut samples: Vec<Complex64>, config: WaveformConfig) -> Result<Self> {
        let energy: f64 = samples.iter().map(|s| s.norm_sqr()).sum();
        if !(energy > 0.0 && energy.is_finite()) {
            return Err(Error::InvalidConfig("waveform has zero or non-finite energy".into()));
        }
        let k = energy.sqrt().recip();
        samples.iter_mut().for_each(|s| *s *= k);
        Ok(SampledWaveform { samples, config })
    }
}

/// Renders coefficient vectors for one fixed [`WaveformConfig`], caching the
/// basis and the normalized envelope.
#[derive(Debug, Clone)]
pub struct Synthesizer {
    config: WaveformConfig,
    basis: BasisMatrix,
    envelope: Vec<f64>,
}

impl Synthesizer {
    pub fn new(config: &WaveformConfig) -> Result<Self> {
        let basis = build_basis(config)?;
        let mut envelope = config.taper.envelope(basis.samples());
        let energy: f64 = envelope.iter().map(|a| a * a).sum();
        let k = energy.sqrt().recip();
        envelope.iter_mut().for_each(|a| *a *= k);
        Ok(Synthesizer {
            config: *config,
            basis,
            envelope,
        })
    }

    pub fn config(&self) -> &WaveformConfig {
        &self.config
    }

    pub fn basis(&self) -> &BasisMatrix {
        &self.basis
    }

    /// Unit-energy amplitude envelope.
    pub fn envelope(&self) -> &[f64] {
        &self.envelope
    }

    /// Sampled phase `alpha_0/2 + B phi`.
    pub fn phase(&self, stacked: &[f64]) -> Vec<f64> {
        let mut phase = self.basis.apply(stacked);
        let offset = self.config.constant_phase / 2.0;
        if offset != 0.0 {
            phase.iter_mut().for_each(|p| *p += offset);
        }
        phase
    }

    /// Renders without the Nyquist guard. Used on the optimizer's hot path,
    /// where the coefficient vector is a line-search probe.
    pub fn render_unchecked(&self, stacked: &[f64]) -> Vec<Complex64> {
        self.phase(stacked)
            .into_iter()
            .zip(&self.envelope)
            .map(|(p, &a)| Complex64::from_polar(a, p))
            .collect()
    }

    pub fn render(&self, coeffs: &CoefficientVector) -> Result<SampledWaveform> {
        coeffs.check_harmonics(&self.config)?;
        self.check_nyquist(coeffs)?;
        Ok(SampledWaveform {
            samples: self.render_unchecked(&coeffs.to_stacked()),
            config: self.config,
        })
    }

    /// `m(t_n)` from the analytic derivative of the phase series.
    pub fn instantaneous_frequency(&self, coeffs: &CoefficientVector) -> Result<Vec<f64>> {
        coeffs.check_harmonics(&self.config)?;
        let l = coeffs.num_harmonics();
        let t = self.config.duration;
        // d/dt [a cos(wt) + b sin(wt)] / 2pi = (l/T) (b cos - a sin)
        let mut weights = vec![0.0; 2 * l];
        for h in 0..l {
            let k = (h + 1) as f64 / t;
            weights[h] = k * coeffs.beta[h];
            weights[l + h] = -k * coeffs.alpha[h];
        }
        Ok(self.basis.apply(&weights))
    }

    pub fn check_nyquist(&self, coeffs: &CoefficientVector) -> Result<()> {
        let peak = self
            .instantaneous_frequency(coeffs)?
            .iter()
            .fold(0.0_f64, |acc, f| acc.max(f.abs()));
        let limit = NYQUIST_MARGIN * self.config.sample_rate / 2.0;
        if !(peak <= limit) {
            return Err(Error::Nyquist {
                peak_hz: peak,
                limit_hz: limit,
            });
        }
        Ok(())
    }
}

pub fn synthesize_waveform(
    coeffs: &CoefficientVector,
    config: &WaveformConfig,
) -> Result<SampledWaveform> {
    coeffs.check_harmonics(config)?;
    Synthesizer::new(config)?.render(coeffs)
}

pub fn instantaneous_frequency(
    coeffs: &CoefficientVector,
    config: &WaveformConfig,
) -> Result<Vec<f64>> {
    coeffs.check_harmonics(config)?;
    Synthesizer::new(config)?.instantaneous_frequency(coeffs)
}

/// Peak-to-peak excursion of the instantaneous frequency over the grid.
pub fn swept_bandwidth(coeffs: &CoefficientVector, config: &WaveformConfig) -> Result<f64> {
    let m = instantaneous_frequency(coeffs, config)?;
    let (lo, hi) = m
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &f| (lo.min(f), hi.max(f)));
    Ok(hi - lo)
}

/// Closed-form RMS bandwidth `(2 pi / T)^2 sum_l l^2 (alpha_l^2 + beta_l^2) / 2`
/// of the untapered waveform, in (rad/s)^2.
pub fn rms_bandwidth(coeffs: &CoefficientVector, config: &WaveformConfig) -> f64 {
    let w0 = 2.0 * PI / config.duration;
    let sum: f64 = coeffs
        .alpha
        .iter()
        .zip(&coeffs.beta)
        .enumerate()
        .map(|(h, (a, b))| {
            let l = (h + 1) as f64;
            l * l * (a * a + b * b) / 2.0
        })
        .sum();
    w0 * w0 * sum
}

/// Gradient of [`rms_bandwidth`] with respect to the stacked `[alpha; beta]`.
pub fn rms_bandwidth_gradient(coeffs: &CoefficientVector, config: &WaveformConfig) -> Vec<f64> {
    let w0 = 2.0 * PI / config.duration;
    let w0sq = w0 * w0;
    let grad = |(h, x): (usize, &f64)| {
        let l = (h + 1) as f64;
        w0sq * l * l * x
    };
    coeffs
        .alpha
        .iter()
        .enumerate()
        .map(grad)
        .chain(coeffs.beta.iter().enumerate().map(grad))
        .collect()
}

/// RMS bandwidth, in (rad/s)^2, of a waveform whose instantaneous frequency
/// is uniformly distributed over a band of `delta_f` Hz.
pub fn uniform_sweep_rms_bandwidth(delta_f: f64) -> f64 {
    (2.0 * PI * delta_f).powi(2) / 12.0
}

/// Deterministic pseudo-random seed rescaled to an exact RMS bandwidth.
///
/// A random frequency trajectory is drawn with `N(0, 1) / l` weights on the
/// active harmonics, warped pointwise through its empirical CDF so the
/// instantaneous frequency is spread evenly over the band, and projected back
/// onto the `L` active harmonics. The flat frequency occupancy gives a
/// thumbtack-like ACF whose first null sits near `1 / delta_f`. The result is
/// finally rescaled to `target_rms_bandwidth`.
pub fn generate_seed(
    config: &WaveformConfig,
    target_rms_bandwidth: f64,
    rng_seed: u64,
) -> Result<CoefficientVector> {
    config.validate()?;
    if !(target_rms_bandwidth > 0.0 && target_rms_bandwidth.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "target RMS bandwidth must be positive, got {target_rms_bandwidth}"
        )));
    }
    let l = config.num_harmonics;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut draw = |h: usize| {
        let x: f64 = StandardNormal.sample(&mut rng);
        x / (h + 1) as f64
    };
    let alpha: Vec<f64> = (0..l).map(&mut draw).collect();
    let beta: Vec<f64> = (0..l).map(&mut draw).collect();
    let raw = CoefficientVector { alpha, beta }.restricted_to(config.basis_kind);

    let synth = Synthesizer::new(config)?;
    let trajectory = synth.instantaneous_frequency(&raw)?;
    let warped = rank_to_uniform(&trajectory);

    // Fourier coefficients of the warped trajectory: m ~ sum a_l cos + b_l sin,
    // with a_l = l beta_l / T and b_l = -l alpha_l / T.
    let m = warped.len() as f64;
    let t = config.duration;
    let basis = synth.basis();
    let projected = basis.apply_transpose(&warped);
    let mut alpha = vec![0.0; l];
    let mut beta = vec![0.0; l];
    for h in 0..l {
        let k = t / (h + 1) as f64 * 2.0 / m;
        beta[h] = k * projected[h];
        alpha[h] = -k * projected[l + h];
    }
    let shaped = CoefficientVector { alpha, beta }.restricted_to(config.basis_kind);
    let current = rms_bandwidth(&shaped, config);
    if !(current > 0.0) {
        return Err(Error::InvalidConfig("seed draw produced an unmodulated waveform".into()));
    }
    Ok(shaped.scaled((target_rms_bandwidth / current).sqrt()))
}

/// Maps each sample to its centred empirical-CDF value in `(-1/2, 1/2)`.
fn rank_to_uniform(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| x[i].total_cmp(&x[j]).then(i.cmp(&j)));
    let mut out = vec![0.0; n];
    for (rank, &i) in order.iter().enumerate() {
        out[i] = (rank as f64 + 0.5) / n as f64 - 0.5;
    }
    out
}

/// Rescales `coeffs` so the peak-to-peak frequency excursion equals `delta_f` Hz.
pub fn scale_to_swept_bandwidth(
    coeffs: &CoefficientVector,
    config: &WaveformConfig,
    delta_f: f64,
) -> Result<CoefficientVector> {
    let current = swept_bandwidth(coeffs, config)?;
    if !(current > 0.0) {
        return Err(Error::InvalidConfig(
            "cannot rescale an unmodulated coefficient vector".into(),
        ));
    }
    Ok(coeffs.scaled(delta_f / current))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn config(l: usize, m: usize) -> WaveformConfig {
        WaveformConfig {
            duration: 1.0,
            sample_rate: m as f64,
            num_harmonics: l,
            basis_kind: BasisKind::Full,
            constant_phase: 0.0,
            taper: TaperSpec::none(),
        }
    }

    #[test]
    fn sine_column_vanishes_at_origin() {
        // M even puts a grid point exactly at t = 0.
        let b = build_basis(&config(1, 16)).unwrap();
        assert_eq!(b.column(1)[8], 0.0);
    }

    #[test]
    fn cosine_column_alternates_at_left_edge() {
        let b = build_basis(&config(2, 16)).unwrap();
        assert_relative_eq!(b.column(0)[0], -1.0, epsilon = 1e-15);
        assert_relative_eq!(b.column(1)[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn basis_columns_near_orthogonal() {
        let b = build_basis(&config(4, 256)).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let dot: f64 = b.column(i).iter().zip(b.column(j)).map(|(x, y)| x * y).sum();
                let dot = dot / 256.0;
                if i == j {
                    assert_relative_eq!(dot, 0.5, epsilon = 1e-12);
                } else {
                    assert!(dot.abs() <= 0.01, "columns {i},{j}: {dot}");
                }
            }
        }
    }

    #[test]
    fn basis_rejects_aliasing_dimensions() {
        let err = build_basis(&config(4, 8)).unwrap_err();
        assert!(matches!(err, Error::Dimension(_)));
    }

    #[test]
    fn zero_coefficients_give_flat_samples() {
        let cfg = config(3, 64);
        let s = synthesize_waveform(&CoefficientVector::zeros(3), &cfg).unwrap();
        let expected = 1.0 / 64f64.sqrt();
        for x in &s.samples {
            assert_relative_eq!(x.re, expected, epsilon = 1e-15);
            assert_relative_eq!(x.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn length_mismatch_is_dimension_error() {
        let err = synthesize_waveform(&CoefficientVector::zeros(2), &config(3, 64)).unwrap_err();
        assert!(matches!(err, Error::Dimension(_)));
        assert!(CoefficientVector::new(vec![0.0; 2], vec![0.0; 3]).is_err());
    }

    #[test]
    fn nyquist_guard_trips() {
        let cfg = config(2, 16);
        // m(t) = (2/T) * 10 cos(...) peaks at 20 Hz > 0.9 * 8 Hz
        let coeffs = CoefficientVector::new(vec![0.0, 0.0], vec![0.0, 10.0]).unwrap();
        let err = synthesize_waveform(&coeffs, &cfg).unwrap_err();
        assert!(matches!(err, Error::Nyquist { .. }));
    }

    #[test]
    fn single_sine_harmonic_frequency() {
        let cfg = WaveformConfig {
            duration: 2.0,
            sample_rate: 64.0,
            ..config(1, 64)
        };
        let coeffs = CoefficientVector::new(vec![0.0], vec![1.0]).unwrap();
        let m = instantaneous_frequency(&coeffs, &cfg).unwrap();
        for (f, t) in m.iter().zip(cfg.time_grid()) {
            assert_relative_eq!(*f, 0.5 * (PI * t).cos(), epsilon = 1e-14);
        }
    }

    #[test]
    fn rms_bandwidth_single_term() {
        let cfg = WaveformConfig {
            duration: 0.5,
            ..config(1, 64)
        };
        let b = 1.7;
        let coeffs = CoefficientVector::new(vec![0.0], vec![b]).unwrap();
        let w0 = 2.0 * PI / 0.5;
        assert_relative_eq!(rms_bandwidth(&coeffs, &cfg), w0 * w0 * b * b / 2.0, max_relative = 1e-15);
        let g = rms_bandwidth_gradient(&coeffs, &cfg);
        assert_eq!(g[0], 0.0);
        assert_relative_eq!(g[1], w0 * w0 * b, max_relative = 1e-15);
        assert_eq!(rms_bandwidth(&CoefficientVector::zeros(4), &cfg), 0.0);
        assert!(rms_bandwidth_gradient(&CoefficientVector::zeros(4), &cfg)
            .iter()
            .all(|&x| x == 0.0));
    }

    #[test]
    fn seed_is_deterministic_and_hits_target() {
        let cfg = WaveformConfig {
            basis_kind: BasisKind::SineOnly,
            ..config(16, 640)
        };
        let a = generate_seed(&cfg, 1234.5, 7).unwrap();
        let b = generate_seed(&cfg, 1234.5, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.alpha().iter().all(|&x| x == 0.0));
        assert_relative_eq!(rms_bandwidth(&a, &cfg), 1234.5, max_relative = 1e-10);
        assert_ne!(a, generate_seed(&cfg, 1234.5, 8).unwrap());
    }

    #[test]
    fn rank_warp_is_uniform() {
        let u = rank_to_uniform(&[3.0, -1.0, 10.0, 0.5]);
        assert_eq!(u, vec![0.125, -0.375, 0.375, -0.125]);
    }

    #[test]
    fn tukey_edges() {
        let w = tukey_window(101, 0.2);
        assert_relative_eq!(w[0], 0.0, epsilon = 1e-15);
        assert_relative_eq!(w[100], 0.0, epsilon = 1e-15);
        assert_eq!(w[50], 1.0);
        assert_eq!(tukey_window(8, 0.0), vec![1.0; 8]);
        assert!(TaperSpec::tukey(1.5).validate().is_err());
    }
}
