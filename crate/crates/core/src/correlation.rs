//! FFT-domain autocorrelation and the sidelobe metrics built on it.
//!
//! Profiles are stored lag-0-centered: index `M - 1 + k` holds lag `k` for
//! `k` in `-(M-1)..=(M-1)`, with `r[k] = sum_n s_n conj(s_{n+k})`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::waveform::SampledWaveform;

/// The first local minimum must sit inside this fraction of the lag axis.
pub const MAX_NULL_FRACTION: f64 = 0.25;

/// Forward/inverse transform pair sized for linear correlation of length-`M`
/// sequences. The transform length is the next power of two at or above
/// `2M - 1`, so circular correlation of the zero-padded input equals linear
/// correlation.
#[derive(Clone)]
pub struct Correlator {
    samples: usize,
    fft_len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Correlator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Correlator")
            .field("samples", &self.samples)
            .field("fft_len", &self.fft_len)
            .finish()
    }
}

impl Correlator {
    pub fn new(samples: usize) -> Self {
        let fft_len = (2 * samples.max(1) - 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        Correlator {
            samples,
            fft_len,
            forward: planner.plan_fft_forward(fft_len),
            inverse: planner.plan_fft_inverse(fft_len),
        }
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn fft_len(&self) -> usize {
        self.fft_len
    }

    /// Zero-padded forward transform of `s`.
    pub fn forward(&self, s: &[Complex64]) -> Vec<Complex64> {
        debug_assert!(s.len() <= self.fft_len);
        let mut buf = vec![Complex64::new(0.0, 0.0); self.fft_len];
        buf[..s.len()].copy_from_slice(s);
        self.forward.process(&mut buf);
        buf
    }

    /// Normalized inverse transform, in place.
    pub fn inverse_in_place(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
        let k = 1.0 / self.fft_len as f64;
        buf.iter_mut().for_each(|x| *x *= k);
    }

    pub fn forward_in_place(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
    }

    /// Returns the spectrum `X = F s` and the circular correlation
    /// `c[k] = sum_n s_{n+k} conj(s_n)`, with negative lags wrapped to the end.
    pub fn circular_acf(&self, s: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let spectrum = self.forward(s);
        let mut r: Vec<Complex64> = spectrum
            .iter()
            .map(|x| Complex64::new(x.norm_sqr(), 0.0))
            .collect();
        self.inverse_in_place(&mut r);
        (spectrum, r)
    }

    /// Centered profile from a circular buffer produced by [`Self::circular_acf`].
    pub fn centered_from_circular(&self, circ: &[Complex64], lag_spacing: f64) -> CorrelationProfile {
        let m = self.samples as isize;
        let n = self.fft_len as isize;
        let values = (-(m - 1)..=(m - 1))
            .map(|k| circ[(-k).rem_euclid(n) as usize])
            .collect();
        CorrelationProfile { values, lag_spacing }
    }

    /// Cross-correlation `x[k] = sum_n a_n conj(b_{n+k})`, lag-0-centered.
    pub fn cross_correlation(&self, a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
        let fa = self.forward(a);
        let mut prod: Vec<Complex64> = self
            .forward(b)
            .into_iter()
            .zip(fa)
            .map(|(xb, xa)| xb * xa.conj())
            .collect();
        self.inverse_in_place(&mut prod);
        // prod[k] = sum_n b_{n+k} conj(a_n); conjugate to get the a-first form
        let m = self.samples as isize;
        let n = self.fft_len as isize;
        (-(m - 1)..=(m - 1))
            .map(|k| prod[k.rem_euclid(n) as usize].conj())
            .collect()
    }
}

/// Sampled autocorrelation over lags `-(M-1)..=(M-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationProfile {
    pub values: Vec<Complex64>,
    /// Seconds per lag step (`1/fs`).
    pub lag_spacing: f64,
}

impl CorrelationProfile {
    /// Number of waveform samples `M`.
    pub fn num_samples(&self) -> usize {
        self.values.len().div_ceil(2)
    }

    pub fn center(&self) -> usize {
        self.num_samples() - 1
    }

    pub fn lag(&self, k: isize) -> Complex64 {
        self.values[(self.center() as isize + k) as usize]
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    /// `|r[k]|` for `k = 0..M`.
    pub fn nonnegative_magnitudes(&self) -> Vec<f64> {
        self.values[self.center()..].iter().map(|v| v.norm()).collect()
    }

    /// Lag in seconds for storage index `idx`.
    pub fn lag_seconds(&self, idx: usize) -> f64 {
        (idx as f64 - self.center() as f64) * self.lag_spacing
    }

    /// Returns a profile with every value multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        CorrelationProfile {
            values: self.values.iter().map(|v| v * c).collect(),
            lag_spacing: self.lag_spacing,
        }
    }
}

pub fn autocorrelation(s: &SampledWaveform) -> CorrelationProfile {
    let correlator = Correlator::new(s.len());
    let (_, circ) = correlator.circular_acf(&s.samples);
    correlator.centered_from_circular(&circ, 1.0 / s.config.sample_rate)
}

/// Direct `O(M^2)` evaluation of `r[k] = sum_n s_n conj(s_{n+k})`, centered.
pub fn autocorrelation_direct(samples: &[Complex64]) -> Vec<Complex64> {
    let m = samples.len() as isize;
    (-(m - 1)..=(m - 1))
        .map(|k| {
            let lo = 0.max(-k);
            let hi = m.min(m - k);
            (lo..hi)
                .map(|n| samples[n as usize] * samples[(n + k) as usize].conj())
                .sum()
        })
        .collect()
}

/// Sidelobe region `{null <= |k| <= outer_fraction * (M - 1)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub outer_fraction: f64,
}

impl RegionSpec {
    pub const FULL: RegionSpec = RegionSpec { outer_fraction: 1.0 };

    pub fn validate(&self) -> Result<()> {
        if !(self.outer_fraction > 0.0 && self.outer_fraction <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "region outer_fraction must lie in (0, 1], got {}",
                self.outer_fraction
            )));
        }
        Ok(())
    }

    /// Largest sidelobe lag index, `floor(outer_fraction * (M - 1))`.
    pub fn outer_bound(&self, m: usize) -> usize {
        (self.outer_fraction * (m - 1) as f64).floor() as usize
    }
}

/// Disjoint 0/1 weights over the centered lag axis.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskPair {
    pub sidelobe: Vec<f64>,
    pub mainlobe: Vec<f64>,
    pub null_index: usize,
}

impl MaskPair {
    /// Reorders a centered mask into circular FFT order of length `fft_len`.
    pub fn to_circular(mask: &[f64], fft_len: usize) -> Vec<f64> {
        let m = mask.len().div_ceil(2) as isize;
        let mut out = vec![0.0; fft_len];
        for k in -(m - 1)..=(m - 1) {
            out[k.rem_euclid(fft_len as isize) as usize] = mask[(m - 1 + k) as usize];
        }
        out
    }

    pub fn sidelobe_count(&self) -> usize {
        self.sidelobe.iter().filter(|&&w| w != 0.0).count()
    }
}

/// Index of the first strict local minimum of a nonnegative-lag magnitude
/// sequence (`mags[0]` is lag 0).
pub fn first_local_minimum(mags: &[f64]) -> Option<usize> {
    (1..mags.len().saturating_sub(1)).find(|&k| mags[k] <= mags[k - 1] && mags[k] < mags[k + 1])
}

pub fn find_mainlobe_null(r: &CorrelationProfile) -> Result<usize> {
    null_from_magnitudes(&r.nonnegative_magnitudes())
}

pub(crate) fn null_from_magnitudes(mags: &[f64]) -> Result<usize> {
    let m = mags.len();
    let k = first_local_minimum(mags).ok_or_else(|| {
        Error::NoNullFound("|ACF| is non-increasing over all positive lags".into())
    })?;
    let limit = MAX_NULL_FRACTION * (m.saturating_sub(1)) as f64;
    if k as f64 > limit {
        return Err(Error::NoNullFound(format!(
            "first local minimum at lag {k} lies beyond {:.0}% of the {}-lag axis",
            MAX_NULL_FRACTION * 100.0,
            m - 1
        )));
    }
    Ok(k)
}

pub fn build_masks(region: RegionSpec, null_index: usize, m: usize) -> Result<MaskPair> {
    region.validate()?;
    if null_index == 0 {
        return Err(Error::EmptyRegion("null index must be positive".into()));
    }
    let outer = region.outer_bound(m);
    if outer < null_index {
        return Err(Error::EmptyRegion(format!(
            "sidelobe region [{null_index}, {outer}] holds no lags"
        )));
    }
    let len = 2 * m - 1;
    let center = m - 1;
    let mut sidelobe = vec![0.0; len];
    let mut mainlobe = vec![0.0; len];
    for (idx, (sl, ml)) in sidelobe.iter_mut().zip(mainlobe.iter_mut()).enumerate() {
        let k = idx.abs_diff(center);
        if k < null_index {
            *ml = 1.0;
        } else if k <= outer {
            *sl = 1.0;
        }
    }
    Ok(MaskPair {
        sidelobe,
        mainlobe,
        null_index,
    })
}

/// Weighted p-norm `(sum w |x|^p)^(1/p)`, computed relative to the weighted
/// peak so large `p` does not underflow. Returns `(norm, peak)`.
pub(crate) fn weighted_p_norm(mags: &[f64], weights: &[f64], p: u32) -> (f64, f64) {
    let peak = mags
        .iter()
        .zip(weights)
        .filter(|(_, &w)| w != 0.0)
        .fold(0.0_f64, |acc, (&x, _)| acc.max(x));
    if peak == 0.0 {
        return (0.0, 0.0);
    }
    let sum: f64 = mags
        .iter()
        .zip(weights)
        .filter(|(_, &w)| w != 0.0)
        .map(|(&x, &w)| w * (x / peak).powi(p as i32))
        .sum();
    (peak * sum.powf(1.0 / p as f64), peak)
}

/// `||w_SL . r||_p^2 / ||w_ML . r||_p^2`.
pub fn gisl(r: &CorrelationProfile, masks: &MaskPair, p: u32) -> Result<f64> {
    gisl_from_magnitudes(&r.magnitudes(), masks, p)
}

pub(crate) fn gisl_from_magnitudes(mags: &[f64], masks: &MaskPair, p: u32) -> Result<f64> {
    if p < 2 {
        return Err(Error::InvalidConfig(format!("GISL order p must be >= 2, got {p}")));
    }
    if masks.sidelobe.len() != mags.len() || masks.mainlobe.len() != mags.len() {
        return Err(Error::Dimension(format!(
            "mask length {} does not match profile length {}",
            masks.sidelobe.len(),
            mags.len()
        )));
    }
    if !masks.sidelobe.iter().any(|&w| w != 0.0) || !masks.mainlobe.iter().any(|&w| w != 0.0) {
        return Err(Error::EmptyRegion("GISL mask has empty support".into()));
    }
    let (num, _) = weighted_p_norm(mags, &masks.sidelobe, p);
    let (den, _) = weighted_p_norm(mags, &masks.mainlobe, p);
    Ok((num / den).powi(2))
}

/// Peak sidelobe at or beyond `null_index`, relative to lag 0, in dB.
pub fn pslr(r: &CorrelationProfile, null_index: usize) -> Result<f64> {
    let mags = r.nonnegative_magnitudes();
    if null_index == 0 || null_index >= mags.len() {
        return Err(Error::EmptyRegion(format!(
            "no lags at or beyond null index {null_index} (M = {})",
            mags.len()
        )));
    }
    // |r| is symmetric, so the nonnegative half suffices.
    let peak = mags[null_index..].iter().fold(0.0_f64, |a, &x| a.max(x));
    Ok(20.0 * (peak / mags[0]).log10())
}

/// Power spectrum on an fftshifted frequency axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Bin centre frequencies in Hz, ascending from `-fs/2`.
    pub frequencies: Vec<f64>,
    /// Power per bin; sums to the waveform energy.
    pub power: Vec<f64>,
}

impl Spectrum {
    pub fn total_power(&self) -> f64 {
        self.power.iter().sum()
    }

    /// Fraction of power with `lo <= f <= hi`.
    pub fn fraction_within(&self, lo: f64, hi: f64) -> f64 {
        let inside: f64 = self
            .frequencies
            .iter()
            .zip(&self.power)
            .filter(|(&f, _)| f >= lo && f <= hi)
            .map(|(_, &p)| p)
            .sum();
        inside / self.total_power()
    }
}

pub fn spectrum(s: &SampledWaveform, pad_factor: usize) -> Result<Spectrum> {
    if pad_factor == 0 {
        return Err(Error::InvalidConfig("pad_factor must be at least 1".into()));
    }
    let len = pad_factor * s.len();
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    buf[..s.len()].copy_from_slice(&s.samples);
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let fs = s.config.sample_rate;
    let shift = len / 2;
    let mut frequencies = Vec::with_capacity(len);
    let mut power = Vec::with_capacity(len);
    for i in 0..len {
        let bin = (i + len - shift) % len;
        let signed = if bin >= len - shift { bin as f64 - len as f64 } else { bin as f64 };
        frequencies.push(signed * fs / len as f64);
        power.push(buf[bin].norm_sqr() / len as f64);
    }
    Ok(Spectrum { frequencies, power })
}

/// Narrowband ambiguity surface, one column per Doppler bin.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbiguitySurface {
    pub doppler_bins: Vec<f64>,
    /// `columns[j][M - 1 + k]` is `chi(k / fs, doppler_bins[j])`.
    pub columns: Vec<Vec<Complex64>>,
    pub lag_spacing: f64,
}

impl AmbiguitySurface {
    /// Sum of `|chi|^2` over every stored cell.
    pub fn volume(&self) -> f64 {
        self.columns
            .iter()
            .flat_map(|c| c.iter())
            .map(|v| v.norm_sqr())
            .sum()
    }
}

/// `chi(k, nu) = sum_n s_n exp(j 2 pi nu t_n) conj(s_{n+k})`.
pub fn ambiguity_surface(s: &SampledWaveform, doppler_bins: &[f64]) -> Result<AmbiguitySurface> {
    let fs = s.config.sample_rate;
    if let Some(nu) = doppler_bins.iter().find(|nu| nu.abs() > fs / 2.0) {
        return Err(Error::InvalidConfig(format!(
            "Doppler bin {nu} Hz lies outside +/- fs/2 = {} Hz",
            fs / 2.0
        )));
    }
    let correlator = Correlator::new(s.len());
    let grid = s.config.time_grid();
    let columns = doppler_bins
        .par_iter()
        .map(|&nu| {
            if nu == 0.0 {
                let (_, circ) = correlator.circular_acf(&s.samples);
                return correlator.centered_from_circular(&circ, 1.0 / fs).values;
            }
            let shifted: Vec<Complex64> = s
                .samples
                .iter()
                .zip(&grid)
                .map(|(x, &t)| x * Complex64::from_polar(1.0, 2.0 * PI * nu * t))
                .collect();
            correlator.cross_correlation(&shifted, &s.samples)
        })
        .collect();
    Ok(AmbiguitySurface {
        doppler_bins: doppler_bins.to_vec(),
        columns,
        lag_spacing: 1.0 / fs,
    })
}
