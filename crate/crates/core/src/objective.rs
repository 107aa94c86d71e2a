//! Penalized GISL objective and its analytic gradient.
//!
//! `Q(phi) = GISL(phi, p) + (gamma/2) sum_k max(c_k(phi), 0)^2` where the two
//! constraints keep the RMS bandwidth inside `[(1-delta), (1+delta)]` times the
//! seed value. The GISL gradient is evaluated entirely with FFTs:
//!
//! ```text
//! P      = Re{ F( |r|^(p-2) . r . [w_SL / (w_SL^T |r|^p) - w_ML / (w_ML^T |r|^p)] ) }
//! grad   = 4 GISL  B^T Im{ conj(s) . F^-1[ (F s) . P ] }[0..M]
//! ```
//!
//! with `r = F^-1 |F s|^2` the circular correlation of the zero-padded pulse.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::correlation::{
    autocorrelation, build_masks, find_mainlobe_null, Correlator, CorrelationProfile, MaskPair,
    RegionSpec,
};
use crate::error::{Error, Result};
use crate::waveform::{
    rms_bandwidth, rms_bandwidth_gradient, CoefficientVector, Synthesizer, WaveformConfig,
};

/// Leading factor of the FFT-domain GISL gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientScale {
    /// `4 * GISL(phi, p)`: the exact derivative of the GISL term.
    Gisl,
    /// `4 * Q(phi, p, gamma)`: agrees with the GISL form only where the
    /// penalty vanishes. Kept for comparison studies.
    Objective,
}

pub const DEFAULT_GRADIENT_SCALE: GradientScale = GradientScale::Gisl;

/// Units in which constraint violations enter the penalty.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintScaling {
    /// Violations divided by the seed RMS bandwidth, so `gamma` and the
    /// penalty are unitless and independent of the choice of `T` and `fs`.
    #[default]
    Relative,
    /// Violations in raw (rad/s)^2.
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveConfig {
    /// GISL norm order.
    pub p: u32,
    /// Quadratic penalty weight.
    pub gamma: f64,
    /// Relative RMS-bandwidth bound.
    pub delta: f64,
    /// RMS bandwidth of the seed waveform, (rad/s)^2.
    pub seed_rms_bandwidth: f64,
    pub region: RegionSpec,
    /// Mainlobe null of the seed ACF, held fixed for the whole run.
    pub frozen_null_index: usize,
    #[serde(default)]
    pub scaling: ConstraintScaling,
}

impl ObjectiveConfig {
    /// Divisor applied to `c_k` before it enters the penalty.
    pub fn violation_unit(&self) -> f64 {
        match self.scaling {
            ConstraintScaling::Relative => self.seed_rms_bandwidth,
            ConstraintScaling::Absolute => 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 2 {
            return Err(Error::InvalidConfig(format!("p must be >= 2, got {}", self.p)));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidConfig(format!("gamma must be positive, got {}", self.gamma)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidConfig(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if !(self.seed_rms_bandwidth > 0.0 && self.seed_rms_bandwidth.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "seed RMS bandwidth must be positive, got {}",
                self.seed_rms_bandwidth
            )));
        }
        self.region.validate()
    }

    /// Derives the seed RMS bandwidth and frozen null index from `seed`.
    pub fn from_seed(
        seed: &CoefficientVector,
        wconfig: &WaveformConfig,
        p: u32,
        gamma: f64,
        delta: f64,
        region: RegionSpec,
    ) -> Result<Self> {
        let s = Synthesizer::new(wconfig)?.render(seed)?;
        let null = find_mainlobe_null(&autocorrelation(&s))?;
        build_masks(region, null, s.len())?;
        let cfg = ObjectiveConfig {
            p,
            gamma,
            delta,
            seed_rms_bandwidth: rms_bandwidth(seed, wconfig),
            region,
            frozen_null_index: null,
            scaling: ConstraintScaling::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Objective components at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub objective: f64,
    pub gisl: f64,
    pub penalty: f64,
    pub c1: f64,
    pub c2: f64,
}

/// Evaluator holding the basis, transform plans and frozen masks for one
/// waveform configuration.
#[derive(Debug, Clone)]
pub struct Objective {
    synth: Synthesizer,
    correlator: Correlator,
    config: ObjectiveConfig,
    masks: MaskPair,
    sidelobe_circ: Vec<f64>,
    mainlobe_circ: Vec<f64>,
    scale: GradientScale,
}

struct AcfState {
    samples: Vec<Complex64>,
    spectrum: Vec<Complex64>,
    circ: Vec<Complex64>,
    mags: Vec<f64>,
}

/// Peak-relative p-norm sums over the nonzero weights of a circular mask.
struct NormParts {
    peak: f64,
    rel_sum: f64,
}

impl NormParts {
    fn new(mags: &[f64], weights: &[f64], p: u32) -> Self {
        let peak = mags
            .iter()
            .zip(weights)
            .filter(|(_, &w)| w != 0.0)
            .fold(0.0_f64, |a, (&x, _)| a.max(x));
        let rel_sum = if peak > 0.0 {
            mags.iter()
                .zip(weights)
                .filter(|(_, &w)| w != 0.0)
                .map(|(&x, &w)| w * (x / peak).powi(p as i32))
                .sum()
        } else {
            0.0
        };
        NormParts { peak, rel_sum }
    }

    /// `||w . r||_p^2`.
    fn norm_sq(&self, p: u32) -> f64 {
        self.peak * self.peak * self.rel_sum.powf(2.0 / p as f64)
    }

    /// `|r_k|^(p-2) / sum w |r|^p` for one lag.
    fn weight(&self, mag: f64, p: u32) -> f64 {
        (mag / self.peak).powi(p as i32 - 2) / (self.peak * self.peak * self.rel_sum)
    }
}

impl Objective {
    pub fn new(wconfig: &WaveformConfig, config: ObjectiveConfig) -> Result<Self> {
        config.validate()?;
        let synth = Synthesizer::new(wconfig)?;
        let m = synth.basis().samples();
        let correlator = Correlator::new(m);
        let masks = build_masks(config.region, config.frozen_null_index, m)?;
        let n = correlator.fft_len();
        Ok(Objective {
            sidelobe_circ: MaskPair::to_circular(&masks.sidelobe, n),
            mainlobe_circ: MaskPair::to_circular(&masks.mainlobe, n),
            synth,
            correlator,
            config,
            masks,
            scale: DEFAULT_GRADIENT_SCALE,
        })
    }

    pub fn with_gradient_scale(mut self, scale: GradientScale) -> Self {
        self.scale = scale;
        self
    }

    pub fn config(&self) -> &ObjectiveConfig {
        &self.config
    }

    pub fn waveform_config(&self) -> &WaveformConfig {
        self.synth.config()
    }

    pub fn synthesizer(&self) -> &Synthesizer {
        &self.synth
    }

    pub fn masks(&self) -> &MaskPair {
        &self.masks
    }

    pub fn dimension(&self) -> usize {
        2 * self.synth.config().num_harmonics
    }

    fn check_len(&self, stacked: &[f64]) -> Result<()> {
        if stacked.len() != self.dimension() {
            return Err(Error::Dimension(format!(
                "expected {} stacked coefficients, got {}",
                self.dimension(),
                stacked.len()
            )));
        }
        Ok(())
    }

    fn acf_state(&self, stacked: &[f64]) -> AcfState {
        let samples = self.synth.render_unchecked(stacked);
        let (spectrum, circ) = self.correlator.circular_acf(&samples);
        let mags = circ.iter().map(|c| c.norm()).collect();
        AcfState {
            samples,
            spectrum,
            circ,
            mags,
        }
    }

    fn norm_parts(&self, mags: &[f64]) -> Result<(NormParts, NormParts)> {
        let p = self.config.p;
        let sl = NormParts::new(mags, &self.sidelobe_circ, p);
        let ml = NormParts::new(mags, &self.mainlobe_circ, p);
        if ml.peak == 0.0 {
            return Err(Error::EmptyRegion("mainlobe region carries no energy".into()));
        }
        Ok((sl, ml))
    }

    fn gisl_of(&self, mags: &[f64]) -> Result<f64> {
        let (sl, ml) = self.norm_parts(mags)?;
        if sl.peak == 0.0 {
            return Ok(0.0);
        }
        Ok(sl.norm_sq(self.config.p) / ml.norm_sq(self.config.p))
    }

    /// Correlation profile of the rendered coefficients, for reporting.
    pub fn profile(&self, stacked: &[f64]) -> Result<CorrelationProfile> {
        self.check_len(stacked)?;
        let state = self.acf_state(stacked);
        Ok(self
            .correlator
            .centered_from_circular(&state.circ, 1.0 / self.synth.config().sample_rate))
    }

    pub fn constraint_values_stacked(&self, stacked: &[f64]) -> Result<(f64, f64)> {
        let coeffs = CoefficientVector::from_stacked(stacked)?;
        Ok(constraint_values_raw(
            rms_bandwidth(&coeffs, self.synth.config()),
            &self.config,
        ))
    }

    pub fn penalty_stacked(&self, stacked: &[f64]) -> Result<f64> {
        let (c1, c2) = self.constraint_values_stacked(stacked)?;
        Ok(penalty_raw(c1, c2, &self.config))
    }

    pub fn gisl_stacked(&self, stacked: &[f64]) -> Result<f64> {
        self.check_len(stacked)?;
        self.gisl_of(&self.acf_state(stacked).mags)
    }

    pub fn evaluate_stacked(&self, stacked: &[f64]) -> Result<Evaluation> {
        let gisl = self.gisl_stacked(stacked)?;
        let (c1, c2) = self.constraint_values_stacked(stacked)?;
        let penalty = penalty_raw(c1, c2, &self.config);
        Ok(Evaluation {
            objective: gisl + penalty,
            gisl,
            penalty,
            c1,
            c2,
        })
    }

    pub fn value_stacked(&self, stacked: &[f64]) -> Result<f64> {
        Ok(self.evaluate_stacked(stacked)?.objective)
    }

    pub fn gisl_gradient_stacked(&self, stacked: &[f64]) -> Result<Vec<f64>> {
        self.check_len(stacked)?;
        let state = self.acf_state(stacked);
        let p = self.config.p;
        let (sl, ml) = self.norm_parts(&state.mags)?;
        if sl.peak == 0.0 {
            return Ok(vec![0.0; self.dimension()]);
        }
        let gisl = sl.norm_sq(p) / ml.norm_sq(p);
        let leading = match self.scale {
            GradientScale::Gisl => 4.0 * gisl,
            GradientScale::Objective => {
                4.0 * (gisl + self.penalty_stacked(stacked)?)
            }
        };

        // v = |r|^(p-2) r [w_SL / S_SL - w_ML / S_ML]
        let mut v: Vec<Complex64> = state
            .circ
            .iter()
            .zip(&state.mags)
            .zip(self.sidelobe_circ.iter().zip(&self.mainlobe_circ))
            .map(|((&r, &mag), (&wsl, &wml))| {
                let mut u = 0.0;
                if wsl != 0.0 {
                    u += wsl * sl.weight(mag, p);
                }
                if wml != 0.0 {
                    u -= wml * ml.weight(mag, p);
                }
                r * u
            })
            .collect();
        self.correlator.forward_in_place(&mut v);

        // y = F^-1[(F s) . Re{F v}]
        let mut y: Vec<Complex64> = state
            .spectrum
            .iter()
            .zip(&v)
            .map(|(x, pv)| x * pv.re)
            .collect();
        self.correlator.inverse_in_place(&mut y);

        // Zero-padding adjoint: only the first M entries meet the basis.
        let dpsi: Vec<f64> = state
            .samples
            .iter()
            .zip(&y)
            .map(|(s, yv)| leading * (s.conj() * yv).im)
            .collect();
        Ok(self.synth.basis().apply_transpose(&dpsi))
    }

    pub fn gradient_stacked(&self, stacked: &[f64]) -> Result<Vec<f64>> {
        let mut grad = self.gisl_gradient_stacked(stacked)?;
        let coeffs = CoefficientVector::from_stacked(stacked)?;
        let (c1, c2) = constraint_values_raw(rms_bandwidth(&coeffs, self.synth.config()), &self.config);
        // grad c1 = +grad beta^2, grad c2 = -grad beta^2
        let unit = self.config.violation_unit();
        let weight = self.config.gamma * (c1.max(0.0) - c2.max(0.0)) / (unit * unit);
        if weight != 0.0 {
            let rms_grad = rms_bandwidth_gradient(&coeffs, self.synth.config());
            grad.iter_mut().zip(&rms_grad).for_each(|(g, r)| *g += weight * r);
        }
        Ok(grad)
    }

    /// Objective value and gradient from a single rendering.
    pub fn value_and_gradient_stacked(&self, stacked: &[f64]) -> Result<(Evaluation, Vec<f64>)> {
        Ok((self.evaluate_stacked(stacked)?, self.gradient_stacked(stacked)?))
    }

    pub fn constraint_values(&self, coeffs: &CoefficientVector) -> Result<(f64, f64)> {
        self.constraint_values_stacked(&coeffs.to_stacked())
    }

    pub fn penalty(&self, coeffs: &CoefficientVector) -> Result<f64> {
        self.penalty_stacked(&coeffs.to_stacked())
    }

    pub fn gisl(&self, coeffs: &CoefficientVector) -> Result<f64> {
        self.gisl_stacked(&coeffs.to_stacked())
    }

    pub fn value(&self, coeffs: &CoefficientVector) -> Result<f64> {
        self.value_stacked(&coeffs.to_stacked())
    }

    pub fn gisl_gradient(&self, coeffs: &CoefficientVector) -> Result<Vec<f64>> {
        self.gisl_gradient_stacked(&coeffs.to_stacked())
    }

    pub fn gradient(&self, coeffs: &CoefficientVector) -> Result<Vec<f64>> {
        self.gradient_stacked(&coeffs.to_stacked())
    }
}

fn constraint_values_raw(beta_sq: f64, config: &ObjectiveConfig) -> (f64, f64) {
    let b0 = config.seed_rms_bandwidth;
    (
        beta_sq - (1.0 + config.delta) * b0,
        (1.0 - config.delta) * b0 - beta_sq,
    )
}

fn penalty_raw(c1: f64, c2: f64, config: &ObjectiveConfig) -> f64 {
    let unit = config.violation_unit();
    let v1 = c1.max(0.0) / unit;
    let v2 = c2.max(0.0) / unit;
    0.5 * config.gamma * (v1 * v1 + v2 * v2)
}

/// `(c1, c2)`; the point is feasible when both are `<= 0`.
pub fn constraint_values(
    coeffs: &CoefficientVector,
    wconfig: &WaveformConfig,
    obj: &ObjectiveConfig,
) -> (f64, f64) {
    constraint_values_raw(rms_bandwidth(coeffs, wconfig), obj)
}

pub fn penalty(coeffs: &CoefficientVector, wconfig: &WaveformConfig, obj: &ObjectiveConfig) -> f64 {
    let (c1, c2) = constraint_values(coeffs, wconfig, obj);
    penalty_raw(c1, c2, obj)
}

pub fn objective_q(
    coeffs: &CoefficientVector,
    wconfig: &WaveformConfig,
    obj: &ObjectiveConfig,
) -> Result<f64> {
    Objective::new(wconfig, *obj)?.value(coeffs)
}

pub fn gisl_gradient(
    coeffs: &CoefficientVector,
    wconfig: &WaveformConfig,
    obj: &ObjectiveConfig,
) -> Result<Vec<f64>> {
    Objective::new(wconfig, *obj)?.gisl_gradient(coeffs)
}

pub fn objective_gradient(
    coeffs: &CoefficientVector,
    wconfig: &WaveformConfig,
    obj: &ObjectiveConfig,
) -> Result<Vec<f64>> {
    Objective::new(wconfig, *obj)?.gradient(coeffs)
}

/// `1e-6 * max(1, ||x||_inf)`.
pub fn default_fd_step(x: &[f64]) -> f64 {
    1e-6 * x.iter().fold(1.0_f64, |a, v| a.max(v.abs()))
}

/// Central differences, one coordinate at a time.
pub fn finite_difference_gradient<F>(mut f: F, x: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    if !(h > 0.0) {
        return Err(Error::InvalidConfig(format!("finite-difference step must be positive, got {h}")));
    }
    let mut probe = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let up = f(&probe)?;
        probe[i] = x[i] - h;
        let down = f(&probe)?;
        probe[i] = x[i];
        grad.push((up - down) / (2.0 * h));
    }
    Ok(grad)
}

/// `||a - b||_inf / ||b||_inf`.
pub fn max_relative_error(analytic: &[f64], reference: &[f64]) -> f64 {
    let scale = reference.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let err = analytic
        .iter()
        .zip(reference)
        .fold(0.0_f64, |a, (x, y)| a.max((x - y).abs()));
    if scale == 0.0 {
        err
    } else {
        err / scale
    }
}
