//! Multi-tone sinusoidal FM (MTSFM) waveform synthesis and autocorrelation
//! sidelobe optimization.
//!
//! The crate is split along the processing chain:
//!
//! * [`waveform`] renders Fourier-series phase coefficients into unit-energy
//!   baseband samples and evaluates the closed-form RMS bandwidth.
//! * [`correlation`] computes the FFT-domain ACF, region masks, GISL, PSLR,
//!   spectra and ambiguity surfaces.
//! * [`objective`] adds the quadratic RMS-bandwidth penalty and provides the
//!   FFT-based analytic gradient plus finite-difference checks.
//! * [`optimizer`] runs heavy-ball descent with Armijo backtracking.

// `!(x > 0.0)` style guards are used on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod correlation;
pub mod error;
pub mod objective;
pub mod optimizer;
pub mod waveform;

pub use correlation::{
    ambiguity_surface, autocorrelation, build_masks, find_mainlobe_null, gisl, pslr, spectrum,
    AmbiguitySurface, CorrelationProfile, Correlator, MaskPair, RegionSpec, Spectrum,
};
pub use error::{Error, Result};
pub use objective::{
    constraint_values, finite_difference_gradient, gisl_gradient, objective_gradient, objective_q,
    penalty, ConstraintScaling, GradientScale, Objective, ObjectiveConfig,
};
pub use optimizer::{
    armijo_backtrack, descent_direction, optimize, IterationRecord, OptimizationResult,
    OptimizerConfig, RunStatus, RunTrace,
};
pub use waveform::{
    build_basis, generate_seed, instantaneous_frequency, rms_bandwidth, rms_bandwidth_gradient,
    swept_bandwidth, synthesize_waveform, uniform_sweep_rms_bandwidth, BasisKind, BasisMatrix, CoefficientVector,
    SampledWaveform, Synthesizer, TaperKind, TaperSpec, WaveformConfig,
};
