//! Independent numerical oracles for the closed forms and FFT paths.

use std::f64::consts::PI;

use mtsfm_core::correlation::autocorrelation_direct;
use mtsfm_core::objective::{default_fd_step, max_relative_error};
use mtsfm_core::waveform::uniform_sweep_rms_bandwidth;
use mtsfm_core::*;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn config(l: usize, m: usize, basis: BasisKind, taper: TaperSpec) -> WaveformConfig {
    WaveformConfig {
        duration: 1.0,
        sample_rate: m as f64,
        num_harmonics: l,
        basis_kind: basis,
        constant_phase: 0.0,
        taper,
    }
}

/// Random coefficients with a peak instantaneous frequency well below fs/2.
fn random_coeffs(rng: &mut ChaCha8Rng, w: &WaveformConfig) -> CoefficientVector {
    let l = w.num_harmonics;
    let mut draw = |h: usize| rng.random_range(-1.0..1.0) / (h + 1) as f64;
    let alpha: Vec<f64> = (0..l).map(&mut draw).collect();
    let beta: Vec<f64> = (0..l).map(&mut draw).collect();
    let c = CoefficientVector::new(alpha, beta).unwrap().restricted_to(w.basis_kind);
    // keep the sweep near fs/10
    let sweep = swept_bandwidth(&c, w).unwrap();
    c.scaled(w.sample_rate / 10.0 / sweep)
}

#[test]
fn fft_acf_matches_direct_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let w = config(8, 512, BasisKind::Full, TaperSpec::tukey(0.05));
    let s = synthesize_waveform(&random_coeffs(&mut rng, &w), &w).unwrap();
    let r = autocorrelation(&s);
    let direct = autocorrelation_direct(&s.samples);
    let err = r
        .values
        .iter()
        .zip(&direct)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    assert!(err < 1e-10, "max deviation {err:e}");
    assert!((r.lag(0).re - 1.0).abs() < 1e-10);
    assert!(r.lag(0).im.abs() < 1e-10);
    for k in 1..512isize {
        assert!((r.lag(-k) - r.lag(k).conj()).norm() < 1e-10);
    }
}

#[test]
fn instantaneous_frequency_matches_phase_difference() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let w = config(8, 4096, BasisKind::Full, TaperSpec::none());
    let coeffs = random_coeffs(&mut rng, &w);
    let m = instantaneous_frequency(&coeffs, &w).unwrap();
    let s = synthesize_waveform(&coeffs, &w).unwrap();

    let mut phase: Vec<f64> = s.samples.iter().map(|x| x.arg()).collect();
    for n in 1..phase.len() {
        let mut d = phase[n] - phase[n - 1];
        while d > PI {
            d -= 2.0 * PI;
        }
        while d < -PI {
            d += 2.0 * PI;
        }
        phase[n] = phase[n - 1] + d;
    }
    let fs = w.sample_rate;
    let scale = m.iter().fold(0.0_f64, |a, f| a.max(f.abs()));
    for n in 16..phase.len() - 16 {
        let fd = (phase[n + 1] - phase[n - 1]) * fs / 2.0 / (2.0 * PI);
        let rel = (fd - m[n]).abs() / scale;
        assert!(rel < 1e-3, "n = {n}: fd {fd} analytic {}", m[n]);
    }
}

/// Second moment of the DFT power spectrum about its centroid, in (rad/s)^2.
/// Without zero padding the DFT of one period of the phase series is exactly
/// the line spectrum of the periodic waveform, so no edge leakage enters.
fn spectral_second_moment(s: &SampledWaveform) -> f64 {
    let spec = spectrum(s, 1).unwrap();
    let total = spec.total_power();
    let centroid: f64 = spec
        .frequencies
        .iter()
        .zip(&spec.power)
        .map(|(f, p)| f * p)
        .sum::<f64>()
        / total;
    let moment: f64 = spec
        .frequencies
        .iter()
        .zip(&spec.power)
        .map(|(f, p)| (f - centroid).powi(2) * p)
        .sum::<f64>()
        / total;
    (2.0 * PI).powi(2) * moment
}

#[test]
fn rms_bandwidth_matches_spectral_moment() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let w = config(8, 2048, BasisKind::Full, TaperSpec::none());
    for _ in 0..5 {
        let coeffs = random_coeffs(&mut rng, &w);
        let s = synthesize_waveform(&coeffs, &w).unwrap();
        let closed = rms_bandwidth(&coeffs, &w);
        let numeric = spectral_second_moment(&s);
        let rel = (closed - numeric).abs() / numeric;
        assert!(rel < 0.02, "closed {closed} numeric {numeric}");
    }
}

#[test]
fn rms_bandwidth_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let w = config(8, 256, BasisKind::Full, TaperSpec::none());
    let coeffs = random_coeffs(&mut rng, &w);
    let x = coeffs.to_stacked();
    let analytic = rms_bandwidth_gradient(&coeffs, &w);
    let fd = finite_difference_gradient(
        |v| Ok(rms_bandwidth(&CoefficientVector::from_stacked(v)?, &w)),
        &x,
        default_fd_step(&x),
    )
    .unwrap();
    let err = max_relative_error(&analytic, &fd);
    assert!(err < 1e-8, "{err:e}");
}

#[test]
fn finite_difference_error_is_second_order() {
    // f(x) = sum sin(x_i) exp(x_{i+1} / 2), third derivatives O(1)
    let f = |v: &[f64]| -> Result<f64> {
        Ok(v.windows(2).map(|w| w[0].sin() * (0.5 * w[1]).exp()).sum())
    };
    let x: [f64; 4] = [0.3, -0.7, 1.1, 0.2];
    let exact: Vec<f64> = (0..x.len())
        .map(|i| {
            let mut g = 0.0;
            if i + 1 < x.len() {
                g += x[i].cos() * (0.5 * x[i + 1]).exp();
            }
            if i > 0 {
                g += 0.5 * x[i - 1].sin() * (0.5 * x[i]).exp();
            }
            g
        })
        .collect();
    let err = |h: f64| {
        let g = finite_difference_gradient(f, &x, h).unwrap();
        g.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    };
    let ratio = err(1e-2) / err(5e-3);
    assert!((3.5..4.5).contains(&ratio), "error ratio {ratio}");
}

fn objective_for(l: usize, p: u32, rng_seed: u64) -> (Objective, CoefficientVector) {
    let tbp = 4.0 * l as f64;
    let w = WaveformConfig {
        duration: 1.0,
        sample_rate: 10.0 * tbp,
        num_harmonics: l,
        basis_kind: BasisKind::SineOnly,
        constant_phase: 0.0,
        taper: TaperSpec::tukey(0.05),
    };
    let seed = generate_seed(&w, uniform_sweep_rms_bandwidth(tbp), rng_seed).unwrap();
    let oc = ObjectiveConfig::from_seed(&seed, &w, p, 2.0, 0.1, RegionSpec::FULL).unwrap();
    (Objective::new(&w, oc).unwrap(), seed)
}

fn perturbed(seed: &CoefficientVector, rng: &mut ChaCha8Rng, scale: f64) -> Vec<f64> {
    seed.to_stacked()
        .iter()
        .map(|x| scale * x * (1.0 + 0.05 * rng.random_range(-1.0..1.0)))
        .collect()
}

#[test]
fn gisl_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (l, p, tol) in [(4, 2, 1e-5), (16, 20, 1e-4)] {
        let (obj, seed) = objective_for(l, p, 1);
        let x = perturbed(&seed, &mut rng, 1.0);
        let analytic = obj.gisl_gradient_stacked(&x).unwrap();
        let fd = finite_difference_gradient(|v| obj.gisl_stacked(v), &x, default_fd_step(&x)).unwrap();
        let err = max_relative_error(&analytic, &fd);
        assert!(err < tol, "L={l} p={p}: {err:e}");
    }
}

#[test]
fn full_gradient_matches_finite_differences_both_regimes() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for p in [2, 20] {
        let (obj, seed) = objective_for(16, p, 2);
        // 1.0: strictly feasible; 1.2: beta^2 ratio ~1.44, c1 active only
        for scale in [1.0, 1.2] {
            let x = perturbed(&seed, &mut rng, scale);
            let (c1, c2) = obj.constraint_values_stacked(&x).unwrap();
            let analytic = obj.gradient_stacked(&x).unwrap();
            let fd = finite_difference_gradient(|v| obj.value_stacked(v), &x, default_fd_step(&x)).unwrap();
            let err = max_relative_error(&analytic, &fd);
            assert!(err < 1e-4, "p={p} scale={scale} c=({c1:.3e},{c2:.3e}): {err:e}");
            if scale == 1.0 {
                assert_eq!(analytic, obj.gisl_gradient_stacked(&x).unwrap());
            }
        }
    }
}

#[test]
fn objective_scaled_leading_factor_is_wrong_off_the_feasible_set() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (obj, seed) = objective_for(4, 2, 3);
    let x = perturbed(&seed, &mut rng, 1.3);
    assert!(obj.penalty_stacked(&x).unwrap() > 0.0);
    let fd = finite_difference_gradient(|v| obj.gisl_stacked(v), &x, default_fd_step(&x)).unwrap();
    let exact = obj.gisl_gradient_stacked(&x).unwrap();
    let alt = obj
        .clone()
        .with_gradient_scale(GradientScale::Objective)
        .gisl_gradient_stacked(&x)
        .unwrap();
    assert!(max_relative_error(&exact, &fd) < 1e-5);
    assert!(max_relative_error(&alt, &fd) > 1e-2);
}

#[test]
fn penalty_gradient_single_active_term() {
    let (obj, seed) = objective_for(4, 2, 5);
    let x = seed.scaled(1.2);
    let cfg = obj.config();
    let (c1, c2) = obj.constraint_values(&x).unwrap();
    assert!(c1 > 0.0 && c2 < 0.0);
    let grad = obj.gradient(&x).unwrap();
    let gisl = obj.gisl_gradient(&x).unwrap();
    let rms = rms_bandwidth_gradient(&x, obj.waveform_config());
    let unit = cfg.violation_unit();
    for ((g, s), r) in grad.iter().zip(&gisl).zip(&rms) {
        let expected = cfg.gamma * c1 / (unit * unit) * r;
        assert!((g - s - expected).abs() <= 1e-12 * expected.abs().max(1.0));
    }
}

#[test]
fn objective_is_sum_of_parts() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (obj, seed) = objective_for(8, 20, 6);
    for scale in [0.9, 1.0, 1.15] {
        let x = perturbed(&seed, &mut rng, scale);
        let q = obj.value_stacked(&x).unwrap();
        let parts = obj.gisl_stacked(&x).unwrap() + obj.penalty_stacked(&x).unwrap();
        assert!((q - parts).abs() <= 1e-14 * q.abs());
        assert!(q >= obj.gisl_stacked(&x).unwrap());
    }
}

#[test]
fn spectrum_concentrates_in_swept_band() {
    let tbp = 128.0;
    let w = WaveformConfig {
        duration: 1.0,
        sample_rate: 10.0 * tbp,
        num_harmonics: 32,
        basis_kind: BasisKind::SineOnly,
        constant_phase: 0.0,
        taper: TaperSpec::tukey(0.05),
    };
    let seed = generate_seed(&w, uniform_sweep_rms_bandwidth(tbp), 0).unwrap();
    let s = synthesize_waveform(&seed, &w).unwrap();
    let m = instantaneous_frequency(&seed, &w).unwrap();
    let lo = m.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = m.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let spec = spectrum(&s, 4).unwrap();
    assert!((spec.total_power() - 1.0).abs() < 1e-10);
    let frac = spec.fraction_within(lo, hi);
    assert!(frac >= 0.9, "{frac}");
}

#[test]
fn parseval_holds_for_random_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let w = config(1, 300, BasisKind::Full, TaperSpec::none());
    let raw: Vec<Complex64> = (0..300)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let s = SampledWaveform::from_samples(raw, w).unwrap();
    for pad in [1, 3] {
        assert!((spectrum(&s, pad).unwrap().total_power() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn ambiguity_zero_doppler_is_acf_and_volume_is_conserved() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let m = 64;
    let w = config(4, m, BasisKind::Full, TaperSpec::tukey(0.05));
    let dopplers: Vec<f64> = (-(m as isize) / 2..(m as isize) / 2)
        .map(|j| j as f64 * w.sample_rate / m as f64)
        .collect();
    let mut volumes = Vec::new();
    for _ in 0..2 {
        let s = synthesize_waveform(&random_coeffs(&mut rng, &w), &w).unwrap();
        let af = ambiguity_surface(&s, &dopplers).unwrap();
        let zero = dopplers.iter().position(|&d| d == 0.0).unwrap();
        let acf = autocorrelation(&s);
        for (a, b) in af.columns[zero].iter().zip(&acf.values) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!((af.columns[zero][m - 1].norm() - 1.0).abs() < 1e-12);
        volumes.push(af.volume());
    }
    assert!((volumes[0] - volumes[1]).abs() / volumes[0] < 0.02, "{volumes:?}");
    // full Doppler period: volume equals M for unit energy
    assert!((volumes[0] - m as f64).abs() < 1e-9 * m as f64);
}

#[test]
fn ambiguity_doppler_column_matches_direct_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let w = config(3, 48, BasisKind::Full, TaperSpec::none());
    let s = synthesize_waveform(&random_coeffs(&mut rng, &w), &w).unwrap();
    let nu = 5.5;
    let af = ambiguity_surface(&s, &[nu]).unwrap();
    let grid = w.time_grid();
    let shifted: Vec<Complex64> = s
        .samples
        .iter()
        .zip(&grid)
        .map(|(x, t)| x * Complex64::from_polar(1.0, 2.0 * PI * nu * t))
        .collect();
    let m = s.len() as isize;
    for k in -(m - 1)..m {
        let direct: Complex64 = (0.max(-k)..m.min(m - k))
            .map(|n| shifted[n as usize] * s.samples[(n + k) as usize].conj())
            .sum();
        assert!((af.columns[0][(m - 1 + k) as usize] - direct).norm() < 1e-12);
    }
}
