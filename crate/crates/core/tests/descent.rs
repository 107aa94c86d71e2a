//! End-to-end behavior of seeds and the descent loop.

use mtsfm_core::*;

fn scenario(l: usize, tbp: f64, basis: BasisKind) -> WaveformConfig {
    WaveformConfig {
        duration: 1.0,
        sample_rate: 10.0 * tbp,
        num_harmonics: l,
        basis_kind: basis,
        constant_phase: 0.0,
        taper: TaperSpec::tukey(0.05),
    }
}

/// Mean sidelobe power in dB over lags from the null out to half the pulse.
fn pedestal_db(r: &CorrelationProfile, null: usize) -> f64 {
    let mags = r.nonnegative_magnitudes();
    let tail = &mags[null..mags.len() / 2];
    10.0 * (tail.iter().map(|x| x * x).sum::<f64>() / tail.len() as f64).log10()
}

#[test]
fn seed_is_deterministic_and_hits_target() {
    let w = scenario(32, 128.0, BasisKind::SineOnly);
    let target = waveform::uniform_sweep_rms_bandwidth(128.0);
    let a = generate_seed(&w, target, 7).unwrap();
    let b = generate_seed(&w, target, 7).unwrap();
    let c = generate_seed(&w, target, 8).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!(a.alpha().iter().all(|&x| x == 0.0));
    assert!((rms_bandwidth(&a, &w) - target).abs() < 1e-9 * target);
    synthesize_waveform(&a, &w).unwrap();
}

#[test]
fn seed_mainlobe_and_pedestal_follow_time_bandwidth() {
    for tbp in [128.0, 256.0] {
        let w = scenario(32, tbp, BasisKind::SineOnly);
        let m = w.num_samples();
        let target = waveform::uniform_sweep_rms_bandwidth(tbp);
        let mut nulls = Vec::new();
        let mut pedestals = Vec::new();
        for rs in 0..8 {
            let seed = generate_seed(&w, target, rs).unwrap();
            let r = autocorrelation(&synthesize_waveform(&seed, &w).unwrap());
            let null = find_mainlobe_null(&r).unwrap();
            let ped = pedestal_db(&r, null);
            let peak = pslr(&r, null).unwrap();
            assert!(peak > ped && peak < ped + 15.0, "tbp {tbp} rs {rs}: pslr {peak} pedestal {ped}");
            nulls.push(null);
            pedestals.push(ped);
        }
        nulls.sort();
        let median = nulls[nulls.len() / 2] as f64;
        let expected = m as f64 / tbp;
        assert!((median - expected).abs() <= 2.0, "tbp {tbp}: nulls {nulls:?}");
        let mean_ped = pedestals.iter().sum::<f64>() / pedestals.len() as f64;
        let floor = -10.0 * tbp.log10();
        assert!((mean_ped - floor).abs() < 2.0, "tbp {tbp}: pedestal {mean_ped} vs {floor}");
    }
}

fn setup(p: u32) -> (WaveformConfig, CoefficientVector, ObjectiveConfig) {
    let w = scenario(8, 32.0, BasisKind::SineOnly);
    let seed = generate_seed(&w, waveform::uniform_sweep_rms_bandwidth(32.0), 0).unwrap();
    let oc = ObjectiveConfig::from_seed(&seed, &w, p, 2.0, 0.1, RegionSpec::FULL).unwrap();
    (w, seed, oc)
}

#[test]
fn huge_gradient_threshold_stops_after_one_step() {
    let (w, seed, oc) = setup(2);
    let cfg = OptimizerConfig {
        gradient_threshold: 1e30,
        ..OptimizerConfig::default()
    };
    let res = optimize(&seed, &w, &oc, &cfg).unwrap();
    assert_eq!(res.trace.iterations(), 1);
    assert_eq!(res.trace.status, RunStatus::GradientConverged);
}

#[test]
fn iteration_cap_is_respected_and_descent_is_monotone() {
    let (w, seed, oc) = setup(20);
    let cfg = OptimizerConfig {
        max_iterations: 25,
        gradient_threshold: 0.0,
        ..OptimizerConfig::default()
    };
    let res = optimize(&seed, &w, &oc, &cfg).unwrap();
    assert_eq!(res.trace.status, RunStatus::MaxIterations);
    assert_eq!(res.trace.iterations(), 25);
    assert!(res.trace.objective_non_increasing());
    let first = res.trace.records.first().unwrap().objective;
    let last = res.trace.records.last().unwrap().objective;
    assert!(last < first);
    for (i, rec) in res.trace.records.iter().enumerate() {
        assert_eq!(rec.iteration, i);
    }
}

#[test]
fn runs_are_deterministic() {
    let (w, seed, oc) = setup(2);
    let cfg = OptimizerConfig {
        max_iterations: 40,
        ..OptimizerConfig::default()
    };
    let a = optimize(&seed, &w, &oc, &cfg).unwrap();
    let b = optimize(&seed, &w, &oc, &cfg).unwrap();
    assert_eq!(a.coefficients, b.coefficients);
    let strip = |t: &RunTrace| t.records.clone();
    assert_eq!(strip(&a.trace), strip(&b.trace));
}

#[test]
fn restart_from_result_keeps_descending() {
    let (w, seed, oc) = setup(2);
    let cfg = OptimizerConfig {
        max_iterations: 30,
        gradient_threshold: 0.0,
        ..OptimizerConfig::default()
    };
    let first = optimize(&seed, &w, &oc, &cfg).unwrap();
    let second = optimize(&first.coefficients, &w, &oc, &cfg).unwrap();
    let end_first = first.trace.records.last().unwrap().objective;
    let start_second = second.trace.records[0].objective;
    assert!((end_first - start_second).abs() <= 1e-12 * end_first);
    assert!(second.trace.records.last().unwrap().objective <= start_second);
}

#[test]
fn sine_only_runs_never_populate_cosine_block() {
    let (w, seed, oc) = setup(20);
    let cfg = OptimizerConfig {
        max_iterations: 20,
        ..OptimizerConfig::default()
    };
    let res = optimize(&seed, &w, &oc, &cfg).unwrap();
    assert!(res.coefficients.alpha().iter().all(|&x| x == 0.0));
}

#[test]
fn seed_of_wrong_length_is_rejected() {
    let (w, _, oc) = setup(2);
    let bad = CoefficientVector::zeros(5);
    assert!(optimize(&bad, &w, &oc, &OptimizerConfig::default()).is_err());
}

#[test]
fn invalid_optimizer_settings_are_rejected() {
    let (w, seed, oc) = setup(2);
    for cfg in [
        OptimizerConfig { rho_down: 1.5, ..Default::default() },
        OptimizerConfig { armijo_c: 0.0, ..Default::default() },
        OptimizerConfig { max_iterations: 0, ..Default::default() },
        OptimizerConfig { rho_up: 0.9, ..Default::default() },
    ] {
        assert!(matches!(optimize(&seed, &w, &oc, &cfg), Err(Error::InvalidConfig(_))));
    }
}
