//! Fixtures shared by the benchmarks.

use mtsfm_core::{
    generate_seed, uniform_sweep_rms_bandwidth, BasisKind, CoefficientVector, Objective,
    ObjectiveConfig, RegionSpec, TaperSpec, WaveformConfig,
};

/// Sine-only problem with `m` samples over one second, swept over `m / 10` Hz.
pub fn problem(m: usize, num_harmonics: usize, p: u32) -> (Objective, CoefficientVector) {
    let w = WaveformConfig {
        duration: 1.0,
        sample_rate: m as f64,
        num_harmonics,
        basis_kind: BasisKind::SineOnly,
        constant_phase: 0.0,
        taper: TaperSpec::tukey(0.05),
    };
    let seed = generate_seed(&w, uniform_sweep_rms_bandwidth(m as f64 / 10.0), 0)
        .expect("valid benchmark waveform");
    let cfg = ObjectiveConfig::from_seed(&seed, &w, p, 2.0, 0.1, RegionSpec::FULL)
        .expect("seed has a mainlobe null");
    (Objective::new(&w, cfg).expect("valid objective"), seed)
}
