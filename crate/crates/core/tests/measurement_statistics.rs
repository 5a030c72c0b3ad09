mod common;

use common::random_state_from_seed;
use cvclone_core::measurement::{estimate_mean_var, joint_measure_sample, SampleStats};
use cvclone_core::GaussianState;

fn within(stats: &SampleStats, expected: f64) -> bool {
    (stats.variance - expected).abs() <= 3.0 * stats.std_error
}

#[test]
fn joint_measurement_adds_half_a_vacuum_unit() {
    for seed in 0..50 {
        let state = random_state_from_seed(1000 + seed, 1);
        let (x, p) = joint_measure_sample(&state, 20_000, seed).unwrap();
        let (sx, sp) = (estimate_mean_var(&x).unwrap(), estimate_mean_var(&p).unwrap());
        assert!(within(&sx, state.cov()[(0, 0)] + 0.5), "seed {seed}: {sx:?}");
        assert!(within(&sp, state.cov()[(1, 1)] + 0.5), "seed {seed}: {sp:?}");
    }
}

#[test]
fn averaging_n_joint_measurements_reaches_one_over_n() {
    let state = GaussianState::coherent(0.8, -1.1);
    let count = 40_000;
    for n in [1usize, 2, 4] {
        let batches: Vec<_> = (0..n as u64).map(|k| joint_measure_sample(&state, count, 500 + k).unwrap()).collect();
        let avg: Vec<f64> = (0..count)
            .map(|i| batches.iter().map(|(x, _)| x.values[i]).sum::<f64>() / n as f64)
            .collect();
        let stats = estimate_mean_var(&cvclone_core::measurement::SampleBatch { values: avg, seed: 0 }).unwrap();
        assert!(within(&stats, 1.0 / n as f64), "n={n}: {stats:?}");
    }
}
