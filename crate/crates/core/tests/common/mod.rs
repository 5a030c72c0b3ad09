#![allow(dead_code)]

use cvclone_core::measurement::seeded_rng;
use cvclone_core::optics::{
    make_beam_splitter, make_displacement, make_phase_rotation, make_squeezer,
};
use cvclone_core::{GaussianState, SymplecticTransform};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Random passive/squeezing circuit on `n` modes, squeezing bounded by `max_r`.
pub fn random_transform<R: Rng>(rng: &mut R, n: usize, max_r: f64) -> SymplecticTransform {
    let mut t = SymplecticTransform::identity(n);
    for _ in 0..3 {
        for k in 0..n {
            let r = rng.random_range(-max_r..=max_r);
            let phi = rng.random_range(0.0..std::f64::consts::TAU);
            t = t.then(&make_squeezer(r, k, n).unwrap()).unwrap();
            t = t.then(&make_phase_rotation(phi, k, n).unwrap()).unwrap();
        }
        for k in 0..n.saturating_sub(1) {
            let theta = rng.random_range(0.0..std::f64::consts::PI);
            t = t.then(&make_beam_splitter(theta, k, k + 1, n).unwrap()).unwrap();
        }
    }
    let k = rng.random_range(0..n);
    let (dx, dp) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
    t.then(&make_displacement(dx, dp, k, n).unwrap()).unwrap()
}

/// Random valid (generally mixed) Gaussian state: thermal noise, then a random circuit.
pub fn random_state<R: Rng>(rng: &mut R, n: usize) -> GaussianState {
    let thermal: Vec<f64> = (0..n).flat_map(|_| {
        let nu = 0.5 + rng.random_range(0.0..1.0);
        [nu, nu]
    }).collect();
    let base = GaussianState::new(DVector::zeros(2 * n), DMatrix::from_diagonal(&DVector::from_vec(thermal))).unwrap();
    base.apply_symplectic(&random_transform(rng, n, 0.6)).unwrap()
}

pub fn random_state_from_seed(seed: u64, n: usize) -> GaussianState {
    random_state(&mut seeded_rng(seed, 1), n)
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax()
}

pub fn max_abs_diff_vec(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).amax()
}
