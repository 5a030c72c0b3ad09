mod common;

use common::{max_abs_diff, max_abs_diff_vec, random_state_from_seed, random_transform};
use cvclone_core::gaussian::coherent_fidelity;
use cvclone_core::measurement::seeded_rng;
use cvclone_core::optics::{
    make_amplifier, make_beam_splitter, make_cv_cnot, make_dft_network, make_phase_rotation, make_squeezer, CnotSign,
};
use cvclone_core::{GaussianChannel, GaussianState, ModeSelection};
use nalgebra::DMatrix;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symplectic_maps_preserve_physicality(seed in any::<u64>(), n in 1usize..4) {
        let state = random_state_from_seed(seed, n);
        let t = random_transform(&mut seeded_rng(seed, 2), n, 0.8);
        prop_assert!(t.symplectic_residual() <= 1e-10);
        let out = state.apply_symplectic(&t).unwrap();
        prop_assert!(out.validate_uncertainty());
    }

    #[test]
    fn library_components_are_symplectic(g in 1.0f64..5.0, r in -1.5f64..1.5, phi in -7.0f64..7.0, m in 1usize..6) {
        let n = 6;
        let ts = [
            make_amplifier(g, 0, 5, n).unwrap(),
            make_squeezer(r, 2, n).unwrap(),
            make_phase_rotation(phi, 1, n).unwrap(),
            make_beam_splitter(phi, 3, 4, n).unwrap(),
            make_cv_cnot(0, 3, CnotSign::Minus, n).unwrap(),
            make_dft_network(m, 0, n).unwrap(),
        ];
        for t in &ts {
            prop_assert!(t.symplectic_residual() <= 1e-10);
        }
    }

    #[test]
    fn composition_is_consistent(seed in any::<u64>(), n in 1usize..4) {
        let state = random_state_from_seed(seed, n);
        let t1 = random_transform(&mut seeded_rng(seed, 3), n, 0.5);
        let t2 = random_transform(&mut seeded_rng(seed, 4), n, 0.5);
        let stepwise = state.apply_symplectic(&t1).unwrap().apply_symplectic(&t2).unwrap();
        let composed = state.apply_symplectic(&t1.then(&t2).unwrap()).unwrap();
        let scale = stepwise.cov().amax().max(1.0);
        prop_assert!(max_abs_diff(stepwise.cov(), composed.cov()) <= 1e-10 * scale);
        prop_assert!(max_abs_diff_vec(stepwise.mean(), composed.mean()) <= 1e-10 * scale);
    }

    #[test]
    fn inverse_undoes_transform(seed in any::<u64>()) {
        let state = random_state_from_seed(seed, 2);
        let t = random_transform(&mut seeded_rng(seed, 5), 2, 0.5);
        let back = state.apply_symplectic(&t).unwrap().apply_symplectic(&t.inverse()).unwrap();
        prop_assert!(max_abs_diff(back.cov(), state.cov()) <= 1e-9);
        prop_assert!(max_abs_diff_vec(back.mean(), state.mean()) <= 1e-9);
    }

    #[test]
    fn reduction_commutes_with_local_channels(seed in any::<u64>(), eta in 0.0f64..1.0, noise in 0.0f64..2.0) {
        let state = random_state_from_seed(seed, 3);
        // pure-loss plus extra noise on one mode: gain sqrt(eta), noise (1 - eta)/2 + noise
        let gain = DMatrix::identity(2, 2) * eta.sqrt();
        let local = GaussianChannel::new(gain, DMatrix::identity(2, 2) * ((1.0 - eta) / 2.0 + noise)).unwrap();
        let sel = ModeSelection::new(vec![2, 0]).unwrap();
        let full = local.embed(&ModeSelection::single(2), 3).unwrap();

        let a = state.apply_channel(&full).unwrap().reduce_to_modes(&sel).unwrap();
        let local_on_sel = local.embed(&ModeSelection::single(0), 2).unwrap();
        let b = state.reduce_to_modes(&sel).unwrap().apply_channel(&local_on_sel).unwrap();
        prop_assert!(max_abs_diff(a.cov(), b.cov()) <= 1e-12 * a.cov().amax().max(1.0));
        prop_assert!(max_abs_diff_vec(a.mean(), b.mean()) <= 1e-12 * a.mean().amax().max(1.0));
    }

    #[test]
    fn coherent_overlap_formula(x in -4.0f64..4.0, p in -4.0f64..4.0, x2 in -4.0f64..4.0, p2 in -4.0f64..4.0) {
        let f = coherent_fidelity([x, p], &GaussianState::coherent(x2, p2)).unwrap();
        let expected = (-((x - x2).powi(2) + (p - p2).powi(2)) / 2.0).exp();
        prop_assert!((f - expected).abs() <= 1e-12);
    }
}

#[test]
fn dft_preserves_photon_number_proxy() {
    let n = 4;
    let state = random_state_from_seed(17, n);
    let proxy = |s: &GaussianState| s.mean().norm_squared() + s.cov().trace() - n as f64;
    let out = state.apply_symplectic(&make_dft_network(n, 0, n).unwrap()).unwrap();
    assert!((proxy(&state) - proxy(&out)).abs() < 1e-10);
}
