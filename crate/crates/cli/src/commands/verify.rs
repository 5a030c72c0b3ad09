//! The invariant suite behind `cvclone verify`.
//!
//! Every check is a pure function of the seed, and the table carries no
//! timings, so repeated runs print identical bytes.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2, TAU};

use cvclone_core::cloners::{
    asymmetric_clone_channels, build_amplifier_cloner, build_amplifier_cloner_with_gain, build_circuit_cloner,
    build_n_to_m, fidelity_bound, run_cloner, squeezed_family_cloner, variance_bound, CloneCount, ClonerBuild,
};
use cvclone_core::grid::{
    check_fourier_self_dual, clone_wave_function, coherent_wavefunction, grid_coherent_fidelity, reduced_density,
    GridParams, OutputMode,
};
use cvclone_core::measurement::{estimate_mean_var, joint_measure_sample, seeded_rng, SimRng, RNG_NAME};
use cvclone_core::optics::{
    make_amplifier, make_beam_splitter, make_cv_cnot, make_dft_network, make_displacement, make_phase_rotation,
    make_squeezer, CnotSign,
};
use cvclone_core::qkd::{exclusion_check, exclusion_check_with, simulate_protocol, ProtocolParams};
use cvclone_core::{GaussianState, ModeSelection, SymplecticTransform};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde_json::json;

use crate::args::VerifyArgs;
use crate::config::resolve_seed;
use crate::output::{fmt_num, Outcome, Table};
use crate::CliError;

pub struct Check {
    pub name: &'static str,
    /// Worst observed value of the checked quantity.
    pub metric: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: &'static str, metric: f64, tolerance: f64) -> Self {
        Self { name, metric, tolerance, passed: metric <= tolerance }
    }
}

/// Thermal noise followed by a random squeeze/rotate/mix/displace circuit.
pub fn random_state(rng: &mut SimRng, n: usize) -> GaussianState {
    let diag: Vec<f64> = (0..n)
        .flat_map(|_| {
            let nu = 0.5 + rng.random_range(0.0..1.0);
            [nu, nu]
        })
        .collect();
    let thermal = GaussianState::new(DVector::zeros(2 * n), DMatrix::from_diagonal(&DVector::from_vec(diag)))
        .expect("thermal state is valid");
    let mut t = SymplecticTransform::identity(n);
    for k in 0..n {
        let r = rng.random_range(-0.6..0.6);
        let phi = rng.random_range(0.0..TAU);
        t = t.then(&make_squeezer(r, k, n).unwrap()).unwrap();
        t = t.then(&make_phase_rotation(phi, k, n).unwrap()).unwrap();
        let (dx, dp) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        t = t.then(&make_displacement(dx, dp, k, n).unwrap()).unwrap();
    }
    for k in 0..n.saturating_sub(1) {
        t = t.then(&make_beam_splitter(rng.random_range(0.0..PI), k, k + 1, n).unwrap()).unwrap();
    }
    thermal.apply_symplectic(&t).expect("dimensions match")
}

fn random_coherent(rng: &mut SimRng) -> (f64, f64) {
    (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0))
}

fn replicate(state: &GaussianState, n: usize) -> GaussianState {
    (1..n).fold(state.clone(), |acc, _| acc.tensor(state))
}

fn all_builders() -> Result<Vec<ClonerBuild>, CliError> {
    let mut builds = vec![build_circuit_cloner(), build_amplifier_cloner()];
    for n in 1..=4 {
        for m in n..=6 {
            builds.push(build_n_to_m(n, m)?);
        }
    }
    for r in [0.5, 1.0, 2.0] {
        builds.push(squeezed_family_cloner(r)?);
    }
    Ok(builds)
}

fn symplectic_residuals() -> Result<Check, CliError> {
    let n = 6;
    let mut worst: f64 = 0.0;
    for g in [1.0, 1.5, 2.0, 4.0] {
        worst = worst.max(make_amplifier(g, 0, 5, n)?.symplectic_residual());
    }
    for (k, r) in [-1.5, -0.3, 0.7, 2.0].into_iter().enumerate() {
        worst = worst.max(make_squeezer(r, k, n)?.symplectic_residual());
        worst = worst.max(make_phase_rotation(r, k, n)?.symplectic_residual());
        worst = worst.max(make_beam_splitter(r, k, k + 1, n)?.symplectic_residual());
    }
    for sign in [CnotSign::Plus, CnotSign::Minus] {
        worst = worst.max(make_cv_cnot(1, 4, sign, n)?.symplectic_residual());
    }
    for m in 1..=n {
        worst = worst.max(make_dft_network(m, 0, n)?.symplectic_residual());
    }
    for b in all_builders()? {
        worst = worst.max(b.transform().symplectic_residual());
    }
    Ok(Check::at_most("symplectic residuals", worst, 1e-10))
}

fn coherent_fidelity_two_thirds(seed: u64) -> Result<Check, CliError> {
    let mut rng = seeded_rng(seed, 10);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let (x, p) = random_coherent(&mut rng);
        for build in [build_circuit_cloner(), build_amplifier_cloner()] {
            let report = run_cloner(&build, &GaussianState::coherent(x, p))?;
            for f in &report.fidelity {
                worst = worst.max((f - 2.0 / 3.0).abs());
            }
        }
    }
    Ok(Check::at_most("1->2 clone fidelity 2/3", worst, 1e-10))
}

fn excess_noise_saturation() -> Result<Check, CliError> {
    let mut worst: f64 = 0.0;
    for build in [build_circuit_cloner(), build_amplifier_cloner()] {
        let report = run_cloner(&build, &GaussianState::vacuum(1))?;
        for e in report.clone_excess_x.iter().chain(&report.clone_excess_p) {
            worst = worst.max((e - 0.5).abs());
        }
    }
    Ok(Check::at_most("1->2 excess noise 1/2", worst, 1e-10))
}

fn canonical_amplifier_matrix() -> DMatrix<f64> {
    let h = FRAC_1_SQRT_2;
    #[rustfmt::skip]
    let m = DMatrix::from_row_slice(6, 6, &[
        1.0, 0.0,  h,   0.0,  h,   0.0,
        0.0, 1.0,  0.0,  h,   0.0, -h,
        1.0, 0.0, -h,   0.0,  h,   0.0,
        0.0, 1.0,  0.0, -h,   0.0, -h,
        1.0, 0.0,  0.0, 0.0,  SQRT_2, 0.0,
        0.0, -1.0, 0.0, 0.0,  0.0, SQRT_2,
    ]);
    m
}

fn construction_equivalence(seed: u64, gain: f64) -> Result<[Check; 2], CliError> {
    let circuit = build_circuit_cloner();
    let amplifier = build_amplifier_cloner_with_gain(gain)?;
    let clones = ModeSelection::range(0, 2);
    let mut rng = seeded_rng(seed, 11);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let input = random_state(&mut rng, 1);
        let a = circuit.output_state(&input)?.reduce_to_modes(&clones)?;
        let b = amplifier.output_state(&input)?.reduce_to_modes(&clones)?;
        worst = worst.max((a.cov() - b.cov()).amax()).max((a.mean() - b.mean()).amax());
    }
    let matrix_dev = (amplifier.transform().matrix() - canonical_amplifier_matrix()).amax();
    Ok([
        Check::at_most("circuit/amplifier equivalence", worst, 1e-10),
        Check::at_most("amplifier composite matrix", matrix_dev, 1e-12),
    ])
}

fn n_to_m_saturation() -> Result<Check, CliError> {
    let mut worst: f64 = 0.0;
    for n in 1..=4 {
        for m in n..=6 {
            let build = build_n_to_m(n, m)?;
            let report = run_cloner(&build, &replicate(&GaussianState::coherent(0.4, -0.9), n))?;
            let sigma = variance_bound(n, CloneCount::Finite(m))?;
            let fid = fidelity_bound(n, CloneCount::Finite(m))?;
            for k in 0..m {
                worst = worst
                    .max((report.clone_excess_x[k] - sigma).abs())
                    .max((report.clone_excess_p[k] - sigma).abs())
                    .max((report.fidelity[k] - fid).abs());
            }
        }
    }
    Ok(Check::at_most("N->M bound saturation", worst, 1e-10))
}

fn anticlone_conjugation(seed: u64) -> Result<Check, CliError> {
    let mut rng = seeded_rng(seed, 12);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let (x, p) = random_coherent(&mut rng);
        let report = run_cloner(&build_circuit_cloner(), &GaussianState::coherent(x, p))?;
        let anti = report.anticlone_mean.expect("circuit has an anticlone");
        worst = worst.max((anti[0] - x).abs()).max((anti[1] + p).abs());
    }
    Ok(Check::at_most("anticlone at (x, -p)", worst, 1e-12))
}

fn no_cloning_products(seed: u64) -> Result<Check, CliError> {
    let mut rng = seeded_rng(seed, 13);
    let builds = all_builders()?;
    let mut margin = f64::INFINITY;
    for _ in 0..5 {
        let input = random_state(&mut rng, 1);
        let m = input.mean();
        let coherent = GaussianState::coherent(m[0], m[1]);
        for build in &builds {
            let n = build.input_modes().len();
            let single = if n == 1 { &input } else { &coherent };
            let report = run_cloner(build, &replicate(single, n))?;
            for pair in report.no_cloning_products() {
                margin = margin.min(pair.xa_pb - pair.bound).min(pair.xb_pa - pair.bound);
            }
        }
    }
    for k in 0..50 {
        let noise_b = 0.02 * 10f64.powf(k as f64 * 3.0 / 49.0);
        let (b, e) = asymmetric_clone_channels(noise_b)?;
        margin = margin
            .min((b.noise()[(0, 0)] * e.noise()[(1, 1)]).sqrt() - 0.5)
            .min((b.noise()[(1, 1)] * e.noise()[(0, 0)]).sqrt() - 0.5);
    }
    Ok(Check::at_most("no-cloning products", -margin, 1e-9))
}

fn squeezed_family() -> Result<Check, CliError> {
    let mut worst: f64 = 0.0;
    for r in [0.5, 1.0, 2.0] {
        let input = GaussianState::squeezed(r, 0.3, -0.6);
        let matched = run_cloner(&squeezed_family_cloner(r)?, &input)?;
        let covariant = run_cloner(&build_circuit_cloner(), &input)?;
        let expected = 1.0 / (1.25 + (2.0 * r).cosh()).sqrt();
        for k in 0..2 {
            worst = worst
                .max((matched.fidelity[k] - 2.0 / 3.0).abs())
                .max((covariant.fidelity[k] - expected).abs());
        }
    }
    Ok(Check::at_most("squeezed-family fidelity", worst, 1e-10))
}

fn information_exclusion() -> Result<Check, CliError> {
    let mut worst: f64 = 0.0;
    let mut consistent = true;
    for i in 0..20 {
        for j in 0..20 {
            let v = 0.05 + 0.4 * (i as f64 + 0.5) / 20.0;
            let nb = 0.05 + 4.95 * (j as f64 + 0.5) / 20.0;
            let r = exclusion_check(v, nb)?;
            worst = worst.max(r.gap.abs());
            consistent &= (r.i_ab >= r.i / 2.0) == (r.i_ab >= r.i_ae - 1e-12);
            consistent &= exclusion_check_with(v, nb, 2.0 / (4.0 * nb))?.gap > 0.0;
        }
    }
    let spot = exclusion_check(0.25, 0.5)?;
    worst = worst.max((spot.i - 1.0).abs()).max((spot.i_ab - 0.5).abs()).max((spot.i_ae - 0.5).abs());
    let mut check = Check::at_most("information exclusion", worst, 1e-12);
    check.passed &= consistent;
    Ok(check)
}

fn joint_measurement(seed: u64) -> Result<Check, CliError> {
    let mut worst: f64 = 0.0;
    let (x, p) = joint_measure_sample(&GaussianState::coherent(1.0, -0.5), 100_000, seed)?;
    for batch in [x, p] {
        let s = estimate_mean_var(&batch)?;
        worst = worst.max((s.variance - 1.0).abs() / s.std_error);
    }
    Ok(Check::at_most("joint measurement variance 1 (z)", worst, 3.0))
}

fn protocol_monte_carlo(seed: u64) -> Result<Check, CliError> {
    let mut worst: f64 = 0.0;
    for (v, nb) in [(0.25, None), (0.25, Some(0.5)), (0.125, Some(0.25))] {
        let run = simulate_protocol(&ProtocolParams::new(v, 200_000, seed)?, nb)?;
        let e = run.report.empirical.as_ref().expect("simulation fills empirical fields");
        worst = worst
            .max((e.empirical_i_ab - run.report.i_ab).abs() / e.stderr_i_ab)
            .max((e.empirical_sift_fraction - 0.5).abs() / e.stderr_sift_fraction);
    }
    Ok(Check::at_most("protocol Monte Carlo (z)", worst, 3.0))
}

fn grid_oracle() -> Result<Check, CliError> {
    let params = GridParams::default();
    let grid = clone_wave_function(coherent_wavefunction(0.5, -0.5), params)?;
    let mut worst: f64 = 0.0;
    for mode in [OutputMode::CloneA, OutputMode::CloneB] {
        let rho = reduced_density(&grid, mode);
        worst = worst
            .max((grid_coherent_fidelity(&rho, [0.5, -0.5]) - 2.0 / 3.0).abs() / 0.01)
            .max((rho.position_moments().1 - 1.0).abs() / 0.02)
            .max((rho.momentum_moments().1 - 1.0).abs() / 0.02);
    }
    let anti = reduced_density(&grid, OutputMode::Ancilla);
    worst = worst
        .max((anti.position_moments().0 - 0.5).abs() / 0.01)
        .max((anti.momentum_moments().0 - 0.5).abs() / 0.01);
    Ok(Check::at_most("grid oracle (fraction of gate)", worst, 1.0))
}

fn fourier_duality() -> Result<Check, CliError> {
    let params = GridParams::new(256, 8.0)?;
    Ok(Check::at_most("Fourier self-duality", check_fourier_self_dual(&params), 1e-6))
}

pub fn checks(seed: u64, gain: f64) -> Result<Vec<Check>, CliError> {
    let [equivalence, matrix] = construction_equivalence(seed, gain)?;
    Ok(vec![
        symplectic_residuals()?,
        coherent_fidelity_two_thirds(seed)?,
        excess_noise_saturation()?,
        equivalence,
        matrix,
        n_to_m_saturation()?,
        anticlone_conjugation(seed)?,
        no_cloning_products(seed)?,
        squeezed_family()?,
        information_exclusion()?,
        joint_measurement(seed)?,
        protocol_monte_carlo(seed)?,
        grid_oracle()?,
        fourier_duality()?,
    ])
}

pub fn run(args: &VerifyArgs) -> Result<Outcome, CliError> {
    let seed = resolve_seed(args.seed)?;
    let gain = args.break_gain.unwrap_or(cvclone_core::cloners::AMPLIFIER_CLONER_GAIN);
    let checks = checks(seed, gain)?;
    let passed = checks.iter().all(|c| c.passed);

    let mut table = Table::new(&["check", "status", "metric", "tolerance"]);
    let mut text = vec![format!("cvclone verify  seed={seed}  rng={RNG_NAME}"), String::new()];
    text.push(format!("{:<36} {:<6} {:>20} {:>12}", "check", "status", "metric", "tolerance"));
    for c in &checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        table.push(vec![c.name.into(), status.into(), fmt_num(c.metric), fmt_num(c.tolerance)]);
        text.push(format!("{:<36} {:<6} {:>20} {:>12}", c.name, status, fmt_num(c.metric), fmt_num(c.tolerance)));
    }
    let n_pass = checks.iter().filter(|c| c.passed).count();
    text.push(String::new());
    text.push(format!("{n_pass}/{} checks passed", checks.len()));

    let json = json!({
        "seed": seed,
        "rng": RNG_NAME,
        "passed": passed,
        "checks": checks.iter().map(|c| json!({
            "check": c.name,
            "status": if c.passed { "PASS" } else { "FAIL" },
            "metric": c.metric,
            "tolerance": c.tolerance,
        })).collect::<Vec<_>>(),
    });
    Ok(Outcome { json, table, text, passed })
}
