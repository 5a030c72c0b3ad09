//! Seeded homodyne and joint (heterodyne) sampling from Gaussian states.
//!
//! Randomness comes from ChaCha20 (`rand_chacha` 0.9) seeded through
//! `SeedableRng::seed_from_u64`; independent streams are selected with
//! `set_stream`. Every sampler is a pure function of `(state, seed)`.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{GaussianState, ModeSelection};
use crate::optics::make_beam_splitter_5050;

/// Generator used by every sampler in the crate.
pub type SimRng = ChaCha20Rng;

/// Human-readable generator identity, recorded in CLI output.
pub const RNG_NAME: &str = "ChaCha20 (rand_chacha 0.9, seed_from_u64)";

/// Generator for `seed`, positioned on an independent `stream`.
pub fn seeded_rng(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Quadrature {
    X,
    P,
}

impl Quadrature {
    pub fn index(self) -> usize {
        match self {
            Quadrature::X => 0,
            Quadrature::P => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Quadrature::X => "x",
            Quadrature::P => "p",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub values: Vec<f64>,
    pub seed: u64,
}

impl SampleBatch {
    pub fn count(&self) -> usize {
        self.values.len()
    }

    /// Single-column CSV with a `value` header.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
        w.write_record(["value"])?;
        for v in &self.values {
            w.write_record([v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Unbiased sample statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleStats {
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    /// Standard error of the variance, `variance / sqrt(count / 2)`.
    pub std_error: f64,
    /// Standard error of the mean, `sqrt(variance / count)`.
    pub mean_std_error: f64,
}

pub fn estimate_mean_var(batch: &SampleBatch) -> Result<SampleStats> {
    stats_of(&batch.values)
}

pub(crate) fn stats_of(values: &[f64]) -> Result<SampleStats> {
    let n = values.len();
    if n < 2 {
        return Err(Error::TooFewSamples { needed: 2, found: n });
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    Ok(SampleStats {
        count: n,
        mean,
        variance,
        std_error: variance / (nf / 2.0).sqrt(),
        mean_std_error: (variance / nf).sqrt(),
    })
}

fn require_single_mode(state: &GaussianState) -> Result<()> {
    if state.n_modes() != 1 {
        return Err(Error::Dimension { expected: 1, found: state.n_modes() });
    }
    if !state.validate_uncertainty() {
        return Err(Error::InvalidState("covariance violates the uncertainty principle".into()));
    }
    Ok(())
}

/// One homodyne outcome of `quadrature` on a single-mode state.
pub fn sample_quadrature<R: rand::Rng + ?Sized>(state: &GaussianState, quadrature: Quadrature, rng: &mut R) -> f64 {
    let i = quadrature.index();
    let z: f64 = StandardNormal.sample(rng);
    state.mean()[i] + state.cov()[(i, i)].sqrt() * z
}

pub fn homodyne_sample(state: &GaussianState, quadrature: Quadrature, count: usize, seed: u64) -> Result<SampleBatch> {
    require_single_mode(state)?;
    let mut rng = seeded_rng(seed, 0);
    let values = (0..count).map(|_| sample_quadrature(state, quadrature, &mut rng)).collect();
    Ok(SampleBatch { values, seed })
}

fn correlated_normal<R: rand::Rng + ?Sized>(mean: &DVector<f64>, root: &DMatrix<f64>, rng: &mut R) -> DVector<f64> {
    let z = DVector::from_iterator(mean.len(), (0..mean.len()).map(|_| StandardNormal.sample(rng)));
    mean + root * z
}

/// Lower Cholesky factor, or an eigen square root when `cov` is singular.
fn covariance_root(cov: &DMatrix<f64>) -> DMatrix<f64> {
    match cov.clone().cholesky() {
        Some(ch) => ch.l(),
        None => {
            let eig = cov.clone().symmetric_eigen();
            let sqrt_vals = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
            &eig.eigenvectors * DMatrix::from_diagonal(&sqrt_vals)
        }
    }
}

/// Joint x/p measurement: split on a 50:50 beam splitter with vacuum,
/// homodyne x on one arm and p on the other, rescale both by `sqrt(2)`.
pub fn joint_measure_sample(state: &GaussianState, count: usize, seed: u64) -> Result<(SampleBatch, SampleBatch)> {
    require_single_mode(state)?;
    let split = state
        .tensor(&GaussianState::vacuum(1))
        .apply_symplectic(&make_beam_splitter_5050(0, 1, 2)?)?;
    // (x on arm 0, p on arm 1)
    let arm0 = split.reduce_to_modes(&ModeSelection::single(0))?;
    let arm1 = split.reduce_to_modes(&ModeSelection::single(1))?;
    let cov = DMatrix::from_row_slice(
        2,
        2,
        &[
            split.cov()[(0, 0)],
            split.cov()[(0, 3)],
            split.cov()[(3, 0)],
            split.cov()[(3, 3)],
        ],
    );
    let mean = DVector::from_vec(vec![arm0.mean()[0], arm1.mean()[1]]);
    let root = covariance_root(&cov);
    let mut rng = seeded_rng(seed, 0);
    let scale = std::f64::consts::SQRT_2;
    let (xs, ps) = (0..count)
        .map(|_| {
            let v = correlated_normal(&mean, &root, &mut rng);
            (scale * v[0], scale * v[1])
        })
        .unzip();
    Ok((SampleBatch { values: xs, seed }, SampleBatch { values: ps, seed }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn within(stats: &SampleStats, expected_var: f64) -> bool {
        (stats.variance - expected_var).abs() <= 3.0 * stats.std_error
    }

    #[test]
    fn homodyne_vacuum_variance() {
        let b = homodyne_sample(&GaussianState::vacuum(1), Quadrature::X, 100_000, 7).unwrap();
        let s = estimate_mean_var(&b).unwrap();
        assert!(within(&s, 0.5), "{s:?}");
        assert!(s.mean.abs() <= 3.0 * s.mean_std_error);
    }

    #[test]
    fn homodyne_coherent_mean_and_clone_variance() {
        let b = homodyne_sample(&GaussianState::coherent(2.0, 0.0), Quadrature::X, 50_000, 8).unwrap();
        let s = estimate_mean_var(&b).unwrap();
        assert!((s.mean - 2.0).abs() <= 3.0 * s.mean_std_error);

        let clone = GaussianState::single_mode(0.0, 0.0, 1.0, 1.0).unwrap();
        let s = estimate_mean_var(&homodyne_sample(&clone, Quadrature::P, 100_000, 9).unwrap()).unwrap();
        assert!(within(&s, 1.0), "{s:?}");
    }

    #[test]
    fn joint_measurement_on_coherent_and_clone() {
        let (x, p) = joint_measure_sample(&GaussianState::coherent(1.5, -0.7), 100_000, 11).unwrap();
        let sx = estimate_mean_var(&x).unwrap();
        let sp = estimate_mean_var(&p).unwrap();
        assert!(within(&sx, 1.0) && within(&sp, 1.0), "{sx:?} {sp:?}");
        assert!((sx.mean - 1.5).abs() <= 3.0 * sx.mean_std_error);
        assert!((sp.mean + 0.7).abs() <= 3.0 * sp.mean_std_error);

        let clone = GaussianState::single_mode(0.0, 0.0, 1.0, 1.0).unwrap();
        let (x, _) = joint_measure_sample(&clone, 100_000, 12).unwrap();
        assert!(within(&estimate_mean_var(&x).unwrap(), 1.5));
    }

    #[test]
    fn estimate_edge_cases() {
        let constant = SampleBatch { values: vec![3.0; 10], seed: 0 };
        let s = estimate_mean_var(&constant).unwrap();
        assert_eq!((s.mean, s.variance), (3.0, 0.0));
        assert_eq!(
            estimate_mean_var(&SampleBatch { values: vec![1.0], seed: 0 }),
            Err(Error::TooFewSamples { needed: 2, found: 1 })
        );
    }

    #[test]
    fn generator_self_test() {
        let mut rng = seeded_rng(2024, 0);
        let values: Vec<f64> = (0..100_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let s = stats_of(&values).unwrap();
        assert!((s.variance - 1.0).abs() <= 3.0 * s.std_error);
    }

    #[test]
    fn pooled_batches_are_consistent() {
        let state = GaussianState::coherent(0.0, 0.0);
        let a = homodyne_sample(&state, Quadrature::X, 50_000, 1).unwrap();
        let b = homodyne_sample(&state, Quadrature::X, 50_000, 2).unwrap();
        let pooled = SampleBatch { values: [a.values.clone(), b.values.clone()].concat(), seed: 0 };
        let (sa, sb, sp) = (
            estimate_mean_var(&a).unwrap(),
            estimate_mean_var(&b).unwrap(),
            estimate_mean_var(&pooled).unwrap(),
        );
        assert!((sp.variance - 0.5 * (sa.variance + sb.variance)).abs() <= 3.0 * sp.std_error);
    }

    #[test]
    fn sampling_is_deterministic() {
        let s = GaussianState::squeezed(0.3, 1.0, 0.0);
        let a = homodyne_sample(&s, Quadrature::P, 1000, 5).unwrap();
        let b = homodyne_sample(&s, Quadrature::P, 1000, 5).unwrap();
        assert_eq!(a, b);
        let c = homodyne_sample(&s, Quadrature::P, 1000, 6).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_multimode_states() {
        assert!(matches!(
            homodyne_sample(&GaussianState::vacuum(2), Quadrature::X, 10, 0),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn csv_export() {
        let mut buf = Vec::new();
        SampleBatch { values: vec![0.5, -1.25], seed: 0 }.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "value\n0.5\n-1.25\n");
    }
}
