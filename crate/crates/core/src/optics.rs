//! Elementary optical components as symplectic transforms.
//!
//! Passive and active linear elements are written as Bogoliubov maps
//! `a'_k = sum_l (alpha_kl a_l + beta_kl a_l^dagger)` and realified into the
//! interleaved quadrature ordering. C-NOT gates act directly on quadratures.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::SymplecticTransform;

/// Sign of a continuous-variable C-NOT `exp(-i s x_k p_l)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CnotSign {
    Plus,
    Minus,
}

impl CnotSign {
    pub fn value(self) -> f64 {
        match self {
            CnotSign::Plus => 1.0,
            CnotSign::Minus => -1.0,
        }
    }
}

/// Declarative description of a component, resolved by [`ComponentSpec::build`].
#[derive(Debug, Clone, PartialEq)]
pub enum ComponentSpec {
    BeamSplitter5050 { mode_a: usize, mode_b: usize },
    BeamSplitter { theta: f64, mode_a: usize, mode_b: usize },
    Amplifier { gain: f64, signal: usize, idler: usize },
    Squeezer { r: f64, mode: usize },
    CvCnot { control: usize, target: usize, sign: CnotSign },
    DftNetwork { size: usize, start_mode: usize },
    PhaseRotation { phi: f64, mode: usize },
    Displacement { dx: f64, dp: f64, mode: usize },
}

impl ComponentSpec {
    pub fn build(&self, n_modes: usize) -> Result<SymplecticTransform> {
        match *self {
            ComponentSpec::BeamSplitter5050 { mode_a, mode_b } => {
                make_beam_splitter_5050(mode_a, mode_b, n_modes)
            }
            ComponentSpec::BeamSplitter { theta, mode_a, mode_b } => {
                make_beam_splitter(theta, mode_a, mode_b, n_modes)
            }
            ComponentSpec::Amplifier { gain, signal, idler } => {
                make_amplifier(gain, signal, idler, n_modes)
            }
            ComponentSpec::Squeezer { r, mode } => make_squeezer(r, mode, n_modes),
            ComponentSpec::CvCnot { control, target, sign } => {
                make_cv_cnot(control, target, sign, n_modes)
            }
            ComponentSpec::DftNetwork { size, start_mode } => {
                make_dft_network(size, start_mode, n_modes)
            }
            ComponentSpec::PhaseRotation { phi, mode } => make_phase_rotation(phi, mode, n_modes),
            ComponentSpec::Displacement { dx, dp, mode } => make_displacement(dx, dp, mode, n_modes),
        }
    }
}

/// Compose a sequence of components, first element applied first.
pub fn build_sequence(components: &[ComponentSpec], n_modes: usize) -> Result<SymplecticTransform> {
    components.iter().try_fold(SymplecticTransform::identity(n_modes), |acc, c| {
        acc.then(&c.build(n_modes)?)
    })
}

fn check_mode(index: usize, n_modes: usize) -> Result<()> {
    if index >= n_modes {
        Err(Error::ModeIndex { index, n_modes })
    } else {
        Ok(())
    }
}

fn check_pair(a: usize, b: usize, n_modes: usize) -> Result<()> {
    check_mode(a, n_modes)?;
    check_mode(b, n_modes)?;
    if a == b {
        return Err(Error::DuplicateMode(a));
    }
    Ok(())
}

/// Realifies `a'_k = sum_l alpha_kl a_l + beta_kl a_l^dagger` on the listed modes.
///
/// With `a = (x + i p)/sqrt(2)`:
/// `x'_k = Re(alpha+beta) x - Im(alpha-beta) p`, `p'_k = Im(alpha+beta) x + Re(alpha-beta) p`.
fn bogoliubov(
    modes: &[usize],
    alpha: &DMatrix<Complex64>,
    beta: &DMatrix<Complex64>,
    n_modes: usize,
) -> Result<SymplecticTransform> {
    let mut s = DMatrix::identity(2 * n_modes, 2 * n_modes);
    for &k in modes {
        s[(2 * k, 2 * k)] = 0.0;
        s[(2 * k + 1, 2 * k + 1)] = 0.0;
    }
    for (a, &k) in modes.iter().enumerate() {
        for (b, &l) in modes.iter().enumerate() {
            let plus = alpha[(a, b)] + beta[(a, b)];
            let minus = alpha[(a, b)] - beta[(a, b)];
            s[(2 * k, 2 * l)] = plus.re;
            s[(2 * k, 2 * l + 1)] = -minus.im;
            s[(2 * k + 1, 2 * l)] = plus.im;
            s[(2 * k + 1, 2 * l + 1)] = minus.re;
        }
    }
    SymplecticTransform::linear(s)
}

fn real_matrix(rows: usize, cols: usize, data: &[f64]) -> DMatrix<Complex64> {
    DMatrix::from_row_slice(rows, cols, data).map(|v| Complex64::new(v, 0.0))
}

/// Phase-free 50:50 beam splitter: `a' = (a + b)/sqrt(2)`, `b' = (a - b)/sqrt(2)`.
pub fn make_beam_splitter_5050(mode_a: usize, mode_b: usize, n_modes: usize) -> Result<SymplecticTransform> {
    make_beam_splitter(PI / 4.0, mode_a, mode_b, n_modes)
}

/// Beam splitter `a' = cos t a + sin t b`, `b' = sin t a - cos t b`.
pub fn make_beam_splitter(theta: f64, mode_a: usize, mode_b: usize, n_modes: usize) -> Result<SymplecticTransform> {
    check_pair(mode_a, mode_b, n_modes)?;
    let (s, c) = theta.sin_cos();
    let alpha = real_matrix(2, 2, &[c, s, s, -c]);
    bogoliubov(&[mode_a, mode_b], &alpha, &DMatrix::zeros(2, 2), n_modes)
}

/// Phase-insensitive amplifier of gain `G`.
///
/// `a'_s = sqrt(G) a_s + sqrt(G-1) a_i^dagger`, `a'_i = sqrt(G-1) a_s^dagger + sqrt(G) a_i`.
pub fn make_amplifier(gain: f64, signal: usize, idler: usize, n_modes: usize) -> Result<SymplecticTransform> {
    if !(gain >= 1.0) || !gain.is_finite() {
        return Err(Error::InvalidGain(gain));
    }
    check_pair(signal, idler, n_modes)?;
    let g = gain.sqrt();
    let h = (gain - 1.0).sqrt();
    let alpha = real_matrix(2, 2, &[g, 0.0, 0.0, g]);
    let beta = real_matrix(2, 2, &[0.0, h, h, 0.0]);
    bogoliubov(&[signal, idler], &alpha, &beta, n_modes)
}

/// Continuous C-NOT `exp(-i s x_k p_l)`: `x_l -> x_l + s x_k`, `p_k -> p_k - s p_l`.
pub fn make_cv_cnot(control: usize, target: usize, sign: CnotSign, n_modes: usize) -> Result<SymplecticTransform> {
    check_pair(control, target, n_modes)?;
    let s = sign.value();
    let mut m = DMatrix::identity(2 * n_modes, 2 * n_modes);
    m[(2 * target, 2 * control)] = s;
    m[(2 * control + 1, 2 * target + 1)] = -s;
    SymplecticTransform::linear(m)
}

/// DFT network on modes `start..start+size`: `a'_k = sum_l e^{2 pi i k l / m} a_l / sqrt(m)`.
pub fn make_dft_network(size: usize, start_mode: usize, n_modes: usize) -> Result<SymplecticTransform> {
    if size == 0 {
        return Err(Error::InvalidParameter("DFT network needs at least one mode".into()));
    }
    if start_mode + size > n_modes {
        return Err(Error::ModeIndex { index: start_mode + size - 1, n_modes });
    }
    let norm = 1.0 / (size as f64).sqrt();
    let alpha = DMatrix::from_fn(size, size, |k, l| {
        // reduce k*l mod m first so large networks keep full phase accuracy
        let phase = 2.0 * PI * ((k * l) % size) as f64 / size as f64;
        Complex64::from_polar(norm, phase)
    });
    let modes: Vec<usize> = (start_mode..start_mode + size).collect();
    bogoliubov(&modes, &alpha, &DMatrix::zeros(size, size), n_modes)
}

/// Single-mode squeezer: `x -> e^{-r} x`, `p -> e^{r} p`.
pub fn make_squeezer(r: f64, mode: usize, n_modes: usize) -> Result<SymplecticTransform> {
    check_mode(mode, n_modes)?;
    if !r.is_finite() {
        return Err(Error::InvalidParameter(format!("squeezing parameter {r} is not finite")));
    }
    let mut m = DMatrix::identity(2 * n_modes, 2 * n_modes);
    m[(2 * mode, 2 * mode)] = (-r).exp();
    m[(2 * mode + 1, 2 * mode + 1)] = r.exp();
    SymplecticTransform::linear(m)
}

/// Phase rotation `a -> e^{-i phi} a`: `x' = cos x + sin p`, `p' = -sin x + cos p`.
pub fn make_phase_rotation(phi: f64, mode: usize, n_modes: usize) -> Result<SymplecticTransform> {
    check_mode(mode, n_modes)?;
    let alpha = DMatrix::from_element(1, 1, Complex64::from_polar(1.0, -phi));
    bogoliubov(&[mode], &alpha, &DMatrix::zeros(1, 1), n_modes)
}

/// Phase-space displacement of one mode by `(dx, dp)`.
pub fn make_displacement(dx: f64, dp: f64, mode: usize, n_modes: usize) -> Result<SymplecticTransform> {
    check_mode(mode, n_modes)?;
    let mut shift = DVector::zeros(2 * n_modes);
    shift[2 * mode] = dx;
    shift[2 * mode + 1] = dp;
    SymplecticTransform::new(DMatrix::identity(2 * n_modes, 2 * n_modes), shift)
}
