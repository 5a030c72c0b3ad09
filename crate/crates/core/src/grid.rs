//! Position-space wavefunction oracle for the 1 -> 2 Gaussian cloner.
//!
//! The cloner maps `|x>|chi>` to a Gaussian superposition of
//! `|x+y>|x+z>|x+y+z>`. Substituting `u = x+y`, `v = x+z`, `w = x+y+z`
//! (unit Jacobian) gives the output wavefunction in closed form,
//!
//! ```text
//! Psi(u, v, w) = pi^{-1/2} psi(u + v - w) exp(-((w - v)^2 + (w - u)^2) / 2)
//! ```
//!
//! which is sampled on a cubic grid over `[-L, L)^3`. Clone and ancilla
//! marginals are then obtained by brute-force partial traces. Nothing here
//! relies on the covariance formalism, so the results serve as an
//! independent check of [`crate::cloners`].
//!
//! Momentum statistics use an FFT along one axis of the reduced density;
//! with spacing `dx = 2L / N` the momentum grid spacing is `pi / L`.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Largest admissible fraction of the output norm on the outermost grid layers.
pub const BOUNDARY_MASS_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridParams {
    points_per_axis: usize,
    half_extent: f64,
}

impl Default for GridParams {
    fn default() -> Self {
        Self { points_per_axis: 64, half_extent: 8.0 }
    }
}

impl GridParams {
    pub fn new(points_per_axis: usize, half_extent: f64) -> Result<Self> {
        if points_per_axis < 16 {
            return Err(Error::InvalidGrid(format!(
                "need at least 16 points per axis, got {points_per_axis}"
            )));
        }
        if !(half_extent > 0.0) || !half_extent.is_finite() {
            return Err(Error::InvalidGrid(format!("half extent must be > 0, got {half_extent}")));
        }
        Ok(Self { points_per_axis, half_extent })
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn half_extent(&self) -> f64 {
        self.half_extent
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_extent / self.points_per_axis as f64
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        -self.half_extent + i as f64 * self.spacing()
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.points_per_axis).map(|i| self.coordinate(i)).collect()
    }

    /// Momentum of FFT bin `m` (unshifted ordering).
    pub fn momentum(&self, m: usize) -> f64 {
        let n = self.points_per_axis;
        let signed = if m < n.div_ceil(2) { m as f64 } else { m as f64 - n as f64 };
        signed * PI / self.half_extent
    }
}

/// Coherent-state wavefunction centered on `(x0, p0)` (vacuum width).
pub fn coherent_wavefunction(x0: f64, p0: f64) -> impl Fn(f64) -> Complex64 + Sync + Copy {
    squeezed_wavefunction(0.0, x0, p0)
}

/// Squeezed wavefunction with position variance `e^{-2r}/2`, centered on `(x0, p0)`.
pub fn squeezed_wavefunction(r: f64, x0: f64, p0: f64) -> impl Fn(f64) -> Complex64 + Sync + Copy {
    let s2 = (-2.0 * r).exp();
    let norm = (PI * s2).powf(-0.25);
    move |u: f64| Complex64::from_polar(norm * (-(u - x0).powi(2) / (2.0 * s2)).exp(), p0 * u)
}

/// Output mode of the three-mode grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputMode {
    CloneA,
    CloneB,
    Ancilla,
}

impl OutputMode {
    fn axis(self) -> usize {
        match self {
            OutputMode::CloneA => 0,
            OutputMode::CloneB => 1,
            OutputMode::Ancilla => 2,
        }
    }
}

/// Complex amplitudes on the `(u, v, w)` grid, `u` slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunctionGrid {
    params: GridParams,
    data: Vec<Complex64>,
}

impl WaveFunctionGrid {
    fn from_fn<F>(params: GridParams, amplitude: F) -> Self
    where
        F: Fn(f64, f64, f64) -> Complex64 + Sync,
    {
        let n = params.points_per_axis;
        let coords = params.coordinates();
        let mut data = vec![Complex64::new(0.0, 0.0); n * n * n];
        data.par_chunks_mut(n * n).enumerate().for_each(|(i, plane)| {
            let u = coords[i];
            for (j, row) in plane.chunks_mut(n).enumerate() {
                let v = coords[j];
                for (k, cell) in row.iter_mut().enumerate() {
                    *cell = amplitude(u, v, coords[k]);
                }
            }
        });
        Self { params, data }
    }

    pub fn params(&self) -> &GridParams {
        &self.params
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn at(&self, i: usize, j: usize, k: usize) -> Complex64 {
        let n = self.params.points_per_axis;
        self.data[(i * n + j) * n + k]
    }

    /// Riemann-sum squared norm.
    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.params.spacing().powi(3)
    }

    /// Fraction of the squared norm sitting on the first or last layer of any axis.
    pub fn boundary_mass(&self) -> f64 {
        let n = self.params.points_per_axis;
        let edge = |i: usize| i == 0 || i == n - 1;
        let mut total = 0.0;
        let mut boundary = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let w = self.data[(i * n + j) * n + k].norm_sqr();
                    total += w;
                    if edge(i) || edge(j) || edge(k) {
                        boundary += w;
                    }
                }
            }
        }
        if total > 0.0 {
            boundary / total
        } else {
            0.0
        }
    }

    fn scale(&mut self, factor: f64) {
        self.data.iter_mut().for_each(|c| *c *= factor);
    }
}

/// Cloner output for input `psi`, without renormalization. Linear in `psi`.
pub fn clone_wave_function_unnormalized<F>(psi: F, params: GridParams) -> WaveFunctionGrid
where
    F: Fn(f64) -> Complex64 + Sync,
{
    let pref = 1.0 / PI.sqrt();
    WaveFunctionGrid::from_fn(params, |u, v, w| {
        let gauss = (-((w - v).powi(2) + (w - u).powi(2)) / 2.0).exp();
        psi(u + v - w) * (pref * gauss)
    })
}

/// Cloner output for a normalized input `psi`, renormalized on the grid.
pub fn clone_wave_function<F>(psi: F, params: GridParams) -> Result<WaveFunctionGrid>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    let mut grid = clone_wave_function_unnormalized(psi, params);
    let boundary_mass = grid.boundary_mass();
    if boundary_mass > BOUNDARY_MASS_LIMIT {
        return Err(Error::GridTooSmall { boundary_mass, limit: BOUNDARY_MASS_LIMIT });
    }
    let norm = grid.norm_sqr();
    if !(norm > 0.0) {
        return Err(Error::InvalidState("input wavefunction vanishes on the grid".into()));
    }
    grid.scale(1.0 / norm.sqrt());
    Ok(grid)
}

/// Unentangled product `psi_a(u) psi_b(v) psi_c(w)`: the identity circuit.
pub fn product_wave_function<A, B, C>(psi_a: A, psi_b: B, psi_c: C, params: GridParams) -> WaveFunctionGrid
where
    A: Fn(f64) -> Complex64 + Sync,
    B: Fn(f64) -> Complex64 + Sync,
    C: Fn(f64) -> Complex64 + Sync,
{
    WaveFunctionGrid::from_fn(params, |u, v, w| psi_a(u) * psi_b(v) * psi_c(w))
}

/// Reduced density matrix `rho(u, u')` of one output mode, normalized so that
/// `sum_i rho(u_i, u_i) dx = 1` for a normalized grid state.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    params: GridParams,
    rho: DMatrix<Complex64>,
}

/// Partial trace over the two other axes.
pub fn reduced_density(grid: &WaveFunctionGrid, mode: OutputMode) -> DensityGrid {
    let n = grid.params.points_per_axis;
    let axis = mode.axis();
    // columns are fibers along the kept axis, one per (other, other) pair
    let fibers = DMatrix::from_fn(n, n * n, |kept, col| {
        let (a, b) = (col / n, col % n);
        let (i, j, k) = match axis {
            0 => (kept, a, b),
            1 => (a, kept, b),
            _ => (a, b, kept),
        };
        grid.data[(i * n + j) * n + k]
    });
    let dx2 = grid.params.spacing().powi(2);
    let rho = (&fibers * fibers.adjoint()).map(|c| c * dx2);
    DensityGrid { params: grid.params, rho }
}

impl DensityGrid {
    pub fn params(&self) -> &GridParams {
        &self.params
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.rho
    }

    pub fn trace(&self) -> f64 {
        self.rho.diagonal().iter().map(|c| c.re).sum::<f64>() * self.params.spacing()
    }

    /// `max |rho - rho^dagger|`.
    pub fn hermiticity_defect(&self) -> f64 {
        (&self.rho - self.rho.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `Tr(rho^2)`; equals 1 exactly for a rank-one (pure) density.
    pub fn purity(&self) -> f64 {
        self.rho.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.params.spacing().powi(2)
    }

    /// Position probabilities `rho(u_i, u_i) dx`.
    pub fn position_profile(&self) -> Vec<(f64, f64)> {
        let dx = self.params.spacing();
        (0..self.params.points_per_axis)
            .map(|i| (self.params.coordinate(i), self.rho[(i, i)].re * dx))
            .collect()
    }

    /// Momentum probabilities from the diagonal of `F rho F^dagger`, sorted by momentum.
    pub fn momentum_profile(&self) -> Vec<(f64, f64)> {
        let n = self.params.points_per_axis;
        let fft = FftPlanner::new().plan_fft_forward(n);
        let fft_columns = |m: &DMatrix<Complex64>| {
            let mut out = m.clone();
            for mut col in out.column_iter_mut() {
                let mut buf: Vec<Complex64> = col.iter().copied().collect();
                fft.process(&mut buf);
                col.iter_mut().zip(buf).for_each(|(c, b)| *c = b);
            }
            out
        };
        // F (F rho)^dagger = F rho F^dagger for Hermitian rho
        let half = fft_columns(&self.rho);
        let full = fft_columns(&half.adjoint());
        let total: f64 = full.diagonal().iter().map(|c| c.re).sum();
        let mut profile: Vec<(f64, f64)> =
            (0..n).map(|m| (self.params.momentum(m), full[(m, m)].re / total)).collect();
        profile.sort_by(|a, b| a.0.total_cmp(&b.0));
        profile
    }

    /// `(<x>, Var x)`.
    pub fn position_moments(&self) -> (f64, f64) {
        moments(&self.position_profile())
    }

    /// `(<p>, Var p)`.
    pub fn momentum_moments(&self) -> (f64, f64) {
        moments(&self.momentum_profile())
    }

    /// CSV rows `u,u_prime,re,im`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
        w.write_record(["u", "u_prime", "re", "im"])?;
        let n = self.params.points_per_axis;
        for i in 0..n {
            for j in 0..n {
                let c = self.rho[(i, j)];
                w.write_record([
                    self.params.coordinate(i).to_string(),
                    self.params.coordinate(j).to_string(),
                    c.re.to_string(),
                    c.im.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Two-column CSV `coordinate,probability` for a marginal profile.
pub fn write_profile_csv<W: Write>(profile: &[(f64, f64)], header: [&str; 2], writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    w.write_record(header)?;
    for (c, prob) in profile {
        w.write_record([c.to_string(), prob.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn moments(profile: &[(f64, f64)]) -> (f64, f64) {
    let total: f64 = profile.iter().map(|(_, w)| w).sum();
    let mean = profile.iter().map(|(c, w)| c * w).sum::<f64>() / total;
    let var = profile.iter().map(|(c, w)| (c - mean).powi(2) * w).sum::<f64>() / total;
    (mean, var)
}

/// `<alpha| rho |alpha>` by double Riemann sum.
pub fn grid_coherent_fidelity(rho: &DensityGrid, alpha_mean: [f64; 2]) -> f64 {
    grid_fidelity(rho, coherent_wavefunction(alpha_mean[0], alpha_mean[1]))
}

/// `<psi| rho |psi>` for a normalized wavefunction `psi`.
pub fn grid_fidelity<F: Fn(f64) -> Complex64>(rho: &DensityGrid, psi: F) -> f64 {
    let amp = DVector::from_iterator(rho.params.points_per_axis(), rho.params.coordinates().into_iter().map(psi));
    amp.dotc(&(&rho.rho * &amp)).re * rho.params.spacing().powi(2)
}

/// Amplitude `f(x, p) = e^{-(x^2 + p^2)/2} / sqrt(pi)` of the Gaussian cloner.
pub fn gaussian_cloner_amplitude(x: f64, p: f64) -> Complex64 {
    Complex64::new((-(x * x + p * p) / 2.0).exp() / PI.sqrt(), 0.0)
}

/// `g(x, p) = (1/2pi) int int e^{i(p x' - x p')} f(x', p') dx' dp'` on the
/// square grid, by direct quadrature. Row index is `x`, column index `p`.
pub fn fourier_dual<F>(f: F, params: &GridParams) -> DMatrix<Complex64>
where
    F: Fn(f64, f64) -> Complex64,
{
    let c = params.coordinates();
    let n = c.len();
    let dx = params.spacing();
    let samples = DMatrix::from_fn(n, n, |i, j| f(c[i], c[j]));
    // kernel[a][j] = e^{-i c_a c_j}, symmetric
    let kernel = DMatrix::from_fn(n, n, |a, j| Complex64::from_polar(1.0, -c[a] * c[j]));
    // h[i][a] = sum_j f[i][j] e^{-i x_a p'_j}
    let h = &samples * &kernel;
    // g[a][b] = sum_i e^{+i p_b x'_i} h[i][a]
    let g = h.transpose() * kernel.map(|z| z.conj());
    g.map(|z| z * (dx * dx / (2.0 * PI)))
}

/// `max |g - f|` over the grid.
pub fn fourier_self_dual_deviation<F>(f: F, params: &GridParams) -> f64
where
    F: Fn(f64, f64) -> Complex64 + Copy,
{
    let g = fourier_dual(f, params);
    let c = params.coordinates();
    let mut worst: f64 = 0.0;
    for (a, &x) in c.iter().enumerate() {
        for (b, &p) in c.iter().enumerate() {
            worst = worst.max((g[(a, b)] - f(x, p)).norm());
        }
    }
    worst
}

/// Self-duality deviation of the Gaussian cloner amplitude.
pub fn check_fourier_self_dual(params: &GridParams) -> f64 {
    fourier_self_dual_deviation(gaussian_cloner_amplitude, params)
}
