//! Gaussian states, symplectic transforms and Gaussian channels.
//!
//! Quadratures are ordered mode by mode, `(x1, p1, x2, p2, ...)`, and the
//! symplectic form is block diagonal with blocks `[[0, 1], [-1, 0]]`. The
//! vacuum covariance is `I / 2`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

/// Entrywise tolerance for `S Omega S^T = Omega`.
pub const SYMPLECTIC_TOL: f64 = 1e-10;
/// Smallest admissible eigenvalue of `cov + (i/2) Omega` and of channel CP matrices.
pub const POSITIVITY_TOL: f64 = 1e-9;
/// Relative symmetry tolerance for covariance and noise matrices.
pub const SYMMETRY_RTOL: f64 = 1e-12;

/// Standard symplectic form for `n_modes` modes in interleaved ordering.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

/// Smallest eigenvalue of the Hermitian matrix `re + i im`.
///
/// `re` must be symmetric and `im` antisymmetric. The real embedding
/// `[[re, -im], [im, re]]` has the same spectrum with every eigenvalue doubled.
pub(crate) fn min_hermitian_eigenvalue(re: &DMatrix<f64>, im: &DMatrix<f64>) -> f64 {
    let d = re.nrows();
    let mut big = DMatrix::zeros(2 * d, 2 * d);
    big.view_mut((0, 0), (d, d)).copy_from(re);
    big.view_mut((d, d), (d, d)).copy_from(re);
    big.view_mut((0, d), (d, d)).copy_from(&(-im));
    big.view_mut((d, 0), (d, d)).copy_from(im);
    // symmetrize away rounding so the symmetric solver sees an exact input
    let big = (&big + big.transpose()) * 0.5;
    big.symmetric_eigenvalues().min()
}

fn symmetry_defect(m: &DMatrix<f64>) -> f64 {
    let scale = m.amax().max(1.0);
    (m - m.transpose()).amax() / scale
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// Ordered list of distinct mode indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModeSelection {
    indices: Vec<usize>,
}

impl ModeSelection {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        for (i, &k) in indices.iter().enumerate() {
            if indices[..i].contains(&k) {
                return Err(Error::DuplicateMode(k));
            }
        }
        Ok(Self { indices })
    }

    pub fn single(index: usize) -> Self {
        Self { indices: vec![index] }
    }

    /// Contiguous range `start..end`.
    pub fn range(start: usize, end: usize) -> Self {
        Self { indices: (start..end).collect() }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn is_disjoint(&self, other: &ModeSelection) -> bool {
        self.indices.iter().all(|k| !other.indices.contains(k))
    }

    pub fn check_range(&self, n_modes: usize) -> Result<()> {
        match self.indices.iter().find(|&&k| k >= n_modes) {
            Some(&index) => Err(Error::ModeIndex { index, n_modes }),
            None => Ok(()),
        }
    }

    /// Quadrature indices `(2k, 2k + 1)` of every selected mode, in order.
    fn quadrature_indices(&self) -> Vec<usize> {
        self.indices.iter().flat_map(|&k| [2 * k, 2 * k + 1]).collect()
    }
}

/// Gaussian state of `n` modes: first moments and covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    n_modes: usize,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianState {
    /// Validated constructor: checks shapes, symmetry and the uncertainty principle.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let dim = mean.len();
        if dim == 0 || !dim.is_multiple_of(2) {
            return Err(Error::InvalidState(format!(
                "mean vector length {dim} is not a positive even number"
            )));
        }
        if cov.nrows() != dim || cov.ncols() != dim {
            return Err(Error::Dimension { expected: dim, found: cov.nrows() });
        }
        if mean.iter().chain(cov.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidState("non-finite entry".into()));
        }
        let defect = symmetry_defect(&cov);
        if defect > SYMMETRY_RTOL {
            return Err(Error::InvalidState(format!(
                "covariance not symmetric (relative defect {defect:.3e})"
            )));
        }
        let state = Self { n_modes: dim / 2, mean, cov: symmetrize(cov) };
        if !state.validate_uncertainty() {
            return Err(Error::InvalidState(format!(
                "covariance violates the uncertainty principle (min eigenvalue {:.3e})",
                state.uncertainty_min_eigenvalue()
            )));
        }
        Ok(state)
    }

    /// Used where validity follows from construction (symplectic or CP evolution).
    fn from_parts(mean: DVector<f64>, cov: DMatrix<f64>) -> Self {
        Self { n_modes: mean.len() / 2, mean, cov: symmetrize(cov) }
    }

    pub fn vacuum(n_modes: usize) -> Self {
        assert!(n_modes > 0, "a state needs at least one mode");
        Self::from_parts(
            DVector::zeros(2 * n_modes),
            DMatrix::identity(2 * n_modes, 2 * n_modes) * 0.5,
        )
    }

    /// Coherent state centered on `(x, p)`, i.e. `alpha = (x + i p) / sqrt(2)`.
    pub fn coherent(x: f64, p: f64) -> Self {
        Self::from_parts(DVector::from_vec(vec![x, p]), DMatrix::identity(2, 2) * 0.5)
    }

    /// Squeezed state with variances `(e^{-2r}/2, e^{2r}/2)`, displaced to `(x, p)`.
    pub fn squeezed(r: f64, x: f64, p: f64) -> Self {
        let cov = DMatrix::from_diagonal(&DVector::from_vec(vec![
            (-2.0 * r).exp() / 2.0,
            (2.0 * r).exp() / 2.0,
        ]));
        Self::from_parts(DVector::from_vec(vec![x, p]), cov)
    }

    /// Single-mode state with the given quadrature variances and no x-p correlation.
    pub fn single_mode(x: f64, p: f64, var_x: f64, var_p: f64) -> Result<Self> {
        Self::new(
            DVector::from_vec(vec![x, p]),
            DMatrix::from_diagonal(&DVector::from_vec(vec![var_x, var_p])),
        )
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// `(<x_k>, <p_k>)`.
    pub fn mode_mean(&self, k: usize) -> [f64; 2] {
        [self.mean[2 * k], self.mean[2 * k + 1]]
    }

    /// `(Var x_k, Var p_k)`.
    pub fn mode_variances(&self, k: usize) -> [f64; 2] {
        [self.cov[(2 * k, 2 * k)], self.cov[(2 * k + 1, 2 * k + 1)]]
    }

    /// Product state `self ⊗ other`.
    pub fn tensor(&self, other: &GaussianState) -> GaussianState {
        let d1 = self.mean.len();
        let d2 = other.mean.len();
        let mut mean = DVector::zeros(d1 + d2);
        mean.rows_mut(0, d1).copy_from(&self.mean);
        mean.rows_mut(d1, d2).copy_from(&other.mean);
        let mut cov = DMatrix::zeros(d1 + d2, d1 + d2);
        cov.view_mut((0, 0), (d1, d1)).copy_from(&self.cov);
        cov.view_mut((d1, d1), (d2, d2)).copy_from(&other.cov);
        Self::from_parts(mean, cov)
    }

    /// Places this state on `positions` of an `n_total`-mode register, vacuum elsewhere.
    pub fn embed(&self, positions: &ModeSelection, n_total: usize) -> Result<GaussianState> {
        if positions.len() != self.n_modes {
            return Err(Error::Dimension { expected: self.n_modes, found: positions.len() });
        }
        positions.check_range(n_total)?;
        let mut full = GaussianState::vacuum(n_total);
        let q = positions.quadrature_indices();
        for (a, &qa) in q.iter().enumerate() {
            full.mean[qa] = self.mean[a];
            for (b, &qb) in q.iter().enumerate() {
                full.cov[(qa, qb)] = self.cov[(a, b)];
            }
        }
        Ok(full)
    }

    /// Smallest eigenvalue of `cov + (i/2) Omega`.
    pub fn uncertainty_min_eigenvalue(&self) -> f64 {
        let omega_half = symplectic_form(self.n_modes) * 0.5;
        min_hermitian_eigenvalue(&self.cov, &omega_half)
    }

    /// True iff `cov + (i/2) Omega` has no eigenvalue below `-1e-9`.
    pub fn validate_uncertainty(&self) -> bool {
        self.uncertainty_min_eigenvalue() >= -POSITIVITY_TOL
    }

    /// `mean -> S mean + d`, `cov -> S cov S^T`.
    pub fn apply_symplectic(&self, t: &SymplecticTransform) -> Result<GaussianState> {
        if t.n_modes != self.n_modes {
            return Err(Error::Dimension { expected: self.n_modes, found: t.n_modes });
        }
        let mean = &t.matrix * &self.mean + &t.shift;
        let cov = &t.matrix * &self.cov * t.matrix.transpose();
        Ok(Self::from_parts(mean, cov))
    }

    /// `mean -> X mean`, `cov -> X cov X^T + Y`.
    pub fn apply_channel(&self, ch: &GaussianChannel) -> Result<GaussianState> {
        if ch.n_modes != self.n_modes {
            return Err(Error::Dimension { expected: self.n_modes, found: ch.n_modes });
        }
        let mean = &ch.gain * &self.mean;
        let cov = &ch.gain * &self.cov * ch.gain.transpose() + &ch.noise;
        Ok(Self::from_parts(mean, cov))
    }

    /// Marginal state of the selected modes (the others are traced out).
    pub fn reduce_to_modes(&self, sel: &ModeSelection) -> Result<GaussianState> {
        sel.check_range(self.n_modes)?;
        if sel.is_empty() {
            return Err(Error::InvalidParameter("empty mode selection".into()));
        }
        let q = sel.quadrature_indices();
        let mean = DVector::from_iterator(q.len(), q.iter().map(|&i| self.mean[i]));
        let cov = DMatrix::from_fn(q.len(), q.len(), |a, b| self.cov[(q[a], q[b])]);
        Ok(Self::from_parts(mean, cov))
    }
}

#[derive(Serialize)]
struct GaussianStateRepr<'a> {
    n_modes: usize,
    mean: &'a [f64],
    /// row-major
    cov: Vec<f64>,
}

impl Serialize for GaussianState {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let d = self.cov.nrows();
        let cov = (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).map(|ij| self.cov[ij]).collect();
        GaussianStateRepr { n_modes: self.n_modes, mean: self.mean.as_slice(), cov }.serialize(serializer)
    }
}

/// Affine phase-space map `r -> S r + d` with symplectic `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticTransform {
    n_modes: usize,
    matrix: DMatrix<f64>,
    shift: DVector<f64>,
}

impl SymplecticTransform {
    pub fn new(matrix: DMatrix<f64>, shift: DVector<f64>) -> Result<Self> {
        let dim = matrix.nrows();
        if dim == 0 || !dim.is_multiple_of(2) || matrix.ncols() != dim {
            return Err(Error::InvalidParameter(format!(
                "transform matrix must be square with even size, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if shift.len() != dim {
            return Err(Error::Dimension { expected: dim, found: shift.len() });
        }
        let t = Self { n_modes: dim / 2, matrix, shift };
        let residual = t.symplectic_residual();
        if !(residual <= SYMPLECTIC_TOL) {
            return Err(Error::NotSymplectic(residual));
        }
        Ok(t)
    }

    /// Linear symplectic map with no displacement.
    pub fn linear(matrix: DMatrix<f64>) -> Result<Self> {
        let dim = matrix.nrows();
        Self::new(matrix, DVector::zeros(dim))
    }

    pub fn identity(n_modes: usize) -> Self {
        Self {
            n_modes,
            matrix: DMatrix::identity(2 * n_modes, 2 * n_modes),
            shift: DVector::zeros(2 * n_modes),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn shift(&self) -> &DVector<f64> {
        &self.shift
    }

    /// `max |S Omega S^T - Omega|`.
    pub fn symplectic_residual(&self) -> f64 {
        let omega = symplectic_form(self.n_modes);
        (&self.matrix * &omega * self.matrix.transpose() - omega).amax()
    }

    /// Composite that applies `self` first and `next` second.
    pub fn then(&self, next: &SymplecticTransform) -> Result<SymplecticTransform> {
        if next.n_modes != self.n_modes {
            return Err(Error::Dimension { expected: self.n_modes, found: next.n_modes });
        }
        Ok(Self {
            n_modes: self.n_modes,
            matrix: &next.matrix * &self.matrix,
            shift: &next.matrix * &self.shift + &next.shift,
        })
    }

    /// Inverse map `r -> S^{-1} (r - d)`; `S^{-1} = -Omega S^T Omega`.
    pub fn inverse(&self) -> SymplecticTransform {
        let omega = symplectic_form(self.n_modes);
        let inv = -(&omega * self.matrix.transpose() * &omega);
        let shift = -(&inv * &self.shift);
        Self { n_modes: self.n_modes, matrix: inv, shift }
    }
}

/// Gaussian channel `cov -> X cov X^T + Y`, `mean -> X mean`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianChannel {
    n_modes: usize,
    gain: DMatrix<f64>,
    noise: DMatrix<f64>,
}

impl GaussianChannel {
    /// Validated constructor: `Y` symmetric and `Y + (i/2)(Omega - X Omega X^T) >= 0`.
    pub fn new(gain: DMatrix<f64>, noise: DMatrix<f64>) -> Result<Self> {
        let dim = gain.nrows();
        if dim == 0 || !dim.is_multiple_of(2) || gain.ncols() != dim {
            return Err(Error::InvalidChannel(format!(
                "gain matrix must be square with even size, got {}x{}",
                gain.nrows(),
                gain.ncols()
            )));
        }
        if noise.nrows() != dim || noise.ncols() != dim {
            return Err(Error::Dimension { expected: dim, found: noise.nrows() });
        }
        if gain.iter().chain(noise.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidChannel("non-finite entry".into()));
        }
        let defect = symmetry_defect(&noise);
        if defect > SYMMETRY_RTOL {
            return Err(Error::InvalidChannel(format!(
                "noise matrix not symmetric (relative defect {defect:.3e})"
            )));
        }
        let ch = Self { n_modes: dim / 2, gain, noise: symmetrize(noise) };
        let min_eig = ch.complete_positivity_min_eigenvalue();
        if min_eig < -POSITIVITY_TOL {
            return Err(Error::InvalidChannel(format!(
                "not completely positive (min eigenvalue {min_eig:.3e})"
            )));
        }
        Ok(ch)
    }

    pub fn identity(n_modes: usize) -> Self {
        let d = 2 * n_modes;
        Self { n_modes, gain: DMatrix::identity(d, d), noise: DMatrix::zeros(d, d) }
    }

    /// Unit gain plus isotropic added noise `variance * I` on every quadrature.
    pub fn additive_noise(n_modes: usize, variance: f64) -> Result<Self> {
        let d = 2 * n_modes;
        Self::new(DMatrix::identity(d, d), DMatrix::identity(d, d) * variance)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn gain(&self) -> &DMatrix<f64> {
        &self.gain
    }

    pub fn noise(&self) -> &DMatrix<f64> {
        &self.noise
    }

    pub fn complete_positivity_min_eigenvalue(&self) -> f64 {
        let omega = symplectic_form(self.n_modes);
        let im = (&omega - &self.gain * &omega * self.gain.transpose()) * 0.5;
        min_hermitian_eigenvalue(&self.noise, &im)
    }

    /// Extends the channel to `n_total` modes, acting on `modes` and as identity elsewhere.
    pub fn embed(&self, modes: &ModeSelection, n_total: usize) -> Result<GaussianChannel> {
        if modes.len() != self.n_modes {
            return Err(Error::Dimension { expected: self.n_modes, found: modes.len() });
        }
        modes.check_range(n_total)?;
        let mut out = GaussianChannel::identity(n_total);
        let q = modes.quadrature_indices();
        for (a, &qa) in q.iter().enumerate() {
            for (b, &qb) in q.iter().enumerate() {
                out.gain[(qa, qb)] = self.gain[(a, b)];
                out.noise[(qa, qb)] = self.noise[(a, b)];
            }
        }
        Ok(out)
    }
}

/// Overlap `Tr(rho_a rho_b)` of two Gaussian states of equal size.
///
/// Equals the fidelity `<psi|rho|psi>` whenever one of the two is pure.
pub fn gaussian_overlap(a: &GaussianState, b: &GaussianState) -> Result<f64> {
    if a.n_modes != b.n_modes {
        return Err(Error::Dimension { expected: a.n_modes, found: b.n_modes });
    }
    let sum = &a.cov + &b.cov;
    let diff = &a.mean - &b.mean;
    let chol = sum
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidState("covariance sum is not positive definite".into()))?;
    let det = chol.determinant();
    let quad = diff.dot(&chol.solve(&diff));
    Ok((-0.5 * quad).exp() / det.sqrt())
}

/// Fidelity of a single-mode Gaussian state with the coherent state centered on `alpha_mean`.
pub fn coherent_fidelity(alpha_mean: [f64; 2], state: &GaussianState) -> Result<f64> {
    if state.n_modes != 1 {
        return Err(Error::Dimension { expected: 1, found: state.n_modes });
    }
    if !state.validate_uncertainty() {
        return Err(Error::InvalidState("covariance violates the uncertainty principle".into()));
    }
    let reference = GaussianState::coherent(alpha_mean[0], alpha_mean[1]);
    Ok(gaussian_overlap(&reference, state)?.clamp(0.0, 1.0))
}
