//! Gaussian continuous-variable cloning toolkit.
//!
//! States of `n` bosonic modes are carried as a mean vector and covariance
//! matrix in the mode-interleaved ordering `(x1, p1, x2, p2, ...)` with
//! `hbar = 1`, so the vacuum has covariance `I / 2`. Annihilation operators
//! are `a = (x + i p) / sqrt(2)`.
//!
//! * [`gaussian`]: states, symplectic maps, Gaussian channels, overlaps.
//! * [`optics`]: beam splitters, amplifiers, squeezers, C-NOTs, DFT networks.
//! * [`cloners`]: 1 -> 2, N -> M and squeezed-family cloning machines plus their bounds.
//! * [`measurement`]: seeded homodyne / heterodyne sampling.
//! * [`grid`]: brute-force position-space wavefunction of the 1 -> 2 cloner.
//! * [`qkd`]: squeezed-state key distribution under an asymmetric cloning attack.

// `!(x > 0.0)` style guards are used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cloners;
pub mod error;
pub mod gaussian;
pub mod grid;
pub mod measurement;
pub mod optics;
pub mod qkd;

pub use error::{Error, Result};
pub use gaussian::{GaussianChannel, GaussianState, ModeSelection, SymplecticTransform};
