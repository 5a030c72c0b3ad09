//! Squeezed-state key distribution under an individual cloning attack.
//!
//! Alice picks a quadrature at random, prepares a state squeezed in it
//! (variance `v < 1/2`) and displaces it along the same quadrature by
//! `r ~ N(0, V)`. With `V = 1/(4v) - v` both encodings produce the same
//! mixture, so Eve cannot tell which quadrature carries the key. Bob measures
//! a random quadrature and the mismatched rounds are discarded (sifting).
//!
//! Information is in bits per sifted symbol and always follows Shannon's
//! Gaussian-channel formula; no reconciliation code is run.

use std::io::Write;

use rayon::prelude::*;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::cloners::asymmetric_clone_channels;
use crate::error::{Error, Result};
use crate::gaussian::{GaussianChannel, GaussianState};
use crate::measurement::{sample_quadrature, seeded_rng, stats_of, Quadrature};

/// Default fraction of sifted rounds disclosed for noise estimation.
pub const DEFAULT_DISCLOSED_FRACTION: f64 = 0.1;

/// Minimum number of disclosed pairs for [`estimate_excess_noise`].
pub const MIN_DISCLOSED_PAIRS: usize = 100;

/// Tolerance on the analytic information balance.
pub const EXCLUSION_TOL: f64 = 1e-12;

fn check_squeezing(v: f64) -> Result<()> {
    if v.is_nan() || v >= 0.5 {
        return Err(Error::NoSqueezing(v));
    }
    if v <= 0.0 || !v.is_finite() {
        return Err(Error::InvalidVariance(v));
    }
    Ok(())
}

fn check_noise(noise: f64) -> Result<()> {
    if noise.is_nan() || noise < 0.0 {
        return Err(Error::InvalidNoise(noise));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProtocolParams {
    v: f64,
    big_v: f64,
    n_rounds: usize,
    seed: u64,
    disclosed_fraction: f64,
}

impl ProtocolParams {
    pub fn new(v: f64, n_rounds: usize, seed: u64) -> Result<Self> {
        check_squeezing(v)?;
        if n_rounds == 0 {
            return Err(Error::InvalidParameter("number of rounds must be positive".into()));
        }
        Ok(Self { v, big_v: displacement_variance(v)?, n_rounds, seed, disclosed_fraction: DEFAULT_DISCLOSED_FRACTION })
    }

    pub fn with_disclosed_fraction(mut self, fraction: f64) -> Result<Self> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::InvalidParameter(format!("disclosed fraction must be in (0, 1], got {fraction}")));
        }
        self.disclosed_fraction = fraction;
        Ok(self)
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    /// Displacement variance `V`.
    pub fn displacement_variance(&self) -> f64 {
        self.big_v
    }

    pub fn n_rounds(&self) -> usize {
        self.n_rounds
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn disclosed_fraction(&self) -> f64 {
        self.disclosed_fraction
    }
}

/// `V = 1/(4v) - v`, the displacement variance that hides the basis.
pub fn displacement_variance(v: f64) -> Result<f64> {
    check_squeezing(v)?;
    Ok(1.0 / (4.0 * v) - v)
}

/// `(x, p)` variances of Alice's emitted mixture for a given encoding basis.
pub fn mixture_variances(v: f64, big_v: f64, basis: Quadrature) -> [f64; 2] {
    let encoded = big_v + v;
    let conjugate = 1.0 / (4.0 * v);
    match basis {
        Quadrature::X => [encoded, conjugate],
        Quadrature::P => [conjugate, encoded],
    }
}

/// Shannon capacity `1/2 log2(1 + signal/noise)` of a Gaussian channel.
pub fn shannon_info(signal_var: f64, noise_var: f64) -> Result<f64> {
    if !(signal_var >= 0.0) {
        return Err(Error::InvalidVariance(signal_var));
    }
    if !(noise_var > 0.0) {
        return Err(Error::InvalidVariance(noise_var));
    }
    Ok(0.5 * (1.0 + signal_var / noise_var).log2())
}

/// `I = log2(1/(2v))`.
pub fn max_key_rate(v: f64) -> Result<f64> {
    check_squeezing(v)?;
    Ok((1.0 / (2.0 * v)).log2())
}

/// Alice-Bob information when Bob's quadratures carry excess noise `noise_b`.
pub fn info_ab(v: f64, noise_b: f64) -> Result<f64> {
    check_squeezing(v)?;
    check_noise(noise_b)?;
    if noise_b.is_infinite() {
        return Ok(0.0);
    }
    Ok(0.5 * ((1.0 + 4.0 * v * noise_b) / (4.0 * v * (v + noise_b))).log2())
}

/// Alice-Eve information; same channel law as [`info_ab`].
pub fn info_ae(v: f64, noise_e: f64) -> Result<f64> {
    info_ab(v, noise_e)
}

/// Monte Carlo counterparts of the analytic information triple.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalInfo {
    pub empirical_i_ab: f64,
    pub stderr_i_ab: f64,
    pub empirical_i_ae: Option<f64>,
    pub stderr_i_ae: Option<f64>,
    pub empirical_gap: Option<f64>,
    pub stderr_gap: Option<f64>,
    pub empirical_noise_b: f64,
    pub stderr_noise_b: f64,
    pub empirical_sift_fraction: f64,
    pub stderr_sift_fraction: f64,
    pub sifted_rounds: usize,
    pub disclosed_rounds: usize,
    /// Eve's information bounded from the disclosed subset alone; absent
    /// when too few rounds were disclosed.
    pub i_ae_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfoReport {
    pub i: f64,
    pub i_ab: f64,
    pub i_ae: f64,
    pub gap: f64,
    #[serde(flatten)]
    pub empirical: Option<EmpiricalInfo>,
}

/// Analytic triple with Eve on the saturating channel `noise_e = 1/(4 noise_b)`.
pub fn exclusion_check(v: f64, noise_b: f64) -> Result<InfoReport> {
    check_noise(noise_b)?;
    exclusion_check_with(v, noise_b, 1.0 / (4.0 * noise_b))
}

/// Analytic triple for an arbitrary pair of excess noises.
pub fn exclusion_check_with(v: f64, noise_b: f64, noise_e: f64) -> Result<InfoReport> {
    let i = max_key_rate(v)?;
    let i_ab = info_ab(v, noise_b)?;
    let i_ae = info_ae(v, noise_e)?;
    Ok(InfoReport { i, i_ab, i_ae, gap: i - i_ab - i_ae, empirical: None })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoundRecord {
    pub round: usize,
    pub alice_basis: Quadrature,
    pub r: f64,
    pub bob_basis: Quadrature,
    pub r_prime: f64,
    pub kept: bool,
    /// Eve's outcome in Alice's basis, when attacking.
    #[serde(skip)]
    pub r_eve: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolRun {
    pub params: ProtocolParams,
    pub noise_b: Option<f64>,
    pub records: Vec<RoundRecord>,
    pub report: InfoReport,
}

fn random_basis<R: Rng + ?Sized>(rng: &mut R) -> Quadrature {
    if rng.random::<bool>() {
        Quadrature::X
    } else {
        Quadrature::P
    }
}

fn simulate_round(
    params: &ProtocolParams,
    channels: Option<&(GaussianChannel, GaussianChannel)>,
    round: usize,
) -> Result<RoundRecord> {
    let mut rng = seeded_rng(params.seed, round as u64);
    let alice_basis = random_basis(&mut rng);
    let r = Normal::new(0.0, params.big_v.sqrt())
        .map_err(|e| Error::InvalidParameter(e.to_string()))?
        .sample(&mut rng);
    let (v, anti) = (params.v, 1.0 / (4.0 * params.v));
    let signal = match alice_basis {
        Quadrature::X => GaussianState::single_mode(r, 0.0, v, anti)?,
        Quadrature::P => GaussianState::single_mode(0.0, r, anti, v)?,
    };
    let to_bob = match channels {
        Some((b, _)) => signal.apply_channel(b)?,
        None => signal.clone(),
    };
    let bob_basis = random_basis(&mut rng);
    let r_prime = sample_quadrature(&to_bob, bob_basis, &mut rng);
    let r_eve = match channels {
        Some((_, e)) => Some(sample_quadrature(&signal.apply_channel(e)?, alice_basis, &mut rng)),
        None => None,
    };
    Ok(RoundRecord { round, alice_basis, r, bob_basis, r_prime, kept: alice_basis == bob_basis, r_eve })
}

fn info_with_stderr(big_v: f64, diffs: &[f64]) -> Result<(f64, f64, f64, f64)> {
    let s = stats_of(diffs)?;
    let info = shannon_info(big_v, s.variance)?;
    // d/dn of 1/2 log2(1 + V/n)
    let slope = big_v / (2.0 * std::f64::consts::LN_2 * s.variance * (s.variance + big_v));
    Ok((info, slope * s.std_error, s.variance, s.std_error))
}

/// Runs the protocol; `noise_b = None` means no eavesdropper.
///
/// Rounds draw from independent per-round streams, so the transcript does not
/// depend on how the work is scheduled.
pub fn simulate_protocol(params: &ProtocolParams, noise_b: Option<f64>) -> Result<ProtocolRun> {
    let channels = noise_b.map(asymmetric_clone_channels).transpose()?;
    let records = (0..params.n_rounds)
        .into_par_iter()
        .map(|k| simulate_round(params, channels.as_ref(), k))
        .collect::<Result<Vec<_>>>()?;

    let sifted: Vec<&RoundRecord> = records.iter().filter(|rec| rec.kept).collect();
    let bob_diffs: Vec<f64> = sifted.iter().map(|rec| rec.r_prime - rec.r).collect();
    let (emp_ab, se_ab, var_ab, se_var_ab) = info_with_stderr(params.big_v, &bob_diffs)?;
    let eve = sifted.iter().map(|rec| rec.r_eve.map(|e| e - rec.r)).collect::<Option<Vec<f64>>>();
    let eve = match eve {
        Some(d) if channels.is_some() => Some(info_with_stderr(params.big_v, &d)?),
        _ => None,
    };

    let n = params.n_rounds as f64;
    let disclosed_count = ((params.disclosed_fraction * sifted.len() as f64).ceil() as usize).min(sifted.len());
    let disclosed: Vec<(f64, f64)> = sifted[..disclosed_count].iter().map(|rec| (rec.r, rec.r_prime)).collect();
    let estimate = match estimate_excess_noise(&disclosed, params.v) {
        Ok(e) => Some(e),
        Err(Error::TooFewSamples { .. }) => None,
        Err(e) => return Err(e),
    };

    let analytic = match noise_b {
        Some(nb) => exclusion_check(params.v, nb)?,
        None => exclusion_check_with(params.v, 0.0, f64::INFINITY)?,
    };
    let sift_fraction = sifted.len() as f64 / n;
    let empirical = EmpiricalInfo {
        empirical_i_ab: emp_ab,
        stderr_i_ab: se_ab,
        empirical_i_ae: eve.map(|e| e.0),
        stderr_i_ae: eve.map(|e| e.1),
        empirical_gap: eve.map(|e| analytic.i - emp_ab - e.0),
        stderr_gap: eve.map(|e| se_ab.hypot(e.1)),
        empirical_noise_b: var_ab - params.v,
        stderr_noise_b: se_var_ab,
        empirical_sift_fraction: sift_fraction,
        stderr_sift_fraction: (0.25 / n).sqrt(),
        sifted_rounds: sifted.len(),
        disclosed_rounds: disclosed_count,
        i_ae_bound: estimate.map(|e| e.i_ae_bound),
    };
    Ok(ProtocolRun {
        params: *params,
        noise_b,
        records,
        report: InfoReport { empirical: Some(empirical), ..analytic },
    })
}

/// Excess-noise estimate from disclosed `(r, r')` pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseEstimate {
    pub noise_b: f64,
    pub stderr: f64,
    /// `I - I_AB` at the estimated noise, never negative.
    pub i_ae_bound: f64,
}

pub fn estimate_excess_noise(disclosed: &[(f64, f64)], v: f64) -> Result<NoiseEstimate> {
    check_squeezing(v)?;
    if disclosed.len() < MIN_DISCLOSED_PAIRS {
        return Err(Error::TooFewSamples { needed: MIN_DISCLOSED_PAIRS, found: disclosed.len() });
    }
    let diffs: Vec<f64> = disclosed.iter().map(|(r, rp)| rp - r).collect();
    let s = stats_of(&diffs)?;
    let noise_b = (s.variance - v).max(0.0);
    let i_ae_bound = (max_key_rate(v)? - info_ab(v, noise_b)?).max(0.0);
    Ok(NoiseEstimate { noise_b, stderr: s.std_error, i_ae_bound })
}

/// Transcript CSV `round,alice_basis,r,bob_basis,r_prime,kept`.
pub fn write_transcript_csv<W: Write>(records: &[RoundRecord], writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    w.write_record(["round", "alice_basis", "r", "bob_basis", "r_prime", "kept"])?;
    for rec in records {
        w.write_record([
            rec.round.to_string(),
            rec.alice_basis.label().to_string(),
            rec.r.to_string(),
            rec.bob_basis.label().to_string(),
            rec.r_prime.to_string(),
            rec.kept.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
