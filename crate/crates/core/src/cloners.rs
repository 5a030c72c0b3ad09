//! Gaussian cloning machines and the bounds they saturate.
//!
//! Three constructions of the symmetric 1 -> 2 cloner are provided (a C-NOT
//! circuit acting on vacuum ancillae, an amplifier followed by a beam
//! splitter, and the squeezed-family variant), together with the general
//! N -> M machine built from two DFT networks around one amplifier. Noise
//! bounds, the concatenation inequality and the asymmetric cloner (modeled
//! as a pair of additive-noise channels) live here as well.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{gaussian_overlap, GaussianChannel, GaussianState, ModeSelection, SymplecticTransform};
use crate::optics::{
    make_amplifier, make_beam_splitter_5050, make_cv_cnot, make_dft_network, make_squeezer, CnotSign,
};

/// Gain of the amplifier in the 1 -> 2 optical cloner.
pub const AMPLIFIER_CLONER_GAIN: f64 = 2.0;

/// Number of clones; `Infinite` is only meaningful for the bound calculators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CloneCount {
    Finite(usize),
    Infinite,
}

impl CloneCount {
    fn reciprocal(self) -> f64 {
        match self {
            CloneCount::Finite(m) => 1.0 / m as f64,
            CloneCount::Infinite => 0.0,
        }
    }

    fn at_least(self, n: usize) -> bool {
        match self {
            CloneCount::Finite(m) => m >= n,
            CloneCount::Infinite => true,
        }
    }
}

impl std::fmt::Display for CloneCount {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CloneCount::Finite(m) => write!(f, "{m}"),
            CloneCount::Infinite => write!(f, "inf"),
        }
    }
}

/// A cloning circuit together with the roles of its modes.
#[derive(Debug, Clone, PartialEq)]
pub struct ClonerBuild {
    transform: SymplecticTransform,
    input_modes: ModeSelection,
    clone_modes: ModeSelection,
    anticlone_modes: ModeSelection,
}

impl ClonerBuild {
    pub fn new(
        transform: SymplecticTransform,
        input_modes: ModeSelection,
        clone_modes: ModeSelection,
        anticlone_modes: ModeSelection,
    ) -> Result<Self> {
        let n = transform.n_modes();
        for sel in [&input_modes, &clone_modes, &anticlone_modes] {
            sel.check_range(n)?;
        }
        if input_modes.is_empty() || clone_modes.is_empty() {
            return Err(Error::InvalidParameter("cloner needs input and clone modes".into()));
        }
        if !clone_modes.is_disjoint(&anticlone_modes) {
            return Err(Error::InvalidParameter("clone and anticlone modes overlap".into()));
        }
        Ok(Self { transform, input_modes, clone_modes, anticlone_modes })
    }

    pub fn transform(&self) -> &SymplecticTransform {
        &self.transform
    }

    pub fn input_modes(&self) -> &ModeSelection {
        &self.input_modes
    }

    pub fn clone_modes(&self) -> &ModeSelection {
        &self.clone_modes
    }

    pub fn anticlone_modes(&self) -> &ModeSelection {
        &self.anticlone_modes
    }

    pub fn n_modes(&self) -> usize {
        self.transform.n_modes()
    }

    /// Joint output state for `input` placed on the input modes, vacuum elsewhere.
    pub fn output_state(&self, input: &GaussianState) -> Result<GaussianState> {
        if input.n_modes() != self.input_modes.len() {
            return Err(Error::Dimension { expected: self.input_modes.len(), found: input.n_modes() });
        }
        input.embed(&self.input_modes, self.n_modes())?.apply_symplectic(&self.transform)
    }

    /// Single-mode marginals of every clone.
    pub fn clone_states(&self, input: &GaussianState) -> Result<Vec<GaussianState>> {
        let out = self.output_state(input)?;
        self.clone_modes
            .indices()
            .iter()
            .map(|&k| out.reduce_to_modes(&ModeSelection::single(k)))
            .collect()
    }
}

/// Circuit cloner on modes (input, blank, ancilla).
///
/// The ancillae start in vacuum and are entangled by `exp(-i x2 p3)`; the
/// cloning unitary is then `exp(-i x1 p2) exp(-i x1 p3)` followed by
/// `exp(-i x3 p1) exp(+i x2 p1)`.
pub fn build_circuit_cloner() -> ClonerBuild {
    let gates = [
        (1, 2, CnotSign::Plus),
        (0, 1, CnotSign::Plus),
        (0, 2, CnotSign::Plus),
        (2, 0, CnotSign::Plus),
        (1, 0, CnotSign::Minus),
    ];
    let transform = gates
        .iter()
        .try_fold(SymplecticTransform::identity(3), |acc, &(c, t, s)| {
            acc.then(&make_cv_cnot(c, t, s, 3)?)
        })
        .expect("fixed three-mode C-NOT circuit");
    ClonerBuild::new(
        transform,
        ModeSelection::single(0),
        ModeSelection::range(0, 2),
        ModeSelection::single(2),
    )
    .expect("fixed mode roles")
}

/// Amplifier (input -> signal, ancilla -> idler) followed by a 50:50 splitter with the blank.
pub fn build_amplifier_cloner() -> ClonerBuild {
    build_amplifier_cloner_with_gain(AMPLIFIER_CLONER_GAIN).expect("gain 2 is valid")
}

/// Same topology as [`build_amplifier_cloner`] with an arbitrary amplifier gain.
pub fn build_amplifier_cloner_with_gain(gain: f64) -> Result<ClonerBuild> {
    let amp = make_amplifier(gain, 0, 2, 3)?;
    let bs = make_beam_splitter_5050(0, 1, 3)?;
    ClonerBuild::new(
        amp.then(&bs)?,
        ModeSelection::single(0),
        ModeSelection::range(0, 2),
        ModeSelection::single(2),
    )
}

/// N -> M cloner: DFT concentration of the N inputs, amplifier of gain M/N on
/// mode 0 with the idler on mode M, DFT distribution over modes 0..M.
pub fn build_n_to_m(n: usize, m: usize) -> Result<ClonerBuild> {
    if n < 1 || n > m {
        return Err(Error::InvalidShape { n, m });
    }
    let total = m + 1;
    let transform = make_dft_network(n, 0, total)?
        .then(&make_amplifier(m as f64 / n as f64, 0, m, total)?)?
        .then(&make_dft_network(m, 0, total)?)?;
    ClonerBuild::new(
        transform,
        ModeSelection::range(0, n),
        ModeSelection::range(0, m),
        ModeSelection::single(m),
    )
}

/// Squeezed-family cloner: unsqueeze the input, clone, squeeze each clone again.
pub fn squeezed_family_cloner(r: f64) -> Result<ClonerBuild> {
    let base = build_circuit_cloner();
    let transform = make_squeezer(-r, 0, 3)?
        .then(base.transform())?
        .then(&make_squeezer(r, 0, 3)?)?
        .then(&make_squeezer(r, 1, 3)?)?;
    ClonerBuild::new(
        transform,
        base.input_modes.clone(),
        base.clone_modes.clone(),
        base.anticlone_modes.clone(),
    )
}

fn check_shape(n: usize, m: CloneCount) -> Result<()> {
    if n < 1 || !m.at_least(n) {
        let m = match m {
            CloneCount::Finite(m) => m,
            CloneCount::Infinite => usize::MAX,
        };
        return Err(Error::InvalidShape { n, m });
    }
    Ok(())
}

/// Minimum cloning-induced noise variance `1/N - 1/M`.
pub fn variance_bound(n: usize, m: CloneCount) -> Result<f64> {
    check_shape(n, m)?;
    Ok(1.0 / n as f64 - m.reciprocal())
}

/// Maximum coherent-state cloning fidelity `MN / (MN + M - N)`, i.e. `N / (N + 1)` for `M = inf`.
pub fn fidelity_bound(n: usize, m: CloneCount) -> Result<f64> {
    check_shape(n, m)?;
    let nf = n as f64;
    Ok(match m {
        CloneCount::Finite(m) => {
            let mf = m as f64;
            mf * nf / (mf * nf + mf - nf)
        }
        CloneCount::Infinite => nf / (nf + 1.0),
    })
}

/// `sigma2(N,M) + sigma2(M,L) - sigma2(N,L)` evaluated at the bound values.
pub fn concatenation_gap(n: usize, m: usize, l: CloneCount) -> Result<f64> {
    check_shape(n, CloneCount::Finite(m))?;
    check_shape(m, l)?;
    Ok(variance_bound(n, CloneCount::Finite(m))? + variance_bound(m, l)? - variance_bound(n, l)?)
}

/// Bob's and Eve's channels of an asymmetric cloner with `noise_b * noise_e = 1/4`.
pub fn asymmetric_clone_channels(noise_b: f64) -> Result<(GaussianChannel, GaussianChannel)> {
    if !(noise_b > 0.0) || !noise_b.is_finite() {
        return Err(Error::InvalidNoise(noise_b));
    }
    let noise_e = 1.0 / (4.0 * noise_b);
    Ok((GaussianChannel::additive_noise(1, noise_b)?, GaussianChannel::additive_noise(1, noise_e)?))
}

/// Per-clone summary of a cloner run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CloneReport {
    /// Clone x variance minus input x variance.
    pub clone_excess_x: Vec<f64>,
    pub clone_excess_p: Vec<f64>,
    /// Overlap of each clone with the (first) input mode.
    pub fidelity: Vec<f64>,
    pub anticlone_mean: Option<[f64; 2]>,
    #[serde(skip)]
    pub n_inputs: usize,
    #[serde(skip)]
    pub input_variances: [f64; 2],
}

/// One no-cloning uncertainty pair `(Dn_{x,a} Dn_{p,b}, Dn_{x,b} Dn_{p,a})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoCloningProducts {
    pub clone_a: usize,
    pub clone_b: usize,
    pub xa_pb: f64,
    pub xb_pa: f64,
    /// `1/2` for a single input, `1/(2N)` for N replicas.
    pub bound: f64,
}

impl NoCloningProducts {
    pub fn satisfied(&self, tol: f64) -> bool {
        self.xa_pb >= self.bound - tol && self.xb_pa >= self.bound - tol
    }
}

impl CloneReport {
    /// No-cloning products for every unordered pair of clones.
    ///
    /// For N replicas the noise of a clone is measured against the replica
    /// average, whose variance is the input variance over N; with N = 1 this
    /// is the reported excess noise and the bound is 1/2.
    pub fn no_cloning_products(&self) -> Vec<NoCloningProducts> {
        let n = self.n_inputs.max(1) as f64;
        let shift = [self.input_variances[0] * (1.0 - 1.0 / n), self.input_variances[1] * (1.0 - 1.0 / n)];
        let nx: Vec<f64> = self.clone_excess_x.iter().map(|e| (e + shift[0]).max(0.0)).collect();
        let np: Vec<f64> = self.clone_excess_p.iter().map(|e| (e + shift[1]).max(0.0)).collect();
        let mut out = Vec::new();
        for a in 0..nx.len() {
            for b in a + 1..nx.len() {
                out.push(NoCloningProducts {
                    clone_a: a,
                    clone_b: b,
                    xa_pb: (nx[a] * np[b]).sqrt(),
                    xb_pa: (nx[b] * np[a]).sqrt(),
                    bound: 0.5 / n,
                });
            }
        }
        out
    }
}

fn clean(v: f64) -> f64 {
    if v < 0.0 && v > -1e-12 {
        0.0
    } else {
        v
    }
}

/// Runs `build` on `input` (one mode per input slot) and summarizes the clones.
///
/// Excess noise is measured against the first input mode. Fidelity is the
/// overlap with that mode, which is the usual fidelity for pure inputs.
pub fn run_cloner(build: &ClonerBuild, input: &GaussianState) -> Result<CloneReport> {
    let out = build.output_state(input)?;
    let reference = input.reduce_to_modes(&ModeSelection::single(0))?;
    let [vx, vp] = reference.mode_variances(0);
    let mut report = CloneReport {
        clone_excess_x: Vec::new(),
        clone_excess_p: Vec::new(),
        fidelity: Vec::new(),
        anticlone_mean: None,
        n_inputs: build.input_modes.len(),
        input_variances: [vx, vp],
    };
    for &k in build.clone_modes.indices() {
        let clone = out.reduce_to_modes(&ModeSelection::single(k))?;
        let [cx, cp] = clone.mode_variances(0);
        report.clone_excess_x.push(clean(cx - vx));
        report.clone_excess_p.push(clean(cp - vp));
        report.fidelity.push(gaussian_overlap(&reference, &clone)?.clamp(0.0, 1.0));
    }
    if let Some(&k) = build.anticlone_modes.indices().first() {
        report.anticlone_mean = Some(out.mode_mean(k));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::coherent_fidelity;
    use nalgebra::DMatrix;

    fn replicas(state: &GaussianState, n: usize) -> GaussianState {
        (1..n).fold(state.clone(), |acc, _| acc.tensor(state))
    }

    #[test]
    fn circuit_cloner_vacuum_and_coherent() {
        let build = build_circuit_cloner();
        for clone in build.clone_states(&GaussianState::vacuum(1)).unwrap() {
            assert!((clone.cov() - DMatrix::<f64>::identity(2, 2)).amax() < 1e-14);
        }
        let report = run_cloner(&build, &GaussianState::coherent(1.0, 0.5)).unwrap();
        for clone in build.clone_states(&GaussianState::coherent(1.0, 0.5)).unwrap() {
            let [x, p] = clone.mode_mean(0);
            assert!((x - 1.0).abs() < 1e-14 && (p - 0.5).abs() < 1e-14);
        }
        let [ax, ap] = report.anticlone_mean.unwrap();
        assert!((ax - 1.0).abs() < 1e-14 && (ap + 0.5).abs() < 1e-14);
        for e in report.clone_excess_x.iter().chain(&report.clone_excess_p) {
            assert!((e - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn amplifier_cloner_fidelity() {
        let report = run_cloner(&build_amplifier_cloner(), &GaussianState::coherent(3.0, -2.0)).unwrap();
        for f in &report.fidelity {
            assert!((f - 2.0 / 3.0).abs() < 1e-14);
        }
        let clone = &build_amplifier_cloner().clone_states(&GaussianState::coherent(3.0, -2.0)).unwrap()[1];
        assert!((coherent_fidelity([3.0, -2.0], clone).unwrap() - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn n_to_m_examples() {
        let cases = [(1, 2, 0.5, 2.0 / 3.0), (2, 3, 1.0 / 6.0, 6.0 / 7.0), (3, 3, 0.0, 1.0), (2, 4, 0.25, 0.8)];
        for &(n, m, excess, fid) in &cases {
            let build = build_n_to_m(n, m).unwrap();
            let report = run_cloner(&build, &replicas(&GaussianState::coherent(0.3, -1.1), n)).unwrap();
            assert_eq!(report.fidelity.len(), m);
            for k in 0..m {
                assert!((report.clone_excess_x[k] - excess).abs() < 1e-12, "({n},{m})");
                assert!((report.clone_excess_p[k] - excess).abs() < 1e-12, "({n},{m})");
                assert!((report.fidelity[k] - fid).abs() < 1e-12, "({n},{m})");
            }
        }
        assert_eq!(build_n_to_m(3, 2), Err(Error::InvalidShape { n: 3, m: 2 }));
        assert_eq!(build_n_to_m(0, 2), Err(Error::InvalidShape { n: 0, m: 2 }));
    }

    #[test]
    fn bound_examples() {
        use CloneCount::*;
        assert_eq!(variance_bound(1, Finite(2)).unwrap(), 0.5);
        assert!((fidelity_bound(1, Finite(2)).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(variance_bound(1, Infinite).unwrap(), 1.0);
        assert_eq!(fidelity_bound(1, Infinite).unwrap(), 0.5);
        assert_eq!(variance_bound(3, Finite(3)).unwrap(), 0.0);
        assert_eq!(fidelity_bound(3, Finite(3)).unwrap(), 1.0);
        assert!(variance_bound(2, Finite(1)).is_err());
        assert!(fidelity_bound(0, Infinite).is_err());
    }

    #[test]
    fn concatenation_examples() {
        use CloneCount::*;
        assert!(concatenation_gap(1, 2, Finite(4)).unwrap().abs() < 1e-15);
        assert!(concatenation_gap(3, 3, Finite(7)).unwrap().abs() < 1e-15);
        assert!(concatenation_gap(1, 2, Infinite).unwrap().abs() < 1e-15);
        assert!(concatenation_gap(2, 1, Finite(3)).is_err());
        assert!(concatenation_gap(1, 4, Finite(3)).is_err());
    }

    #[test]
    fn asymmetric_channels() {
        let (b, e) = asymmetric_clone_channels(0.5).unwrap();
        assert_eq!(b.noise()[(0, 0)], 0.5);
        assert_eq!(e.noise()[(1, 1)], 0.5);
        let (_, e) = asymmetric_clone_channels(1.0).unwrap();
        assert_eq!(e.noise()[(0, 0)], 0.25);
        let (_, e) = asymmetric_clone_channels(1e12).unwrap();
        assert!(e.noise()[(0, 0)] < 1e-12);
        assert_eq!(asymmetric_clone_channels(0.0), Err(Error::InvalidNoise(0.0)));
        assert_eq!(asymmetric_clone_channels(-1.0), Err(Error::InvalidNoise(-1.0)));
    }

    #[test]
    fn squeezed_family() {
        let base = build_circuit_cloner();
        let zero = squeezed_family_cloner(0.0).unwrap();
        assert!((zero.transform().matrix() - base.transform().matrix()).amax() < 1e-15);

        for &r in &[0.5, 1.0, 2.0] {
            let input = GaussianState::squeezed(r, 0.4, -0.9);
            let matched = run_cloner(&squeezed_family_cloner(r).unwrap(), &input).unwrap();
            for f in &matched.fidelity {
                assert!((f - 2.0 / 3.0).abs() < 1e-10, "r={r}");
            }
            let plain = run_cloner(&base, &input).unwrap();
            let expected = 1.0 / (1.25 + (2.0 * r).cosh()).sqrt();
            for f in &plain.fidelity {
                assert!((f - expected).abs() < 1e-12, "r={r}");
            }
        }
    }

    #[test]
    fn no_cloning_pairs_saturate_for_symmetric_cloner() {
        let report = run_cloner(&build_circuit_cloner(), &GaussianState::coherent(0.0, 0.0)).unwrap();
        let pairs = report.no_cloning_products();
        assert_eq!(pairs.len(), 1);
        assert!((pairs[0].xa_pb - 0.5).abs() < 1e-14 && (pairs[0].xb_pa - 0.5).abs() < 1e-14);
        assert!(pairs[0].satisfied(1e-9));
    }

    #[test]
    fn report_json_keys() {
        let report = run_cloner(&build_circuit_cloner(), &GaussianState::coherent(1.0, 0.5)).unwrap();
        let json = serde_json::to_value(&report).unwrap();
        let keys: Vec<_> = json.as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys, ["anticlone_mean", "clone_excess_p", "clone_excess_x", "fidelity"]);
    }

    #[test]
    fn input_size_must_match() {
        let err = run_cloner(&build_n_to_m(2, 3).unwrap(), &GaussianState::coherent(0.0, 0.0));
        assert_eq!(err, Err(Error::Dimension { expected: 2, found: 1 }));
    }
}
