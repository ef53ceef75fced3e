//! Zero-sum-amplitude (ZSA) states.
//!
//! The general form spreads amplitudes over the whole computational basis.
//! The protocol only ever uses the one-hot class, where party `k` holds the
//! single `1` of basis string `|x_k⟩` with amplitude `c_k`, and the
//! amplitudes satisfy `Σ c_k = 0` and `Σ |c_k|² = 1`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::qlinalg::{DensityMatrix, LinearOperator, PureState, C64, CONSTRUCTION_TOL, ONE, ZERO};

/// Smallest amplitude modulus still counted as nonzero.
pub const ZERO_AMPLITUDE_TOL: f64 = 1e-12;
/// Floor on every `|c_k|` produced by [`ZsaAmplitudes::random`].
pub const RANDOM_MIN_MODULUS: f64 = 1e-3;

/// Validated one-hot ZSA coefficients `c_1 … c_N`, `N ≥ 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZsaAmplitudes {
    coeffs: Vec<C64>,
}

fn check_finite(coeffs: &[C64]) -> Result<()> {
    match coeffs.iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

fn check_sum_and_norm(coeffs: &[C64]) -> Result<()> {
    let residual = coeffs.iter().sum::<C64>().norm();
    if residual > CONSTRUCTION_TOL {
        return Err(Error::ZeroSumViolation { residual });
    }
    let norm_sqr: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    if (norm_sqr - 1.0).abs() > CONSTRUCTION_TOL {
        return Err(Error::NormalizationViolation { norm_sqr, residual: (norm_sqr - 1.0).abs() });
    }
    Ok(())
}

/// Check the three one-hot ZSA invariants. Violations report the residual
/// that broke them, in the order zero-sum, normalization, nonzero amplitudes.
pub fn validate_zsa(coeffs: &[C64]) -> Result<ZsaAmplitudes> {
    if coeffs.len() < 2 {
        return Err(Error::TooFewAmplitudes { required: 2, found: coeffs.len() });
    }
    check_finite(coeffs)?;
    check_sum_and_norm(coeffs)?;
    if let Some((index, c)) = coeffs.iter().enumerate().find(|(_, c)| c.norm() < ZERO_AMPLITUDE_TOL) {
        return Err(Error::ZeroAmplitude { index: index + 1, modulus: c.norm() });
    }
    Ok(ZsaAmplitudes { coeffs: coeffs.to_vec() })
}

impl ZsaAmplitudes {
    pub fn new(coeffs: Vec<C64>) -> Result<Self> {
        validate_zsa(&coeffs)
    }

    /// `(1/√2, −1/√2)`: the two-party case, a singlet.
    pub fn epr() -> Self {
        Self { coeffs: vec![C64::new(FRAC_1_SQRT_2, 0.0), C64::new(-FRAC_1_SQRT_2, 0.0)] }
    }

    /// `(1, e^{2πi/3}, e^{−2πi/3}) / √3`.
    pub fn cube_roots() -> Self {
        let s = 1.0 / 3f64.sqrt();
        Self {
            coeffs: vec![
                C64::new(s, 0.0),
                C64::from_polar(s, 2.0 * PI / 3.0),
                C64::from_polar(s, -2.0 * PI / 3.0),
            ],
        }
    }

    /// `c_k = e^{2πik/N} / √N` for `k = 1..N`.
    pub fn roots_of_unity(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewAmplitudes { required: 2, found: n });
        }
        let s = 1.0 / (n as f64).sqrt();
        let coeffs = (1..=n)
            .map(|k| C64::from_polar(s, 2.0 * PI * k as f64 / n as f64))
            .collect::<Vec<_>>();
        validate_zsa(&coeffs)
    }

    /// Random ZSA amplitudes: `N − 1` complex Gaussians, the last coefficient
    /// closes the sum, then normalize. Draws with any `|c_k| < 1e-3` are
    /// rejected and redrawn.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewAmplitudes { required: 2, found: n });
        }
        loop {
            let mut coeffs: Vec<C64> = (0..n - 1)
                .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            let sum: C64 = coeffs.iter().sum();
            coeffs.push(-sum);
            let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            coeffs.iter_mut().for_each(|c| *c /= norm);
            if coeffs.iter().all(|c| c.norm() >= RANDOM_MIN_MODULUS) {
                if let Ok(z) = validate_zsa(&coeffs) {
                    return Ok(z);
                }
            }
        }
    }

    pub fn num_parties(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// `c_k` with the 1-based party index.
    pub fn coeff(&self, k: usize) -> C64 {
        self.coeffs[k - 1]
    }

    fn check_party(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.num_parties() {
            Err(Error::QubitOutOfRange { qubit: k, num_qubits: self.num_parties() })
        } else {
            Ok(())
        }
    }

    fn require_tripartite(&self) -> Result<()> {
        if self.num_parties() != 3 {
            return Err(Error::WrongPartyCount { expected: "exactly 3", found: self.num_parties() });
        }
        Ok(())
    }

    /// `Σ_k c_k |x_k⟩`.
    pub fn build_state(&self) -> PureState {
        let n = self.num_parties();
        let mut amplitudes = vec![ZERO; 1 << n];
        for (k, c) in self.coeffs.iter().enumerate() {
            amplitudes[BasisString { n, k: k + 1 }.index()] = *c;
        }
        PureState::new(amplitudes).expect("validated amplitudes give a valid state")
    }

    /// Single-party marginal `|c_k|² I + (1 − 2|c_k|²)|0⟩⟨0|`.
    pub fn reduced_single(&self, k: usize) -> Result<DensityMatrix> {
        self.check_party(k)?;
        let p = self.coeff(k).norm_sqr();
        DensityMatrix::diagonal(&[1.0 - p, p])
    }

    /// Marginal of parties 2 and 3 of a tripartite state, written term by
    /// term in the basis `{00, 01, 10, 11}`.
    pub fn reduced_pair(&self) -> Result<DensityMatrix> {
        self.require_tripartite()?;
        let (c1, c2, c3) = (self.coeff(1), self.coeff(2), self.coeff(3));
        let mut m = DMatrix::from_element(4, 4, ZERO);
        m[(0, 0)] = C64::from(c1.norm_sqr());
        m[(2, 2)] = C64::from(c2.norm_sqr());
        m[(1, 1)] = C64::from(c3.norm_sqr());
        m[(2, 1)] = c2 * c3.conj();
        m[(1, 2)] = c2.conj() * c3;
        DensityMatrix::new(m)
    }

    /// Strip the phase of every amplitude with a diagonal gate on its party.
    pub fn lu_phase_strip(&self) -> LocalPhaseNormalForm {
        LocalPhaseNormalForm {
            magnitudes: self.coeffs.iter().map(|c| c.norm()).collect(),
            phases: self.coeffs.iter().map(|c| c.arg()).collect(),
        }
    }
}

/// Magnitudes `|c_k|` plus the phases `arg c_k` removed by local gates.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalPhaseNormalForm {
    pub magnitudes: Vec<f64>,
    pub phases: Vec<f64>,
}

impl LocalPhaseNormalForm {
    /// Gate `k` is `diag(1, e^{−i arg c_k})` on party `k`.
    pub fn phase_gates(&self) -> Vec<LinearOperator> {
        self.phases.iter().map(|&p| LinearOperator::phase(-p)).collect()
    }

    /// Apply every phase gate to its party.
    pub fn apply(&self, state: &PureState) -> Result<PureState> {
        self.apply_each(state, self.phase_gates())
    }

    /// Apply the conjugate gates, undoing [`LocalPhaseNormalForm::apply`].
    pub fn undo(&self, state: &PureState) -> Result<PureState> {
        self.apply_each(state, self.phases.iter().map(|&p| LinearOperator::phase(p)).collect())
    }

    fn apply_each(&self, state: &PureState, gates: Vec<LinearOperator>) -> Result<PureState> {
        if state.num_qubits() != gates.len() {
            return Err(Error::DimensionMismatch { left: state.num_qubits(), right: gates.len() });
        }
        let mut out = state.clone();
        for (k, gate) in gates.iter().enumerate() {
            out.apply_single_qubit(k + 1, gate)?;
        }
        Ok(out)
    }

    /// The real-amplitude state `Σ |c_k| |x_k⟩`.
    pub fn stripped_state(&self) -> PureState {
        let n = self.magnitudes.len();
        let mut amplitudes = vec![ZERO; 1 << n];
        for (k, m) in self.magnitudes.iter().enumerate() {
            amplitudes[BasisString { n, k: k + 1 }.index()] = C64::from(*m);
        }
        PureState::new(amplitudes).expect("finite magnitudes")
    }
}

/// ZSA amplitudes over the full `2^N` computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralZsaAmplitudes {
    coeffs: Vec<C64>,
}

impl GeneralZsaAmplitudes {
    pub fn new(coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() < 4 || !coeffs.len().is_power_of_two() {
            return Err(Error::NotPowerOfTwo(coeffs.len()));
        }
        check_finite(&coeffs)?;
        check_sum_and_norm(&coeffs)?;
        Ok(Self { coeffs })
    }

    pub fn num_qubits(&self) -> usize {
        self.coeffs.len().trailing_zeros() as usize
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn to_state(&self) -> PureState {
        PureState::new(self.coeffs.clone()).expect("validated amplitudes")
    }
}

/// One-hot basis string `|x_k⟩` on `n` qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisString {
    pub n: usize,
    pub k: usize,
}

impl BasisString {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::QubitOutOfRange { qubit: k, num_qubits: n });
        }
        Ok(Self { n, k })
    }

    pub fn index(&self) -> usize {
        1 << (self.n - self.k)
    }

    pub fn to_state(&self) -> PureState {
        PureState::basis(self.n, self.index()).expect("in range")
    }
}

/// The unknown input qubit `cos(θ/2)|0⟩ + sin(θ/2)e^{iφ}|1⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnknownQubit {
    theta: f64,
    phi: f64,
}

impl UnknownQubit {
    /// `θ ∈ [0, π]`, `φ ∈ [0, 2π)`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::InvalidParameter(format!("theta {theta} outside [0, pi]")));
        }
        if !(0.0..2.0 * PI).contains(&phi) {
            return Err(Error::InvalidParameter(format!("phi {phi} outside [0, 2pi)")));
        }
        Ok(Self { theta, phi })
    }

    pub fn zero() -> Self {
        Self { theta: 0.0, phi: 0.0 }
    }

    pub fn one() -> Self {
        Self { theta: PI, phi: 0.0 }
    }

    /// Uniform on the Bloch sphere.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let theta = (1.0 - 2.0 * rng.random::<f64>()).clamp(-1.0, 1.0).acos();
        let phi = 2.0 * PI * rng.random::<f64>();
        Self { theta, phi }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn alpha(&self) -> f64 {
        (self.theta / 2.0).cos()
    }

    pub fn beta(&self) -> C64 {
        C64::from_polar((self.theta / 2.0).sin(), self.phi)
    }

    pub fn amplitudes(&self) -> [C64; 2] {
        [C64::from(self.alpha()), self.beta()]
    }

    pub fn state(&self) -> PureState {
        PureState::new(self.amplitudes().to_vec()).expect("unit qubit")
    }

    /// Orthogonal complement `α|1⟩ − β*|0⟩`.
    pub fn complement_amplitudes(&self) -> [C64; 2] {
        [-self.beta().conj(), C64::from(self.alpha())]
    }
}

/// Measure party `k` in the computational basis.
pub fn project_qubit(state: &PureState, k: usize, outcome: u8) -> Result<(f64, PureState)> {
    if !state.is_normalized() {
        return Err(Error::NotNormalized { norm_sqr: state.norm_sqr() });
    }
    let basis = match outcome {
        0 => [ONE, ZERO],
        1 => [ZERO, ONE],
        other => return Err(Error::InvalidParameter(format!("outcome {other} is not 0 or 1"))),
    };
    state.project_qubit(k, basis)
}

/// Real parameters needed to specify an `n`-qubit ZSA state:
/// `2^{n+1} − 3` in general, `2n − 3` for the one-hot class.
pub fn param_count(n: usize, general: bool) -> Result<u64> {
    if n < 2 {
        return Err(Error::TooFewAmplitudes { required: 2, found: n });
    }
    if general {
        1u64.checked_shl(n as u32 + 1)
            .filter(|_| n < 63)
            .map(|d| d - 3)
            .ok_or_else(|| Error::InvalidParameter(format!("{n} qubits overflows the count")))
    } else {
        Ok(2 * n as u64 - 3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedState {
    Ghz,
    W,
}

/// GHZ `(|0…0⟩ + |1…1⟩)/√2` or W `Σ_k |x_k⟩/√n`.
pub fn named_state(which: NamedState, n: usize) -> Result<PureState> {
    if !(2..usize::BITS as usize).contains(&n) {
        return Err(Error::InvalidParameter(format!("{n} qubits")));
    }
    let mut amplitudes = vec![ZERO; 1 << n];
    match which {
        NamedState::Ghz => {
            amplitudes[0] = C64::from(FRAC_1_SQRT_2);
            amplitudes[(1 << n) - 1] = C64::from(FRAC_1_SQRT_2);
        }
        NamedState::W => {
            let s = C64::from(1.0 / (n as f64).sqrt());
            for k in 1..=n {
                amplitudes[BasisString { n, k }.index()] = s;
            }
        }
    }
    PureState::new(amplitudes)
}
