//! The universal-entangling protocol.
//!
//! Party 1 (Alice) holds the unknown qubit `a` and particle 1 of a shared
//! one-hot ZSA state. She measures `a, 1` in the Bell basis and broadcasts
//! the two-bit outcome; every remaining party applies the same single-qubit
//! Pauli correction. The remaining `N − 1` qubits end up in
//! `Σ_{k≥2} c_k |r…ψ…r⟩` with `|ψ⟩` in slot `k` and reference bit `r`
//! fixed by the outcome class (`r = 1` for Φ±, `r = 0` for Ψ±).

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codec::state_pairs;
use crate::error::{Error, Result};
use crate::qlinalg::{LinearOperator, PureState, Tensor, C64, IMPOSSIBLE_PROB, ZERO};
use crate::zsa::{UnknownQubit, ZsaAmplitudes};

/// Classical bits Alice sends to each recipient.
pub const CBITS_PER_RECIPIENT: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BellOutcome {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellOutcome {
    pub const ALL: [BellOutcome; 4] = [Self::PhiPlus, Self::PhiMinus, Self::PsiPlus, Self::PsiMinus];

    /// Amplitudes on `|00⟩, |01⟩, |10⟩, |11⟩` of particles `a, 1`.
    pub fn vector(self) -> [C64; 4] {
        let s = C64::from(std::f64::consts::FRAC_1_SQRT_2);
        match self {
            Self::PhiPlus => [s, ZERO, ZERO, s],
            Self::PhiMinus => [s, ZERO, ZERO, -s],
            Self::PsiPlus => [ZERO, s, s, ZERO],
            Self::PsiMinus => [ZERO, s, -s, ZERO],
        }
    }

    /// Two-bit wire encoding: Φ+ = 00, Φ− = 01, Ψ+ = 10, Ψ− = 11.
    pub fn payload(self) -> u8 {
        match self {
            Self::PhiPlus => 0b00,
            Self::PhiMinus => 0b01,
            Self::PsiPlus => 0b10,
            Self::PsiMinus => 0b11,
        }
    }

    pub fn from_payload(bits: u8) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|o| o.payload() == bits)
            .ok_or_else(|| Error::Parse(format!("payload {bits:#b} is not two bits")))
    }

    pub fn index(self) -> usize {
        self.payload() as usize
    }

    pub fn reference_bit(self) -> u8 {
        correction_for(self).reference_bit
    }
}

impl fmt::Display for BellOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Self::PhiPlus => "PhiPlus",
            Self::PhiMinus => "PhiMinus",
            Self::PsiPlus => "PsiPlus",
            Self::PsiMinus => "PsiMinus",
        };
        f.write_str(name)
    }
}

impl FromStr for BellOutcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|o| o.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown Bell outcome {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CorrectionGate {
    ISigmaY,
    SigmaX,
    SigmaZ,
    Identity,
}

impl CorrectionGate {
    pub fn operator(self) -> LinearOperator {
        match self {
            Self::ISigmaY => LinearOperator::i_pauli_y(),
            Self::SigmaX => LinearOperator::pauli_x(),
            Self::SigmaZ => LinearOperator::pauli_z(),
            Self::Identity => LinearOperator::identity(2),
        }
    }
}

/// Gate every remote party applies, and the reference bit it produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CorrectionRule {
    pub gate: CorrectionGate,
    pub reference_bit: u8,
}

impl CorrectionRule {
    pub fn single_qubit_gate(&self) -> LinearOperator {
        self.gate.operator()
    }
}

pub fn correction_for(outcome: BellOutcome) -> CorrectionRule {
    let (gate, reference_bit) = match outcome {
        BellOutcome::PhiPlus => (CorrectionGate::ISigmaY, 1),
        BellOutcome::PhiMinus => (CorrectionGate::SigmaX, 1),
        BellOutcome::PsiPlus => (CorrectionGate::SigmaZ, 0),
        BellOutcome::PsiMinus => (CorrectionGate::Identity, 0),
    };
    CorrectionRule { gate, reference_bit }
}

fn require_protocol_size(z: &ZsaAmplitudes) -> Result<()> {
    if z.num_parties() < 3 {
        return Err(Error::WrongPartyCount { expected: "at least 3", found: z.num_parties() });
    }
    Ok(())
}

/// `|ψ⟩_a ⊗ |Ψ⟩_{1…N}` with `a` most significant.
pub fn joint_state(q: &UnknownQubit, z: &ZsaAmplitudes) -> Result<PureState> {
    require_protocol_size(z)?;
    Ok(q.state().tensor(&z.build_state()))
}

/// `(⟨B|_{a1} ⊗ I)|joint⟩`, unnormalized.
fn project_bell(joint: &PureState, outcome: BellOutcome) -> Result<PureState> {
    if joint.num_qubits() < 3 {
        return Err(Error::InvalidParameter("joint register needs at least 3 qubits".into()));
    }
    let rest = joint.num_qubits() - 2;
    let bell = outcome.vector();
    let out = (0..1usize << rest)
        .map(|j| (0..4).map(|b| bell[b].conj() * joint.amplitude((b << rest) | j)).sum())
        .collect();
    PureState::new(out)
}

/// Probability of `outcome` and the renormalized post-measurement state of
/// particles `2…N`.
pub fn bell_branch(joint: &PureState, outcome: BellOutcome) -> Result<(f64, PureState)> {
    let branch = project_bell(joint, outcome)?;
    let probability = branch.norm_sqr() / joint.norm_sqr();
    if probability < IMPOSSIBLE_PROB {
        return Err(Error::DegenerateBranch { outcome, probability });
    }
    Ok((probability, branch.renormalize()?))
}

/// Simulated probabilities in [`BellOutcome::ALL`] order.
pub fn branch_probabilities(joint: &PureState) -> Result<[f64; 4]> {
    let total = joint.norm_sqr();
    let mut out = [0.0; 4];
    for o in BellOutcome::ALL {
        out[o.index()] = project_bell(joint, o)?.norm_sqr() / total;
    }
    Ok(out)
}

/// `N(α)` normalizes the `r = 0` target, `N(β)` the `r = 1` target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationConstants {
    pub n_alpha: f64,
    pub n_beta: f64,
}

impl NormalizationConstants {
    pub fn for_reference(&self, reference_bit: u8) -> f64 {
        if reference_bit == 0 {
            self.n_alpha
        } else {
            self.n_beta
        }
    }

    /// `p(Φ±) = 1/(2N(β)²)`, `p(Ψ±) = 1/(2N(α)²)`, in [`BellOutcome::ALL`] order.
    pub fn branch_probabilities(&self) -> [f64; 4] {
        let phi = 0.5 / self.n_beta.powi(2);
        let psi = 0.5 / self.n_alpha.powi(2);
        [phi, phi, psi, psi]
    }
}

fn inverse_sqrt(value: f64) -> Result<f64> {
    if value <= 0.0 {
        return Err(Error::NonPositiveNorm { value });
    }
    Ok(1.0 / value.sqrt())
}

/// Closed-form normalization constants. For three parties:
/// `N(α)^{-2} = |c₂|² + |c₃|² + 2α² Re(c₂* c₃)`, and `N(β)` with `|β|²`
/// in place of `α²`. Larger registers use
/// [`normalization_constants_general`].
pub fn normalization_constants(q: &UnknownQubit, z: &ZsaAmplitudes) -> Result<NormalizationConstants> {
    require_protocol_size(z)?;
    if z.num_parties() != 3 {
        return normalization_constants_general(q, z);
    }
    let (c2, c3) = (z.coeff(2), z.coeff(3));
    let base = c2.norm_sqr() + c3.norm_sqr();
    let cross = 2.0 * (c2.conj() * c3).re;
    Ok(NormalizationConstants {
        n_alpha: inverse_sqrt(base + q.alpha().powi(2) * cross)?,
        n_beta: inverse_sqrt(base + q.beta().norm_sqr() * cross)?,
    })
}

/// `N(α)^{-2} = (1 − |c₁|²) + α²(2|c₁|² − 1)`, valid for any `N ≥ 3`.
pub fn normalization_constants_general(q: &UnknownQubit, z: &ZsaAmplitudes) -> Result<NormalizationConstants> {
    require_protocol_size(z)?;
    let p1 = z.coeff(1).norm_sqr();
    let f = |w: f64| (1.0 - p1) + w * (2.0 * p1 - 1.0);
    Ok(NormalizationConstants {
        n_alpha: inverse_sqrt(f(q.alpha().powi(2)))?,
        n_beta: inverse_sqrt(f(q.beta().norm_sqr()))?,
    })
}

/// `Σ_{k≥2} c_k |r…φ…r⟩` for an arbitrary single-qubit `φ = (φ₀, φ₁)`,
/// unnormalized, over particles `2…N`.
pub(crate) fn cobweb_vector(qubit: [C64; 2], z: &ZsaAmplitudes, reference_bit: u8) -> Result<PureState> {
    let m = z.num_parties() - 1;
    let all = (1usize << m) - 1;
    let base = if reference_bit == 0 { 0 } else { all };
    let mut amplitudes = vec![ZERO; 1 << m];
    for k in 2..=z.num_parties() {
        let mask = 1usize << (m - (k - 1));
        let c = z.coeff(k);
        amplitudes[base & !mask] += c * qubit[0];
        amplitudes[base | mask] += c * qubit[1];
    }
    PureState::new(amplitudes)
}

/// The target cobweb state built straight from its definition; the oracle
/// the protocol output is checked against.
pub fn generalized_target(q: &UnknownQubit, z: &ZsaAmplitudes, reference_bit: u8) -> Result<PureState> {
    require_protocol_size(z)?;
    if reference_bit > 1 {
        return Err(Error::InvalidParameter(format!("reference bit {reference_bit}")));
    }
    cobweb_vector(q.amplitudes(), z, reference_bit)
}

/// A universal entangled state of the unknown qubit with reference `|r⟩`
/// held by parties `2…N`.
#[derive(Debug, Clone, PartialEq)]
pub struct CobwebState {
    reference_bit: u8,
    zsa: ZsaAmplitudes,
    qubit: UnknownQubit,
    vector: PureState,
    norm_constant: f64,
}

impl CobwebState {
    pub fn reference_bit(&self) -> u8 {
        self.reference_bit
    }

    pub fn zsa(&self) -> &ZsaAmplitudes {
        &self.zsa
    }

    pub fn qubit(&self) -> &UnknownQubit {
        &self.qubit
    }

    /// Normalized state of particles `2…N`.
    pub fn vector(&self) -> &PureState {
        &self.vector
    }

    pub fn norm_constant(&self) -> f64 {
        self.norm_constant
    }

    /// True when every single-party marginal is pure.
    pub fn is_product(&self) -> bool {
        (1..=self.vector.num_qubits()).all(|k| {
            self.vector
                .reduced_density(&[k])
                .map(|r| r.eigenvalues()[0] < 1e-10)
                .unwrap_or(false)
        })
    }
}

/// How the Bell outcome is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutcomeSelection {
    Forced(BellOutcome),
    /// Born-rule sampling from a seeded ChaCha stream.
    Sampled { seed: u64 },
}

/// Record of one protocol run.
#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    pub outcome: BellOutcome,
    pub outcome_probability: f64,
    /// Per recipient; always two.
    pub cbits_sent: u32,
    pub parties_notified: usize,
    pub seed: Option<u64>,
    pub final_state: CobwebState,
}

/// Flat, serializable view of a [`Transcript`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub outcome: BellOutcome,
    pub probability: f64,
    pub cbits: u32,
    pub parties_notified: usize,
    pub reference_bit: u8,
    pub norm_constant: f64,
    pub product: bool,
    pub amplitudes: Vec<[f64; 2]>,
}

impl Transcript {
    pub fn record(&self) -> TranscriptRecord {
        TranscriptRecord {
            outcome: self.outcome,
            probability: self.outcome_probability,
            cbits: self.cbits_sent,
            parties_notified: self.parties_notified,
            reference_bit: self.final_state.reference_bit,
            norm_constant: self.final_state.norm_constant,
            product: self.final_state.is_product(),
            amplitudes: state_pairs(&self.final_state.vector),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.record()).expect("plain record")
    }
}

/// Inverse-CDF pick over [`BellOutcome::ALL`] skipping impossible branches.
pub fn sample_outcome(probabilities: &[f64; 4], u: f64) -> BellOutcome {
    let mut cumulative = 0.0;
    let mut last = None;
    for o in BellOutcome::ALL {
        let p = probabilities[o.index()];
        if p < IMPOSSIBLE_PROB {
            continue;
        }
        cumulative += p;
        last = Some(o);
        if u < cumulative {
            return o;
        }
    }
    last.expect("probabilities sum to one")
}

/// Seeded RNG used for outcome sampling everywhere in the crate.
pub fn outcome_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent seed for trial `index` under a master seed (SplitMix64).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Alice's side: pick the outcome and collapse the register. Shared with
/// the session simulation so both draw identical outcomes.
pub(crate) fn measure(joint: &PureState, selection: OutcomeSelection) -> Result<(BellOutcome, f64, PureState)> {
    let outcome = match selection {
        OutcomeSelection::Forced(o) => o,
        OutcomeSelection::Sampled { seed } => {
            let probabilities = branch_probabilities(joint)?;
            sample_outcome(&probabilities, outcome_rng(seed).random::<f64>())
        }
    };
    let (p, residual) = bell_branch(joint, outcome)?;
    Ok((outcome, p, residual))
}

pub(crate) fn finish(
    q: &UnknownQubit,
    z: &ZsaAmplitudes,
    outcome: BellOutcome,
    probability: f64,
    corrected: PureState,
    seed: Option<u64>,
) -> Result<Transcript> {
    let reference_bit = outcome.reference_bit();
    let norm_constant = normalization_constants(q, z)?.for_reference(reference_bit);
    Ok(Transcript {
        outcome,
        outcome_probability: probability,
        cbits_sent: CBITS_PER_RECIPIENT,
        parties_notified: z.num_parties() - 1,
        seed,
        final_state: CobwebState { reference_bit, zsa: z.clone(), qubit: *q, vector: corrected, norm_constant },
    })
}

/// Run the protocol end to end on a dense statevector.
pub fn run_protocol(q: &UnknownQubit, z: &ZsaAmplitudes, selection: OutcomeSelection) -> Result<Transcript> {
    let joint = joint_state(q, z)?;
    let (outcome, probability, mut residual) = measure(&joint, selection)?;
    let gate = correction_for(outcome).single_qubit_gate();
    for qubit in 1..=residual.num_qubits() {
        residual.apply_single_qubit(qubit, &gate)?;
    }
    let seed = match selection {
        OutcomeSelection::Sampled { seed } => Some(seed),
        OutcomeSelection::Forced(_) => None,
    };
    finish(q, z, outcome, probability, residual, seed)
}
