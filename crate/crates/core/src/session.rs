//! The protocol as `N` parties exchanging explicit classical messages.
//!
//! Party 1 owns the unknown qubit and particle 1, measures, and broadcasts
//! one two-bit message per remote party. Remote parties only ever see the
//! payload; each one decodes it and corrects its own qubit of the shared
//! register once its message is delivered.

use std::fmt;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{entanglement_of_formation, splitting_entropy};
use crate::protocol::{
    correction_for, finish, joint_state, measure, outcome_rng, sample_outcome, BellOutcome, CorrectionRule,
    OutcomeSelection, Transcript, CBITS_PER_RECIPIENT,
};
use crate::qlinalg::{partial_trace, DensityMatrix, LinearOperator, PureState, Tensor, C64, IMPOSSIBLE_PROB, ZERO};
use crate::zsa::{BasisString, UnknownQubit, ZsaAmplitudes};

/// Two classical bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Payload(u8);

impl Payload {
    pub fn encode(outcome: BellOutcome) -> Self {
        Self(outcome.payload())
    }

    pub fn decode(self) -> Result<BellOutcome> {
        BellOutcome::from_payload(self.0)
    }

    pub fn bits(self) -> u8 {
        self.0
    }
}

impl fmt::Display for Payload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02b}", self.0)
    }
}

impl Serialize for Payload {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Payload {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        match text.as_str() {
            "00" => Ok(Self(0)),
            "01" => Ok(Self(1)),
            "10" => Ok(Self(2)),
            "11" => Ok(Self(3)),
            other => Err(serde::de::Error::custom(format!("bad payload {other:?}"))),
        }
    }
}

/// One line of the message log.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalMessage {
    pub step: usize,
    pub from: usize,
    pub to: usize,
    pub payload: Payload,
}

/// Append-only log; steps are assigned in append order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MessageLog {
    entries: Vec<ClassicalMessage>,
}

impl MessageLog {
    pub fn append(&mut self, from: usize, to: usize, payload: Payload) -> ClassicalMessage {
        let message = ClassicalMessage { step: self.entries.len(), from, to, payload };
        self.entries.push(message);
        message
    }

    pub fn entries(&self) -> &[ClassicalMessage] {
        &self.entries
    }

    /// One JSON object per line.
    pub fn to_json_lines(&self) -> String {
        self.entries
            .iter()
            .map(|m| serde_json::to_string(m).expect("plain message") + "\n")
            .collect()
    }
}

/// A participant. `local_qubits` are 1-based positions in the joint
/// register `a, 1, 2, …, N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Party {
    pub id: usize,
    pub local_qubits: Vec<usize>,
    pub pending_correction: Option<CorrectionRule>,
    corrections_applied: usize,
}

impl Party {
    fn new(id: usize) -> Self {
        let local_qubits = if id == 1 { vec![1, 2] } else { vec![id + 1] };
        Self { id, local_qubits, pending_correction: None, corrections_applied: 0 }
    }

    /// Decode a delivered message into the correction to apply.
    fn receive(&mut self, message: &ClassicalMessage) -> Result<()> {
        if message.to != self.id {
            return Err(Error::InvalidParameter(format!("message for {} delivered to {}", message.to, self.id)));
        }
        self.pending_correction = Some(correction_for(message.payload.decode()?));
        Ok(())
    }

    /// Apply the pending correction to this party's qubit of the post-measurement
    /// register over particles `2…N`.
    fn correct(&mut self, register: &mut PureState) -> Result<()> {
        let rule = self
            .pending_correction
            .take()
            .ok_or_else(|| Error::InvalidParameter(format!("party {} has nothing to apply", self.id)))?;
        if self.corrections_applied > 0 {
            return Err(Error::InvalidParameter(format!("party {} already corrected", self.id)));
        }
        register.apply_single_qubit(self.id - 1, &rule.single_qubit_gate())?;
        self.corrections_applied += 1;
        Ok(())
    }

    pub fn corrections_applied(&self) -> usize {
        self.corrections_applied
    }
}

/// Resources spent by one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResourceLedger {
    /// Entanglement of party 1 against the rest of the shared state, in ebits.
    pub ebits_consumed: f64,
    pub cbits_per_recipient: u32,
    pub cbits_total: u32,
    pub parties: usize,
}

impl ResourceLedger {
    fn for_parties(parties: usize, ebits_consumed: f64) -> Self {
        Self {
            ebits_consumed,
            cbits_per_recipient: CBITS_PER_RECIPIENT,
            cbits_total: CBITS_PER_RECIPIENT * (parties as u32 - 1),
            parties,
        }
    }
}

/// Order in which broadcast messages reach their recipients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum DeliveryOrder {
    /// Parties 2, 3, …, N.
    #[default]
    Sequential,
    /// Explicit permutation of recipient ids `2..=N`.
    Permuted(Vec<usize>),
}

impl DeliveryOrder {
    fn recipients(&self, n: usize) -> Result<Vec<usize>> {
        match self {
            Self::Sequential => Ok((2..=n).collect()),
            Self::Permuted(order) => {
                let mut sorted = order.clone();
                sorted.sort_unstable();
                if sorted != (2..=n).collect::<Vec<_>>() {
                    return Err(Error::InvalidParameter(format!("{order:?} is not a permutation of 2..={n}")));
                }
                Ok(order.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionOutcome {
    pub transcript: Transcript,
    pub ledger: ResourceLedger,
    pub log: MessageLog,
    pub parties: Vec<Party>,
}

/// Drive the protocol party by party with an explicit message flow.
pub fn run_session(q: &UnknownQubit, z: &ZsaAmplitudes, seed: u64, order: &DeliveryOrder) -> Result<SessionOutcome> {
    let n = z.num_parties();
    let recipients = order.recipients(n)?;
    let mut parties: Vec<Party> = (1..=n).map(Party::new).collect();

    // Alice measures a and 1
    let joint = joint_state(q, z)?;
    let (outcome, probability, mut register) = measure(&joint, OutcomeSelection::Sampled { seed })?;

    let mut log = MessageLog::default();
    let payload = Payload::encode(outcome);
    let sent: Vec<ClassicalMessage> = (2..=n).map(|to| log.append(1, to, payload)).collect();

    for id in recipients {
        let message = sent.iter().find(|m| m.to == id).expect("one message per recipient");
        let party = &mut parties[id - 1];
        party.receive(message)?;
        party.correct(&mut register)?;
    }

    let transcript = finish(q, z, outcome, probability, register, Some(seed))?;
    let ledger = ResourceLedger::for_parties(n, splitting_entropy(z, 1)?);
    Ok(SessionOutcome { transcript, ledger, log, parties })
}

/// A separable shared state diagonal in the one-hot basis:
/// `Σ_k w_k |x_k⟩⟨x_k|`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalCorrelatedState {
    weights: Vec<f64>,
}

impl ClassicalCorrelatedState {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.len() < 3 {
            return Err(Error::WrongPartyCount { expected: "at least 3", found: weights.len() });
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter("weights must be a probability vector".into()));
        }
        Ok(Self { weights })
    }

    /// The fully dephased version of a ZSA state: weights `|c_k|²`.
    pub fn dephased(z: &ZsaAmplitudes) -> Result<Self> {
        Self::new(z.coeffs().iter().map(|c| c.norm_sqr()).collect())
    }

    pub fn num_parties(&self) -> usize {
        self.weights.len()
    }

    pub fn density(&self) -> DensityMatrix {
        let n = self.num_parties();
        let mut diag = vec![0.0; 1 << n];
        for (k, w) in self.weights.iter().enumerate() {
            diag[BasisString { n, k: k + 1 }.index()] = *w;
        }
        DensityMatrix::diagonal(&diag).expect("probability vector")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineReport {
    pub outcome: BellOutcome,
    pub outcome_probability: f64,
    /// State of particles `2…N` after corrections.
    pub output: DensityMatrix,
    pub max_coherence: f64,
    /// Entanglement of formation of particles 2 and 3 of the output.
    pub pair_entanglement: f64,
    pub ledger: ResourceLedger,
}

/// Same message flow with a classically correlated resource in place of the
/// ZSA state. Each ensemble member is a product state, so the output can
/// carry no entanglement.
pub fn classical_only_baseline(
    q: &UnknownQubit,
    shared: &ClassicalCorrelatedState,
    seed: u64,
) -> Result<BaselineReport> {
    let n = shared.num_parties();
    let m = n - 1;
    let input = q.state();

    // unnormalized branches per ensemble member and outcome
    let mut branches: Vec<[PureState; 4]> = Vec::with_capacity(n);
    for k in 1..=n {
        let joint = input.tensor(&BasisString { n, k }.to_state());
        let rest = m;
        let member = BellOutcome::ALL.map(|o| {
            let bell = o.vector();
            let amps = (0..1usize << rest)
                .map(|j| (0..4).map(|b| bell[b].conj() * joint.amplitude((b << rest) | j)).sum())
                .collect();
            PureState::new(amps).expect("finite")
        });
        branches.push(member);
    }

    let mut probabilities = [0.0; 4];
    for (w, member) in shared.weights.iter().zip(&branches) {
        for o in BellOutcome::ALL {
            probabilities[o.index()] += w * member[o.index()].norm_sqr();
        }
    }
    let outcome = sample_outcome(&probabilities, outcome_rng(seed).random::<f64>());
    let probability = probabilities[outcome.index()];
    if probability < IMPOSSIBLE_PROB {
        return Err(Error::DegenerateBranch { outcome, probability });
    }

    let d = 1usize << m;
    let mut rho = DMatrix::from_element(d, d, ZERO);
    for (w, member) in shared.weights.iter().zip(&branches) {
        let b = &member[outcome.index()];
        for r in 0..d {
            for c in 0..d {
                rho[(r, c)] += C64::from(w / probability) * b.amplitude(r) * b.amplitude(c).conj();
            }
        }
    }
    let gate = correction_for(outcome).single_qubit_gate();
    let correction = LinearOperator::unitary(gate.power_tensor(m).matrix().clone())?;
    let output = correction.conjugate(&DensityMatrix::new(rho)?)?;
    let pair = partial_trace(&output, &[1, 2])?;

    Ok(BaselineReport {
        outcome,
        outcome_probability: probability,
        max_coherence: output.max_coherence(),
        pair_entanglement: entanglement_of_formation(&pair)?,
        output,
        ledger: ResourceLedger::for_parties(n, 0.0),
    })
}
