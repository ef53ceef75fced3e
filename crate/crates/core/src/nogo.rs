//! Obstruction to disentangling a tripartite-origin cobweb, and the
//! probabilistic CNOT disentangler.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::{cobweb_vector, normalization_constants, CobwebState};
use crate::qlinalg::{fidelity, LinearOperator, PureState, C64, IMPOSSIBLE_PROB};
use crate::zsa::{UnknownQubit, ZsaAmplitudes};

fn require_tripartite(z: &ZsaAmplitudes) -> Result<()> {
    if z.num_parties() != 3 {
        return Err(Error::WrongPartyCount { expected: "exactly 3", found: z.num_parties() });
    }
    Ok(())
}

fn re_c2_conj_c3(z: &ZsaAmplitudes) -> f64 {
    (z.coeff(2).conj() * z.coeff(3)).re
}

/// Overlap a perfect disentangling isometry would have to preserve as zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObstructionReport {
    /// `|2 N(α) N(β) α β* Re(c₂ c₃*)|`.
    pub value: f64,
    /// `|⟨ψ⁽⁰⁾|ψ̄⁽⁰⁾⟩|` from the normalized cobweb vectors.
    pub oracle: f64,
    pub theta: f64,
    pub phi: f64,
    pub re_c2_c3_conj: f64,
    /// All amplitudes nonzero, `θ ∈ (0, π)`, and still no obstruction.
    pub counterexample: bool,
}

pub fn obstruction(q: &UnknownQubit, z: &ZsaAmplitudes) -> Result<ObstructionReport> {
    require_tripartite(z)?;
    let n = normalization_constants(q, z)?;
    let re = (z.coeff(2) * z.coeff(3).conj()).re;
    let value = (2.0 * n.n_alpha * n.n_beta * q.alpha() * q.beta().conj() * re).norm();

    let psi = cobweb_vector(q.amplitudes(), z, 0)?.renormalize()?;
    let bar = cobweb_vector(q.complement_amplitudes(), z, 0)?.renormalize()?;
    let oracle = psi.inner(&bar)?.norm();

    let interior = q.alpha().abs() > 1e-12 && q.beta().norm() > 1e-12;
    Ok(ObstructionReport {
        value,
        oracle,
        theta: q.theta(),
        phi: q.phi(),
        re_c2_c3_conj: re,
        counterexample: interior && value < 1e-12,
    })
}

/// `[|c₂|² + |c₃|² + 2Re(c₂*c₃)] / 2[|c₂|² + |c₃|² + 2α²Re(c₂*c₃)]`.
pub fn success_probability_closed_form(q: &UnknownQubit, z: &ZsaAmplitudes) -> Result<f64> {
    require_tripartite(z)?;
    let base = z.coeff(2).norm_sqr() + z.coeff(3).norm_sqr();
    let re = re_c2_conj_c3(z);
    let denominator = 2.0 * (base + 2.0 * q.alpha().powi(2) * re);
    if denominator <= 0.0 {
        return Err(Error::NonPositiveNorm { value: denominator });
    }
    Ok((base + 2.0 * re) / denominator)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisentangleResult {
    /// Simulated probability of Bob seeing `|+⟩`.
    pub success_probability: f64,
    pub closed_form_probability: f64,
    /// Charlie's qubit on the `|+⟩` branch.
    pub success_state: PureState,
    /// Charlie's qubit on the `|−⟩` branch, absent if that branch is impossible.
    pub failure_state: Option<PureState>,
    /// `|⟨ψ|success_state⟩|²`.
    pub success_fidelity: f64,
}

/// CNOT (party 2 controls party 3), then measure party 2 in `{|+⟩, |−⟩}`.
pub fn cnot_disentangle(c: &CobwebState) -> Result<DisentangleResult> {
    require_tripartite(c.zsa())?;
    if c.reference_bit() != 0 {
        return Err(Error::InvalidParameter("disentangler expects reference bit 0".into()));
    }
    let after = c.vector().apply(&LinearOperator::cnot())?;
    let h = C64::from(std::f64::consts::FRAC_1_SQRT_2);
    let plus = after.contract_qubit(1, [h, h])?;
    let minus = after.contract_qubit(1, [h, -h])?;
    let success_probability = plus.norm_sqr();
    if success_probability < IMPOSSIBLE_PROB {
        return Err(Error::ImpossibleOutcome { probability: success_probability });
    }
    let success_state = plus.renormalize()?;
    let failure_state = if minus.norm_sqr() < IMPOSSIBLE_PROB { None } else { Some(minus.renormalize()?) };
    Ok(DisentangleResult {
        success_probability,
        closed_form_probability: success_probability_closed_form(c.qubit(), c.zsa())?,
        success_fidelity: fidelity(&success_state, &c.qubit().state())?,
        success_state,
        failure_state,
    })
}

/// Where the disentangler beats a coin flip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessSignReport {
    pub probability: f64,
    pub simulated: f64,
    pub exceeds_half: bool,
    pub re_c2_conj_c3: f64,
    /// `P > 1/2 ⟺ Re(c₂*c₃) > 0` held for this input.
    pub equivalence_holds: bool,
}

pub fn success_probability_sign(z: &ZsaAmplitudes, q: &UnknownQubit) -> Result<SuccessSignReport> {
    require_tripartite(z)?;
    if q.alpha().abs() < 1e-12 || q.beta().norm() < 1e-12 {
        return Err(Error::InvalidParameter("theta must lie strictly inside (0, pi)".into()));
    }
    let probability = success_probability_closed_form(q, z)?;
    let cobweb = crate::protocol::run_protocol(
        q,
        z,
        crate::protocol::OutcomeSelection::Forced(crate::protocol::BellOutcome::PsiMinus),
    )?;
    let simulated = cnot_disentangle(&cobweb.final_state)?.success_probability;
    let re = re_c2_conj_c3(z);
    let exceeds_half = probability > 0.5;
    Ok(SuccessSignReport { probability, simulated, exceeds_half, re_c2_conj_c3: re, equivalence_holds: exceeds_half == (re > 0.0) })
}
