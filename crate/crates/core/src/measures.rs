//! Entanglement quantities for ZSA states and the cobwebs they produce.
//!
//! Each closed form is paired with a route through the generic linear
//! algebra (partial traces, eigensolver, Wootters concurrence) so reports can
//! show both values and their gap.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::codec::Comparison;
use crate::error::{Error, Result};
use crate::protocol::{normalization_constants, run_protocol, BellOutcome, CobwebState, OutcomeSelection};
use crate::qlinalg::{
    hermitian_eigen, hermitian_eigenvalues, partial_transpose, spectrum_entropy, von_neumann_entropy, DensityMatrix,
    LinearOperator, PureState, Tensor, C64, EIGEN_TOL, ZERO,
};
use crate::zsa::{UnknownQubit, ZsaAmplitudes};

/// `H₂(p)` in bits.
pub fn binary_entropy(p: f64) -> f64 {
    spectrum_entropy(&[p, 1.0 - p])
}

fn require_tripartite(z: &ZsaAmplitudes) -> Result<()> {
    if z.num_parties() != 3 {
        return Err(Error::WrongPartyCount { expected: "exactly 3", found: z.num_parties() });
    }
    Ok(())
}

/// Partial transpose of the parties-2,3 marginal and its spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct PptReport {
    pub matrix: LinearOperator,
    /// `λ₁ = |c₂|²`, `λ₂ = |c₃|²`, `λ₃,₄ = ½(|c₁|² ± √(|c₁|⁴ + 4|c₂|²|c₃|²))`.
    pub eigenvalues: [f64; 4],
    /// Eigensolver spectrum of `matrix`, ascending.
    pub numeric: Vec<f64>,
    pub separable: bool,
}

impl PptReport {
    /// Largest gap between the closed-form and eigensolver spectra.
    pub fn max_deviation(&self) -> f64 {
        let mut closed = self.eigenvalues.to_vec();
        closed.sort_by(|a, b| a.total_cmp(b));
        closed.iter().zip(&self.numeric).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// The partial transpose written out entry by entry.
pub fn ppt_matrix_closed_form(z: &ZsaAmplitudes) -> Result<DMatrix<C64>> {
    require_tripartite(z)?;
    let (c1, c2, c3) = (z.coeff(1), z.coeff(2), z.coeff(3));
    let mut m = DMatrix::from_element(4, 4, ZERO);
    m[(0, 0)] = C64::from(c1.norm_sqr());
    m[(1, 1)] = C64::from(c3.norm_sqr());
    m[(2, 2)] = C64::from(c2.norm_sqr());
    m[(0, 3)] = c2.conj() * c3;
    m[(3, 0)] = c2 * c3.conj();
    Ok(m)
}

pub fn ppt_eigenvalues_closed_form(z: &ZsaAmplitudes) -> Result<[f64; 4]> {
    require_tripartite(z)?;
    let (p1, p2, p3) = (z.coeff(1).norm_sqr(), z.coeff(2).norm_sqr(), z.coeff(3).norm_sqr());
    let root = (p1 * p1 + 4.0 * p2 * p3).sqrt();
    Ok([p2, p3, 0.5 * (p1 + root), 0.5 * (p1 - root)])
}

pub fn ppt_report(z: &ZsaAmplitudes) -> Result<PptReport> {
    let eigenvalues = ppt_eigenvalues_closed_form(z)?;
    let matrix = partial_transpose(&z.reduced_pair()?, 2)?;
    let numeric = hermitian_eigenvalues(&matrix)?;
    let separable = numeric[0] >= -EIGEN_TOL;
    Ok(PptReport { matrix, eigenvalues, numeric, separable })
}

/// Entanglement of formation of the parties-2,3 marginal:
/// `H₂(½(1 + √(1 − 4|c₂|²|c₃|²)))`.
pub fn entanglement_of_formation_23(z: &ZsaAmplitudes) -> Result<f64> {
    require_tripartite(z)?;
    let x = 4.0 * z.coeff(2).norm_sqr() * z.coeff(3).norm_sqr();
    Ok(binary_entropy(0.5 * (1.0 + (1.0 - x).max(0.0).sqrt())))
}

fn psd_sqrt(rho: &DensityMatrix) -> Result<DMatrix<C64>> {
    let (values, vectors) = hermitian_eigen(&rho.as_operator())?;
    let d = rho.dim();
    let root = DMatrix::from_fn(d, d, |r, c| if r == c { C64::from(values[r].max(0.0).sqrt()) } else { ZERO });
    Ok(&vectors * root * vectors.adjoint())
}

/// Wootters concurrence of a two-qubit density matrix.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.num_qubits() != 2 {
        return Err(Error::DimensionMismatch { left: rho.num_qubits(), right: 2 });
    }
    let yy = LinearOperator::pauli_y().tensor(&LinearOperator::pauli_y());
    let s = psd_sqrt(rho)?;
    let s_flipped = yy.matrix() * s.conjugate() * yy.matrix();
    // singular values of √ρ √ρ̃ are the square roots of the spectrum of √ρ ρ̃ √ρ
    let mut lambdas: Vec<f64> = (&s * s_flipped).singular_values().iter().copied().collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}

/// `H₂(½(1 + √(1 − C²)))`.
pub fn eof_from_concurrence(c: f64) -> f64 {
    binary_entropy(0.5 * (1.0 + (1.0 - c * c).max(0.0).sqrt()))
}

pub fn entanglement_of_formation(rho: &DensityMatrix) -> Result<f64> {
    Ok(eof_from_concurrence(concurrence(rho)?))
}

/// Entropy of party `k` against the rest:
/// `−(1 − |c_k|²) log₂(1 − |c_k|²) − |c_k|² log₂ |c_k|²`.
pub fn splitting_entropy(z: &ZsaAmplitudes, k: usize) -> Result<f64> {
    if k == 0 || k > z.num_parties() {
        return Err(Error::QubitOutOfRange { qubit: k, num_qubits: z.num_parties() });
    }
    Ok(binary_entropy(z.coeff(k).norm_sqr()))
}

/// Schmidt spectrum of a two-party cobweb.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CobwebSpectrum {
    pub epsilon: f64,
    pub eta_plus: f64,
    pub eta_minus: f64,
    pub entanglement: f64,
}

impl CobwebSpectrum {
    /// `η± = ½(1 ± √(1 − 4ε))`; `None` when `1 − 4ε < 0` (no real spectrum).
    pub fn from_epsilon(epsilon: f64) -> Option<Self> {
        let disc = 1.0 - 4.0 * epsilon;
        if disc < -1e-12 || !epsilon.is_finite() {
            return None;
        }
        let root = disc.max(0.0).sqrt();
        let (eta_plus, eta_minus) = (0.5 * (1.0 + root), 0.5 * (1.0 - root));
        Some(Self { epsilon, eta_plus, eta_minus, entanglement: spectrum_entropy(&[eta_plus, eta_minus]) })
    }
}

/// `ε = det ρ₂`: `N(α)⁴|β|⁴|c₂|²|c₃|²` for `r = 0`, `N(β)⁴α⁴|c₂|²|c₃|²` for `r = 1`.
pub fn cobweb_epsilon(c: &CobwebState) -> Result<f64> {
    let z = c.zsa();
    require_tripartite(z)?;
    let q = c.qubit();
    let n = normalization_constants(q, z)?;
    let weight = if c.reference_bit() == 0 { q.beta().norm_sqr() } else { q.alpha().powi(2) };
    let norm = n.for_reference(c.reference_bit());
    Ok(norm.powi(4) * weight.powi(2) * z.coeff(2).norm_sqr() * z.coeff(3).norm_sqr())
}

/// The `4N(α)⁴|β|⁴|c₂|²|c₃|²` variant of `ε`, kept to show that it does
/// not match the marginal spectrum.
pub fn cobweb_epsilon_factor_four(c: &CobwebState) -> Result<f64> {
    Ok(4.0 * cobweb_epsilon(c)?)
}

pub fn cobweb_spectrum(c: &CobwebState) -> Result<CobwebSpectrum> {
    let eps = cobweb_epsilon(c)?;
    CobwebSpectrum::from_epsilon(eps).ok_or_else(|| Error::InvalidParameter(format!("epsilon {eps} > 1/4")))
}

/// Eigenvalues of the two single-party marginals of a two-qubit pure state.
pub fn marginal_spectra(state: &PureState) -> Result<(Vec<f64>, Vec<f64>)> {
    if state.num_qubits() != 2 {
        return Err(Error::DimensionMismatch { left: state.num_qubits(), right: 2 });
    }
    Ok((state.reduced_density(&[1])?.eigenvalues(), state.reduced_density(&[2])?.eigenvalues()))
}

/// `E(N) = H₂(1/N)` for the `N`th-roots state.
pub fn scaling_entropy(n: usize) -> f64 {
    binary_entropy(1.0 / n as f64)
}

/// `N·E(N)/log₂N`; tends to 1 from above, slowly.
pub fn scaling_ratio(n: usize) -> f64 {
    n as f64 * scaling_entropy(n) / (n as f64).log2()
}

/// `(N, E(N))` for `N = 2..=n_max`.
pub fn scaling_curve(n_max: usize) -> Result<Vec<(usize, f64)>> {
    if n_max < 3 {
        return Err(Error::InvalidParameter(format!("n_max {n_max} < 3")));
    }
    Ok((2..=n_max).map(|n| (n, scaling_entropy(n))).collect())
}

/// Spectrum of one cobweb, closed form against diagonalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub reference_bit: u8,
    pub epsilon: Comparison,
    pub eta_plus: Comparison,
    pub eta_minus: Comparison,
    pub entanglement: Comparison,
    /// Largest gap between the two marginal spectra.
    pub schmidt_gap: f64,
    pub factor_four_epsilon: f64,
    pub factor_four_epsilon_error: f64,
    /// Whether the factor-four variant yields a real spectrum at all.
    pub factor_four_real: bool,
}

pub fn spectrum_report(c: &CobwebState) -> Result<SpectrumReport> {
    let closed = cobweb_spectrum(c)?;
    let (b, cc) = marginal_spectra(c.vector())?;
    let det = b[0] * b[1];
    let factor_four = cobweb_epsilon_factor_four(c)?;
    Ok(SpectrumReport {
        reference_bit: c.reference_bit(),
        epsilon: Comparison::new(closed.epsilon, det),
        eta_plus: Comparison::new(closed.eta_plus, b[1]),
        eta_minus: Comparison::new(closed.eta_minus, b[0]),
        entanglement: Comparison::new(closed.entanglement, spectrum_entropy(&b)),
        schmidt_gap: b.iter().zip(&cc).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max),
        factor_four_epsilon: factor_four,
        factor_four_epsilon_error: (factor_four - det).abs(),
        factor_four_real: CobwebSpectrum::from_epsilon(factor_four).is_some(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PptSummary {
    pub closed_form: [f64; 4],
    pub numeric: Vec<f64>,
    pub max_difference: f64,
    pub separable: bool,
}

/// Every measure for one `(q, z)` pair. Tripartite-only sections are
/// `None` for other sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub num_parties: usize,
    pub splitting_entropy: Vec<Comparison>,
    pub ppt: Option<PptSummary>,
    pub entanglement_of_formation: Option<Comparison>,
    pub cobweb: Vec<SpectrumReport>,
}

pub fn measure_report(q: &UnknownQubit, z: &ZsaAmplitudes) -> Result<MeasureReport> {
    let state = z.build_state();
    let splitting_entropy = (1..=z.num_parties())
        .map(|k| Ok(Comparison::new(splitting_entropy(z, k)?, von_neumann_entropy(&state.reduced_density(&[k])?))))
        .collect::<Result<Vec<_>>>()?;
    if z.num_parties() != 3 {
        return Ok(MeasureReport {
            num_parties: z.num_parties(),
            splitting_entropy,
            ppt: None,
            entanglement_of_formation: None,
            cobweb: Vec::new(),
        });
    }
    let ppt = ppt_report(z)?;
    let eof = Comparison::new(entanglement_of_formation_23(z)?, entanglement_of_formation(&z.reduced_pair()?)?);
    let cobweb = [BellOutcome::PsiMinus, BellOutcome::PhiMinus]
        .into_iter()
        .map(|o| spectrum_report(&run_protocol(q, z, OutcomeSelection::Forced(o))?.final_state))
        .collect::<Result<Vec<_>>>()?;
    Ok(MeasureReport {
        num_parties: 3,
        splitting_entropy,
        ppt: Some(PptSummary {
            max_difference: ppt.max_deviation(),
            closed_form: ppt.eigenvalues,
            numeric: ppt.numeric,
            separable: ppt.separable,
        }),
        entanglement_of_formation: Some(eof),
        cobweb,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn ppt_of_cube_roots() {
        let r = ppt_report(&ZsaAmplitudes::cube_roots()).unwrap();
        let s5 = 5f64.sqrt();
        let want = [1.0 / 3.0, 1.0 / 3.0, (1.0 + s5) / 6.0, (1.0 - s5) / 6.0];
        for (a, b) in r.eigenvalues.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(r.max_deviation() < 1e-12);
        assert!((r.eigenvalues[3] + 0.206_011_329_583_298).abs() < 1e-12);
        assert!(!r.separable);
        assert!((r.numeric.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(r.eigenvalues[2] * r.eigenvalues[3] < 0.0);
    }

    #[test]
    fn ppt_matrix_matches_partial_transpose() {
        let z = ZsaAmplitudes::cube_roots();
        let r = ppt_report(&z).unwrap();
        let closed = ppt_matrix_closed_form(&z).unwrap();
        assert!((r.matrix.matrix() - closed).iter().all(|d| d.norm() < 1e-15));
        assert!(ppt_report(&ZsaAmplitudes::roots_of_unity(4).unwrap()).is_err());
    }

    #[test]
    fn eof_reference_points() {
        let cube = entanglement_of_formation_23(&ZsaAmplitudes::cube_roots()).unwrap();
        let frozen = binary_entropy((1.0 + 5f64.sqrt() / 3.0) / 2.0);
        assert!((cube - frozen).abs() < 1e-15);
        assert!((cube - 0.550).abs() < 5e-4);
        assert!((eof_from_concurrence(1.0) - 1.0).abs() < 1e-15);
        assert!(eof_from_concurrence(0.0).abs() < 1e-15);
        assert!(eof_from_concurrence(1e-9) < 1e-15);
    }

    #[test]
    fn concurrence_of_known_states() {
        let bell = PureState::new(vec![ZERO, C64::from(0.5f64.sqrt()), C64::from(-(0.5f64.sqrt())), ZERO]).unwrap();
        assert!((concurrence(&bell.density()).unwrap() - 1.0).abs() < 1e-10);
        let prod = PureState::from_bits(&[0, 1]).unwrap();
        assert!(concurrence(&prod.density()).unwrap() < 1e-10);
        assert!(concurrence(&DensityMatrix::maximally_mixed(2).unwrap()).unwrap() < 1e-12);
        let z = ZsaAmplitudes::cube_roots();
        let c = concurrence(&z.reduced_pair().unwrap()).unwrap();
        assert!((c - 2.0 * z.coeff(2).norm() * z.coeff(3).norm()).abs() < 1e-10);
    }

    #[test]
    fn splitting_entropy_values() {
        let cube = splitting_entropy(&ZsaAmplitudes::cube_roots(), 1).unwrap();
        assert!((cube - 0.918_295_834_054_489_6).abs() < 1e-12);
        let epr = splitting_entropy(&ZsaAmplitudes::epr(), 2).unwrap();
        assert!((epr - 1.0).abs() < 1e-15);
        assert!(splitting_entropy(&ZsaAmplitudes::epr(), 3).is_err());
    }

    #[test]
    fn spectrum_of_zero_input_is_trivial() {
        let t = run_protocol(&UnknownQubit::zero(), &ZsaAmplitudes::cube_roots(), OutcomeSelection::Forced(BellOutcome::PsiMinus)).unwrap();
        let s = cobweb_spectrum(&t.final_state).unwrap();
        assert_eq!(s.epsilon, 0.0);
        assert_eq!((s.eta_plus, s.eta_minus, s.entanglement), (1.0, 0.0, 0.0));
    }

    #[test]
    fn spectrum_matches_diagonalization_for_cube_roots() {
        let q = UnknownQubit::new(FRAC_PI_2, 0.0).unwrap();
        for o in BellOutcome::ALL {
            let t = run_protocol(&q, &ZsaAmplitudes::cube_roots(), OutcomeSelection::Forced(o)).unwrap();
            let r = spectrum_report(&t.final_state).unwrap();
            assert!(r.epsilon.difference < 1e-12);
            assert!(r.entanglement.difference < 1e-10);
            assert!(r.schmidt_gap < 1e-12);
            assert!((r.epsilon.closed_form - 1.0 / 9.0).abs() < 1e-14);
            assert!(!r.factor_four_real);
        }
    }

    #[test]
    fn scaling_values() {
        let curve = scaling_curve(4).unwrap();
        assert_eq!(curve[0].0, 2);
        assert!((curve[0].1 - 1.0).abs() < 1e-15);
        assert!((curve[1].1 - 0.918_295_834_054_489_6).abs() < 1e-12);
        assert!((curve[2].1 - 0.811_278_124_459_132_8).abs() < 1e-12);
        assert!(scaling_curve(2).is_err());
    }

    #[test]
    fn report_for_tripartite_and_larger() {
        let q = UnknownQubit::new(1.0, 0.5).unwrap();
        let r = measure_report(&q, &ZsaAmplitudes::cube_roots()).unwrap();
        assert_eq!(r.cobweb.len(), 2);
        assert!(r.entanglement_of_formation.unwrap().difference < 1e-10);
        let r = measure_report(&q, &ZsaAmplitudes::roots_of_unity(5).unwrap()).unwrap();
        assert!(r.ppt.is_none());
        assert_eq!(r.splitting_entropy.len(), 5);
    }
}
