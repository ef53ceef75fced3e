//! Dense complex linear algebra over small multi-qubit registers.
//!
//! Qubits are labelled from 1 and ordered big-endian: qubit 1 is the most
//! significant bit of a basis index. Every value here is immutable once
//! built, so all of it can be shared freely across threads.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance for construction-time checks (norm, Hermiticity, trace).
pub const CONSTRUCTION_TOL: f64 = 1e-12;
/// Smallest eigenvalue still accepted as nonnegative.
pub const EIGEN_TOL: f64 = 1e-10;
/// Eigenvalues below this are dropped from entropy sums.
pub const ENTROPY_CUTOFF: f64 = 1e-14;
/// Probabilities below this mark an outcome as impossible.
pub const IMPOSSIBLE_PROB: f64 = 1e-14;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Bit position of 1-based `qubit` inside an `n`-qubit basis index.
#[inline]
fn bit_of(qubit: usize, n: usize) -> usize {
    n - qubit
}

fn check_qubit(qubit: usize, num_qubits: usize) -> Result<()> {
    if qubit == 0 || qubit > num_qubits {
        Err(Error::QubitOutOfRange { qubit, num_qubits })
    } else {
        Ok(())
    }
}

/// Kronecker product, left operand most significant.
pub trait Tensor: Sized {
    fn tensor(&self, other: &Self) -> Self;
}

/// A statevector on `num_qubits` qubits.
///
/// The `normalized` flag is derived from the amplitudes at construction, so
/// unnormalized intermediate vectors (projected branches, closed-form
/// targets) are representable and can be told apart.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    num_qubits: usize,
    amplitudes: Vec<C64>,
    normalized: bool,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let num_qubits = qubits_for_dim(amplitudes.len())?;
        if let Some(index) = amplitudes.iter().position(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::NonFinite { index });
        }
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        Ok(Self {
            num_qubits,
            amplitudes,
            normalized: (norm_sqr - 1.0).abs() <= CONSTRUCTION_TOL,
        })
    }

    /// Like [`PureState::new`] but rejects vectors that are not unit norm.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let state = Self::new(amplitudes)?;
        if !state.normalized {
            return Err(Error::NotNormalized { norm_sqr: state.norm_sqr() });
        }
        Ok(state)
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits >= usize::BITS as usize {
            return Err(Error::InvalidParameter(format!("{num_qubits} qubits")));
        }
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::InvalidParameter(format!("basis index {index} >= {dim}")));
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Self::new(amplitudes)
    }

    /// Basis state from a bit string, first bit = qubit 1.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let index = bits.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b != 0));
        Self::basis(bits.len(), index)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amplitudes[index]
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Rescale to unit norm. Fails for (numerically) null vectors.
    pub fn renormalize(&self) -> Result<Self> {
        let norm = self.norm();
        if norm * norm < IMPOSSIBLE_PROB {
            return Err(Error::NotNormalized { norm_sqr: norm * norm });
        }
        let amplitudes = self.amplitudes.iter().map(|a| a / norm).collect();
        Self::new(amplitudes)
    }

    pub fn scale(&self, factor: C64) -> Result<Self> {
        Self::new(self.amplitudes.iter().map(|a| a * factor).collect())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: other.dim() });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Apply a 2×2 gate to one qubit in place.
    pub fn apply_single_qubit(&mut self, qubit: usize, gate: &LinearOperator) -> Result<()> {
        check_qubit(qubit, self.num_qubits)?;
        if gate.dim() != 2 {
            return Err(Error::DimensionMismatch { left: gate.dim(), right: 2 });
        }
        let m = gate.matrix();
        let (g00, g01, g10, g11) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
        let mask = 1usize << bit_of(qubit, self.num_qubits);
        for i in 0..self.amplitudes.len() {
            if i & mask == 0 {
                let a0 = self.amplitudes[i];
                let a1 = self.amplitudes[i | mask];
                self.amplitudes[i] = g00 * a0 + g01 * a1;
                self.amplitudes[i | mask] = g10 * a0 + g11 * a1;
            }
        }
        self.refresh_flag();
        Ok(())
    }

    /// Apply a full-register operator.
    pub fn apply(&self, op: &LinearOperator) -> Result<PureState> {
        if op.dim() != self.dim() {
            return Err(Error::DimensionMismatch { left: op.dim(), right: self.dim() });
        }
        let m = op.matrix();
        let out = (0..self.dim())
            .map(|r| (0..self.dim()).map(|c| m[(r, c)] * self.amplitudes[c]).sum())
            .collect();
        PureState::new(out)
    }

    /// Contract one qubit with `⟨basis|` where `basis` is given as
    /// amplitudes on `|0⟩, |1⟩`. Returns the unnormalized residual on the
    /// remaining qubits.
    pub fn contract_qubit(&self, qubit: usize, basis: [C64; 2]) -> Result<PureState> {
        check_qubit(qubit, self.num_qubits)?;
        if self.num_qubits < 2 {
            return Err(Error::InvalidParameter("cannot contract the only qubit".into()));
        }
        let n = self.num_qubits;
        let low_bits = bit_of(qubit, n);
        let low_mask = (1usize << low_bits) - 1;
        let out = (0..self.dim() / 2)
            .map(|j| {
                let high = (j & !low_mask) << 1;
                let low = j & low_mask;
                let i0 = high | low;
                let i1 = i0 | (1 << low_bits);
                basis[0].conj() * self.amplitudes[i0] + basis[1].conj() * self.amplitudes[i1]
            })
            .collect();
        PureState::new(out)
    }

    /// Projective measurement of one qubit onto `basis`: Born probability and
    /// the renormalized state of the other qubits.
    pub fn project_qubit(&self, qubit: usize, basis: [C64; 2]) -> Result<(f64, PureState)> {
        let branch = self.contract_qubit(qubit, basis)?;
        let probability = branch.norm_sqr() / self.norm_sqr();
        if probability < IMPOSSIBLE_PROB {
            return Err(Error::ImpossibleOutcome { probability });
        }
        Ok((probability, branch.renormalize()?))
    }

    pub fn density(&self) -> DensityMatrix {
        let d = self.dim();
        let matrix = DMatrix::from_fn(d, d, |r, c| self.amplitudes[r] * self.amplitudes[c].conj());
        DensityMatrix { num_qubits: self.num_qubits, matrix }
    }

    /// Reduced density matrix over `keep`, computed straight from the
    /// amplitudes without forming the full projector.
    pub fn reduced_density(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let split = Split::new(self.num_qubits, keep)?;
        let kd = 1usize << split.kept.len();
        let ed = 1usize << split.traced.len();
        let scale = 1.0 / self.norm_sqr();
        let mut matrix = DMatrix::from_element(kd, kd, ZERO);
        for e in 0..ed {
            let env = split.scatter_traced(e);
            for r in 0..kd {
                let ar = self.amplitudes[split.scatter_kept(r) | env];
                if ar == ZERO {
                    continue;
                }
                for c in 0..kd {
                    matrix[(r, c)] += ar * self.amplitudes[split.scatter_kept(c) | env].conj() * scale;
                }
            }
        }
        Ok(DensityMatrix { num_qubits: split.kept.len(), matrix })
    }

    fn refresh_flag(&mut self) {
        self.normalized = (self.norm_sqr() - 1.0).abs() <= CONSTRUCTION_TOL;
    }
}

impl Tensor for PureState {
    fn tensor(&self, other: &Self) -> Self {
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect::<Vec<_>>();
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        PureState {
            num_qubits: self.num_qubits + other.num_qubits,
            amplitudes,
            normalized: (norm_sqr - 1.0).abs() <= CONSTRUCTION_TOL,
        }
    }
}

/// Kept/traced qubit bookkeeping for partial traces.
struct Split {
    n: usize,
    kept: Vec<usize>,
    traced: Vec<usize>,
}

impl Split {
    fn new(n: usize, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::EmptyKeepSet);
        }
        let mut kept = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();
        for &q in &kept {
            check_qubit(q, n)?;
        }
        let traced = (1..=n).filter(|q| !kept.contains(q)).collect();
        Ok(Self { n, kept, traced })
    }

    fn scatter(&self, qubits: &[usize], local: usize) -> usize {
        let k = qubits.len();
        qubits.iter().enumerate().fold(0, |acc, (pos, &q)| {
            let bit = (local >> (k - 1 - pos)) & 1;
            acc | (bit << bit_of(q, self.n))
        })
    }

    fn scatter_kept(&self, local: usize) -> usize {
        self.scatter(&self.kept, local)
    }

    fn scatter_traced(&self, local: usize) -> usize {
        self.scatter(&self.traced, local)
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix on `num_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    matrix: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates Hermiticity and trace at 1e-12 and positivity at -1e-10.
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch { left: matrix.nrows(), right: matrix.ncols() });
        }
        let num_qubits = qubits_for_dim(matrix.nrows())?;
        let deviation = hermitian_deviation(&matrix);
        if deviation > CONSTRUCTION_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > CONSTRUCTION_TOL || trace.im.abs() > CONSTRUCTION_TOL {
            return Err(Error::BadTrace { trace: trace.re });
        }
        let rho = Self { num_qubits, matrix };
        let lowest = rho.eigenvalues()[0];
        if lowest < -EIGEN_TOL {
            return Err(Error::NotPositive { eigenvalue: lowest });
        }
        Ok(rho)
    }

    /// Diagonal density matrix from a probability vector.
    pub fn diagonal(probabilities: &[f64]) -> Result<Self> {
        let d = probabilities.len();
        Self::new(DMatrix::from_fn(d, d, |r, c| {
            if r == c {
                C64::new(probabilities[r], 0.0)
            } else {
                ZERO
            }
        }))
    }

    pub fn maximally_mixed(num_qubits: usize) -> Result<Self> {
        let d = 1usize << num_qubits;
        Self::diagonal(&vec![1.0 / d as f64; d])
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Largest off-diagonal modulus.
    pub fn max_coherence(&self) -> f64 {
        let d = self.dim();
        let mut max = 0.0f64;
        for r in 0..d {
            for c in 0..d {
                if r != c {
                    max = max.max(self.matrix[(r, c)].norm());
                }
            }
        }
        max
    }

    /// Ascending spectrum.
    pub fn eigenvalues(&self) -> Vec<f64> {
        sorted_eigenvalues(self.matrix.clone())
    }

    pub fn as_operator(&self) -> LinearOperator {
        LinearOperator { matrix: self.matrix.clone(), unitary: false, hermitian: true }
    }

    /// Wrap a matrix already known to be a valid density matrix.
    pub(crate) fn from_trusted(matrix: DMatrix<C64>) -> Self {
        let num_qubits = matrix.nrows().trailing_zeros() as usize;
        Self { num_qubits, matrix }
    }
}

impl Tensor for DensityMatrix {
    fn tensor(&self, other: &Self) -> Self {
        Self {
            num_qubits: self.num_qubits + other.num_qubits,
            matrix: self.matrix.kronecker(&other.matrix),
        }
    }
}

/// A square complex matrix, optionally certified unitary or Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOperator {
    matrix: DMatrix<C64>,
    unitary: bool,
    hermitian: bool,
}

impl LinearOperator {
    /// Unflagged operator.
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch { left: matrix.nrows(), right: matrix.ncols() });
        }
        Ok(Self { matrix, unitary: false, hermitian: false })
    }

    /// Operator flagged unitary; checks `U†U = I` within 1e-12.
    pub fn unitary(matrix: DMatrix<C64>) -> Result<Self> {
        let mut op = Self::new(matrix)?;
        let d = op.dim();
        let deviation = (op.matrix.adjoint() * &op.matrix - DMatrix::<C64>::identity(d, d))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if deviation > CONSTRUCTION_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        op.unitary = true;
        op.hermitian = hermitian_deviation(&op.matrix) <= CONSTRUCTION_TOL;
        Ok(op)
    }

    /// Operator flagged Hermitian; checks within 1e-12.
    pub fn hermitian(matrix: DMatrix<C64>) -> Result<Self> {
        let mut op = Self::new(matrix)?;
        let deviation = hermitian_deviation(&op.matrix);
        if deviation > CONSTRUCTION_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        op.hermitian = true;
        Ok(op)
    }

    fn known(rows: [[C64; 2]; 2], hermitian: bool) -> Self {
        Self {
            matrix: DMatrix::from_fn(2, 2, |r, c| rows[r][c]),
            unitary: true,
            hermitian,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: DMatrix::identity(dim, dim), unitary: true, hermitian: true }
    }

    pub fn pauli_x() -> Self {
        Self::known([[ZERO, ONE], [ONE, ZERO]], true)
    }

    /// `σ_y = [[0, −i], [i, 0]]`.
    pub fn pauli_y() -> Self {
        Self::known([[ZERO, -I], [I, ZERO]], true)
    }

    pub fn pauli_z() -> Self {
        Self::known([[ONE, ZERO], [ZERO, -ONE]], true)
    }

    /// `iσ_y = [[0, 1], [−1, 0]]`.
    pub fn i_pauli_y() -> Self {
        Self::known([[ZERO, ONE], [-ONE, ZERO]], false)
    }

    pub fn hadamard() -> Self {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::known([[h, h], [h, -h]], true)
    }

    /// `diag(1, e^{iφ})`.
    pub fn phase(angle: f64) -> Self {
        let mut op = Self::known([[ONE, ZERO], [ZERO, C64::from_polar(1.0, angle)]], false);
        op.hermitian = hermitian_deviation(&op.matrix) <= CONSTRUCTION_TOL;
        op
    }

    /// CNOT on two qubits, first qubit controls.
    pub fn cnot() -> Self {
        let mut m = DMatrix::identity(4, 4);
        m[(2, 2)] = ZERO;
        m[(3, 3)] = ZERO;
        m[(2, 3)] = ONE;
        m[(3, 2)] = ONE;
        Self { matrix: m, unitary: true, hermitian: true }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn adjoint(&self) -> Self {
        Self { matrix: self.matrix.adjoint(), unitary: self.unitary, hermitian: self.hermitian }
    }

    pub fn compose(&self, rhs: &LinearOperator) -> Result<Self> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: rhs.dim() });
        }
        Ok(Self { matrix: &self.matrix * &rhs.matrix, unitary: self.unitary && rhs.unitary, hermitian: false })
    }

    /// `U ρ U†` for a flagged-unitary `U`.
    pub fn conjugate(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if !self.unitary {
            return Err(Error::NotUnitary { deviation: f64::NAN });
        }
        if self.dim() != rho.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: rho.dim() });
        }
        Ok(DensityMatrix::from_trusted(&self.matrix * rho.matrix() * self.matrix.adjoint()))
    }

    /// `gate ⊗ gate ⊗ … ⊗ gate` over `copies` factors.
    /// Transpose the indices of one qubit of a `2ⁿ × 2ⁿ` operator.
    pub fn partial_transpose(&self, subsystem: usize) -> Result<Self> {
        let d = self.dim();
        if !d.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(d));
        }
        let n = d.trailing_zeros() as usize;
        check_qubit(subsystem, n)?;
        let mask = 1usize << bit_of(subsystem, n);
        let matrix = DMatrix::from_fn(d, d, |r, c| {
            let (sr, sc) = ((r & !mask) | (c & mask), (c & !mask) | (r & mask));
            self.matrix[(sr, sc)]
        });
        let hermitian = self.hermitian;
        Ok(Self { matrix, unitary: false, hermitian })
    }

    pub fn power_tensor(&self, copies: usize) -> Self {
        (1..copies).fold(self.clone(), |acc, _| acc.tensor(self))
    }
}

impl Tensor for LinearOperator {
    fn tensor(&self, other: &Self) -> Self {
        Self {
            matrix: self.matrix.kronecker(&other.matrix),
            unitary: self.unitary && other.unitary,
            hermitian: self.hermitian && other.hermitian,
        }
    }
}

fn hermitian_deviation(m: &DMatrix<C64>) -> f64 {
    let d = m.nrows();
    let mut max = 0.0f64;
    for r in 0..d {
        for c in r..d {
            max = max.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    max
}

fn sorted_eigenvalues(m: DMatrix<C64>) -> Vec<f64> {
    let mut values: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| a.total_cmp(b));
    values
}

/// Reduced density matrix over the 1-based qubits in `keep` (kept in
/// ascending order, duplicates ignored).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let split = Split::new(rho.num_qubits, keep)?;
    let kd = 1usize << split.kept.len();
    let ed = 1usize << split.traced.len();
    let mut matrix = DMatrix::from_element(kd, kd, ZERO);
    for r in 0..kd {
        let rr = split.scatter_kept(r);
        for c in 0..kd {
            let cc = split.scatter_kept(c);
            matrix[(r, c)] = (0..ed)
                .map(|e| {
                    let env = split.scatter_traced(e);
                    rho.matrix[(rr | env, cc | env)]
                })
                .sum();
        }
    }
    Ok(DensityMatrix { num_qubits: split.kept.len(), matrix })
}

/// Transpose the indices of one qubit: `ρ^{PT}_{mμ,nν} = ρ_{mν,nμ}`.
///
/// The result is Hermitian with unit trace but need not be positive, so it
/// is returned as an operator rather than a density matrix.
pub fn partial_transpose(rho: &DensityMatrix, subsystem: usize) -> Result<LinearOperator> {
    rho.as_operator().partial_transpose(subsystem)
}

/// Ascending real spectrum of a Hermitian operator (checked within 1e-10).
pub fn hermitian_eigenvalues(h: &LinearOperator) -> Result<Vec<f64>> {
    let deviation = hermitian_deviation(&h.matrix);
    if deviation > EIGEN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(sorted_eigenvalues(h.matrix.clone()))
}

/// Eigen-decomposition of a Hermitian operator: ascending eigenvalues and
/// the matching orthonormal eigenvectors as columns.
pub fn hermitian_eigen(h: &LinearOperator) -> Result<(Vec<f64>, DMatrix<C64>)> {
    let deviation = hermitian_deviation(&h.matrix);
    if deviation > EIGEN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let eig = SymmetricEigen::new(h.matrix.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let d = h.dim();
    let vectors = DMatrix::from_fn(d, d, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Shannon entropy in bits of a spectrum; entries below 1e-14 count as 0.
pub fn spectrum_entropy(eigenvalues: &[f64]) -> f64 {
    -eigenvalues
        .iter()
        .filter(|&&l| l > ENTROPY_CUTOFF)
        .map(|&l| l * l.log2())
        .sum::<f64>()
}

/// `−tr ρ log₂ ρ` in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    spectrum_entropy(&rho.eigenvalues()).max(0.0)
}

/// `|⟨a|b⟩|²` for unit vectors.
pub fn fidelity(a: &PureState, b: &PureState) -> Result<f64> {
    Ok(overlap(a, b)?.powi(2))
}

fn overlap(a: &PureState, b: &PureState) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { left: a.dim(), right: b.dim() });
    }
    for s in [a, b] {
        if !s.is_normalized() {
            return Err(Error::NotNormalized { norm_sqr: s.norm_sqr() });
        }
    }
    Ok(a.inner(b)?.norm())
}

/// True iff `|⟨a|b⟩| ≥ 1 − tol`.
pub fn equal_up_to_global_phase(a: &PureState, b: &PureState, tol: f64) -> Result<bool> {
    Ok(overlap(a, b)? >= 1.0 - tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn singlet() -> PureState {
        PureState::new(vec![ZERO, c(-FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0), ZERO]).unwrap()
    }

    fn max_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn tensor_of_basis_states() {
        let s = PureState::from_bits(&[0]).unwrap().tensor(&PureState::from_bits(&[1]).unwrap());
        assert_eq!(s.amplitudes(), &[ZERO, ONE, ZERO, ZERO]);
        assert!(s.is_normalized());
    }

    #[test]
    fn tensor_of_identities() {
        let id = LinearOperator::identity(2).tensor(&LinearOperator::identity(2));
        assert_eq!(id.matrix(), &DMatrix::<C64>::identity(4, 4));
        assert!(id.is_unitary());
    }

    #[test]
    fn i_sigma_y_pair_maps_00_to_11() {
        let op = LinearOperator::i_pauli_y().tensor(&LinearOperator::i_pauli_y());
        let out = PureState::from_bits(&[0, 0]).unwrap().apply(&op).unwrap();
        // (−|1⟩) ⊗ (−|1⟩)
        assert_eq!(out.amplitudes(), &[ZERO, ZERO, ZERO, ONE]);
        assert_eq!(LinearOperator::i_pauli_y().matrix(), &(LinearOperator::pauli_y().matrix() * I));
    }

    #[test]
    fn single_qubit_apply_matches_full_operator() {
        let s = PureState::new(vec![c(0.1, 0.2), c(0.3, -0.1), c(-0.4, 0.5), c(0.2, 0.0), c(0.0, 0.3), c(0.1, 0.1), c(-0.2, 0.2), c(0.3, 0.1)]).unwrap();
        let full = LinearOperator::identity(2)
            .tensor(&LinearOperator::hadamard())
            .tensor(&LinearOperator::identity(2));
        let expected = s.apply(&full).unwrap();
        let mut got = s.clone();
        got.apply_single_qubit(2, &LinearOperator::hadamard()).unwrap();
        for (a, b) in got.amplitudes().iter().zip(expected.amplitudes()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn partial_trace_of_product() {
        let rho = PureState::from_bits(&[0, 0]).unwrap().density();
        let r = partial_trace(&rho, &[1]).unwrap();
        assert_eq!(r.matrix(), &DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO]));
    }

    #[test]
    fn partial_trace_of_singlet_is_maximally_mixed() {
        let r = partial_trace(&singlet().density(), &[2]).unwrap();
        assert!(max_diff(r.matrix(), DensityMatrix::maximally_mixed(1).unwrap().matrix()) < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_bad_keep_sets() {
        let rho = singlet().density();
        assert_eq!(partial_trace(&rho, &[]).unwrap_err(), Error::EmptyKeepSet);
        assert!(matches!(partial_trace(&rho, &[3]), Err(Error::QubitOutOfRange { qubit: 3, .. })));
        assert!(matches!(partial_trace(&rho, &[0]), Err(Error::QubitOutOfRange { .. })));
    }

    #[test]
    fn reduced_density_matches_partial_trace() {
        let amps: Vec<C64> = (0..8).map(|k| c((k as f64).sin(), (k as f64 * 0.7).cos())).collect();
        let s = PureState::new(amps).unwrap().renormalize().unwrap();
        for keep in [vec![1], vec![2], vec![3], vec![1, 3], vec![2, 3], vec![1, 2, 3]] {
            let a = s.reduced_density(&keep).unwrap();
            let b = partial_trace(&s.density(), &keep).unwrap();
            assert!(max_diff(a.matrix(), b.matrix()) < 1e-14, "keep {keep:?}");
        }
    }

    #[test]
    fn partial_transpose_of_product_stays_positive() {
        let a = DensityMatrix::new(DMatrix::from_row_slice(2, 2, &[c(0.7, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.3, 0.0)])).unwrap();
        let b = DensityMatrix::new(DMatrix::from_row_slice(2, 2, &[c(0.4, 0.0), c(0.0, -0.3), c(0.0, 0.3), c(0.6, 0.0)])).unwrap();
        let pt = partial_transpose(&a.tensor(&b), 2).unwrap();
        let expected = a.matrix().kronecker(&b.matrix().transpose());
        assert!(max_diff(pt.matrix(), &expected) < 1e-15);
        assert!(hermitian_eigenvalues(&pt).unwrap()[0] > -1e-12);
    }

    #[test]
    fn singlet_partial_transpose_has_negative_half() {
        let pt = partial_transpose(&singlet().density(), 2).unwrap();
        let ev = hermitian_eigenvalues(&pt).unwrap();
        assert!((ev[0] + 0.5).abs() < 1e-12);
        assert!((ev.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partial_transpose_rejects_bad_subsystem() {
        assert!(partial_transpose(&singlet().density(), 3).is_err());
    }

    #[test]
    fn eigenvalues_of_simple_operators() {
        let d = LinearOperator::hermitian(DMatrix::from_row_slice(2, 2, &[c(2.0 / 3.0, 0.0), ZERO, ZERO, c(1.0 / 3.0, 0.0)])).unwrap();
        let ev = hermitian_eigenvalues(&d).unwrap();
        assert!((ev[0] - 1.0 / 3.0).abs() < 1e-15 && (ev[1] - 2.0 / 3.0).abs() < 1e-15);
        let ev = hermitian_eigenvalues(&LinearOperator::pauli_x()).unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-15 && (ev[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eigenvalues_reject_non_hermitian() {
        assert!(matches!(hermitian_eigenvalues(&LinearOperator::i_pauli_y()), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn entropy_reference_values() {
        assert!(von_neumann_entropy(&singlet().density()).abs() < 1e-12);
        assert!((von_neumann_entropy(&DensityMatrix::maximally_mixed(1).unwrap()) - 1.0).abs() < 1e-15);
        let r = DensityMatrix::diagonal(&[2.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert!((von_neumann_entropy(&r) - 0.918_295_834_054_489_6).abs() < 1e-12);
    }

    #[test]
    fn global_phase_comparison() {
        let zero = PureState::from_bits(&[0]).unwrap();
        let phased = zero.scale(C64::from_polar(1.0, PI / 7.0)).unwrap();
        assert!(equal_up_to_global_phase(&zero, &phased, 1e-12).unwrap());
        assert!(!equal_up_to_global_phase(&zero, &PureState::from_bits(&[1]).unwrap(), 1e-12).unwrap());
        assert!(matches!(
            equal_up_to_global_phase(&zero, &singlet(), 1e-12),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn density_matrix_validation() {
        assert!(matches!(
            DensityMatrix::new(DMatrix::from_row_slice(2, 2, &[ONE, ONE, ZERO, ZERO])),
            Err(Error::NotHermitian { .. })
        ));
        assert!(matches!(DensityMatrix::diagonal(&[0.5, 0.6]), Err(Error::BadTrace { .. })));
        assert!(matches!(DensityMatrix::diagonal(&[1.5, -0.5]), Err(Error::NotPositive { .. })));
    }

    #[test]
    fn unitary_flag_is_checked() {
        assert!(LinearOperator::unitary(DMatrix::from_row_slice(2, 2, &[ONE, ONE, ZERO, ONE])).is_err());
        assert!(LinearOperator::cnot().is_unitary());
    }

    #[test]
    fn projection_probabilities_complete() {
        let s = singlet();
        let (p0, r0) = s.project_qubit(1, [ONE, ZERO]).unwrap();
        let (p1, r1) = s.project_qubit(1, [ZERO, ONE]).unwrap();
        assert!((p0 + p1 - 1.0).abs() < 1e-15);
        assert_eq!(r0.num_qubits(), 1);
        assert!(r1.is_normalized());
        let prod = PureState::from_bits(&[0, 1]).unwrap();
        assert!(matches!(prod.project_qubit(1, [ZERO, ONE]), Err(Error::ImpossibleOutcome { .. })));
    }
}
