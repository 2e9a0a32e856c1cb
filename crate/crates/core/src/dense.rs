//! Dense complex state vectors and small Hermitian eigenproblems.
//!
//! This is the numeric back end used to cross-check the symplectic stabilizer
//! arithmetic: expectations are computed by applying Pauli terms to state
//! vectors directly, and spectra come from a dense Hermitian eigensolver.
//! Basis index bit k-1 corresponds to qubit k.

use nalgebra::linalg::SymmetricEigen;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::pauli::{PauliString, PauliSum};

/// Qubit cap for state-vector work (2^14 amplitudes).
pub const MAX_STATE_QUBITS: usize = 14;
/// Qubit cap for dense matrices and eigendecompositions (1024 x 1024).
pub const MAX_MATRIX_QUBITS: usize = 10;

const NORM_TOLERANCE: f64 = 1e-12;
const IMAG_RESIDUE_TOLERANCE: f64 = 1e-10;
const EIGENVALUE_CLUSTER_TOLERANCE: f64 = 1e-8;
const PSD_TOLERANCE: f64 = -1e-9;

/// Normalized pure state on n qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<StateVector> {
        check_state_size(n)?;
        if amps.len() != 1 << n {
            return Err(Error::DimensionMismatch(amps.len(), 1 << n));
        }
        let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Construction(format!(
                "state norm {} is not 1 within {NORM_TOLERANCE:e}",
                norm_sq.sqrt()
            )));
        }
        Ok(StateVector { n, amps })
    }

    /// Computational basis state |index>.
    pub fn basis(n: usize, index: usize) -> Result<StateVector> {
        check_state_size(n)?;
        if index >= 1 << n {
            return Err(Error::DimensionMismatch(index, 1 << n));
        }
        let mut amps = vec![Complex64::ZERO; 1 << n];
        amps[index] = Complex64::ONE;
        Ok(StateVector { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// Applies a Pauli string: i^s X^x Z^z |b> = i^s (-1)^(b.z) |b xor x>.
    pub fn apply(&self, p: &PauliString) -> Result<StateVector> {
        if p.n() != self.n {
            return Err(Error::DimensionMismatch(p.n(), self.n));
        }
        let phase = phase_factor(p.phase());
        let x = p.x_mask() as usize;
        let z = p.z_mask();
        let mut out = vec![Complex64::ZERO; self.amps.len()];
        for (b, amp) in self.amps.iter().enumerate() {
            let sign = if (b as u64 & z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            out[b ^ x] = phase * sign * amp;
        }
        Ok(StateVector { n: self.n, amps: out })
    }

    pub fn inner_product(&self, other: &StateVector) -> Result<Complex64> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch(other.n, self.n));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner_product(other)?.norm_sqr())
    }
}

fn check_state_size(n: usize) -> Result<()> {
    if n == 0 || n > MAX_STATE_QUBITS {
        return Err(Error::ResourceCap(n, MAX_STATE_QUBITS));
    }
    Ok(())
}

fn check_matrix_size(n: usize) -> Result<()> {
    if n == 0 || n > MAX_MATRIX_QUBITS {
        return Err(Error::ResourceCap(n, MAX_MATRIX_QUBITS));
    }
    Ok(())
}

fn phase_factor(exponent: u8) -> Complex64 {
    match exponent % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// The graph state of g: CZ over every edge applied to the uniform plus
/// state. Amplitudes are (+/-) 2^(-n/2) with sign (-1)^(edges inside b); the
/// all-zeros amplitude is positive real.
pub fn graph_state_vector(g: &Graph) -> Result<StateVector> {
    let n = g.n();
    check_state_size(n)?;
    let scale = 1.0 / ((1u64 << n) as f64).sqrt();
    let edges = g.edges();
    let mut amps = Vec::with_capacity(1 << n);
    for b in 0..(1u64 << n) {
        let mut inside = 0u32;
        for &(a, c) in &edges {
            if b >> (a - 1) & 1 == 1 && b >> (c - 1) & 1 == 1 {
                inside += 1;
            }
        }
        let sign = if inside % 2 == 0 { 1.0 } else { -1.0 };
        amps.push(Complex64::new(sign * scale, 0.0));
    }
    StateVector::from_amplitudes(n, amps)
}

/// <state| sum |state>, accumulated term by term without materializing any
/// matrix. Fails if the imaginary residue exceeds 1e-10.
pub fn expectation(state: &StateVector, sum: &PauliSum) -> Result<f64> {
    if sum.n() != state.n() {
        return Err(Error::DimensionMismatch(sum.n(), state.n()));
    }
    let mut total = Complex64::ZERO;
    for (coeff, p) in sum.terms() {
        let applied = state.apply(p)?;
        total += coeff * state.inner_product(&applied)?;
    }
    if total.im.abs() > IMAG_RESIDUE_TOLERANCE {
        return Err(Error::Construction(format!(
            "expectation has imaginary residue {:e}",
            total.im
        )));
    }
    Ok(total.re)
}

/// Dense matrix of a Pauli sum, for n up to MAX_MATRIX_QUBITS.
pub fn matrix(sum: &PauliSum) -> Result<DMatrix<Complex64>> {
    let n = sum.n();
    check_matrix_size(n)?;
    let dim = 1usize << n;
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for (coeff, p) in sum.terms() {
        let phase = phase_factor(p.phase()) * *coeff;
        let x = p.x_mask() as usize;
        let z = p.z_mask();
        for b in 0..dim {
            let sign = if (b as u64 & z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            m[(b ^ x, b)] += phase * sign;
        }
    }
    Ok(m)
}

/// Extremal eigenvalues of a Hermitian Pauli sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumSummary {
    pub max_eigenvalue: f64,
    /// Count of eigenvalues within 1e-8 of the maximum.
    pub multiplicity: usize,
    pub min_eigenvalue: f64,
}

pub fn spectrum(sum: &PauliSum) -> Result<SpectrumSummary> {
    let eigen = SymmetricEigen::new(matrix(sum)?);
    Ok(summarize(eigen.eigenvalues.as_slice()))
}

fn summarize(eigenvalues: &[f64]) -> SpectrumSummary {
    let max = eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let multiplicity = eigenvalues
        .iter()
        .filter(|&&v| max - v <= EIGENVALUE_CLUSTER_TOLERANCE)
        .count();
    SpectrumSummary { max_eigenvalue: max, multiplicity, min_eigenvalue: min }
}

/// The largest eigenvalue and a unit eigenvector for it.
pub fn principal_eigenvector(sum: &PauliSum) -> Result<(f64, StateVector)> {
    let eigen = SymmetricEigen::new(matrix(sum)?);
    let mut best = 0;
    for (idx, &value) in eigen.eigenvalues.iter().enumerate() {
        if value > eigen.eigenvalues[best] {
            best = idx;
        }
    }
    let column: Vec<Complex64> = eigen.eigenvectors.column(best).iter().cloned().collect();
    let norm: f64 = column.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let amps = column.iter().map(|a| a / norm).collect();
    Ok((
        eigen.eigenvalues[best],
        StateVector::from_amplitudes(sum.n(), amps)?,
    ))
}

/// Result of testing scale * |state><state| - sum for positive
/// semidefiniteness.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsdReport {
    pub min_eigenvalue: f64,
    pub is_psd: bool,
}

pub fn psd_check(sum: &PauliSum, scale: f64, state: &StateVector) -> Result<PsdReport> {
    if state.n() != sum.n() {
        return Err(Error::DimensionMismatch(state.n(), sum.n()));
    }
    check_matrix_size(sum.n())?;
    let mut m = matrix(sum)?.scale(-1.0);
    let dim = 1usize << sum.n();
    for row in 0..dim {
        for col in 0..dim {
            m[(row, col)] += scale * state.amps[row] * state.amps[col].conj();
        }
    }
    let eigen = SymmetricEigen::new(m);
    let min = eigen.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(PsdReport { min_eigenvalue: min, is_psd: min >= PSD_TOLERANCE })
}

/// Fidelity lower bound from the summed witness expectation on four qubits.
pub fn fidelity_bound(expectation_sum: f64) -> f64 {
    expectation_sum / 16.0
}
