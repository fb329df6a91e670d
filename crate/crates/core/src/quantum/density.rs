use alloc::vec::Vec;
use alloc::format;

use nalgebra::SymmetricEigen;

use super::{
    bit_mask, hermiticity_residual, qubits_for_dim, unitarity_residual, CMatrix, Observable,
    StateVector, C64, HERMITICITY_TOL, REAL_TOL, UNITARITY_TOL,
};
use crate::{Error, Result};

const TRACE_TOL: f64 = 1e-12;
const PSD_TOL: f64 = -1e-9;

/// A density operator: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: CMatrix,
}

/// Deviations of a matrix from a physical density operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalityReport {
    pub trace_error: f64,
    pub hermiticity_residual: f64,
    pub min_eigenvalue: f64,
}

impl DensityMatrix {
    /// Validates `matrix` against all density-operator invariants.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let n_qubits = qubits_for_dim(matrix.nrows())
            .filter(|_| matrix.is_square())
            .ok_or_else(|| Error::InvalidDensity("matrix must be 2^n × 2^n".into()))?;
        let rho = DensityMatrix { n_qubits, matrix };
        let report = rho.physicality();
        if report.hermiticity_residual > HERMITICITY_TOL {
            return Err(Error::InvalidDensity(format!(
                "hermiticity residual {:e}",
                report.hermiticity_residual
            )));
        }
        if report.trace_error > TRACE_TOL {
            return Err(Error::InvalidDensity(format!("trace error {:e}", report.trace_error)));
        }
        if report.min_eigenvalue < PSD_TOL {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {:e}",
                report.min_eigenvalue
            )));
        }
        Ok(rho)
    }

    pub(crate) fn from_matrix_unchecked(n_qubits: usize, matrix: CMatrix) -> Self {
        DensityMatrix { n_qubits, matrix }
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn from_pure(psi: &StateVector) -> Self {
        let a = psi.amplitudes();
        DensityMatrix { n_qubits: psi.n_qubits(), matrix: a * a.adjoint() }
    }

    /// `I / 2^n`.
    pub fn maximally_mixed(n: usize) -> Result<Self> {
        super::check_qubit_count(n, super::DEFAULT_MAX_QUBITS)?;
        let dim = 1 << n;
        let matrix = CMatrix::identity(dim, dim) * C64::new(1.0 / dim as f64, 0.0);
        Ok(DensityMatrix { n_qubits: n, matrix })
    }

    /// Single-qubit `(I + (2x − 1)Z) / 2`, i.e. `diag(x, 1 − x)`.
    pub fn z_biased_qubit(x: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::InputOutOfRange { value: x });
        }
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = C64::new(x, 0.0);
        m[(1, 1)] = C64::new(1.0 - x, 0.0);
        Ok(DensityMatrix { n_qubits: 1, matrix: m })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Ascending eigenvalues of the Hermitian part.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(herm);
        let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Trace error and hermiticity residual only; skips the eigensolve.
    pub fn cheap_physicality(&self) -> (f64, f64) {
        let tr = self.trace();
        ((tr - C64::new(1.0, 0.0)).norm(), hermiticity_residual(&self.matrix))
    }

    pub fn physicality(&self) -> PhysicalityReport {
        let (trace_error, hermiticity_residual) = self.cheap_physicality();
        PhysicalityReport { trace_error, hermiticity_residual, min_eigenvalue: self.min_eigenvalue() }
    }

    /// `Tr[Aρ]`, rejecting an imaginary residue above 1e-10.
    pub fn expectation(&self, obs: &Observable) -> Result<f64> {
        let a = obs.matrix();
        if a.nrows() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: a.nrows() });
        }
        // Tr[Aρ] = Σ_ij A_ij ρ_ji
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                acc += a[(i, j)] * self.matrix[(j, i)];
            }
        }
        if acc.im.abs() > REAL_TOL {
            return Err(Error::NotReal { residue: acc.im });
        }
        Ok(acc.re)
    }

    /// `Tr[Z_q ρ]` for every qubit, from the diagonal.
    pub fn z_expectations(&self) -> Vec<f64> {
        let n = self.n_qubits;
        let mut z = alloc::vec![0.0; n];
        for i in 0..self.dim() {
            let p = self.matrix[(i, i)].re;
            for (q, zq) in z.iter_mut().enumerate() {
                if i & bit_mask(n, q) == 0 {
                    *zq += p;
                } else {
                    *zq -= p;
                }
            }
        }
        z
    }

    /// `UρU†` for a dense unitary on the whole register.
    pub fn evolve(&self, u: &CMatrix) -> Result<DensityMatrix> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: u.nrows() });
        }
        let residual = unitarity_residual(u);
        if residual > UNITARITY_TOL {
            return Err(Error::NotUnitary { residual });
        }
        Ok(DensityMatrix { n_qubits: self.n_qubits, matrix: u * &self.matrix * u.adjoint() })
    }

    /// Reduced state on `keep`; kept qubits are ordered by ascending index.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let keep = sorted_qubits(keep, self.n_qubits)?;
        if keep.is_empty() {
            return Err(Error::invalid("partial trace needs a nonempty keep set"));
        }
        let matrix = partial_trace_operator(&self.matrix, self.n_qubits, &keep);
        Ok(DensityMatrix { n_qubits: keep.len(), matrix })
    }

    /// `self ⊗ other`.
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            n_qubits: self.n_qubits + other.n_qubits,
            matrix: self.matrix.kronecker(&other.matrix),
        }
    }
}

pub(crate) fn sorted_qubits(qubits: &[usize], n: usize) -> Result<Vec<usize>> {
    let mut v: Vec<usize> = qubits.to_vec();
    v.sort_unstable();
    for w in v.windows(2) {
        if w[0] == w[1] {
            return Err(Error::invalid("duplicate qubit index"));
        }
    }
    if let Some(&q) = v.iter().find(|&&q| q >= n) {
        return Err(Error::QubitOutOfRange { index: q, n });
    }
    Ok(v)
}

/// Extracts the bits of `index` at the given qubit positions into a compact index.
fn gather_bits(index: usize, n: usize, qubits: &[usize]) -> usize {
    let k = qubits.len();
    qubits.iter().enumerate().fold(0, |acc, (j, &q)| {
        if index & bit_mask(n, q) != 0 {
            acc | (1 << (k - 1 - j))
        } else {
            acc
        }
    })
}

/// Partial trace of an arbitrary operator; `keep` must be sorted and valid.
pub(crate) fn partial_trace_operator(op: &CMatrix, n: usize, keep: &[usize]) -> CMatrix {
    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let out_dim = 1 << keep.len();
    let mut out = CMatrix::zeros(out_dim, out_dim);
    let dim = 1 << n;
    let traced_mask: usize = traced.iter().map(|&q| bit_mask(n, q)).sum();
    for i in 0..dim {
        let ki = gather_bits(i, n, keep);
        for j in 0..dim {
            if i & traced_mask == j & traced_mask {
                let kj = gather_bits(j, n, keep);
                out[(ki, kj)] += op[(i, j)];
            }
        }
    }
    out
}

/// Inserts a single-qubit operator at `position` into an (n−1)-qubit operator.
pub(crate) fn insert_qubit_operator(rest: &CMatrix, single: &CMatrix, position: usize) -> CMatrix {
    let n = qubits_for_dim(rest.nrows()).map_or(1, |k| k + 1);
    let dim = 1 << n;
    let mask = bit_mask(n, position);
    // index without the inserted bit
    let squeeze = |i: usize| {
        let high = (i >> (n - position)) << (n - position - 1);
        let low = i & (mask - 1);
        high | low
    };
    CMatrix::from_fn(dim, dim, |i, j| {
        let bi = usize::from(i & mask != 0);
        let bj = usize::from(j & mask != 0);
        single[(bi, bj)] * rest[(squeeze(i), squeeze(j))]
    })
}

/// Replaces `qubit` of an operator by `single`: `Tr_q[op]` with `single` tensored back in place.
pub(crate) fn replace_qubit_operator(op: &CMatrix, n: usize, qubit: usize, single: &CMatrix) -> CMatrix {
    if n == 1 {
        return single * op.trace();
    }
    let keep: Vec<usize> = (0..n).filter(|&q| q != qubit).collect();
    let rest = partial_trace_operator(op, n, &keep);
    insert_qubit_operator(&rest, single, qubit)
}
