use nalgebra::{DMatrix, SymmetricEigen};

use super::{
    bit_mask, check_qubit_count, hermiticity_residual, qubits_for_dim, CMatrix, PauliString, C64,
    DEFAULT_MAX_QUBITS, HERMITICITY_TOL,
};
use crate::{Error, Result};

/// A Hermitian operator on `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    n_qubits: usize,
    matrix: CMatrix,
}

impl Observable {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let n_qubits = qubits_for_dim(matrix.nrows())
            .filter(|_| matrix.is_square())
            .ok_or_else(|| Error::invalid("observable must be 2^n × 2^n"))?;
        let residual = hermiticity_residual(&matrix);
        if residual > HERMITICITY_TOL {
            return Err(Error::NotHermitian { residual });
        }
        Ok(Observable { n_qubits, matrix })
    }

    /// `Z` acting on `qubit` of an `n`-qubit register.
    pub fn pauli_z(n: usize, qubit: usize) -> Result<Self> {
        check_qubit_count(n, DEFAULT_MAX_QUBITS)?;
        if qubit >= n {
            return Err(Error::QubitOutOfRange { index: qubit, n });
        }
        let dim = 1 << n;
        let mask = bit_mask(n, qubit);
        let matrix = CMatrix::from_fn(dim, dim, |i, j| {
            if i != j {
                C64::new(0.0, 0.0)
            } else if i & mask == 0 {
                C64::new(1.0, 0.0)
            } else {
                C64::new(-1.0, 0.0)
            }
        });
        Ok(Observable { n_qubits: n, matrix })
    }

    pub fn from_pauli(p: &PauliString) -> Self {
        Observable { n_qubits: p.n_qubits(), matrix: p.to_matrix() }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> alloc::vec::Vec<f64> {
        let eig = SymmetricEigen::new(self.matrix.clone());
        let mut v: alloc::vec::Vec<f64> = eig.eigenvalues.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// `(λ_min, λ_max)`.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        let v = self.eigenvalues();
        (v[0], v[v.len() - 1])
    }

    /// Real part of the matrix, when the imaginary part vanishes exactly.
    pub(crate) fn real_matrix(&self) -> Option<DMatrix<f64>> {
        if self.matrix.iter().any(|c| c.im != 0.0) {
            return None;
        }
        Some(self.matrix.map(|c| c.re))
    }
}

/// Fully connected transverse-field Ising Hamiltonian
/// `H = Σ_{i<j} J_ij X_i X_j + h Σ_i Z_i`.
///
/// `couplings` must be symmetric with zero diagonal; each unordered pair
/// contributes once.
pub fn ising_hamiltonian(n: usize, couplings: &DMatrix<f64>, field: f64) -> Result<Observable> {
    check_qubit_count(n, DEFAULT_MAX_QUBITS)?;
    if couplings.nrows() != n || couplings.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: couplings.nrows() });
    }
    for i in 0..n {
        if couplings[(i, i)] != 0.0 {
            return Err(Error::invalid("coupling matrix must have zero diagonal"));
        }
        for j in 0..i {
            if couplings[(i, j)] != couplings[(j, i)] {
                return Err(Error::invalid("coupling matrix must be symmetric"));
            }
        }
    }
    if !field.is_finite() || couplings.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite("ising parameters".into()));
    }
    let dim = 1usize << n;
    let mut h = CMatrix::zeros(dim, dim);
    for b in 0..dim {
        // h Σ Z_i is diagonal
        let diag: f64 = (0..n)
            .map(|q| if b & bit_mask(n, q) == 0 { field } else { -field })
            .sum();
        h[(b, b)] += C64::new(diag, 0.0);
        // X_i X_j flips both bits
        for i in 0..n {
            for j in (i + 1)..n {
                let jij = couplings[(i, j)];
                if jij != 0.0 {
                    let c = b ^ bit_mask(n, i) ^ bit_mask(n, j);
                    h[(c, b)] += C64::new(jij, 0.0);
                }
            }
        }
    }
    Ok(Observable { n_qubits: n, matrix: h })
}

/// `exp(−iHt)` via the Hermitian eigendecomposition `H = QΛQ†`.
pub fn evolve_unitary(h: &Observable, t: f64) -> Result<CMatrix> {
    if !t.is_finite() {
        return Err(Error::NonFinite("evolution time".into()));
    }
    let residual = hermiticity_residual(h.matrix());
    if residual > HERMITICITY_TOL {
        return Err(Error::NotHermitian { residual });
    }
    let eig = SymmetricEigen::new(h.matrix().clone());
    let q = &eig.eigenvectors;
    let dim = q.nrows();
    let mut scaled = q.clone();
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        let (s, c) = libm::sincos(-lambda * t);
        let phase = C64::new(c, s);
        for r in 0..dim {
            scaled[(r, k)] *= phase;
        }
    }
    Ok(scaled * q.adjoint())
}
