//! Exact dense simulation of few-qubit systems.
//!
//! Qubit 0 is the leftmost tensor factor and the most significant bit of a
//! computational-basis index, so for `n` qubits the bit of qubit `q` sits at
//! position `n - 1 - q`. Every routine in this module follows that ordering.

mod channel;
mod density;
mod gates;
mod observable;
mod pauli;
mod state;

pub use channel::{KrausChannel, Superoperator, UnitaryConjugation};
pub use density::{DensityMatrix, PhysicalityReport};
pub(crate) use density::replace_qubit_operator;
pub use gates::{cnot, cz, hermiticity_residual, pauli_matrix, rotation_gate, unitarity_residual, Axis};
pub use observable::{evolve_unitary, ising_hamiltonian, Observable};
pub use pauli::{pauli_expectation_vector, transfer_matrix, PauliLetter, PauliStateVector, PauliString};
pub use state::{ket_zero, ket_zero_with_limit, StateVector};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Default ceiling on the number of simulated qubits.
pub const DEFAULT_MAX_QUBITS: usize = 12;

/// Gates whose `‖U†U − I‖` exceeds this are rejected.
pub const UNITARITY_TOL: f64 = 1e-10;

/// Elementwise hermiticity tolerance for observables and density matrices.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Tolerance on the imaginary part of an expectation value.
pub const REAL_TOL: f64 = 1e-10;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

pub(crate) fn check_qubit_count(n: usize, max: usize) -> crate::Result<()> {
    if n == 0 || n > max {
        return Err(crate::Error::InvalidSize { n, max });
    }
    Ok(())
}

#[inline]
pub(crate) fn bit_mask(n_qubits: usize, qubit: usize) -> usize {
    1 << (n_qubits - 1 - qubit)
}

/// Qubit count for a power-of-two dimension.
pub(crate) fn qubits_for_dim(dim: usize) -> Option<usize> {
    if dim >= 2 && dim.is_power_of_two() {
        Some(dim.trailing_zeros() as usize)
    } else {
        None
    }
}

pub(crate) fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
