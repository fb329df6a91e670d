use super::{max_abs_diff, CMatrix, C64, I, ONE, ZERO};
use crate::{Error, Result};

/// Single-qubit Pauli axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// The 2×2 Pauli matrix for `axis`.
pub fn pauli_matrix(axis: Axis) -> CMatrix {
    match axis {
        Axis::X => CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        Axis::Y => CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        Axis::Z => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    }
}

/// `exp(-i·angle·G)` for the Pauli generator `G` of `axis`.
///
/// Note the convention: there is no factor 1/2 in the exponent, so
/// `rotation_gate(Axis::Y, acos(√x))` maps |0⟩ to `√x|0⟩ + √(1−x)|1⟩`.
pub fn rotation_gate(axis: Axis, angle: f64) -> Result<CMatrix> {
    if !angle.is_finite() {
        return Err(Error::invalid("rotation angle must be finite"));
    }
    let (s, c) = libm::sincos(angle);
    // exp(-iθG) = cos θ · I − i sin θ · G, since G² = I
    let m = match axis {
        Axis::X => [C64::new(c, 0.0), C64::new(0.0, -s), C64::new(0.0, -s), C64::new(c, 0.0)],
        Axis::Y => [C64::new(c, 0.0), C64::new(-s, 0.0), C64::new(s, 0.0), C64::new(c, 0.0)],
        Axis::Z => [C64::new(c, -s), ZERO, ZERO, C64::new(c, s)],
    };
    Ok(CMatrix::from_row_slice(2, 2, &m))
}

/// Controlled-NOT, `|0⟩⟨0| ⊗ I + |1⟩⟨1| ⊗ X`; the first target is the control.
pub fn cnot() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = ONE;
    m[(1, 1)] = ONE;
    m[(2, 3)] = ONE;
    m[(3, 2)] = ONE;
    m
}

/// Controlled-Z, `diag(1, 1, 1, −1)`.
pub fn cz() -> CMatrix {
    let mut m = CMatrix::identity(4, 4);
    m[(3, 3)] = -ONE;
    m
}

/// Max-abs entry of `U†U − I`.
pub fn unitarity_residual(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let prod = u.adjoint() * u;
    max_abs_diff(&prod, &CMatrix::identity(u.nrows(), u.ncols()))
}

/// Max-abs entry of `A − A†`.
pub fn hermiticity_residual(a: &CMatrix) -> f64 {
    if !a.is_square() {
        return f64::INFINITY;
    }
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}
