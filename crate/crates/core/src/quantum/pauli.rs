//! Pauli strings and the real Pauli-coefficient representation of operators.
//!
//! Strings are enumerated lexicographically over `{I, X, Y, Z}` with qubit 0
//! as the most significant letter, so for one qubit the order is `I, X, Y, Z`
//! and for two qubits `II, IX, IY, IZ, XI, ...`.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::{bit_mask, CMatrix, DensityMatrix, Superoperator, C64, I, ONE, ZERO};
use crate::{Error, Result};

/// Largest register for which the 4^n coefficient vector is computed.
pub const MAX_PAULI_VECTOR_QUBITS: usize = 6;
/// Largest register for which the 4^n × 4^n transfer matrix is built.
pub const MAX_TRANSFER_QUBITS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PauliLetter {
    I = 0,
    X = 1,
    Y = 2,
    Z = 3,
}

impl PauliLetter {
    pub const ALL: [PauliLetter; 4] = [PauliLetter::I, PauliLetter::X, PauliLetter::Y, PauliLetter::Z];

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(PauliLetter::I),
            'X' => Some(PauliLetter::X),
            'Y' => Some(PauliLetter::Y),
            'Z' => Some(PauliLetter::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            PauliLetter::I => 'I',
            PauliLetter::X => 'X',
            PauliLetter::Y => 'Y',
            PauliLetter::Z => 'Z',
        }
    }

    fn flips(self) -> bool {
        matches!(self, PauliLetter::X | PauliLetter::Y)
    }
}

/// A tensor product of single-qubit Paulis, letter `k` acting on qubit `k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    letters: Vec<PauliLetter>,
}

impl PauliString {
    pub fn new(letters: Vec<PauliLetter>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::Empty("pauli string"));
        }
        Ok(PauliString { letters })
    }

    pub fn identity(n: usize) -> Self {
        PauliString { letters: alloc::vec![PauliLetter::I; n] }
    }

    /// `letter` on `qubit`, identity elsewhere.
    pub fn single(n: usize, qubit: usize, letter: PauliLetter) -> Result<Self> {
        if qubit >= n {
            return Err(Error::QubitOutOfRange { index: qubit, n });
        }
        let mut p = Self::identity(n);
        p.letters[qubit] = letter;
        Ok(p)
    }

    /// Parses strings such as `"XIZ"`.
    pub fn parse(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| PauliLetter::from_char(c).ok_or_else(|| Error::invalid("pauli letters must be I, X, Y or Z")))
            .collect::<Result<Vec<_>>>()?;
        Self::new(letters)
    }

    /// The `index`-th string in lexicographic order.
    pub fn from_index(n: usize, mut index: usize) -> Self {
        let mut letters = alloc::vec![PauliLetter::I; n];
        for slot in letters.iter_mut().rev() {
            *slot = PauliLetter::ALL[index % 4];
            index /= 4;
        }
        PauliString { letters }
    }

    pub fn index(&self) -> usize {
        self.letters.iter().fold(0, |acc, &l| acc * 4 + l as usize)
    }

    pub fn n_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[PauliLetter] {
        &self.letters
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&l| l == PauliLetter::I)
    }

    /// Bits flipped by the string (X or Y positions).
    pub(crate) fn flip_mask(&self) -> usize {
        let n = self.n_qubits();
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, l)| l.flips())
            .map(|(q, _)| bit_mask(n, q))
            .sum()
    }

    /// Phase `φ(b)` with `P|b⟩ = φ(b)|b ⊕ m⟩`.
    pub(crate) fn phase(&self, basis: usize) -> C64 {
        let n = self.n_qubits();
        let mut phase = ONE;
        for (q, l) in self.letters.iter().enumerate() {
            let bit = basis & bit_mask(n, q) != 0;
            match l {
                PauliLetter::I | PauliLetter::X => {}
                // Y|0⟩ = i|1⟩, Y|1⟩ = −i|0⟩
                PauliLetter::Y => phase *= if bit { -I } else { I },
                PauliLetter::Z => {
                    if bit {
                        phase = -phase;
                    }
                }
            }
        }
        phase
    }

    /// Dense 2^n × 2^n matrix.
    pub fn to_matrix(&self) -> CMatrix {
        let dim = 1 << self.n_qubits();
        let m = self.flip_mask();
        let mut out = CMatrix::zeros(dim, dim);
        for c in 0..dim {
            out[(c ^ m, c)] = self.phase(c);
        }
        out
    }

    /// `P|ψ⟩` on a raw amplitude slice.
    pub(crate) fn apply_to(&self, amps: &[C64], out: &mut [C64]) {
        let m = self.flip_mask();
        for (b, a) in amps.iter().enumerate() {
            out[b ^ m] = self.phase(b) * a;
        }
    }

    /// `Tr[P A]` for a dense operator, in O(2^n).
    pub(crate) fn trace_with(&self, a: &CMatrix) -> C64 {
        // Tr[PA] = Σ_c ⟨c|PA|c⟩ = Σ_c Σ_b P_{c,b} A_{b,c}, and P_{b⊕m, b} = φ(b)
        let m = self.flip_mask();
        let mut acc = ZERO;
        for b in 0..a.nrows() {
            acc += self.phase(b) * a[(b, b ^ m)];
        }
        acc
    }
}

impl core::fmt::Display for PauliString {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        for l in &self.letters {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

/// Real coefficients `r_i = Tr[P(i)ρ] / 2^n` of a density operator.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliStateVector {
    n_qubits: usize,
    coeffs: DVector<f64>,
}

impl PauliStateVector {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn coeffs(&self) -> &DVector<f64> {
        &self.coeffs
    }

    /// Wraps raw coefficients without checking the identity entry.
    pub fn from_coeffs(n_qubits: usize, coeffs: DVector<f64>) -> Result<Self> {
        if coeffs.len() != 1 << (2 * n_qubits) {
            return Err(Error::DimensionMismatch { expected: 1 << (2 * n_qubits), found: coeffs.len() });
        }
        Ok(PauliStateVector { n_qubits, coeffs })
    }

    /// `Σ_i r_i P(i)`.
    pub fn to_operator(&self) -> CMatrix {
        let n = self.n_qubits;
        let dim = 1 << n;
        let mut out = CMatrix::zeros(dim, dim);
        for (idx, &r) in self.coeffs.iter().enumerate() {
            if r == 0.0 {
                continue;
            }
            let p = PauliString::from_index(n, idx);
            let m = p.flip_mask();
            for c in 0..dim {
                out[(c ^ m, c)] += p.phase(c) * r;
            }
        }
        out
    }

    /// `⟨Z_q⟩ = 2^n r_{Z_q}`.
    pub fn z_expectation(&self, qubit: usize) -> f64 {
        let idx = PauliString::single(self.n_qubits, qubit, PauliLetter::Z)
            .map(|p| p.index())
            .unwrap_or(0);
        self.coeffs[idx] * (1u64 << self.n_qubits) as f64
    }
}

fn operator_coefficients(op: &CMatrix, n: usize) -> DVector<f64> {
    let scale = 1.0 / (1u64 << n) as f64;
    DVector::from_fn(1 << (2 * n), |i, _| PauliString::from_index(n, i).trace_with(op).re * scale)
}

/// Pauli coefficients of `rho`, identity entry pinned to exactly `1/2^n`.
pub fn pauli_expectation_vector(rho: &DensityMatrix) -> Result<PauliStateVector> {
    let n = rho.n_qubits();
    if n > MAX_PAULI_VECTOR_QUBITS {
        return Err(Error::InvalidSize { n, max: MAX_PAULI_VECTOR_QUBITS });
    }
    let mut coeffs = operator_coefficients(rho.matrix(), n);
    coeffs[0] = 1.0 / (1u64 << n) as f64;
    Ok(PauliStateVector { n_qubits: n, coeffs })
}

/// `K_ij = Tr[P(i) 𝒦(P(j))] / 2^n`, the real matrix of `channel` on Pauli coefficients.
pub fn transfer_matrix<S: Superoperator + ?Sized>(channel: &S, n: usize) -> Result<DMatrix<f64>> {
    if n == 0 || n > MAX_TRANSFER_QUBITS {
        return Err(Error::InvalidSize { n, max: MAX_TRANSFER_QUBITS });
    }
    let size = 1 << (2 * n);
    let mut k = DMatrix::zeros(size, size);
    for j in 0..size {
        let image = channel.apply_operator(&PauliString::from_index(n, j).to_matrix());
        k.set_column(j, &operator_coefficients(&image, n));
    }
    Ok(k)
}
