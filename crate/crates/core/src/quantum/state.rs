use alloc::vec::Vec;

use super::{
    bit_mask, check_qubit_count, qubits_for_dim, unitarity_residual, CMatrix, CVector, Observable,
    C64, DEFAULT_MAX_QUBITS, REAL_TOL, UNITARITY_TOL, ZERO,
};
use crate::{Error, Result};

const NORM_TOL: f64 = 1e-12;

/// A normalized pure state of `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: CVector,
}

/// `|0⟩^⊗n`, with the default qubit ceiling.
pub fn ket_zero(n: usize) -> Result<StateVector> {
    ket_zero_with_limit(n, DEFAULT_MAX_QUBITS)
}

/// `|0⟩^⊗n` with an explicit qubit ceiling.
pub fn ket_zero_with_limit(n: usize, max_qubits: usize) -> Result<StateVector> {
    check_qubit_count(n, max_qubits)?;
    let mut amplitudes = CVector::zeros(1 << n);
    amplitudes[0] = C64::new(1.0, 0.0);
    Ok(StateVector { n_qubits: n, amplitudes })
}

impl StateVector {
    /// Wraps `amplitudes`, checking length and normalization.
    pub fn from_amplitudes(amplitudes: CVector) -> Result<Self> {
        let n_qubits = qubits_for_dim(amplitudes.len())
            .ok_or_else(|| Error::invalid("amplitude count must be 2^n with n ≥ 1"))?;
        let norm_sqr = amplitudes.norm_squared();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(StateVector { n_qubits, amplitudes })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut CVector {
        &mut self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    /// Applies `gate` (2^k × 2^k) to the qubits `targets`, returning the new state.
    ///
    /// The first entry of `targets` is the most significant qubit of the
    /// gate's own basis, so `cnot()` on `[c, t]` uses `c` as control.
    pub fn apply_gate(&self, gate: &CMatrix, targets: &[usize]) -> Result<StateVector> {
        let mut out = self.clone();
        out.apply_gate_mut(gate, targets)?;
        Ok(out)
    }

    /// In-place variant of [`StateVector::apply_gate`].
    pub fn apply_gate_mut(&mut self, gate: &CMatrix, targets: &[usize]) -> Result<()> {
        self.check_targets(targets)?;
        let k = targets.len();
        if gate.nrows() != 1 << k || gate.ncols() != 1 << k {
            return Err(Error::DimensionMismatch { expected: 1 << k, found: gate.nrows() });
        }
        let residual = unitarity_residual(gate);
        if residual > UNITARITY_TOL {
            return Err(Error::NotUnitary { residual });
        }
        self.apply_unchecked(gate, targets);
        Ok(())
    }

    fn check_targets(&self, targets: &[usize]) -> Result<()> {
        if targets.is_empty() {
            return Err(Error::invalid("gate needs at least one target"));
        }
        for (i, &t) in targets.iter().enumerate() {
            if t >= self.n_qubits {
                return Err(Error::QubitOutOfRange { index: t, n: self.n_qubits });
            }
            if targets[..i].contains(&t) {
                return Err(Error::invalid("gate targets must be distinct"));
            }
        }
        Ok(())
    }

    /// Applies a validated gate without re-checking unitarity.
    pub(crate) fn apply_unchecked(&mut self, gate: &CMatrix, targets: &[usize]) {
        let n = self.n_qubits;
        let k = targets.len();
        let sub = 1usize << k;
        let masks: Vec<usize> = targets.iter().map(|&t| bit_mask(n, t)).collect();
        let all: usize = masks.iter().sum();
        // offsets[s] is the index contribution of sub-basis state s
        let offsets: Vec<usize> = (0..sub)
            .map(|s| {
                (0..k)
                    .filter(|&j| s & (1 << (k - 1 - j)) != 0)
                    .map(|j| masks[j])
                    .sum()
            })
            .collect();
        let amps = self.amplitudes.as_mut_slice();
        let mut buf = alloc::vec![ZERO; sub];
        for base in 0..amps.len() {
            if base & all != 0 {
                continue;
            }
            for (s, off) in offsets.iter().enumerate() {
                buf[s] = amps[base + off];
            }
            for (r, off) in offsets.iter().enumerate() {
                let mut acc = ZERO;
                for (c, b) in buf.iter().enumerate() {
                    acc += gate[(r, c)] * b;
                }
                amps[base + off] = acc;
            }
        }
    }

    /// Applies a diagonal phase of −1 on basis states where both qubits are 1.
    pub(crate) fn apply_cz_unchecked(&mut self, a: usize, b: usize) {
        let mask = bit_mask(self.n_qubits, a) | bit_mask(self.n_qubits, b);
        for (i, amp) in self.amplitudes.iter_mut().enumerate() {
            if i & mask == mask {
                *amp = -*amp;
            }
        }
    }

    /// Applies a dense 2^n × 2^n unitary to the whole register.
    pub fn apply_unitary(&self, u: &CMatrix) -> Result<StateVector> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: u.nrows() });
        }
        let residual = unitarity_residual(u);
        if residual > UNITARITY_TOL {
            return Err(Error::NotUnitary { residual });
        }
        Ok(StateVector { n_qubits: self.n_qubits, amplitudes: u * &self.amplitudes })
    }

    /// `⟨ψ|A|ψ⟩`, rejecting an imaginary residue above 1e-10.
    pub fn expectation(&self, obs: &Observable) -> Result<f64> {
        let a = obs.matrix();
        if a.nrows() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: a.nrows() });
        }
        let v = self.amplitudes.dotc(&(a * &self.amplitudes));
        if v.im.abs() > REAL_TOL {
            return Err(Error::NotReal { residue: v.im });
        }
        Ok(v.re)
    }

    /// `⟨Z_q⟩` for every qubit, read off the probabilities.
    pub fn z_expectations(&self) -> Vec<f64> {
        let n = self.n_qubits;
        let mut z = alloc::vec![0.0; n];
        for (i, amp) in self.amplitudes.iter().enumerate() {
            let p = amp.norm_sqr();
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

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }
}
