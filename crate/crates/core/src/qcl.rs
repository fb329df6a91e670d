//! Quantum circuit learning.
//!
//! A parameterized circuit `U(φ)` acts on an encoded input `V(x)|0⟩^⊗n` and
//! the model output is `⟨A⟩ = ⟨ψ(x)|U†(φ) A U(φ)|ψ(x)⟩`. Gradients come from
//! the parameter-shift rule and training is plain gradient descent on the
//! summed squared error.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use rand::Rng;

use crate::qelm::{encode, EncodingSpec};
use crate::quantum::{cz, ket_zero, CMatrix, Observable, PauliLetter, PauliString, StateVector, C64};
use crate::rng::seeded;
use crate::{Error, Result};

/// Default parameter shift; it maximises the `2 sin ε` denominator.
pub const DEFAULT_SHIFT: f64 = FRAC_PI_2;

/// One element of a parameterized circuit, listed in application order.
#[derive(Debug, Clone, PartialEq)]
pub enum CircuitElement {
    /// A fixed gate on `targets` (first target is the gate's leading qubit).
    Fixed { matrix: CMatrix, targets: Vec<usize> },
    /// `e^{-i(φ_param/2) P}` for a Pauli string `P`.
    Rotation { generator: PauliString, param: usize },
}

/// An ordered circuit of fixed gates and Pauli rotations.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterizedCircuit {
    n_qubits: usize,
    n_params: usize,
    elements: Vec<CircuitElement>,
}

impl ParameterizedCircuit {
    /// Validates qubit indices, gate shapes, unitarity and parameter indices.
    pub fn new(n_qubits: usize, n_params: usize, elements: Vec<CircuitElement>) -> Result<Self> {
        let probe = ket_zero(n_qubits)?;
        for e in &elements {
            match e {
                CircuitElement::Fixed { matrix, targets } => {
                    // apply_gate performs every target/shape/unitarity check
                    probe.apply_gate(matrix, targets)?;
                }
                CircuitElement::Rotation { generator, param } => {
                    if generator.n_qubits() != n_qubits {
                        return Err(Error::DimensionMismatch { expected: n_qubits, found: generator.n_qubits() });
                    }
                    if *param >= n_params {
                        return Err(Error::invalid("rotation parameter index out of range"));
                    }
                }
            }
        }
        Ok(ParameterizedCircuit { n_qubits, n_params, elements })
    }

    /// Layers of single-qubit `X` then `Y` rotations on every qubit, each
    /// followed by a CZ chain; `2·n·layers` independent parameters.
    pub fn layered(n_qubits: usize, layers: usize) -> Result<Self> {
        let mut elements = Vec::new();
        let mut param = 0;
        for _ in 0..layers {
            for letter in [PauliLetter::X, PauliLetter::Y] {
                for q in 0..n_qubits {
                    elements.push(CircuitElement::Rotation { generator: PauliString::single(n_qubits, q, letter)?, param });
                    param += 1;
                }
            }
            for q in 0..n_qubits.saturating_sub(1) {
                elements.push(CircuitElement::Fixed { matrix: cz(), targets: alloc::vec![q, q + 1] });
            }
        }
        Self::new(n_qubits, param, elements)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn elements(&self) -> &[CircuitElement] {
        &self.elements
    }

    /// Element positions that use parameter `l`.
    pub fn occurrences(&self, l: usize) -> Vec<usize> {
        self.elements
            .iter()
            .enumerate()
            .filter(|(_, e)| matches!(e, CircuitElement::Rotation { param, .. } if *param == l))
            .map(|(i, _)| i)
            .collect()
    }

    fn check_params(&self, phi: &[f64]) -> Result<()> {
        if phi.len() != self.n_params {
            return Err(Error::DimensionMismatch { expected: self.n_params, found: phi.len() });
        }
        if phi.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("circuit parameters".into()));
        }
        Ok(())
    }

    /// Applies the circuit, optionally adding `delta` to the angle of the
    /// single element at position `shifted.0`.
    fn apply_shifted(&self, psi: &mut StateVector, phi: &[f64], shifted: Option<(usize, f64)>) {
        let dim = psi.dim();
        let mut scratch = alloc::vec![C64::new(0.0, 0.0); dim];
        for (i, e) in self.elements.iter().enumerate() {
            match e {
                CircuitElement::Fixed { matrix, targets } => psi.apply_unchecked(matrix, targets),
                CircuitElement::Rotation { generator, param } => {
                    let mut angle = phi[*param];
                    if let Some((pos, delta)) = shifted {
                        if pos == i {
                            angle += delta;
                        }
                    }
                    apply_pauli_rotation(psi, generator, angle, &mut scratch);
                }
            }
        }
    }

    /// `U(φ)|ψ⟩`.
    pub fn apply(&self, psi: &StateVector, phi: &[f64]) -> Result<StateVector> {
        self.check_params(phi)?;
        if psi.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch { expected: self.n_qubits, found: psi.n_qubits() });
        }
        let mut out = psi.clone();
        self.apply_shifted(&mut out, phi, None);
        Ok(out)
    }
}

/// `|ψ⟩ ← (cos(θ/2) I − i sin(θ/2) P)|ψ⟩`.
fn apply_pauli_rotation(psi: &mut StateVector, p: &PauliString, angle: f64, scratch: &mut [C64]) {
    let (s, c) = libm::sincos(angle / 2.0);
    let amps = psi.amplitudes_mut().as_mut_slice();
    p.apply_to(amps, scratch);
    let mis = C64::new(0.0, -s);
    for (a, pa) in amps.iter_mut().zip(scratch.iter()) {
        *a = *a * c + mis * pa;
    }
}

/// One labelled training example.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: Vec<f64>,
    pub y: f64,
}

/// Encoding, trainable circuit and measured observable.
#[derive(Debug, Clone)]
pub struct QclModel {
    /// `None` starts every evaluation from `|0⟩^⊗n` and ignores `x`.
    pub encoding: Option<EncodingSpec>,
    pub circuit: ParameterizedCircuit,
    pub observable: Observable,
}

/// Gradient-descent settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub alpha: f64,
    pub iters: usize,
    pub eps: f64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions { alpha: 0.01, iters: 500, eps: DEFAULT_SHIFT }
    }
}

/// Loss and gradient norm at one iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainRecord {
    pub iter: usize,
    pub loss: f64,
    pub grad_norm: f64,
    pub params: Vec<f64>,
}

/// Per-iteration history of a training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainTrace {
    /// Entry `m` holds the state before the `m`-th update; the final entry is
    /// the state after the last update.
    pub records: Vec<TrainRecord>,
    /// Set when the final loss exceeds the initial loss.
    pub diverged: bool,
}

impl TrainTrace {
    pub fn final_params(&self) -> &[f64] {
        &self.records[self.records.len() - 1].params
    }

    pub fn initial_loss(&self) -> f64 {
        self.records[0].loss
    }

    pub fn final_loss(&self) -> f64 {
        self.records[self.records.len() - 1].loss
    }
}

impl QclModel {
    pub fn new(encoding: Option<EncodingSpec>, circuit: ParameterizedCircuit, observable: Observable) -> Result<Self> {
        if observable.n_qubits() != circuit.n_qubits() {
            return Err(Error::DimensionMismatch { expected: circuit.n_qubits(), found: observable.n_qubits() });
        }
        if let Some(spec) = &encoding {
            if spec.n_qubits != circuit.n_qubits() {
                return Err(Error::DimensionMismatch { expected: circuit.n_qubits(), found: spec.n_qubits });
            }
        }
        Ok(QclModel { encoding, circuit, observable })
    }

    fn input_state(&self, x: &[f64]) -> Result<StateVector> {
        match &self.encoding {
            Some(spec) => encode(x, spec),
            None => ket_zero(self.circuit.n_qubits()),
        }
    }

    fn evaluate(&self, input: &StateVector, phi: &[f64], shifted: Option<(usize, f64)>) -> Result<f64> {
        let mut psi = input.clone();
        self.circuit.apply_shifted(&mut psi, phi, shifted);
        psi.expectation(&self.observable)
    }

    /// `⟨A⟩` on `U(φ)V(x)|0⟩^⊗n`.
    pub fn forward(&self, x: &[f64], phi: &[f64]) -> Result<f64> {
        self.circuit.check_params(phi)?;
        self.evaluate(&self.input_state(x)?, phi, None)
    }

    fn shift_grad_from(&self, input: &StateVector, phi: &[f64], l: usize, eps: f64) -> Result<f64> {
        let denom = 2.0 * libm::sin(eps);
        let mut g = 0.0;
        // a shared parameter contributes one shift term per occurrence
        for pos in self.circuit.occurrences(l) {
            let plus = self.evaluate(input, phi, Some((pos, eps)))?;
            let minus = self.evaluate(input, phi, Some((pos, -eps)))?;
            g += (plus - minus) / denom;
        }
        Ok(g)
    }

    fn check_shift(&self, phi: &[f64], eps: f64) -> Result<()> {
        self.circuit.check_params(phi)?;
        if !(eps > 0.0 && eps < core::f64::consts::PI) {
            return Err(Error::invalid("parameter shift must lie in (0, π)"));
        }
        Ok(())
    }

    /// `[⟨A⟩(φ_l+ε) − ⟨A⟩(φ_l−ε)] / (2 sin ε)`, summed over every occurrence
    /// of parameter `l`; exactly 0 for an unused parameter.
    pub fn param_shift_grad(&self, x: &[f64], phi: &[f64], l: usize, eps: f64) -> Result<f64> {
        self.check_shift(phi, eps)?;
        if l >= self.circuit.n_params() {
            return Err(Error::invalid("parameter index out of range"));
        }
        self.shift_grad_from(&self.input_state(x)?, phi, l, eps)
    }

    /// Shift gradient with respect to every parameter.
    pub fn gradient(&self, x: &[f64], phi: &[f64], eps: f64) -> Result<Vec<f64>> {
        self.check_shift(phi, eps)?;
        let input = self.input_state(x)?;
        (0..self.circuit.n_params())
            .map(|l| self.shift_grad_from(&input, phi, l, eps))
            .collect()
    }

    /// `L = Σ_j (⟨A⟩(x_j) − y_j)²` and `∂L/∂φ_l = Σ_j 2(⟨A⟩(x_j) − y_j) ∂⟨A⟩/∂φ_l`.
    pub fn loss_and_grad(&self, data: &[Sample], phi: &[f64], eps: f64) -> Result<(f64, Vec<f64>)> {
        if data.is_empty() {
            return Err(Error::Empty("training set"));
        }
        self.check_shift(phi, eps)?;
        let mut loss = 0.0;
        let mut grad = alloc::vec![0.0; self.circuit.n_params()];
        for s in data {
            let input = self.input_state(&s.x)?;
            let r = self.evaluate(&input, phi, None)? - s.y;
            loss += r * r;
            for (l, g) in grad.iter_mut().enumerate() {
                *g += 2.0 * r * self.shift_grad_from(&input, phi, l, eps)?;
            }
        }
        Ok((loss, grad))
    }

    /// Plain gradient descent `φ ← φ − α ∇L` for `opts.iters` updates.
    pub fn train(&self, data: &[Sample], init_phi: &[f64], opts: TrainOptions) -> Result<TrainTrace> {
        if !(opts.alpha >= 0.0 && opts.alpha.is_finite()) {
            return Err(Error::invalid("learning rate must be finite and non-negative"));
        }
        let mut phi = init_phi.to_vec();
        let mut records = Vec::with_capacity(opts.iters + 1);
        for iter in 0..=opts.iters {
            let (loss, grad) = self.loss_and_grad(data, &phi, opts.eps)?;
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::NonFiniteAt { step: iter });
            }
            let grad_norm = libm::sqrt(grad.iter().map(|g| g * g).sum());
            records.push(TrainRecord { iter, loss, grad_norm, params: phi.clone() });
            if iter < opts.iters {
                for (p, g) in phi.iter_mut().zip(&grad) {
                    *p -= opts.alpha * g;
                }
            }
        }
        let diverged = records[records.len() - 1].loss > records[0].loss;
        Ok(TrainTrace { records, diverged })
    }

    /// Mean squared error of the model on `data`.
    pub fn mse(&self, data: &[Sample], phi: &[f64]) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::Empty("dataset"));
        }
        let mut acc = 0.0;
        for s in data {
            let r = self.forward(&s.x, phi)? - s.y;
            acc += r * r;
        }
        Ok(acc / data.len() as f64)
    }
}

/// `y = (2x − 1)²`.
pub fn quadratic_target(x: f64) -> f64 {
    (2.0 * x - 1.0) * (2.0 * x - 1.0)
}

/// `count` evenly spaced points on `[0, 1]` labelled by `f`.
pub fn grid_dataset(count: usize, f: impl Fn(f64) -> f64) -> Result<Vec<Sample>> {
    if count < 2 {
        return Err(Error::invalid("grid needs at least two points"));
    }
    Ok((0..count)
        .map(|j| {
            let x = j as f64 / (count - 1) as f64;
            Sample { x: alloc::vec![x], y: f(x) }
        })
        .collect())
}

/// Parameters drawn uniformly from `[0, 2π)`.
pub fn random_params(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = seeded(seed);
    (0..n).map(|_| rng.random_range(0.0..core::f64::consts::TAU)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cos_model() -> QclModel {
        let circuit = ParameterizedCircuit::new(
            1,
            1,
            alloc::vec![CircuitElement::Rotation { generator: PauliString::parse("X").unwrap(), param: 0 }],
        )
        .unwrap();
        QclModel::new(None, circuit, Observable::pauli_z(1, 0).unwrap()).unwrap()
    }

    #[test]
    fn single_rotation_is_cosine() {
        let m = cos_model();
        for &phi in &[0.0, 0.4, 1.3, 3.0, -2.2] {
            assert!((m.forward(&[], &[phi]).unwrap() - libm::cos(phi)).abs() < 1e-14);
        }
    }

    #[test]
    fn cosine_gradient() {
        let m = cos_model();
        assert!(m.param_shift_grad(&[], &[0.0], 0, DEFAULT_SHIFT).unwrap().abs() < 1e-15);
        let g = m.param_shift_grad(&[], &[core::f64::consts::FRAC_PI_3], 0, DEFAULT_SHIFT).unwrap();
        assert!((g + 0.866_025_403_784_438_6).abs() < 1e-14);
    }

    #[test]
    fn fixed_only_circuit_ignores_parameters() {
        let circuit = ParameterizedCircuit::new(
            2,
            2,
            alloc::vec![CircuitElement::Fixed { matrix: crate::quantum::cnot(), targets: alloc::vec![0, 1] }],
        )
        .unwrap();
        let m = QclModel::new(None, circuit, Observable::pauli_z(2, 1).unwrap()).unwrap();
        let a = m.forward(&[], &[0.1, 0.2]).unwrap();
        let b = m.forward(&[], &[2.0, -1.0]).unwrap();
        assert_eq!(a, b);
        assert_eq!(m.param_shift_grad(&[], &[0.1, 0.2], 1, DEFAULT_SHIFT).unwrap(), 0.0);
    }

    #[test]
    fn invalid_shift_and_params_rejected() {
        let m = cos_model();
        assert!(m.param_shift_grad(&[], &[0.0], 0, 0.0).is_err());
        assert!(m.param_shift_grad(&[], &[0.0], 0, core::f64::consts::PI).is_err());
        assert!(m.forward(&[], &[0.0, 1.0]).is_err());
        assert!(m.forward(&[], &[f64::NAN]).is_err());
        assert!(ParameterizedCircuit::new(
            1,
            1,
            alloc::vec![CircuitElement::Rotation { generator: PauliString::parse("Z").unwrap(), param: 1 }],
        )
        .is_err());
    }

    #[test]
    fn exact_fit_has_zero_loss_and_gradient() {
        let m = cos_model();
        let data = alloc::vec![Sample { x: alloc::vec![], y: libm::cos(0.7) }];
        let (loss, grad) = m.loss_and_grad(&data, &[0.7], DEFAULT_SHIFT).unwrap();
        assert!(loss < 1e-20);
        assert!(grad[0].abs() < 1e-10);
    }

    #[test]
    fn zero_learning_rate_keeps_params() {
        let m = cos_model();
        let data = alloc::vec![Sample { x: alloc::vec![], y: 0.2 }];
        let opts = TrainOptions { alpha: 0.0, iters: 5, ..TrainOptions::default() };
        let trace = m.train(&data, &[1.0], opts).unwrap();
        assert!(trace.records.iter().all(|r| r.params == [1.0]));
        assert_eq!(trace.records.len(), 6);
    }

    #[test]
    fn small_step_decreases_loss_monotonically() {
        let m = cos_model();
        let data = alloc::vec![Sample { x: alloc::vec![], y: 0.3 }];
        let opts = TrainOptions { alpha: 0.2, iters: 200, ..TrainOptions::default() };
        let trace = m.train(&data, &[0.2], opts).unwrap();
        for w in trace.records.windows(2) {
            assert!(w[1].loss <= w[0].loss + 1e-15);
        }
        assert!(!trace.diverged);
        assert!(trace.final_loss() < 1e-6);
    }

    #[test]
    fn huge_step_is_flagged_or_bounded() {
        let m = cos_model();
        let data = alloc::vec![Sample { x: alloc::vec![], y: 0.3 }];
        let opts = TrainOptions { alpha: 50.0, iters: 7, ..TrainOptions::default() };
        let trace = m.train(&data, &[0.2], opts).unwrap();
        assert_eq!(trace.diverged, trace.final_loss() > trace.initial_loss());
    }

    #[test]
    fn layered_ansatz_shape() {
        let c = ParameterizedCircuit::layered(3, 2).unwrap();
        assert_eq!(c.n_params(), 12);
        assert_eq!(c.occurrences(5), alloc::vec![5]);
    }

    #[test]
    fn quadratic_grid() {
        let d = grid_dataset(20, quadratic_target).unwrap();
        assert_eq!(d.len(), 20);
        assert_eq!(d[0].y, 1.0);
        assert_eq!(d[19].y, 1.0);
    }
}
