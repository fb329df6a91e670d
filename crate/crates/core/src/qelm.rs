//! Quantum extreme learning machine.
//!
//! Static inputs are encoded by per-qubit Y rotations, scrambled by a fixed
//! random circuit, and read out through single-qubit `⟨Z_i⟩` values that feed
//! a linear least-squares readout.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand::Rng;

use crate::quantum::{ket_zero, rotation_gate, Axis, StateVector};
use crate::regression::{accuracy_at_threshold, fit_linear, DesignMatrix, ReadoutWeights};
use crate::rng::seeded;
use crate::{Error, Result};

/// Squared radius of the class-0 disk centred at (0.5, 0.5).
pub const CIRCLE_RADIUS_SQ: f64 = 0.15;

/// Two-qubit blocks per brickwork sweep are repeated this many times.
pub const SWEEPS: usize = 2;

/// Classification threshold on the readout.
pub const THRESHOLD: f64 = 0.5;

/// How input components become rotation angles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngleRule {
    /// Qubit `q` gets `acos(√x_{q mod d})`.
    Uniform,
    /// Qubit `q` gets `k·acos(√x_{q mod d})` with `k = ⌊q / d⌋`.
    Scaled,
}

/// Input encoding `V(x)|0⟩^⊗n`.
#[derive(Debug, Clone, Copy)]
pub struct EncodingSpec {
    pub n_qubits: usize,
    pub angle_rule: AngleRule,
    /// Optional map applied before `acos(√·)`; must send [0, 1] into [0, 1].
    pub nonlinearity: Option<fn(f64) -> f64>,
}

impl EncodingSpec {
    pub fn uniform(n_qubits: usize) -> Self {
        EncodingSpec { n_qubits, angle_rule: AngleRule::Uniform, nonlinearity: None }
    }

    pub fn scaled(n_qubits: usize) -> Self {
        EncodingSpec { n_qubits, angle_rule: AngleRule::Scaled, nonlinearity: None }
    }

    /// Rotation angle for every qubit.
    pub fn angles(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.is_empty() {
            return Err(Error::Empty("input vector"));
        }
        let d = x.len();
        let mut base = Vec::with_capacity(d);
        for &xi in x {
            if !(0.0..=1.0).contains(&xi) {
                return Err(Error::InputOutOfRange { value: xi });
            }
            let v = self.nonlinearity.map_or(xi, |f| f(xi));
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InputOutOfRange { value: v });
            }
            base.push(libm::acos(libm::sqrt(v)));
        }
        Ok((0..self.n_qubits)
            .map(|q| {
                let theta = base[q % d];
                match self.angle_rule {
                    AngleRule::Uniform => theta,
                    AngleRule::Scaled => (q / d) as f64 * theta,
                }
            })
            .collect())
    }
}

/// `V(x)|0⟩^⊗n`.
pub fn encode(x: &[f64], spec: &EncodingSpec) -> Result<StateVector> {
    let mut psi = ket_zero(spec.n_qubits)?;
    for (q, theta) in spec.angles(x)?.into_iter().enumerate() {
        if theta != 0.0 {
            psi.apply_unchecked(&rotation_gate(Axis::Y, theta)?, &[q]);
        }
    }
    Ok(psi)
}

/// One gate of the fixed random circuit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CircuitGate {
    Rx { qubit: usize, angle: f64 },
    Rz { qubit: usize, angle: f64 },
    Cz { a: usize, b: usize },
}

/// Which entangling unitary sits between encoding and readout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CircuitKind {
    Random,
    Identity,
}

/// Rotation words applied to both qubits of a block, separated by CZ gates.
///
/// Each qubit sees `X Z X · CZ · X Z · CZ · X`, so a block holds 8 X
/// rotations, 4 Z rotations and 2 CZ gates.
pub const BLOCK_LAYOUT: [&[Axis]; 3] = [&[Axis::X, Axis::Z, Axis::X], &[Axis::X, Axis::Z], &[Axis::X]];

/// A seeded brickwork of two-qubit blocks laid out per [`BLOCK_LAYOUT`].
/// A sweep visits the pairs
/// `(0,1), (2,3), …` and then `(1,2), (3,4), …`; the sweep runs [`SWEEPS`]
/// times. Angles are uniform on `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomCircuit {
    n_qubits: usize,
    seed: u64,
    kind: CircuitKind,
    gates: Vec<CircuitGate>,
}

/// Brickwork pair order for one sweep.
pub fn block_pairs(n_qubits: usize) -> Vec<(usize, usize)> {
    let even = (0..n_qubits.saturating_sub(1)).step_by(2).map(|a| (a, a + 1));
    let odd = (1..n_qubits.saturating_sub(1)).step_by(2).map(|a| (a, a + 1));
    even.chain(odd).collect()
}

impl RandomCircuit {
    pub fn generate(n_qubits: usize, seed: u64) -> Result<Self> {
        crate::quantum::ket_zero(n_qubits)?;
        let mut rng = seeded(seed);
        let mut gates = Vec::new();
        let mut angle = || rng.random_range(0.0..TAU);
        for _ in 0..SWEEPS {
            for (a, b) in block_pairs(n_qubits) {
                for (i, word) in BLOCK_LAYOUT.iter().enumerate() {
                    if i > 0 {
                        gates.push(CircuitGate::Cz { a, b });
                    }
                    for &axis in *word {
                        for q in [a, b] {
                            let angle = angle();
                            gates.push(match axis {
                                Axis::Z => CircuitGate::Rz { qubit: q, angle },
                                _ => CircuitGate::Rx { qubit: q, angle },
                            });
                        }
                    }
                }
            }
        }
        Ok(RandomCircuit { n_qubits, seed, kind: CircuitKind::Random, gates })
    }

    /// The `U = I` ablation.
    pub fn identity(n_qubits: usize) -> Result<Self> {
        crate::quantum::ket_zero(n_qubits)?;
        Ok(RandomCircuit { n_qubits, seed: 0, kind: CircuitKind::Identity, gates: Vec::new() })
    }

    pub fn build(kind: CircuitKind, n_qubits: usize, seed: u64) -> Result<Self> {
        match kind {
            CircuitKind::Random => Self::generate(n_qubits, seed),
            CircuitKind::Identity => Self::identity(n_qubits),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn kind(&self) -> CircuitKind {
        self.kind
    }

    pub fn gates(&self) -> &[CircuitGate] {
        &self.gates
    }

    pub fn apply(&self, psi: &mut StateVector) -> Result<()> {
        if psi.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch { expected: self.n_qubits, found: psi.n_qubits() });
        }
        for g in &self.gates {
            match *g {
                CircuitGate::Rx { qubit, angle } => psi.apply_unchecked(&rotation_gate(Axis::X, angle)?, &[qubit]),
                CircuitGate::Rz { qubit, angle } => psi.apply_unchecked(&rotation_gate(Axis::Z, angle)?, &[qubit]),
                CircuitGate::Cz { a, b } => psi.apply_cz_unchecked(a, b),
            }
        }
        Ok(())
    }
}

/// `⟨Z_i⟩` of `U V(x)|0⟩^⊗n` for every qubit.
pub fn z_features(x: &[f64], circuit: &RandomCircuit, spec: &EncodingSpec) -> Result<Vec<f64>> {
    let mut psi = encode(x, spec)?;
    circuit.apply(&mut psi)?;
    Ok(psi.z_expectations())
}

/// Readout features `[1, x…, z_1, …, z_n]`.
pub fn features(x: &[f64], circuit: &RandomCircuit, spec: &EncodingSpec) -> Result<Vec<f64>> {
    let z = z_features(x, circuit, spec)?;
    let mut out = Vec::with_capacity(1 + x.len() + z.len());
    out.push(1.0);
    out.extend_from_slice(x);
    out.extend(z);
    Ok(out)
}

/// Baseline features `[1, x…]` without any quantum layer.
pub fn linear_features(x: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(1 + x.len());
    out.push(1.0);
    out.extend_from_slice(x);
    out
}

/// Two-dimensional inputs with binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    inputs: Vec<[f64; 2]>,
    labels: Vec<u8>,
}

impl LabeledDataset {
    pub fn new(inputs: Vec<[f64; 2]>, labels: Vec<u8>) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::Empty("dataset"));
        }
        if inputs.len() != labels.len() {
            return Err(Error::DimensionMismatch { expected: inputs.len(), found: labels.len() });
        }
        if labels.iter().any(|&l| l > 1) {
            return Err(Error::invalid("labels must be 0 or 1"));
        }
        Ok(LabeledDataset { inputs, labels })
    }

    pub fn inputs(&self) -> &[[f64; 2]] {
        &self.inputs
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    fn targets(&self) -> Vec<f64> {
        self.labels.iter().map(|&l| f64::from(l)).collect()
    }
}

/// Class 0 inside the disk `(x₀−½)² + (x₁−½)² ≤ 0.15`, class 1 outside.
pub fn circle_label(x: [f64; 2]) -> u8 {
    let d = (x[0] - 0.5) * (x[0] - 0.5) + (x[1] - 0.5) * (x[1] - 0.5);
    u8::from(d > CIRCLE_RADIUS_SQ)
}

/// `count` points uniform on the unit square, labelled by [`circle_label`].
pub fn generate_circle_dataset(count: usize, seed: u64) -> Result<LabeledDataset> {
    if count == 0 {
        return Err(Error::Empty("dataset"));
    }
    let mut rng = seeded(seed);
    let inputs: Vec<[f64; 2]> = (0..count).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
    let labels = inputs.iter().map(|&x| circle_label(x)).collect();
    LabeledDataset::new(inputs, labels)
}

/// Feature extractor shared by the quantum model and its linear baseline.
#[derive(Debug, Clone, Copy)]
pub enum FeatureMap<'a> {
    Quantum { circuit: &'a RandomCircuit, spec: &'a EncodingSpec },
    Linear,
}

impl FeatureMap<'_> {
    pub fn features(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            FeatureMap::Quantum { circuit, spec } => features(x, circuit, spec),
            FeatureMap::Linear => Ok(linear_features(x)),
        }
    }

    pub fn design_matrix(&self, data: &LabeledDataset) -> Result<DesignMatrix> {
        let rows = data
            .inputs()
            .iter()
            .map(|x| self.features(x))
            .collect::<Result<Vec<_>>>()?;
        DesignMatrix::from_rows(&rows)
    }

    pub fn train(&self, data: &LabeledDataset) -> Result<ReadoutWeights> {
        fit_linear(&self.design_matrix(data)?, &data.targets())
    }

    /// Raw readout values `y = w · features`.
    pub fn readout(&self, data: &LabeledDataset, weights: &ReadoutWeights) -> Result<Vec<f64>> {
        let x = self.design_matrix(data)?;
        Ok(weights.predict(x.as_matrix())?.iter().copied().collect())
    }

    pub fn accuracy(&self, data: &LabeledDataset, weights: &ReadoutWeights) -> Result<f64> {
        let y = self.readout(data, weights)?;
        accuracy_at_threshold(&y, &data.targets(), THRESHOLD)
    }
}

/// Least-squares readout on `[1, x₀, x₁, ⟨Z_i⟩…]` regressed onto 0/1 labels.
pub fn train_qelm(train: &LabeledDataset, circuit: &RandomCircuit, spec: &EncodingSpec) -> Result<ReadoutWeights> {
    FeatureMap::Quantum { circuit, spec }.train(train)
}

/// Test accuracy with the readout thresholded at 0.5.
pub fn evaluate_qelm(
    test: &LabeledDataset,
    weights: &ReadoutWeights,
    circuit: &RandomCircuit,
    spec: &EncodingSpec,
) -> Result<f64> {
    FeatureMap::Quantum { circuit, spec }.accuracy(test, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{DensityMatrix, Observable, PauliString};

    #[test]
    fn block_census() {
        let c = RandomCircuit::generate(2, 7).unwrap();
        let per_block = c.gates().len() / SWEEPS;
        let block = &c.gates()[..per_block];
        let rx = block.iter().filter(|g| matches!(g, CircuitGate::Rx { .. })).count();
        let rz = block.iter().filter(|g| matches!(g, CircuitGate::Rz { .. })).count();
        let cz = block.iter().filter(|g| matches!(g, CircuitGate::Cz { .. })).count();
        assert_eq!((rx, rz, cz), (8, 4, 2));
    }

    #[test]
    fn eight_qubits_have_seven_blocks_per_sweep() {
        let pairs = block_pairs(8);
        assert_eq!(pairs, alloc::vec![(0, 1), (2, 3), (4, 5), (6, 7), (1, 2), (3, 4), (5, 6)]);
        let c = RandomCircuit::generate(8, 1).unwrap();
        assert_eq!(c.gates().len(), SWEEPS * 7 * 14);
    }

    #[test]
    fn circuit_is_reproducible() {
        let a = RandomCircuit::generate(8, 42).unwrap();
        let b = RandomCircuit::generate(8, 42).unwrap();
        let c = RandomCircuit::generate(8, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn single_qubit_encoding() {
        let spec = EncodingSpec::uniform(1);
        let z = encode(&[1.0], &spec).unwrap().z_expectations()[0];
        assert!((z - 1.0).abs() < 1e-15);
        let z = encode(&[0.5], &spec).unwrap().z_expectations()[0];
        assert!(z.abs() < 1e-15);
    }

    #[test]
    fn uniform_product_encoding_gives_linear_z() {
        let spec = EncodingSpec::uniform(4);
        for &x in &[0.0, 0.3, 0.77, 1.0] {
            let z = encode(&[x], &spec).unwrap().z_expectations();
            assert!(z.iter().all(|zk| (zk - (2.0 * x - 1.0)).abs() < 1e-12));
        }
    }

    #[test]
    fn scaled_rule_multiplies_angles() {
        let spec = EncodingSpec::scaled(8);
        let a = spec.angles(&[0.3, 0.6]).unwrap();
        let t0 = libm::acos(libm::sqrt(0.3));
        let t1 = libm::acos(libm::sqrt(0.6));
        for k in 0..4 {
            assert!((a[2 * k] - k as f64 * t0).abs() < 1e-15);
            assert!((a[2 * k + 1] - k as f64 * t1).abs() < 1e-15);
        }
    }

    #[test]
    fn out_of_range_input_rejected() {
        assert!(matches!(
            encode(&[1.2], &EncodingSpec::uniform(1)),
            Err(Error::InputOutOfRange { .. })
        ));
        assert!(encode(&[-0.1, 0.5], &EncodingSpec::uniform(2)).is_err());
    }

    #[test]
    fn nonlinearity_is_applied() {
        let spec = EncodingSpec { nonlinearity: Some(|x| x * x), ..EncodingSpec::uniform(1) };
        let z = encode(&[0.5], &spec).unwrap().z_expectations()[0];
        assert!((z - (2.0 * 0.25 - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn identity_circuit_features() {
        let spec = EncodingSpec::uniform(2);
        let c = RandomCircuit::identity(2).unwrap();
        let f = features(&[0.3, 0.3], &c, &spec).unwrap();
        assert_eq!(f.len(), 2 + 3);
        assert_eq!(&f[..3], &[1.0, 0.3, 0.3]);
        assert!((f[3] - (-0.4)).abs() < 1e-12);
        assert!((f[4] - (-0.4)).abs() < 1e-12);
    }

    #[test]
    fn random_circuit_features_bounded() {
        let spec = EncodingSpec::uniform(8);
        let c = RandomCircuit::generate(8, 3).unwrap();
        let f = features(&[0.2, 0.9], &c, &spec).unwrap();
        assert_eq!(f.len(), 11);
        assert!(f[3..].iter().all(|z| z.abs() <= 1.0 + 1e-12));
    }

    #[test]
    fn circuit_fast_path_matches_dense_density_expectation() {
        let spec = EncodingSpec::uniform(3);
        let c = RandomCircuit::generate(3, 11).unwrap();
        let mut psi = encode(&[0.4, 0.8], &spec).unwrap();
        c.apply(&mut psi).unwrap();
        let rho = DensityMatrix::from_pure(&psi);
        let z = psi.z_expectations();
        for (q, zq) in z.iter().enumerate() {
            let obs = Observable::from_pauli(&PauliString::single(3, q, crate::quantum::PauliLetter::Z).unwrap());
            assert!((rho.expectation(&obs).unwrap() - zq).abs() < 1e-13);
        }
    }

    #[test]
    fn circle_labels() {
        assert_eq!(circle_label([0.5, 0.5]), 0);
        assert_eq!(circle_label([0.0, 0.0]), 1);
    }

    #[test]
    fn dataset_is_seeded() {
        let a = generate_circle_dataset(50, 9).unwrap();
        let b = generate_circle_dataset(50, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.inputs().iter().all(|x| (0.0..1.0).contains(&x[0]) && (0.0..1.0).contains(&x[1])));
        assert!(generate_circle_dataset(0, 1).is_err());
    }

    #[test]
    fn all_zero_labels_predict_zero() {
        let inputs: Vec<[f64; 2]> = (0..20).map(|i| [i as f64 / 20.0, 0.5]).collect();
        let data = LabeledDataset::new(inputs, alloc::vec![0; 20]).unwrap();
        let spec = EncodingSpec::uniform(4);
        let c = RandomCircuit::generate(4, 5).unwrap();
        let w = train_qelm(&data, &c, &spec).unwrap();
        let y = FeatureMap::Quantum { circuit: &c, spec: &spec }.readout(&data, &w).unwrap();
        assert!(y.iter().all(|v| v.abs() < 1e-9));
    }
}
