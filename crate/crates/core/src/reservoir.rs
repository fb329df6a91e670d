//! Quantum reservoir computing.
//!
//! The reservoir is an `N`-qubit density operator driven by a transverse-field
//! Ising Hamiltonian. Each input `x_k ∈ [0, 1]` replaces one qubit by
//! `diag(x_k, 1 − x_k)`, the system then evolves for `τ`, and the single-qubit
//! `⟨Z_l⟩` values at `V` equally spaced times inside the interval form the
//! `N·V` node signals fed to a linear readout.
//!
//! Because the Hamiltonian is real symmetric, `H = Q Λ Qᵀ` with real
//! orthogonal `Q`. The production step works in that eigenbasis, where time
//! evolution is an elementwise phase, so a step costs two basis changes plus
//! `O(N·V·4^N)` work for the signals. A dense path built from the fractional
//! unitaries is kept as a reference implementation.

use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use crate::dynamics::AffineMap;
use crate::quantum::{
    bit_mask, check_qubit_count, evolve_unitary, ising_hamiltonian, replace_qubit_operator, CMatrix, DensityMatrix,
    Observable, Superoperator, C64, DEFAULT_MAX_QUBITS,
};
use crate::regression::{fit_linear, DesignMatrix, ReadoutWeights};
use crate::rng::seeded;
use crate::{Error, Result};

/// Pre-clamp readout values outside this band stop an autonomous run.
pub const DIVERGENCE_BAND: (f64, f64) = (-0.5, 1.5);

/// Starting state of a reservoir run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialState {
    /// `I / 2^N`.
    MaximallyMixed,
    /// `|0…0⟩⟨0…0|`.
    Zero,
}

/// Reservoir hyper-parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReservoirConfig {
    pub n_qubits: usize,
    /// Couplings `J_ij` are uniform on `[j_range.0, j_range.1)`.
    pub j_range: (f64, f64),
    pub field: f64,
    pub tau: f64,
    pub v_nodes: usize,
    pub input_qubit: usize,
    pub seed: u64,
    pub washout: usize,
    pub initial: InitialState,
    /// Append a constant 1 column to the node signals.
    pub bias: bool,
}

impl Default for ReservoirConfig {
    fn default() -> Self {
        ReservoirConfig {
            n_qubits: 5,
            j_range: (-0.5, 0.5),
            field: 1.0,
            tau: 4.0,
            v_nodes: 10,
            input_qubit: 0,
            seed: 0,
            washout: 1000,
            initial: InitialState::MaximallyMixed,
            bias: true,
        }
    }
}

impl ReservoirConfig {
    pub fn validate(&self) -> Result<()> {
        check_qubit_count(self.n_qubits, DEFAULT_MAX_QUBITS)?;
        if self.v_nodes == 0 {
            return Err(Error::invalid("at least one virtual node is required"));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::invalid("evolution interval must be positive and finite"));
        }
        if self.input_qubit >= self.n_qubits {
            return Err(Error::QubitOutOfRange { index: self.input_qubit, n: self.n_qubits });
        }
        let (lo, hi) = self.j_range;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::invalid("coupling range must be a finite interval"));
        }
        if !self.field.is_finite() {
            return Err(Error::NonFinite("transverse field".into()));
        }
        Ok(())
    }

    /// Node signals per step, excluding the bias column.
    pub fn signal_count(&self) -> usize {
        self.n_qubits * self.v_nodes
    }

    /// Column of qubit `l` at virtual node `v ∈ 1..=V`.
    pub fn signal_index(&self, l: usize, v: usize) -> usize {
        l * self.v_nodes + (v - 1)
    }
}

/// Symmetric couplings with `J_ij` drawn for `i < j` in row-major order.
pub fn random_couplings(n: usize, range: (f64, f64), seed: u64) -> DMatrix<f64> {
    let mut rng = seeded(seed);
    let mut j = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in a + 1..n {
            let v = if range.0 == range.1 { range.0 } else { rng.random_range(range.0..range.1) };
            j[(a, b)] = v;
            j[(b, a)] = v;
        }
    }
    j
}

/// Reservoir density operator, stored as real and imaginary parts in the
/// computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirState {
    n_qubits: usize,
    re: DMatrix<f64>,
    im: DMatrix<f64>,
    step_index: usize,
}

impl ReservoirState {
    pub fn from_density(rho: &DensityMatrix) -> Self {
        ReservoirState {
            n_qubits: rho.n_qubits(),
            re: rho.matrix().map(|c| c.re),
            im: rho.matrix().map(|c| c.im),
            step_index: 0,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Inputs consumed so far.
    pub fn step_index(&self) -> usize {
        self.step_index
    }

    pub fn matrix(&self) -> CMatrix {
        self.re.zip_map(&self.im, C64::new)
    }

    /// The state as a [`DensityMatrix`], without re-validation.
    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_matrix_unchecked(self.n_qubits, self.matrix())
    }

    /// `|Tr ρ − 1|`.
    pub fn trace_error(&self) -> f64 {
        let t = C64::new(self.re.trace(), self.im.trace());
        (t - C64::new(1.0, 0.0)).norm()
    }

    /// Largest entry of `|ρ − ρ†|`.
    pub fn hermiticity_residual(&self) -> f64 {
        let d = self.re.nrows();
        let mut r: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                let dre = self.re[(i, j)] - self.re[(j, i)];
                let dim = self.im[(i, j)] + self.im[(j, i)];
                r = r.max(libm::sqrt(dre * dre + dim * dim));
            }
        }
        r
    }

    /// `⟨Z_l⟩` for every qubit.
    pub fn z_expectations(&self) -> Vec<f64> {
        let d = self.re.nrows();
        (0..self.n_qubits)
            .map(|l| {
                let m = bit_mask(self.n_qubits, l);
                (0..d).map(|b| if b & m == 0 { self.re[(b, b)] } else { -self.re[(b, b)] }).sum()
            })
            .collect()
    }
}

/// `Tr_q[ρ] ⊗ diag(x, 1 − x)` with the new factor at position `q`, in place.
fn inject_parts(re: &mut DMatrix<f64>, im: &mut DMatrix<f64>, n: usize, q: usize, x: f64) {
    let m = bit_mask(n, q);
    let d = re.nrows();
    let p = [x, 1.0 - x];
    for a in (0..d).filter(|a| a & m == 0) {
        for b in (0..d).filter(|b| b & m == 0) {
            let sr = re[(a, b)] + re[(a | m, b | m)];
            let si = im[(a, b)] + im[(a | m, b | m)];
            re[(a, b)] = p[0] * sr;
            im[(a, b)] = p[0] * si;
            re[(a | m, b | m)] = p[1] * sr;
            im[(a | m, b | m)] = p[1] * si;
            re[(a, b | m)] = 0.0;
            im[(a, b | m)] = 0.0;
            re[(a | m, b)] = 0.0;
            im[(a | m, b)] = 0.0;
        }
    }
}

fn check_input(x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InputOutOfRange { value: x });
    }
    Ok(())
}

/// `ρ' = Tr_q[ρ] ⊗ ρ_x` with `ρ_x = (I + (2x − 1)Z)/2 = diag(x, 1 − x)` placed at qubit `q`.
pub fn inject_input(rho: &DensityMatrix, x: f64, input_qubit: usize) -> Result<DensityMatrix> {
    check_input(x)?;
    let n = rho.n_qubits();
    if input_qubit >= n {
        return Err(Error::QubitOutOfRange { index: input_qubit, n });
    }
    let mut re = rho.matrix().map(|c| c.re);
    let mut im = rho.matrix().map(|c| c.im);
    inject_parts(&mut re, &mut im, n, input_qubit, x);
    Ok(DensityMatrix::from_matrix_unchecked(n, re.zip_map(&im, C64::new)))
}

/// The injection map `A ↦ Tr_q[A] ⊗ diag(x, 1 − x)` as a linear superoperator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputReplacement {
    n_qubits: usize,
    qubit: usize,
    single: [f64; 2],
}

impl InputReplacement {
    pub fn new(n_qubits: usize, qubit: usize, x: f64) -> Result<Self> {
        check_qubit_count(n_qubits, DEFAULT_MAX_QUBITS)?;
        check_input(x)?;
        if qubit >= n_qubits {
            return Err(Error::QubitOutOfRange { index: qubit, n: n_qubits });
        }
        Ok(InputReplacement { n_qubits, qubit, single: [x, 1.0 - x] })
    }
}

impl Superoperator for InputReplacement {
    fn apply_operator(&self, op: &CMatrix) -> CMatrix {
        let mut single = CMatrix::zeros(2, 2);
        single[(0, 0)] = C64::new(self.single[0], 0.0);
        single[(1, 1)] = C64::new(self.single[1], 0.0);
        replace_qubit_operator(op, self.n_qubits, self.qubit, &single)
    }
}

/// Per-step node signals, one row per input, plus an optional bias column.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSignalMatrix {
    data: DMatrix<f64>,
    n_qubits: usize,
    v_nodes: usize,
    bias: bool,
}

impl NodeSignalMatrix {
    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn has_bias(&self) -> bool {
        self.bias
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn row(&self, k: usize) -> Vec<f64> {
        self.data.row(k).iter().copied().collect()
    }

    /// `⟨Z_l⟩` at the end of each interval (the `v = V` nodes).
    pub fn true_nodes(&self, k: usize) -> Vec<f64> {
        (0..self.n_qubits).map(|l| self.data[(k, l * self.v_nodes + self.v_nodes - 1)]).collect()
    }

    /// Rows `[start, end)` as a regression design matrix.
    pub fn design(&self, start: usize, end: usize) -> Result<DesignMatrix> {
        if start >= end || end > self.rows() {
            return Err(Error::invalid("row range out of bounds"));
        }
        DesignMatrix::new(self.data.rows(start, end - start).into_owned())
    }
}

/// Outcome of a closed-loop run.
#[derive(Debug, Clone, PartialEq)]
pub struct AutonomousRun {
    /// Normalized readout `y_k`, before clamping.
    pub predictions: Vec<f64>,
    /// Input fed at each step.
    pub inputs: Vec<f64>,
    /// Whether `y_k` had to be clamped into `[0, 1]` before feedback.
    pub clamped: Vec<bool>,
    /// First step whose readout left [`DIVERGENCE_BAND`].
    pub diverged_at: Option<usize>,
}

impl AutonomousRun {
    pub fn clamp_count(&self) -> usize {
        self.clamped.iter().filter(|&&c| c).count()
    }

    /// Predictions mapped back to raw units.
    pub fn denormalized(&self, map: &AffineMap) -> Vec<f64> {
        map.denormalize(&self.predictions)
    }
}

/// A built reservoir: couplings, Hamiltonian and eigenbasis propagators.
#[derive(Debug, Clone)]
pub struct Reservoir {
    cfg: ReservoirConfig,
    couplings: DMatrix<f64>,
    hamiltonian: Observable,
    /// Real orthogonal eigenvectors of `H` (columns).
    q: DMatrix<f64>,
    qt: DMatrix<f64>,
    /// `Qᵀ Z_l Q` for each qubit.
    z_eigen: Vec<DMatrix<f64>>,
    /// Real and imaginary parts of `e^{-i(λ_a − λ_b) t_v}` for `v = 1..=V`.
    phase_re: Vec<DMatrix<f64>>,
    phase_im: Vec<DMatrix<f64>>,
}

impl Reservoir {
    /// Draws `J_ij` from the seeded generator and precomputes the propagators.
    pub fn build(cfg: ReservoirConfig) -> Result<Self> {
        cfg.validate()?;
        let couplings = random_couplings(cfg.n_qubits, cfg.j_range, cfg.seed);
        Self::with_couplings(cfg, couplings)
    }

    /// Uses explicit couplings instead of drawing them.
    pub fn with_couplings(cfg: ReservoirConfig, couplings: DMatrix<f64>) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.n_qubits;
        let hamiltonian = ising_hamiltonian(n, &couplings, cfg.field)?;
        let h = hamiltonian.real_matrix().ok_or(Error::NotReal { residue: f64::NAN })?;
        let eig = SymmetricEigen::new(h);
        let q = eig.eigenvectors;
        let qt = q.transpose();
        let d = 1usize << n;
        let z_eigen = (0..n)
            .map(|l| {
                let m = bit_mask(n, l);
                let zq = DMatrix::from_fn(d, d, |b, c| if b & m == 0 { q[(b, c)] } else { -q[(b, c)] });
                &qt * zq
            })
            .collect();
        let lambda = eig.eigenvalues;
        let mut phase_re = Vec::with_capacity(cfg.v_nodes);
        let mut phase_im = Vec::with_capacity(cfg.v_nodes);
        for v in 1..=cfg.v_nodes {
            let t = cfg.tau * v as f64 / cfg.v_nodes as f64;
            let mut pr = DMatrix::zeros(d, d);
            let mut pi = DMatrix::zeros(d, d);
            for a in 0..d {
                for b in 0..d {
                    let (s, c) = libm::sincos((lambda[a] - lambda[b]) * t);
                    pr[(a, b)] = c;
                    pi[(a, b)] = -s;
                }
            }
            phase_re.push(pr);
            phase_im.push(pi);
        }
        Ok(Reservoir { cfg, couplings, hamiltonian, q, qt, z_eigen, phase_re, phase_im })
    }

    pub fn config(&self) -> &ReservoirConfig {
        &self.cfg
    }

    pub fn couplings(&self) -> &DMatrix<f64> {
        &self.couplings
    }

    pub fn hamiltonian(&self) -> &Observable {
        &self.hamiltonian
    }

    /// `U_{(v/V)τ} = e^{-iH(v/V)τ}` for `v = 1..=V`, by dense eigendecomposition.
    pub fn fractional_unitaries(&self) -> Result<Vec<CMatrix>> {
        let v_nodes = self.cfg.v_nodes;
        (1..=v_nodes)
            .map(|v| evolve_unitary(&self.hamiltonian, self.cfg.tau * v as f64 / v_nodes as f64))
            .collect()
    }

    pub fn initial_state(&self) -> Result<ReservoirState> {
        let n = self.cfg.n_qubits;
        let rho = match self.cfg.initial {
            InitialState::MaximallyMixed => DensityMatrix::maximally_mixed(n)?,
            InitialState::Zero => DensityMatrix::from_pure(&crate::quantum::ket_zero(n)?),
        };
        Ok(ReservoirState::from_density(&rho))
    }

    fn check_state(&self, state: &ReservoirState) -> Result<()> {
        if state.n_qubits != self.cfg.n_qubits {
            return Err(Error::DimensionMismatch { expected: self.cfg.n_qubits, found: state.n_qubits });
        }
        Ok(())
    }

    /// Injects `x`, evolves for `τ` and returns the `N·V` node signals in
    /// qubit-major order (`index = l·V + (v − 1)`).
    pub fn step(&self, state: &mut ReservoirState, x: f64) -> Result<Vec<f64>> {
        let mut signals = alloc::vec![0.0; self.cfg.signal_count()];
        self.step_into(state, x, &mut signals)?;
        Ok(signals)
    }

    fn step_into(&self, state: &mut ReservoirState, x: f64, signals: &mut [f64]) -> Result<()> {
        check_input(x)?;
        self.check_state(state)?;
        let n = self.cfg.n_qubits;
        let v_nodes = self.cfg.v_nodes;
        inject_parts(&mut state.re, &mut state.im, n, self.cfg.input_qubit, x);
        // to the eigenbasis: ρ̃ = Qᵀ ρ Q
        let re_t = &self.qt * &state.re * &self.q;
        let im_t = &self.qt * &state.im * &self.q;
        for v in 0..v_nodes {
            // Re[ρ̃ ∘ e^{-iωt}]; the imaginary part drops out against the real symmetric Z̃_l
            let pr = &self.phase_re[v];
            let pi = &self.phase_im[v];
            let real = re_t.component_mul(pr) - im_t.component_mul(pi);
            for (l, z) in self.z_eigen.iter().enumerate() {
                signals[l * v_nodes + v] = z.dot(&real);
            }
            if v + 1 == v_nodes {
                let imag = re_t.component_mul(pi) + im_t.component_mul(pr);
                state.re = &self.q * real * &self.qt;
                state.im = &self.q * imag * &self.qt;
            }
        }
        if signals.iter().any(|s| !s.is_finite()) {
            return Err(Error::NonFiniteAt { step: state.step_index });
        }
        state.step_index += 1;
        Ok(())
    }

    /// Dense reference step: `ρ_v = U_v S_x(ρ) U_v†` with validated channels.
    ///
    /// `unitaries` must come from [`Reservoir::fractional_unitaries`].
    pub fn step_reference(
        &self,
        rho: &DensityMatrix,
        x: f64,
        unitaries: &[CMatrix],
    ) -> Result<(DensityMatrix, Vec<f64>)> {
        if unitaries.len() != self.cfg.v_nodes {
            return Err(Error::DimensionMismatch { expected: self.cfg.v_nodes, found: unitaries.len() });
        }
        let injected = inject_input(rho, x, self.cfg.input_qubit)?;
        let n = self.cfg.n_qubits;
        let v_nodes = self.cfg.v_nodes;
        let mut signals = alloc::vec![0.0; n * v_nodes];
        let mut last = injected.clone();
        for (v, u) in unitaries.iter().enumerate() {
            let rho_v = injected.evolve(u)?;
            for (l, z) in rho_v.z_expectations().into_iter().enumerate() {
                signals[l * v_nodes + v] = z;
            }
            last = rho_v;
        }
        Ok((last, signals))
    }

    /// Drives the reservoir with `inputs`; row `k` holds the signals produced
    /// by `inputs[k]`.
    pub fn run_teacher_forced(&self, inputs: &[f64], state: &mut ReservoirState) -> Result<NodeSignalMatrix> {
        if inputs.is_empty() {
            return Err(Error::Empty("input series"));
        }
        let s = self.cfg.signal_count();
        let cols = s + usize::from(self.cfg.bias);
        let mut data = DMatrix::zeros(inputs.len(), cols);
        let mut signals = alloc::vec![0.0; s];
        for (k, &x) in inputs.iter().enumerate() {
            self.step_into(state, x, &mut signals)?;
            for (c, v) in signals.iter().enumerate() {
                data[(k, c)] = *v;
            }
            if self.cfg.bias {
                data[(k, s)] = 1.0;
            }
        }
        Ok(NodeSignalMatrix { data, n_qubits: self.cfg.n_qubits, v_nodes: self.cfg.v_nodes, bias: self.cfg.bias })
    }

    /// Closed loop: `x_{k+1} = clamp(y_k, 0, 1)` starting from `first_input`.
    ///
    /// The run stops early, with `diverged_at` set, when a readout leaves
    /// [`DIVERGENCE_BAND`]; a non-finite readout is an error.
    pub fn run_autonomous(
        &self,
        state: &mut ReservoirState,
        weights: &ReadoutWeights,
        first_input: f64,
        steps: usize,
    ) -> Result<AutonomousRun> {
        let s = self.cfg.signal_count();
        let mut features = alloc::vec![0.0; s + usize::from(self.cfg.bias)];
        if self.cfg.bias {
            features[s] = 1.0;
        }
        let mut run = AutonomousRun {
            predictions: Vec::with_capacity(steps),
            inputs: Vec::with_capacity(steps),
            clamped: Vec::with_capacity(steps),
            diverged_at: None,
        };
        let mut x = first_input;
        for k in 0..steps {
            self.step_into(state, x, &mut features[..s])?;
            let y = weights.predict_one(&features)?;
            if !y.is_finite() {
                return Err(Error::NonFiniteAt { step: k });
            }
            run.inputs.push(x);
            run.predictions.push(y);
            run.clamped.push(!(0.0..=1.0).contains(&y));
            if y < DIVERGENCE_BAND.0 || y > DIVERGENCE_BAND.1 {
                run.diverged_at = Some(k);
                break;
            }
            x = y.clamp(0.0, 1.0);
        }
        Ok(run)
    }
}

/// Least-squares readout on the rows after `washout`.
pub fn train_readout(signals: &NodeSignalMatrix, targets: &[f64], washout: usize) -> Result<ReadoutWeights> {
    if signals.rows() != targets.len() {
        return Err(Error::DimensionMismatch { expected: signals.rows(), found: targets.len() });
    }
    if washout >= signals.rows() {
        return Err(Error::WashoutTooLarge { washout, len: signals.rows() });
    }
    fit_linear(&signals.design(washout, signals.rows())?, &targets[washout..])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::max_abs_diff;

    fn small(n: usize, v: usize, seed: u64) -> Reservoir {
        Reservoir::build(ReservoirConfig { n_qubits: n, v_nodes: v, seed, washout: 10, ..Default::default() }).unwrap()
    }

    #[test]
    fn couplings_are_seeded_and_symmetric() {
        let a = random_couplings(5, (-0.5, 0.5), 3);
        assert_eq!(a, random_couplings(5, (-0.5, 0.5), 3));
        assert_ne!(a, random_couplings(5, (-0.5, 0.5), 4));
        assert_eq!(a, a.transpose());
        assert!((0..5).all(|i| a[(i, i)] == 0.0));
        assert!(a.iter().all(|v| (-0.5..0.5).contains(v)));
    }

    #[test]
    fn config_validation() {
        let bad = [
            ReservoirConfig { v_nodes: 0, ..Default::default() },
            ReservoirConfig { tau: 0.0, ..Default::default() },
            ReservoirConfig { input_qubit: 5, ..Default::default() },
            ReservoirConfig { n_qubits: 0, ..Default::default() },
        ];
        for cfg in bad {
            assert!(Reservoir::build(cfg).is_err());
        }
    }

    #[test]
    fn injection_examples() {
        let rho = DensityMatrix::maximally_mixed(2).unwrap();
        let out = inject_input(&rho, 1.0, 0).unwrap();
        assert!((out.z_expectations()[0] - 1.0).abs() < 1e-15);
        let out = inject_input(&rho, 0.5, 1).unwrap();
        assert!(out.z_expectations()[1].abs() < 1e-15);
        assert!(inject_input(&rho, 1.5, 0).is_err());
        assert!(inject_input(&rho, 0.5, 2).is_err());
    }

    #[test]
    fn injection_matches_partial_trace_construction() {
        let raw = crate::quantum::CVector::from_fn(8, |i, _| C64::new(libm::cos(i as f64), libm::sin(0.3 * i as f64)));
        let norm = C64::new(raw.norm(), 0.0);
        let psi = crate::quantum::StateVector::from_amplitudes(raw / norm).unwrap();
        let rho = DensityMatrix::from_pure(&psi);
        for q in 0..3 {
            let fast = inject_input(&rho, 0.3, q).unwrap();
            let slow = InputReplacement::new(3, q, 0.3).unwrap().apply_operator(rho.matrix());
            assert!(max_abs_diff(fast.matrix(), &slow) < 1e-15);
        }
    }

    #[test]
    fn last_fraction_is_full_interval() {
        let r = small(3, 4, 1);
        let us = r.fractional_unitaries().unwrap();
        let full = evolve_unitary(r.hamiltonian(), r.config().tau).unwrap();
        assert!(max_abs_diff(&us[3], &full) < 1e-12);
        let mut prod = CMatrix::identity(8, 8);
        for _ in 0..4 {
            prod = &us[0] * prod;
        }
        assert!(max_abs_diff(&prod, &full) < 1e-9);
    }

    #[test]
    fn fast_step_matches_reference() {
        let r = small(3, 5, 2);
        let us = r.fractional_unitaries().unwrap();
        let mut fast = r.initial_state().unwrap();
        let mut rho = fast.density();
        for (k, &x) in [0.1, 0.9, 0.45, 0.0, 1.0, 0.7].iter().enumerate() {
            let s_fast = r.step(&mut fast, x).unwrap();
            let (next, s_ref) = r.step_reference(&rho, x, &us).unwrap();
            rho = next;
            let diff = s_fast.iter().zip(&s_ref).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(diff < 1e-12, "step {k}: {diff}");
            assert!(max_abs_diff(&fast.matrix(), rho.matrix()) < 1e-12);
        }
        assert_eq!(fast.step_index(), 6);
    }

    #[test]
    fn single_virtual_node() {
        let r = small(3, 1, 5);
        let mut s = r.initial_state().unwrap();
        assert_eq!(r.step(&mut s, 0.3).unwrap().len(), 3);
    }

    #[test]
    fn zero_hamiltonian_freezes_signals() {
        let cfg = ReservoirConfig { n_qubits: 3, v_nodes: 4, field: 0.0, j_range: (0.0, 0.0), ..Default::default() };
        let r = Reservoir::build(cfg).unwrap();
        let mut s = r.initial_state().unwrap();
        r.step(&mut s, 0.8).unwrap();
        let sig = r.step(&mut s, 0.25).unwrap();
        for v in 1..=4 {
            assert!((sig[cfg.signal_index(0, v)] - (-0.5)).abs() < 1e-14);
            assert!(sig[cfg.signal_index(1, v)].abs() < 1e-14);
        }
    }

    #[test]
    fn teacher_forced_shape_and_bias() {
        let r = small(3, 2, 1);
        let mut s = r.initial_state().unwrap();
        let m = r.run_teacher_forced(&[0.2, 0.4, 0.6], &mut s).unwrap();
        assert_eq!((m.rows(), m.cols()), (3, 7));
        assert!((0..3).all(|k| m.as_matrix()[(k, 6)] == 1.0));
        assert!(m.as_matrix().columns(0, 6).iter().all(|v| v.abs() <= 1.0 + 1e-12));
        assert!(r.run_teacher_forced(&[], &mut s).is_err());
    }

    #[test]
    fn readout_recovers_a_signal_column() {
        let r = small(3, 2, 4);
        let mut s = r.initial_state().unwrap();
        let inputs: Vec<f64> = (0..60).map(|k| (libm::sin(k as f64) + 1.0) / 2.0).collect();
        let m = r.run_teacher_forced(&inputs, &mut s).unwrap();
        let target: Vec<f64> = (0..60).map(|k| m.as_matrix()[(k, 3)]).collect();
        let w = train_readout(&m, &target, 10).unwrap();
        assert!((w.weights()[3] - 1.0).abs() < 1e-6);
        assert!(matches!(train_readout(&m, &target, 60), Err(Error::WashoutTooLarge { .. })));
    }

    #[test]
    fn autonomous_flags_divergence() {
        let r = small(2, 2, 1);
        let mut s = r.initial_state().unwrap();
        let mut w = alloc::vec![0.0; 5];
        w[4] = 3.0;
        let w = ReadoutWeights::new(nalgebra::DVector::from_vec(w), Vec::new()).unwrap();
        let run = r.run_autonomous(&mut s, &w, 0.5, 10).unwrap();
        assert_eq!(run.diverged_at, Some(0));
        assert_eq!(run.predictions.len(), 1);
    }

    #[test]
    fn autonomous_clamps_are_logged() {
        let r = small(2, 2, 1);
        let mut s = r.initial_state().unwrap();
        let mut w = alloc::vec![0.0; 5];
        w[4] = 1.2;
        let w = ReadoutWeights::new(nalgebra::DVector::from_vec(w), Vec::new()).unwrap();
        let run = r.run_autonomous(&mut s, &w, 0.5, 5).unwrap();
        assert_eq!(run.diverged_at, None);
        assert_eq!(run.clamp_count(), 5);
        assert!(run.inputs[1..].iter().all(|&x| x == 1.0));
    }
}
