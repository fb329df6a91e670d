//! TOML experiment configuration.
//!
//! A config names one experiment kind, a global seed and an output
//! directory, plus the sections that experiment reads. Section keys mirror
//! the library's configuration fields; omitted keys take the documented
//! defaults, unknown keys are rejected.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::path::{Path, PathBuf};

use qreservoir_core::dynamics::{IntegrationOptions, DEFAULT_DT};
use qreservoir_core::reservoir::{InitialState, ReservoirConfig};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Environment variable that replaces the working directory as the base of
/// relative output directories.
pub const OUTPUT_ROOT_ENV: &str = "QRESERVOIR_OUTPUT_ROOT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    QelmClassify,
    QelmSurface,
    QclFit,
    QrcEmulate,
    QrcCapacity,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::QelmClassify,
        ExperimentKind::QelmSurface,
        ExperimentKind::QclFit,
        ExperimentKind::QrcEmulate,
        ExperimentKind::QrcCapacity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::QelmClassify => "qelm-classify",
            ExperimentKind::QelmSurface => "qelm-surface",
            ExperimentKind::QclFit => "qcl-fit",
            ExperimentKind::QrcEmulate => "qrc-emulate",
            ExperimentKind::QrcCapacity => "qrc-capacity",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ExperimentKind::QelmClassify => "random-circuit extreme learning machine on the circle dataset",
            ExperimentKind::QelmSurface => "readout <Z> of a random circuit over the input square",
            ExperimentKind::QclFit => "gradient-descent fit of a parameterized circuit to a 1-d target",
            ExperimentKind::QrcEmulate => "teacher-forced training and autonomous emulation of a chaotic series",
            ExperimentKind::QrcCapacity => "memory capacity of the reservoir against an echo state network",
        }
    }

    /// Sections this experiment reads; every other section is rejected.
    pub fn sections(self) -> &'static [Section] {
        match self {
            ExperimentKind::QelmClassify => &[Section::Qelm],
            ExperimentKind::QelmSurface => &[Section::Surface],
            ExperimentKind::QclFit => &[Section::Qcl],
            ExperimentKind::QrcEmulate => &[Section::Reservoir, Section::Emulate],
            ExperimentKind::QrcCapacity => &[Section::Reservoir, Section::Capacity],
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Section {
    Qelm,
    Surface,
    Qcl,
    Reservoir,
    Emulate,
    Capacity,
}

impl Section {
    const ALL: [Section; 6] =
        [Section::Qelm, Section::Surface, Section::Qcl, Section::Reservoir, Section::Emulate, Section::Capacity];

    pub fn key(self) -> &'static str {
        match self {
            Section::Qelm => "qelm",
            Section::Surface => "surface",
            Section::Qcl => "qcl",
            Section::Reservoir => "reservoir",
            Section::Emulate => "emulate",
            Section::Capacity => "capacity",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qelm: Option<QelmSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface: Option<SurfaceSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qcl: Option<QclSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reservoir: Option<ReservoirSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emulate: Option<EmulateSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<CapacitySection>,
}

/// Circle classification with random-circuit features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QelmSection {
    pub n_qubits: usize,
    pub train_size: usize,
    pub test_size: usize,
    /// Independent random circuits; the identity and linear baselines run once.
    pub repetitions: usize,
}

impl Default for QelmSection {
    fn default() -> Self {
        QelmSection { n_qubits: 8, train_size: 1000, test_size: 1000, repetitions: 5 }
    }
}

/// `<Z>` of one qubit over a regular grid of inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SurfaceSection {
    pub n_qubits: usize,
    /// Points per axis, including both ends of `[0, 1]`.
    pub grid: usize,
    pub readout_qubit: usize,
}

impl Default for SurfaceSection {
    fn default() -> Self {
        SurfaceSection { n_qubits: 8, grid: 41, readout_qubit: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QclTarget {
    /// `(2x − 1)²`.
    Quadratic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QclSection {
    pub n_qubits: usize,
    pub layers: usize,
    pub points: usize,
    pub target: QclTarget,
    pub alpha: f64,
    pub iters: usize,
    /// Parameter-shift offset; must lie in `(0, π)`.
    pub eps: f64,
    pub readout_qubit: usize,
}

impl Default for QclSection {
    fn default() -> Self {
        QclSection {
            n_qubits: 3,
            layers: 2,
            points: 20,
            target: QclTarget::Quadratic,
            alpha: 0.01,
            iters: 500,
            eps: FRAC_PI_2,
            readout_qubit: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialStateKey {
    MaximallyMixed,
    Zero,
}

/// Reservoir hyper-parameters; the coupling seed is derived from the global seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReservoirSection {
    pub n_qubits: usize,
    pub j_range: [f64; 2],
    pub h: f64,
    pub tau: f64,
    pub v_nodes: usize,
    pub input_qubit: usize,
    pub washout: usize,
    pub initial: InitialStateKey,
    pub bias: bool,
}

impl Default for ReservoirSection {
    fn default() -> Self {
        let d = ReservoirConfig::default();
        ReservoirSection {
            n_qubits: d.n_qubits,
            j_range: [d.j_range.0, d.j_range.1],
            h: d.field,
            tau: d.tau,
            v_nodes: d.v_nodes,
            input_qubit: d.input_qubit,
            washout: d.washout,
            initial: InitialStateKey::MaximallyMixed,
            bias: d.bias,
        }
    }
}

impl ReservoirSection {
    pub fn to_config(&self, seed: u64) -> ReservoirConfig {
        ReservoirConfig {
            n_qubits: self.n_qubits,
            j_range: (self.j_range[0], self.j_range[1]),
            field: self.h,
            tau: self.tau,
            v_nodes: self.v_nodes,
            input_qubit: self.input_qubit,
            seed,
            washout: self.washout,
            initial: match self.initial {
                InitialStateKey::MaximallyMixed => InitialState::MaximallyMixed,
                InitialStateKey::Zero => InitialState::Zero,
            },
            bias: self.bias,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    Henon,
    Lorenz,
    MackeyGlass,
    Rossler,
}

impl SystemKind {
    pub fn is_continuous(self) -> bool {
        self != SystemKind::Henon
    }

    /// Phase-diagram delay in samples when the config leaves it unset.
    pub fn default_phase_delay(self) -> usize {
        match self {
            SystemKind::Henon => 1,
            SystemKind::Lorenz => 10,
            SystemKind::Rossler => 75,
            SystemKind::MackeyGlass => 850,
        }
    }

    /// Discarded iterations before the first sample.
    pub fn default_transient(self) -> usize {
        match self {
            SystemKind::Henon => 100,
            _ => IntegrationOptions::default().transient,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmulateSection {
    pub system: SystemKind,
    pub train_steps: usize,
    /// Teacher-forced steps after training, scored one step ahead.
    pub test_steps: usize,
    /// Closed-loop steps, started from the state at the end of training.
    pub autonomous_steps: usize,
    /// Integration step for continuous systems.
    pub dt: f64,
    pub sample_every: usize,
    /// Iterations discarded before the first sample; system default when unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transient: Option<usize>,
    /// Delay of the phase diagram in samples; system default when unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_delay: Option<usize>,
}

impl Default for EmulateSection {
    fn default() -> Self {
        EmulateSection {
            system: SystemKind::Henon,
            train_steps: 10_000,
            test_steps: 1000,
            autonomous_steps: 1000,
            dt: DEFAULT_DT,
            sample_every: 1,
            transient: None,
            phase_delay: None,
        }
    }
}

impl EmulateSection {
    pub fn transient(&self) -> usize {
        self.transient.unwrap_or_else(|| self.system.default_transient())
    }

    pub fn phase_delay(&self) -> usize {
        self.phase_delay.unwrap_or_else(|| self.system.default_phase_delay())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CapacityTaskKey {
    Stm,
    Parity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputKindKey {
    Uniform,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CapacitySection {
    pub task: CapacityTaskKey,
    pub input: InputKindKey,
    pub max_delay: usize,
    pub train: usize,
    pub test: usize,
    pub esn_nodes: usize,
    pub esn_spectral_radius: f64,
    pub esn_input_scale: f64,
}

impl Default for CapacitySection {
    fn default() -> Self {
        CapacitySection {
            task: CapacityTaskKey::Stm,
            input: InputKindKey::Uniform,
            max_delay: 60,
            train: 10_000,
            test: 5000,
            esn_nodes: 100,
            esn_spectral_radius: 0.95,
            esn_input_scale: 1.0,
        }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

pub(crate) fn require<T>(section: &Option<T>, s: Section) -> Result<&T, CliError> {
    section.as_ref().ok_or_else(|| invalid(format!("missing section `{}`", s.key())))
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| invalid(e.message().to_owned()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn present(&self, s: Section) -> bool {
        match s {
            Section::Qelm => self.qelm.is_some(),
            Section::Surface => self.surface.is_some(),
            Section::Qcl => self.qcl.is_some(),
            Section::Reservoir => self.reservoir.is_some(),
            Section::Emulate => self.emulate.is_some(),
            Section::Capacity => self.capacity.is_some(),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let wanted = self.experiment.sections();
        for s in Section::ALL {
            if self.present(s) && !wanted.contains(&s) {
                return Err(invalid(format!("section `{}` is not used by experiment {}", s.key(), self.experiment)));
            }
        }
        match self.experiment {
            ExperimentKind::QelmClassify => validate_qelm(require(&self.qelm, Section::Qelm)?),
            ExperimentKind::QelmSurface => validate_surface(require(&self.surface, Section::Surface)?),
            ExperimentKind::QclFit => validate_qcl(require(&self.qcl, Section::Qcl)?),
            ExperimentKind::QrcEmulate => {
                let r = require(&self.reservoir, Section::Reservoir)?;
                validate_reservoir(r)?;
                validate_emulate(require(&self.emulate, Section::Emulate)?)
            }
            ExperimentKind::QrcCapacity => {
                let r = require(&self.reservoir, Section::Reservoir)?;
                validate_reservoir(r)?;
                validate_capacity(require(&self.capacity, Section::Capacity)?, r)
            }
        }
    }

    /// Output directory, resolved against [`OUTPUT_ROOT_ENV`] when relative.
    pub fn resolved_output_dir(&self) -> PathBuf {
        resolve_output_dir(&self.output_dir, std::env::var_os(OUTPUT_ROOT_ENV).map(PathBuf::from).as_deref())
    }
}

/// `dir` itself when absolute, otherwise `root/dir` (or `dir` without a root).
pub fn resolve_output_dir(dir: &Path, root: Option<&Path>) -> PathBuf {
    match root {
        Some(root) if dir.is_relative() => root.join(dir),
        _ => dir.to_path_buf(),
    }
}

fn positive(value: usize, key: &str) -> Result<(), CliError> {
    if value == 0 {
        return Err(invalid(format!("`{key}` must be at least 1")));
    }
    Ok(())
}

fn qubits(n: usize, key: &str) -> Result<(), CliError> {
    if !(1..=qreservoir_core::quantum::DEFAULT_MAX_QUBITS).contains(&n) {
        return Err(invalid(format!(
            "`{key}` = {n} outside 1..={}",
            qreservoir_core::quantum::DEFAULT_MAX_QUBITS
        )));
    }
    Ok(())
}

fn validate_qelm(s: &QelmSection) -> Result<(), CliError> {
    qubits(s.n_qubits, "qelm.n_qubits")?;
    positive(s.train_size, "qelm.train_size")?;
    positive(s.test_size, "qelm.test_size")?;
    positive(s.repetitions, "qelm.repetitions")
}

fn validate_surface(s: &SurfaceSection) -> Result<(), CliError> {
    qubits(s.n_qubits, "surface.n_qubits")?;
    if s.grid < 2 {
        return Err(invalid("`surface.grid` must be at least 2"));
    }
    if s.readout_qubit >= s.n_qubits {
        return Err(invalid("`surface.readout_qubit` must be below `surface.n_qubits`"));
    }
    Ok(())
}

fn validate_qcl(s: &QclSection) -> Result<(), CliError> {
    qubits(s.n_qubits, "qcl.n_qubits")?;
    positive(s.layers, "qcl.layers")?;
    if s.points < 2 {
        return Err(invalid("`qcl.points` must be at least 2"));
    }
    if !(s.alpha > 0.0 && s.alpha.is_finite()) {
        return Err(invalid("`qcl.alpha` must be positive and finite"));
    }
    if !(s.eps > 0.0 && s.eps < std::f64::consts::PI) {
        return Err(invalid("`qcl.eps` must lie in (0, π)"));
    }
    if s.readout_qubit >= s.n_qubits {
        return Err(invalid("`qcl.readout_qubit` must be below `qcl.n_qubits`"));
    }
    Ok(())
}

fn validate_reservoir(s: &ReservoirSection) -> Result<(), CliError> {
    s.to_config(0).validate().map_err(|e| invalid(format!("reservoir: {e}")))
}

fn validate_emulate(s: &EmulateSection) -> Result<(), CliError> {
    positive(s.train_steps, "emulate.train_steps")?;
    if s.test_steps < 2 {
        return Err(invalid("`emulate.test_steps` must be at least 2"));
    }
    positive(s.autonomous_steps, "emulate.autonomous_steps")?;
    positive(s.sample_every, "emulate.sample_every")?;
    positive(s.phase_delay(), "emulate.phase_delay")?;
    if !(s.dt > 0.0 && s.dt.is_finite()) {
        return Err(invalid("`emulate.dt` must be positive and finite"));
    }
    Ok(())
}

fn validate_capacity(s: &CapacitySection, r: &ReservoirSection) -> Result<(), CliError> {
    positive(s.train, "capacity.train")?;
    positive(s.test, "capacity.test")?;
    positive(s.esn_nodes, "capacity.esn_nodes")?;
    if r.washout < s.max_delay {
        return Err(invalid("`reservoir.washout` must cover `capacity.max_delay`"));
    }
    if s.task == CapacityTaskKey::Parity && s.input != InputKindKey::Binary {
        return Err(invalid("parity capacity needs `capacity.input = \"binary\"`"));
    }
    if !(s.esn_spectral_radius >= 0.0 && s.esn_spectral_radius.is_finite() && s.esn_input_scale.is_finite()) {
        return Err(invalid("esn scales must be finite and the spectral radius non-negative"));
    }
    Ok(())
}
