use qreservoir_core::capacity::{
    capacity_profile, linear_baseline_features, random_inputs, CapacityProfile, CapacitySplit, CapacityTask, InputKind,
};
use qreservoir_core::dynamics::{
    henon_series, lorenz_series, mackey_glass_series, rossler_series, AffineMap, EchoStateNetwork, EsnConfig,
    IntegrationOptions, Lorenz, MackeyGlass, Rossler, TimeSeries,
};
use qreservoir_core::regression::{nmse, nrmse};
use qreservoir_core::reservoir::{train_readout, AutonomousRun, Reservoir};
use serde_json::{json, Value};

use crate::config::{CapacitySection, CapacityTaskKey, EmulateSection, InputKindKey, ReservoirSection, SystemKind};
use crate::error::CliError;
use crate::output::{schema, Cell, Table};
use crate::seeds::{SeedPlan, COUPLINGS, ESN, INPUTS};

/// Closed-loop steps scored against the ground truth.
pub const NRMSE_HORIZON: usize = 50;

const HENON_INITIAL: (f64, f64) = (0.0, 0.0);
const FLOW_INITIAL: [f64; 3] = [1.0, 1.0, 1.0];
const MACKEY_GLASS_HISTORY: f64 = 1.2;

/// Raw scalar series of `system`.
pub fn generate_series(section: &EmulateSection, length: usize) -> Result<TimeSeries, CliError> {
    let opts = IntegrationOptions { dt: section.dt, transient: section.transient(), sample_every: section.sample_every };
    let series = match section.system {
        SystemKind::Henon => henon_series(length, HENON_INITIAL, section.transient())?,
        SystemKind::Lorenz => lorenz_series(length, Lorenz::default(), FLOW_INITIAL, opts)?,
        SystemKind::MackeyGlass => mackey_glass_series(length, MackeyGlass::default(), MACKEY_GLASS_HISTORY, opts)?,
        SystemKind::Rossler => rossler_series(length, Rossler::default(), FLOW_INITIAL, opts)?,
    };
    if series.truncated || series.len() < length {
        return Err(CliError::Runtime(format!("{:?} orbit escaped after {} samples", section.system, series.len())));
    }
    Ok(series)
}

#[derive(Debug, Clone)]
pub struct EmulateReport {
    pub system: SystemKind,
    pub couplings_seed: u64,
    pub series: TimeSeries,
    pub map: AffineMap,
    /// Index of the first training input; earlier rows are washout.
    pub washout: usize,
    pub train_steps: usize,
    /// Raw-unit readout on the training rows.
    pub train_predictions: Vec<f64>,
    /// Raw-unit one-step predictions of the teacher-forced test.
    pub test_predictions: Vec<f64>,
    pub train_nmse: f64,
    pub test_nmse: f64,
    pub autonomous: AutonomousRun,
    pub autonomous_requested: usize,
    /// NRMSE of the first [`NRMSE_HORIZON`] closed-loop steps; `None` when
    /// the run stopped earlier.
    pub nrmse_horizon: Option<f64>,
    /// Test and closed-loop ground-truth samples outside the fitted range.
    pub truth_clamps: usize,
    pub phase_delay: usize,
}

impl EmulateReport {
    /// First input fed in closed loop.
    pub fn switch_step(&self) -> usize {
        self.washout + self.train_steps
    }

    /// Completed closed-loop steps with every readout inside `[0, 1]`.
    pub fn bounded_steps(&self) -> usize {
        self.autonomous.clamped.iter().position(|&c| c).unwrap_or(self.autonomous.predictions.len())
    }

    /// The closed loop ran for every requested step without leaving `[0, 1]`.
    pub fn bounded(&self) -> bool {
        self.bounded_steps() == self.autonomous_requested
    }

    fn truth(&self, k: usize) -> f64 {
        self.series.values[k]
    }

    pub fn tables(&self) -> Vec<Table> {
        let v = &self.series.values;
        let s = self.switch_step();
        let mut trajectory = Table::new("trajectory", schema::TRAJECTORY);
        for (i, &p) in self.train_predictions.iter().enumerate() {
            let k = self.washout + i;
            trajectory.push(vec![k.into(), v[k].into(), v[k + 1].into(), p.into(), "teacher".into()]);
        }
        let auto = self.autonomous.denormalized(&self.map);
        let fed = self.map.denormalize(&self.autonomous.inputs);
        for (j, (&p, &x)) in auto.iter().zip(&fed).enumerate() {
            let k = s + j;
            trajectory.push(vec![k.into(), x.into(), v[k + 1].into(), p.into(), "autonomous".into()]);
        }
        let mut one_step = Table::new("one_step", schema::TRAJECTORY);
        for (j, &p) in self.test_predictions.iter().enumerate() {
            let k = s + j;
            one_step.push(vec![k.into(), v[k].into(), v[k + 1].into(), p.into(), "teacher".into()]);
        }
        let mut phase = Table::new("phase", schema::PHASE);
        let d = self.phase_delay;
        // the reference attractor spans the requested horizon even when the
        // closed loop stopped early
        let truth: Vec<f64> = (0..self.autonomous_requested).map(|j| self.truth(s + 1 + j)).collect();
        for (source, values) in [("truth", &truth), ("prediction", &auto)] {
            for k in 0..values.len().saturating_sub(d) {
                phase.push(vec![source.into(), values[k].into(), values[k + d].into()]);
            }
        }
        let mut series = Table::new("series", schema::SERIES);
        for (k, &x) in v.iter().enumerate() {
            series.push(vec![k.into(), self.series.time(k).into(), x.into()]);
        }
        vec![trajectory, one_step, phase, series]
    }

    pub fn summary(&self) -> Value {
        json!({
            "system": self.system,
            "couplings_seed": self.couplings_seed,
            "train_nmse": self.train_nmse,
            "test_nmse": self.test_nmse,
            "autonomous_requested": self.autonomous_requested,
            "autonomous_completed": self.autonomous.predictions.len(),
            "diverged_at": self.autonomous.diverged_at,
            "bounded_steps": self.bounded_steps(),
            "feedback_clamps": self.autonomous.clamp_count(),
            "truth_clamps": self.truth_clamps,
            "nrmse_first_50": self.nrmse_horizon,
            "normalization": { "scale": self.map.scale, "offset": self.map.offset },
            "switch_step": self.switch_step(),
        })
    }
}

/// Teacher-forced training on the system's series, a one-step-ahead test
/// and a closed-loop run, both started from the state at the end of training.
///
/// The readout maps the signals produced by `u_k` to `u_{k+1}`; inputs are
/// min–max normalized over the training segment.
pub fn emulate(reservoir: &ReservoirSection, section: &EmulateSection, seeds: &mut SeedPlan) -> Result<EmulateReport, CliError> {
    let w = reservoir.washout;
    let t = section.train_steps;
    let s = w + t;
    let length = s + section.test_steps.max(section.autonomous_steps) + 1;
    let series = generate_series(section, length)?;
    let raw = &series.values;
    let map = AffineMap::fit(&raw[..=s])?;
    let (u, _) = map.normalize_clamped(&raw[..=s]);
    let (future, truth_clamps) = map.normalize_clamped(&raw[s + 1..]);

    let couplings_seed = seeds.seed(COUPLINGS);
    let res = Reservoir::build(reservoir.to_config(couplings_seed))?;
    let mut state = res.initial_state()?;
    let signals = res.run_teacher_forced(&u[..s], &mut state)?;
    let weights = train_readout(&signals, &u[1..=s], w)?;
    let fitted = weights.predict(signals.design(w, s)?.as_matrix())?;
    let fitted: Vec<f64> = fitted.iter().copied().collect();
    let train_nmse = nmse(&fitted, &u[w + 1..=s])?;

    let test_inputs: Vec<f64> = std::iter::once(u[s]).chain(future.iter().copied()).take(section.test_steps).collect();
    let mut test_state = state.clone();
    let test_signals = res.run_teacher_forced(&test_inputs, &mut test_state)?;
    let test_pred: Vec<f64> = weights.predict(test_signals.as_matrix())?.iter().copied().collect();
    let test_nmse = nmse(&test_pred, &future[..section.test_steps])?;

    let autonomous = res.run_autonomous(&mut state, &weights, u[s], section.autonomous_steps)?;
    let nrmse_horizon = if autonomous.predictions.len() >= NRMSE_HORIZON {
        Some(nrmse(&autonomous.predictions[..NRMSE_HORIZON], &future[..NRMSE_HORIZON])?)
    } else {
        None
    };

    Ok(EmulateReport {
        system: section.system,
        couplings_seed,
        map,
        washout: w,
        train_steps: t,
        train_predictions: map.denormalize(&fitted),
        test_predictions: map.denormalize(&test_pred),
        train_nmse,
        test_nmse,
        autonomous,
        autonomous_requested: section.autonomous_steps,
        nrmse_horizon,
        truth_clamps,
        phase_delay: section.phase_delay(),
        series,
    })
}

#[derive(Debug, Clone)]
pub struct CapacityReport {
    pub task: CapacityTaskKey,
    pub inputs_seed: u64,
    pub couplings_seed: u64,
    pub esn_seed: u64,
    pub qrc: CapacityProfile,
    pub esn: CapacityProfile,
    pub linear: CapacityProfile,
}

impl CapacityReport {
    pub fn ratio_to_esn(&self) -> f64 {
        self.qrc.total() / self.esn.total()
    }

    pub fn tables(&self) -> Vec<Table> {
        let table = |name, p: &CapacityProfile| {
            let mut t = Table::new(name, schema::CAPACITY);
            for (d, &c) in p.capacities.iter().enumerate() {
                t.push(vec![d.into(), Cell::from(c)]);
            }
            t
        };
        vec![table("capacity", &self.qrc), table("capacity_esn", &self.esn), table("capacity_linear", &self.linear)]
    }

    pub fn summary(&self) -> Value {
        json!({
            "task": self.task,
            "inputs_seed": self.inputs_seed,
            "couplings_seed": self.couplings_seed,
            "esn_seed": self.esn_seed,
            "qrc_total": self.qrc.total(),
            "esn_total": self.esn.total(),
            "linear_total": self.linear.total(),
            "ratio_to_esn": self.ratio_to_esn(),
            "degenerate_delays": { "qrc": self.qrc.degenerate, "esn": self.esn.degenerate, "linear": self.linear.degenerate },
        })
    }
}

/// Capacity profiles of the quantum reservoir, an echo state network and the
/// memoryless linear baseline on one shared i.i.d. input sequence.
pub fn capacity(reservoir: &ReservoirSection, section: &CapacitySection, seeds: &mut SeedPlan) -> Result<CapacityReport, CliError> {
    let split = CapacitySplit { washout: reservoir.washout, train: section.train, test: section.test };
    let kind = match section.input {
        InputKindKey::Uniform => InputKind::Uniform,
        InputKindKey::Binary => InputKind::Binary,
    };
    let task = match section.task {
        CapacityTaskKey::Stm => CapacityTask::ShortTermMemory,
        CapacityTaskKey::Parity => CapacityTask::Parity,
    };
    let inputs_seed = seeds.seed(INPUTS);
    let inputs = random_inputs(split.total(), kind, inputs_seed);

    let couplings_seed = seeds.seed(COUPLINGS);
    let res = Reservoir::build(reservoir.to_config(couplings_seed))?;
    let mut state = res.initial_state()?;
    let signals = res.run_teacher_forced(&inputs, &mut state)?;
    let qrc = capacity_profile(signals.as_matrix(), &inputs, task, section.max_delay, split)?;

    let esn_seed = seeds.seed(ESN);
    let esn = EchoStateNetwork::new(EsnConfig {
        nodes: section.esn_nodes,
        spectral_radius: section.esn_spectral_radius,
        input_scale: section.esn_input_scale,
        seed: esn_seed,
    })?;
    let states = esn.run(&inputs)?;
    let cols = states.ncols();
    let esn = capacity_profile(&states.insert_column(cols, 1.0), &inputs, task, section.max_delay, split)?;

    let linear = capacity_profile(&linear_baseline_features(&inputs), &inputs, task, section.max_delay, split)?;
    Ok(CapacityReport { task: section.task, inputs_seed, couplings_seed, esn_seed, qrc, esn, linear })
}
