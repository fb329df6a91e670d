use qreservoir_core::qelm::{
    generate_circle_dataset, z_features, CircuitKind, EncodingSpec, FeatureMap, LabeledDataset, RandomCircuit, THRESHOLD,
};
use serde_json::{json, Value};

use crate::config::{QelmSection, SurfaceSection};
use crate::error::CliError;
use crate::output::{schema, Cell, Table};
use crate::seeds::{SeedPlan, CIRCUIT, DATASET};

/// Feature map behind one accuracy row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Random,
    Identity,
    Linear,
}

impl ModelKind {
    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Random => "random",
            ModelKind::Identity => "identity",
            ModelKind::Linear => "linear",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyRow {
    /// Circuit seed; `None` for models without a random circuit.
    pub seed: Option<u64>,
    pub n_qubits: usize,
    pub kind: ModelKind,
    pub train_acc: f64,
    pub test_acc: f64,
}

#[derive(Debug, Clone)]
pub struct ClassifyReport {
    pub rows: Vec<AccuracyRow>,
    pub train: LabeledDataset,
    pub test: LabeledDataset,
    /// Index into `rows` of the random circuit with the best test accuracy.
    pub best: usize,
    /// Readout of the best circuit on the test set.
    pub best_readout: Vec<f64>,
}

impl ClassifyReport {
    fn row(&self, kind: ModelKind) -> &AccuracyRow {
        self.rows.iter().find(|r| r.kind == kind).expect("every baseline is evaluated")
    }

    pub fn best_random(&self) -> &AccuracyRow {
        &self.rows[self.best]
    }

    pub fn identity(&self) -> &AccuracyRow {
        self.row(ModelKind::Identity)
    }

    pub fn linear(&self) -> &AccuracyRow {
        self.row(ModelKind::Linear)
    }

    pub fn tables(&self) -> Vec<Table> {
        let mut dataset = Table::new("dataset", schema::DATASET);
        for (x, &l) in self.train.inputs().iter().zip(self.train.labels()) {
            dataset.push(vec![x[0].into(), x[1].into(), l.into()]);
        }
        let mut accuracy = Table::new("accuracy", schema::ACCURACY);
        for r in &self.rows {
            accuracy.push(vec![
                r.seed.map_or(Cell::Empty, Cell::from),
                r.n_qubits.into(),
                r.kind.label().into(),
                r.train_acc.into(),
                r.test_acc.into(),
            ]);
        }
        let mut classify = Table::new("classify", schema::CLASSIFY);
        for ((x, &l), &y) in self.test.inputs().iter().zip(self.test.labels()).zip(&self.best_readout) {
            classify.push(vec![x[0].into(), x[1].into(), l.into(), y.into(), u8::from(y > THRESHOLD).into()]);
        }
        vec![dataset, accuracy, classify]
    }

    pub fn summary(&self) -> Value {
        let best = self.best_random();
        json!({
            "best_seed": best.seed,
            "best_test_acc": best.test_acc,
            "identity_test_acc": self.identity().test_acc,
            "linear_test_acc": self.linear().test_acc,
        })
    }
}

fn evaluate(map: &FeatureMap<'_>, train: &LabeledDataset, test: &LabeledDataset) -> Result<(f64, f64, Vec<f64>), CliError> {
    let w = map.train(train)?;
    let train_acc = map.accuracy(train, &w)?;
    let readout = map.readout(test, &w)?;
    let test_acc = map.accuracy(test, &w)?;
    Ok((train_acc, test_acc, readout))
}

/// Random circuits, the identity circuit and the plain linear readout on one
/// train/test split of the circle dataset.
pub fn classify(section: &QelmSection, seeds: &mut SeedPlan) -> Result<ClassifyReport, CliError> {
    let train = generate_circle_dataset(section.train_size, seeds.indexed(DATASET, 0))?;
    let test = generate_circle_dataset(section.test_size, seeds.indexed(DATASET, 1))?;
    let n = section.n_qubits;
    let spec = EncodingSpec::uniform(n);
    let mut rows = Vec::with_capacity(section.repetitions + 2);
    let mut best: Option<(usize, Vec<f64>)> = None;
    for r in 0..section.repetitions {
        let seed = seeds.indexed(CIRCUIT, r);
        let circuit = RandomCircuit::generate(n, seed)?;
        let (train_acc, test_acc, readout) =
            evaluate(&FeatureMap::Quantum { circuit: &circuit, spec: &spec }, &train, &test)?;
        // ties keep the earliest repetition
        if best.as_ref().is_none_or(|(i, _)| test_acc > rows.get(*i).map_or(f64::NEG_INFINITY, |b: &AccuracyRow| b.test_acc)) {
            best = Some((rows.len(), readout));
        }
        rows.push(AccuracyRow { seed: Some(seed), n_qubits: n, kind: ModelKind::Random, train_acc, test_acc });
    }
    let identity = RandomCircuit::build(CircuitKind::Identity, n, 0)?;
    let (train_acc, test_acc, _) = evaluate(&FeatureMap::Quantum { circuit: &identity, spec: &spec }, &train, &test)?;
    rows.push(AccuracyRow { seed: None, n_qubits: n, kind: ModelKind::Identity, train_acc, test_acc });
    let (train_acc, test_acc, _) = evaluate(&FeatureMap::Linear, &train, &test)?;
    rows.push(AccuracyRow { seed: None, n_qubits: 0, kind: ModelKind::Linear, train_acc, test_acc });
    let (best, best_readout) = best.expect("at least one repetition");
    Ok(ClassifyReport { rows, train, test, best, best_readout })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceReport {
    pub circuit_seed: u64,
    /// `(x0, x1, ⟨Z⟩)` with `x0` varying slowest.
    pub points: Vec<(f64, f64, f64)>,
}

impl SurfaceReport {
    pub fn tables(&self) -> Vec<Table> {
        let mut t = Table::new("surface", schema::SURFACE);
        for &(x0, x1, z) in &self.points {
            t.push(vec![x0.into(), x1.into(), z.into()]);
        }
        vec![t]
    }

    pub fn summary(&self) -> Value {
        let zs = self.points.iter().map(|p| p.2);
        let lo = zs.clone().fold(f64::INFINITY, f64::min);
        let hi = zs.fold(f64::NEG_INFINITY, f64::max);
        json!({ "circuit_seed": self.circuit_seed, "points": self.points.len(), "z_min": lo, "z_max": hi })
    }
}

/// `⟨Z_q⟩` of a random circuit over a grid on `[0, 1]²`, with the scaled
/// angle rule `θ_{2k} = k·acos√x0`, `θ_{2k+1} = k·acos√x1`.
pub fn surface(section: &SurfaceSection, seeds: &mut SeedPlan) -> Result<SurfaceReport, CliError> {
    let circuit_seed = seeds.seed(CIRCUIT);
    let circuit = RandomCircuit::generate(section.n_qubits, circuit_seed)?;
    let spec = EncodingSpec::scaled(section.n_qubits);
    let g = section.grid;
    let mut points = Vec::with_capacity(g * g);
    for i in 0..g {
        for j in 0..g {
            let x0 = i as f64 / (g - 1) as f64;
            let x1 = j as f64 / (g - 1) as f64;
            let z = z_features(&[x0, x1], &circuit, &spec)?[section.readout_qubit];
            points.push((x0, x1, z));
        }
    }
    Ok(SurfaceReport { circuit_seed, points })
}
