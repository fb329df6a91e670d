use qreservoir_core::qcl::{grid_dataset, quadratic_target, random_params, ParameterizedCircuit, QclModel, TrainOptions, TrainTrace};
use qreservoir_core::qelm::EncodingSpec;
use qreservoir_core::quantum::Observable;
use qreservoir_core::regression::mse;
use serde_json::{json, Value};

use crate::config::{QclSection, QclTarget};
use crate::error::CliError;
use crate::output::{schema, Table};
use crate::seeds::{SeedPlan, PARAMS};

/// Fit quality reported as convergence.
pub const MSE_TARGET: f64 = 0.01;

#[derive(Debug, Clone)]
pub struct QclReport {
    pub params_seed: u64,
    pub trace: TrainTrace,
    /// `(x, target, prediction)` with the final parameters.
    pub fit: Vec<(f64, f64, f64)>,
    /// Mean squared error of the final fit.
    pub final_mse: f64,
    /// First iteration whose mean squared error is below [`MSE_TARGET`].
    pub converged_at: Option<usize>,
}

impl QclReport {
    pub fn tables(&self) -> Vec<Table> {
        let mut trace = Table::new("trace", schema::TRACE);
        for r in &self.trace.records {
            trace.push(vec![r.iter.into(), r.loss.into(), r.grad_norm.into()]);
        }
        let mut fit = Table::new("fit", schema::FIT);
        for &(x, y, p) in &self.fit {
            fit.push(vec![x.into(), y.into(), p.into()]);
        }
        vec![trace, fit]
    }

    pub fn summary(&self) -> Value {
        json!({
            "params_seed": self.params_seed,
            "initial_loss": self.trace.initial_loss(),
            "final_loss": self.trace.final_loss(),
            "final_mse": self.final_mse,
            "converged_at": self.converged_at,
            "diverged": self.trace.diverged,
        })
    }
}

/// Gradient descent with parameter-shift gradients on a one-dimensional
/// regression target sampled on an even grid.
pub fn fit(section: &QclSection, seeds: &mut SeedPlan) -> Result<QclReport, CliError> {
    let target = match section.target {
        QclTarget::Quadratic => quadratic_target,
    };
    let data = grid_dataset(section.points, target)?;
    let n = section.n_qubits;
    let circuit = ParameterizedCircuit::layered(n, section.layers)?;
    let init = random_params(circuit.n_params(), seeds.seed(PARAMS));
    let model = QclModel::new(Some(EncodingSpec::uniform(n)), circuit, Observable::pauli_z(n, section.readout_qubit)?)?;
    let opts = TrainOptions { alpha: section.alpha, iters: section.iters, eps: section.eps };
    let trace = model.train(&data, &init, opts)?;
    // the recorded loss is summed over the grid
    let count = data.len() as f64;
    let converged_at = trace.records.iter().find(|r| r.loss / count < MSE_TARGET).map(|r| r.iter);
    let phi = trace.final_params();
    let fit = data
        .iter()
        .map(|s| Ok((s.x[0], s.y, model.forward(&s.x, phi)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let preds: Vec<f64> = fit.iter().map(|p| p.2).collect();
    let truth: Vec<f64> = fit.iter().map(|p| p.1).collect();
    let final_mse = mse(&preds, &truth)?;
    Ok(QclReport { params_seed: seeds.issued()[PARAMS], trace, fit, final_mse, converged_at })
}
