//! Golden sample tables in `golden/`: regenerated byte for byte from their
//! configs, and checked against the published column layouts.
//!
//! Set `QRESERVOIR_BLESS=1` to rewrite the samples after an intended change.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use qreservoir::output::schema;
use qreservoir::{execute, ExperimentConfig};

const CASES: [&str; 5] = ["qelm-classify", "qelm-surface", "qcl-fit", "qrc-emulate", "qrc-capacity"];

fn golden_dir(case: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../golden").join(case)
}

fn csv_files(dir: &Path) -> BTreeSet<String> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".csv"))
        .collect()
}

fn run_case(case: &str, out: &Path) -> Vec<String> {
    let mut cfg = ExperimentConfig::load(&golden_dir(case).join("config.toml")).unwrap();
    cfg.output_dir = out.to_path_buf();
    let done = execute(&cfg).unwrap();
    done.manifest["artifacts"].as_array().unwrap().iter().map(|a| a.as_str().unwrap().to_owned()).collect()
}

#[test]
fn samples_regenerate_byte_for_byte() {
    let bless = std::env::var_os("QRESERVOIR_BLESS").is_some();
    for case in CASES {
        let tmp = tempfile::tempdir().unwrap();
        let artifacts = run_case(case, tmp.path());
        let golden = golden_dir(case);
        for name in &artifacts {
            let fresh = fs::read(tmp.path().join(name)).unwrap();
            if bless {
                fs::write(golden.join(name), &fresh).unwrap();
            } else {
                let stored = fs::read(golden.join(name)).unwrap_or_else(|_| panic!("{case}/{name} not in golden set"));
                assert!(fresh == stored, "{case}/{name} differs from the golden sample");
            }
        }
        assert_eq!(csv_files(&golden), artifacts.into_iter().collect::<BTreeSet<_>>(), "{case}");
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    for case in CASES {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let names = run_case(case, a.path());
        assert_eq!(run_case(case, b.path()), names);
        for name in names {
            assert!(fs::read(a.path().join(&name)).unwrap() == fs::read(b.path().join(&name)).unwrap(), "{case}/{name}");
        }
    }
}

fn layout(file: &str) -> &'static [&'static str] {
    match file {
        "dataset.csv" => schema::DATASET,
        "accuracy.csv" => schema::ACCURACY,
        "classify.csv" => schema::CLASSIFY,
        "surface.csv" => schema::SURFACE,
        "trace.csv" => schema::TRACE,
        "fit.csv" => schema::FIT,
        "trajectory.csv" | "one_step.csv" => schema::TRAJECTORY,
        "phase.csv" => schema::PHASE,
        "capacity.csv" | "capacity_esn.csv" | "capacity_linear.csv" => schema::CAPACITY,
        "series.csv" => schema::SERIES,
        other => panic!("no layout for {other}"),
    }
}

fn read_table(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(str::to_owned).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(str::to_owned).collect()).collect();
    (header, rows)
}

fn numeric(cell: &str) -> f64 {
    cell.parse().unwrap_or_else(|_| panic!("`{cell}` is not a number"))
}

#[test]
fn samples_follow_the_published_layouts() {
    for case in CASES {
        for name in csv_files(&golden_dir(case)) {
            let path = golden_dir(case).join(&name);
            let bytes = fs::read(&path).unwrap();
            assert!(bytes.ends_with(b"\r\n"), "{name}: rows end in CRLF");
            let (header, rows) = read_table(&path);
            assert_eq!(header, layout(&name), "{case}/{name}");
            assert!(!rows.is_empty(), "{case}/{name} is empty");
            for row in &rows {
                for (col, cell) in header.iter().zip(row) {
                    match col.as_str() {
                        "circuit_kind" => assert!(["random", "identity", "linear"].contains(&cell.as_str())),
                        "mode" => assert!(["teacher", "autonomous"].contains(&cell.as_str())),
                        "source" => assert!(["truth", "prediction"].contains(&cell.as_str())),
                        "label" | "prediction" if name.starts_with("classify") || name.starts_with("dataset") => {
                            assert!(cell == "0" || cell == "1")
                        }
                        "seed" | "t" if cell.is_empty() => {}
                        _ => assert!(numeric(cell).is_finite(), "{case}/{name}: {col} = {cell}"),
                    }
                }
            }
        }
    }
}

#[test]
fn figure_inputs_carry_what_the_plots_need() {
    // surface: a full square grid with x0 varying slowest
    let (_, rows) = read_table(&golden_dir("qelm-surface").join("surface.csv"));
    let side = (rows.len() as f64).sqrt() as usize;
    assert_eq!(side * side, rows.len());
    assert_eq!(numeric(&rows[0][0]), 0.0);
    assert_eq!(numeric(&rows[side][0]), 1.0 / (side - 1) as f64);
    assert!(rows.iter().all(|r| numeric(&r[2]).abs() <= 1.0 + 1e-12));

    // trajectory: teacher rows then autonomous rows on consecutive steps
    let (_, rows) = read_table(&golden_dir("qrc-emulate").join("trajectory.csv"));
    let switch = rows.iter().position(|r| r[4] == "autonomous").expect("autonomous segment");
    assert!(switch > 0 && rows[..switch].iter().all(|r| r[4] == "teacher"));
    assert!(rows[switch..].iter().all(|r| r[4] == "autonomous"));
    for w in rows.windows(2) {
        assert_eq!(numeric(&w[1][0]), numeric(&w[0][0]) + 1.0);
    }

    // phase: both sources, each a delay embedding of one sequence
    let (_, rows) = read_table(&golden_dir("qrc-emulate").join("phase.csv"));
    for source in ["truth", "prediction"] {
        let pts: Vec<_> = rows.iter().filter(|r| r[0] == source).collect();
        assert!(!pts.is_empty(), "{source}");
        for w in pts.windows(2) {
            assert_eq!(w[0][2], w[1][1], "Hénon phase delay is one step");
        }
    }

    // capacity: delays 0..=max for each model, values in [0, 1]
    for file in ["capacity.csv", "capacity_esn.csv", "capacity_linear.csv"] {
        let (_, rows) = read_table(&golden_dir("qrc-capacity").join(file));
        for (d, r) in rows.iter().enumerate() {
            assert_eq!(r[0], d.to_string());
            assert!((0.0..=1.0 + 1e-12).contains(&numeric(&r[1])), "{file}");
        }
    }

    // classify: best readout on the test set
    let (_, rows) = read_table(&golden_dir("qelm-classify").join("classify.csv"));
    for r in rows {
        assert_eq!(r[4] == "1", numeric(&r[3]) > 0.5);
    }
}
