#![allow(dead_code)]

use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use uxeval::io::write_csv_file;
use uxeval::oracle::{generate_synthetic, LinearModel, Model, SyntheticKind};
use uxeval::Dataset;

/// Writes `data.csv` and `model.json` (the generating linear model) for a
/// tabular synthetic set and returns the dataset.
pub fn tabular_workspace(dir: &Path, kind: SyntheticKind, n: usize, seed: u64) -> Dataset {
    let synth = generate_synthetic(kind, n, seed).unwrap();
    write_csv_file(&synth.dataset, &dir.join("data.csv")).unwrap();
    let model = Model::Linear(LinearModel::identity(synth.true_weights.unwrap(), 0.0));
    std::fs::write(dir.join("model.json"), model.to_json().unwrap()).unwrap();
    synth.dataset
}

pub fn base_config(explainers: Value, profile: &str, seed: u64) -> Value {
    json!({
        "dataset": {"path": "data.csv"},
        "model": {"params": "model.json"},
        "explainers": explainers,
        "profile": profile,
        "seed": seed
    })
}

pub fn write_config(dir: &Path, config: &Value) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(config).unwrap()).unwrap();
    path
}

pub fn schema() -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/report.schema.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

pub fn assert_schema_valid(report: &Value) {
    let schema = schema();
    let compiled = jsonschema::JSONSchema::compile(&schema).unwrap();
    let msgs: Vec<String> = match compiled.validate(report) {
        Ok(()) => return,
        Err(errors) => errors.map(|e| format!("{} at {}", e, e.instance_path)).collect(),
    };
    panic!("report does not match schema:\n{}", msgs.join("\n"));
}

pub fn rules_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("rules")
}

/// MLP with N(0, 1) weights scaled by `1/sqrt(fan_in)`, drawn from `seed`.
pub fn seeded_mlp(d: usize, hidden: usize, classes: usize, seed: u64) -> uxeval::oracle::MlpModel {
    use rand::Rng;
    use rand_distr::StandardNormal;
    let mut rng = uxeval::RngSpec::new(seed).stream(0, "test/mlp");
    let mut matrix = |rows: usize, cols: usize, scale: f64| -> Vec<Vec<f64>> {
        (0..rows).map(|_| (0..cols).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()).collect()
    };
    let w1 = matrix(hidden, d, 2.0 / (d as f64).sqrt());
    let b1 = matrix(1, hidden, 0.5).remove(0);
    let w2 = matrix(classes, hidden, 2.0 / (hidden as f64).sqrt());
    let b2 = matrix(1, classes, 0.5).remove(0);
    uxeval::oracle::MlpModel::new(w1, b1, w2, b2).unwrap()
}

pub fn seeded_points(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
    use rand::Rng;
    let mut rng = uxeval::RngSpec::new(seed).stream(0, "test/points");
    (0..n).map(|_| (0..d).map(|_| rng.gen_range(-1.5..1.5)).collect()).collect()
}
