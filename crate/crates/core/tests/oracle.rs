mod common;

use common::{seeded_mlp, seeded_points};
use serde_json::json;
use uxeval::oracle::{softmax, ExternalConfig, ExternalOracle, Link, LinearModel, MlpModel, Model, Oracle, PrecomputedOracle};
use uxeval::{Error, ErrorClass};

/// Forward pass written out independently of the library.
fn reference_forward(m: &MlpModel, x: &[f64]) -> Vec<f64> {
    let h: Vec<f64> = m.w1.iter().zip(&m.b1).map(|(row, b)| (row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b).tanh()).collect();
    let z: Vec<f64> = m.w2.iter().zip(&m.b2).map(|(row, b)| row.iter().zip(&h).map(|(w, v)| w * v).sum::<f64>() + b).collect();
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|v| v / s).collect()
}

#[test]
fn mlp_forward_matches_reference() {
    let m = seeded_mlp(5, 7, 3, 1);
    for x in seeded_points(10, 5, 2) {
        let got = m.predict_one(&x).unwrap();
        let want = reference_forward(&m, &x);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-14);
        }
        assert!((got.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

fn central_difference(m: &dyn Oracle, x: &[f64], class: usize, h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut up = x.to_vec();
            let mut down = x.to_vec();
            up[i] += h;
            down[i] -= h;
            (m.output(&up, class).unwrap() - m.output(&down, class).unwrap()) / (2.0 * h)
        })
        .collect()
}

#[test]
fn gradients_match_finite_differences() {
    for case in 0..20u64 {
        let m = seeded_mlp(4, 6, 3, 100 + case);
        let x = &seeded_points(1, 4, 200 + case)[0];
        let class = (case % 3) as usize;
        let analytic = m.gradient(x, class).unwrap();
        let numeric = central_difference(&m, x, class, 1e-5);
        let scale = numeric.iter().map(|v| v.abs()).fold(1e-8, f64::max);
        for (a, n) in analytic.iter().zip(&numeric) {
            assert!((a - n).abs() / scale <= 1e-5, "case {case}: {a} vs {n}");
        }
    }
    let soft = LinearModel::new(vec![vec![1.0, -2.0], vec![0.5, 0.3], vec![-1.0, 1.0]], vec![0.1, 0.0, -0.2], Link::Softmax).unwrap();
    let x = [0.3, -0.7];
    for c in 0..3 {
        let analytic = soft.gradient(&x, c).unwrap();
        let numeric = central_difference(&soft, &x, c, 1e-6);
        for (a, n) in analytic.iter().zip(&numeric) {
            assert!((a - n).abs() < 1e-8);
        }
    }
}

#[test]
fn batch_and_single_predictions_agree() {
    let m = seeded_mlp(3, 4, 2, 9);
    let points = seeded_points(17, 3, 10);
    let rows: Vec<&[f64]> = points.iter().map(Vec::as_slice).collect();
    let batch = m.predict(&rows).unwrap();
    for (row, x) in batch.iter().zip(&points) {
        assert_eq!(row, &m.predict_one(x).unwrap());
    }
}

#[test]
fn identity_linear_scores() {
    let m = LinearModel::identity(vec![1.0, 2.0, 0.0], 0.0);
    assert_eq!(m.output(&[1.0, 1.0, 1.0], 0).unwrap(), 3.0);
    assert_eq!(m.gradient(&[5.0, 5.0, 5.0], 0).unwrap(), vec![1.0, 2.0, 0.0]);
}

#[test]
fn model_files_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let m = Model::Mlp(seeded_mlp(2, 3, 2, 4));
    let path = dir.path().join("m.json");
    std::fs::write(&path, m.to_json().unwrap()).unwrap();
    assert_eq!(Model::load(&path).unwrap(), m);
    std::fs::write(&path, json!({"weights": [[1.0, 2.0]], "bias": [0.0, 1.0], "link": "identity"}).to_string()).unwrap();
    assert_eq!(Model::load(&path).unwrap_err().class(), ErrorClass::Config);
}

#[test]
fn softmax_is_stable() {
    let p = softmax(&[1000.0, 1000.0, -1000.0]);
    assert!((p[0] - 0.5).abs() < 1e-15 && p[2] == 0.0);
}

#[test]
fn precomputed_oracle_cannot_serve_new_inputs() {
    let a = [0.0, 1.0];
    let o = PrecomputedOracle::new(&[&a], vec![vec![0.3, 0.7]]).unwrap();
    assert!(!o.is_live());
    assert_eq!(o.predict_one(&a).unwrap(), vec![0.3, 0.7]);
    assert!(matches!(o.predict_one(&[0.5, 0.5]), Err(Error::OracleRequired)));
}

fn python(script: &str, timeout: f64) -> ExternalOracle {
    ExternalOracle::new(ExternalConfig {
        command: vec!["python3".into(), "-u".into(), "-c".into(), script.into()],
        timeout_secs: timeout,
        inputs: 2,
        classes: 2,
    })
    .unwrap()
}

const ECHO: &str = r#"
import json, sys
for line in sys.stdin:
    r = json.loads(line)
    s = sum(r["x"])
    print(json.dumps({"id": r["id"], "y": [s, 1.0 - s]}), flush=True)
"#;

#[test]
fn external_oracle_roundtrip() {
    let o = python(ECHO, 10.0);
    let out = o.predict(&[&[0.25, 0.5], &[0.0, 0.1]]).unwrap();
    assert_eq!(out, vec![vec![0.75, 0.25], vec![0.1, 0.9]]);
    assert_eq!(o.output(&[0.2, 0.2], 1).unwrap(), 0.6);
    assert!(matches!(o.gradient(&[0.0, 0.0], 0), Err(Error::NotDifferentiable)));
}

#[test]
fn external_oracle_protocol_errors() {
    let eof = python("import sys; sys.stdin.readline()", 5.0);
    assert!(matches!(eof.predict(&[&[0.0, 0.0]]), Err(Error::OracleProtocol(_))));

    let wrong_id = python(r#"
import json, sys
for line in sys.stdin:
    print(json.dumps({"id": 999, "y": [0.5, 0.5]}), flush=True)
"#, 5.0);
    assert!(matches!(wrong_id.predict(&[&[0.0, 0.0]]), Err(Error::OracleProtocol(_))));

    let short = python(r#"
import json, sys
for line in sys.stdin:
    r = json.loads(line)
    print(json.dumps({"id": r["id"], "y": [1.0]}), flush=True)
"#, 5.0);
    assert!(matches!(short.predict(&[&[0.0, 0.0]]), Err(Error::OracleProtocol(_))));

    let garbage = python("import sys\nfor l in sys.stdin: print('hello', flush=True)", 5.0);
    assert!(matches!(garbage.predict(&[&[0.0, 0.0]]), Err(Error::OracleProtocol(_))));
}

#[test]
fn external_oracle_timeout() {
    let slow = python("import time; time.sleep(30)", 0.3);
    let start = std::time::Instant::now();
    let err = slow.predict(&[&[0.0, 0.0]]).unwrap_err();
    assert!(matches!(err, Error::OracleTimeout(_)));
    assert_eq!(err.class(), ErrorClass::Oracle);
    assert!(start.elapsed().as_secs_f64() < 5.0);
}
