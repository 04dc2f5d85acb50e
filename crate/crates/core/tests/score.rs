use proptest::prelude::*;
use serde_json::json;
use uxeval::score::{
    adapt_weights, builtin_profiles, detect_drift, parse_rules, psi, weighted_score, DomainProfile, DriftReport,
    ScoreBreakdown, BUILTIN_NAMES,
};
use uxeval::{Criteria, Criterion, MetricVector};

fn scores() -> impl Strategy<Value = [f64; 5]> {
    prop::array::uniform5(1.0f64..=5.0)
}

fn weights() -> impl Strategy<Value = Criteria<f64>> {
    prop::array::uniform5(0.0f64..1.0).prop_filter_map("all zero", |w| {
        let sum: f64 = w.iter().sum();
        (sum > 1e-3).then(|| Criteria::from_array(w.map(|v| v / sum)))
    })
}

fn drift(features: bool, predictions: bool) -> DriftReport {
    DriftReport {
        bins: 10,
        features: Vec::new(),
        feature_drift: features,
        prediction_psi: None,
        prediction_drift: predictions,
    }
}

proptest! {
    #[test]
    fn score_is_monotone(s in scores(), w in weights(), i in 0usize..5, bump in 0.0f64..4.0) {
        let base = weighted_score(&Criteria::from_array(s), &w).unwrap();
        let mut t = s;
        t[i] = (t[i] + bump).min(5.0);
        prop_assert!(weighted_score(&Criteria::from_array(t), &w).unwrap() >= base - 1e-12);
    }

    #[test]
    fn equal_weights_give_the_mean(raw in prop::array::uniform5(0.0f64..=1.0)) {
        let b = ScoreBreakdown::from_raw(&MetricVector::from_array(raw), &Criteria::splat(0.2)).unwrap();
        let mean = b.scores.to_array().iter().sum::<f64>() / 5.0;
        prop_assert!((b.total - mean).abs() <= 1e-12);
    }

    #[test]
    fn dominance_is_preserved(s in scores(), gaps in prop::array::uniform5(0.0f64..4.0)) {
        let mut better = s;
        for i in 0..5 {
            better[i] = (s[i] + gaps[i]).min(5.0);
        }
        for p in builtin_profiles() {
            let a = weighted_score(&Criteria::from_array(better), &p.weights).unwrap();
            let b = weighted_score(&Criteria::from_array(s), &p.weights).unwrap();
            prop_assert!(a >= b - 1e-12, "{}", p.name);
        }
    }

    #[test]
    fn adaptation_conserves_weight(
        profile in 0usize..4,
        picks in prop::collection::btree_set(0usize..5, 1..4),
        deltas in prop::array::uniform4(-30.0f64..30.0),
        floors in prop::array::uniform4(0.0f64..0.3),
        spans in prop::array::uniform4(0.0f64..0.7),
        on_predictions in any::<bool>(),
    ) {
        let rules: Vec<_> = picks
            .iter()
            .enumerate()
            .map(|(k, &c)| json!({
                "trigger": if on_predictions && k == 0 { "drift-on-predictions" } else { "drift-on-features" },
                "criterion": Criterion::ALL[c].name(),
                "delta": deltas[k],
                "floor": floors[k],
                "cap": (floors[k] + spans[k]).min(1.0),
            }))
            .collect();
        let parsed = parse_rules(&json!(rules).to_string());
        prop_assume!(parsed.is_ok());
        let rules = parsed.unwrap();
        let p = DomainProfile::builtin(BUILTIN_NAMES[profile]).unwrap();
        let (adapted, log) = adapt_weights(&p, &rules, &drift(true, true));
        prop_assert!(log.is_some());
        let w = adapted.weights;
        prop_assert!((w.to_array().iter().sum::<f64>() - 1.0).abs() <= 1e-9, "{w:?}");
        for r in &rules {
            prop_assert!(w[r.criterion] >= r.floor - 1e-12 && w[r.criterion] <= r.cap + 1e-12, "{w:?}");
        }
        prop_assert!(w.to_array().iter().all(|v| (0.0..=1.0).contains(v)));
    }
}

#[test]
fn builtin_profiles_match_published_percentages() {
    let expected = [
        ("healthcare", [25, 30, 10, 10, 25]),
        ("finance", [20, 25, 15, 25, 15]),
        ("agriculture", [20, 30, 15, 10, 25]),
        ("security", [25, 20, 15, 20, 20]),
    ];
    let profiles = builtin_profiles();
    assert_eq!(profiles.len(), 4);
    for (name, pct) in expected {
        let p = DomainProfile::builtin(name).unwrap();
        assert_eq!(p.weights.to_array(), pct.map(|v| f64::from(v) / 100.0));
        assert_eq!(pct.iter().sum::<i32>(), 100);
        assert!((p.weights.to_array().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn no_drift_keeps_the_profile() {
    let rules = parse_rules(r#"[{"trigger": "drift-on-features", "criterion": "robustness", "delta": 5}]"#).unwrap();
    let p = DomainProfile::builtin("finance").unwrap();
    let (same, log) = adapt_weights(&p, &rules, &drift(false, true));
    assert_eq!((same, log), (p, None));
}

#[test]
fn psi_identical_and_shifted() {
    let reference: Vec<f64> = (0..200).map(|i| ((i * 37) % 200) as f64 / 20.0).collect();
    assert!(psi(&reference, &reference, 10).unwrap().abs() <= 1e-12);
    let shifted: Vec<f64> = reference.iter().map(|v| v + 5.0).collect();
    assert!(psi(&reference, &shifted, 10).unwrap() > 0.2);
    assert!(psi(&reference[..5], &shifted, 10).is_err());

    let rows: Vec<Vec<f64>> = reference.iter().map(|&v| vec![v, -v]).collect();
    let moved: Vec<Vec<f64>> = rows.iter().map(|r| vec![r[0], r[1] + 50.0]).collect();
    let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    let cur: Vec<&[f64]> = moved.iter().map(Vec::as_slice).collect();
    let names = vec!["a".to_string(), "b".to_string()];
    let report = detect_drift(&refs, &cur, &names, 10).unwrap();
    assert!(report.feature_drift && report.any());
    assert!(report.features[0].psi.abs() <= 1e-12);
    assert!(report.features[1].psi > 0.2);
}
