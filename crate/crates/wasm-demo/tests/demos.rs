use nonmarkov_wasm::{dephasing, dephasing_demo, spin_boson, trace_replacement};

#[test]
fn dephasing_demo_flags_negative_rate() {
    let r = dephasing(1.0, 0.0, 129).unwrap();
    assert!(!r.markovian);
    assert_eq!(r.curves.len(), 2);
    let n = r.measures.iter().find(|(k, _)| k == "n_rhp").unwrap().1;
    assert!((n - 2.0).abs() < 2e-2, "{n}");
    let markov = dephasing(0.5, 1.0, 129).unwrap();
    assert!(markov.markovian);
    assert!(markov.measures.iter().all(|(_, v)| *v == 0.0));
}

#[test]
fn trace_replacement_demo_separates_blp() {
    let r = trace_replacement(1.17, 129).unwrap();
    assert!(!r.markovian);
    let get = |k: &str| r.measures.iter().find(|(n, _)| n == k).unwrap().1;
    assert_eq!(get("n_blp"), 0.0);
    assert!(get("n_witness") > 0.0);
    assert!(r.curves[0].values.iter().all(|&v| v >= -1e-9));
}

#[test]
fn spin_boson_demo_reports_backflow() {
    let r = spin_boson(4.0, 1.0, 8.0, 801).unwrap();
    assert!(!r.markovian);
    assert_eq!(r.curves.len(), 3);
    assert!(r.curves[0].values.iter().all(|&p| (0.0..=1.0 + 1e-9).contains(&p)));
    assert!(r.curves[1].values.iter().any(|&v| v > 0.0));
}

#[test]
fn json_is_well_formed() {
    let text = dephasing_demo(1.0, 0.0, 65).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["markovian"], false);
    assert!(v["verdict"]["violation_intervals"].as_array().is_some_and(|a| !a.is_empty()));
}

#[test]
fn bad_parameters_are_errors() {
    assert!(spin_boson(-1.0, 1.0, 5.0, 101).is_err());
    assert!(spin_boson(1.0, 1.0, -5.0, 101).is_err());
}
