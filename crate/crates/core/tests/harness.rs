use lrcone::harness::emit::{front_table, sweep_table, SWEEP_COLUMNS};
use lrcone::harness::{default_front_threshold, front_from_sweep, parse_config, run_sweep, SweepOptions, System};
use lrcone::Error;

const BASE: &str = r#"{"lattice": {"kind": "chain", "length": 5},
  "interaction": {"kind": "power_law_two_body", "C1": 1, "alpha": 2, "pattern": "xy"},
  "sweep": {"t_grid": {"start": 0, "stop": 1.5, "step": 0.5},
            "r_policies": [{"kind": "fixed", "value": 1.5}, {"kind": "kappa_rule"}]},
  "bound": {"mode": "both"}}"#;

#[test]
fn canonical_json_round_trips() {
    let config = parse_config(BASE).unwrap();
    let again = parse_config(&config.to_canonical_json()).unwrap();
    assert_eq!(config, again);
    assert_eq!(again.to_canonical_json(), config.to_canonical_json());
}

#[test]
fn parse_errors_carry_location_and_path() {
    match parse_config("{\n  \"lattice\": {\"kind\" \"chain\"}}") {
        Err(Error::Parse { line, .. }) => assert!(line >= 2),
        other => panic!("expected parse error, got {other:?}"),
    }
    let wrong_type = BASE.replace(r#""length": 5"#, r#""length": "five""#);
    match parse_config(&wrong_type) {
        Err(Error::Validation { field, .. }) => assert!(field.starts_with("lattice"), "{field}"),
        other => panic!("expected validation error, got {other:?}"),
    }
    let wrong_lambda = BASE.replace(r#""mode": "both""#, r#""mode": "both", "lambda": "four""#);
    match parse_config(&wrong_lambda) {
        Err(Error::Validation { field, .. }) => assert_eq!(field, "bound.lambda"),
        other => panic!("expected validation error, got {other:?}"),
    }
}

#[test]
fn sweep_rows_and_csv_shape() {
    let system = System::build(&parse_config(BASE).unwrap()).unwrap();
    let records = run_sweep(&system, &SweepOptions::for_config(&system)).unwrap();
    // 4 times x 4 placements x 2 policies x 2 modes
    assert_eq!(records.len(), 64);
    assert!(records.iter().all(|r| r.margin >= 0.0 && r.truncated <= r.bound.term1));
    for w in records.windows(2) {
        assert!((w[0].t, w[0].r) <= (w[1].t, w[1].r));
    }

    let csv = sweep_table(&records).to_csv();
    let header = csv.lines().next().unwrap();
    assert_eq!(header, SWEEP_COLUMNS.join(","));
    assert_eq!(csv.lines().count(), 65);

    let front = front_from_sweep(&records, default_front_threshold(&system)).unwrap();
    let times: Vec<f64> = front.iter().map(|f| f.t).collect();
    assert_eq!(times, vec![0.0, 0.5, 1.0, 1.5]);
    // nothing has spread at t = 0
    assert_eq!(front[0].r_star, Some(1.0));
    assert_eq!(front_table(&front).rows.len(), 4);
}

#[test]
fn single_placement_runs_alone() {
    let text = BASE.replace(r#""bound": {"mode": "both"}"#, r#""observables": {"B": {"kind": "pauli", "op": "z", "site": 4}}"#);
    let system = System::build(&parse_config(&text).unwrap()).unwrap();
    let records = run_sweep(&system, &SweepOptions::for_config(&system)).unwrap();
    assert!(records.iter().all(|r| r.site == 4 && r.r == 4.0));
    assert_eq!(records.len(), 4 * 2);
}
