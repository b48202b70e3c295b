use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name).to_string_lossy().into_owned()
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("schemas").join(name);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&v).unwrap()
}

fn pdes(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdes")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn check_exit_codes() {
    let five_state = fixture("five_state.json");
    let o = pdes(&["check", &five_state, "--property", "cso", "--secret", "q2", "--theta", "(>= x1 5)"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("⟨5⟩"));

    let three = fixture("five_state_three_initial.json");
    let o = pdes(&["check", &three, "--property", "iso", "--secret", "q2", "--nonsecret", "q0,q1", "--theta", "(>= x1 5)"]);
    assert_eq!(o.status.code(), Some(0));

    let o = pdes(&["check", &five_state, "--property", "inf", "--secret", "q3", "--nonsecret", "q4", "--theta", "(>= x1 5)"]);
    assert_eq!(o.status.code(), Some(0));

    let o = pdes(&["check", &five_state, "--property", "cso", "--secret", "nowhere"]);
    assert_eq!(o.status.code(), Some(2));
    let o = pdes(&["check", "missing.json", "--property", "cso"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.json"));
}

#[test]
fn verdict_json_matches_schema() {
    let v = schema("verdict.schema.json");
    let five_state = fixture("five_state.json");
    for (prop, secret, ns) in [("cso", "q2", "q0,q1,q3,q4"), ("inf", "q2", "q3"), ("inf", "q3", "q4")] {
        let o = pdes(&[
            "check",
            &five_state,
            "--property",
            prop,
            "--secret",
            secret,
            "--nonsecret",
            ns,
            "--theta",
            "(>= x1 5)",
            "--format",
            "json",
        ]);
        let out: Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert!(v.is_valid(&out), "{out}");
    }
    let o = pdes(&["check", &five_state, "--property", "cso", "--secret", "q2", "--theta", "(>= x1 5)", "--format", "json"]);
    assert_eq!(stdout(&o).trim(), r#"{"opaque":false,"witness":{"state":["q2"],"observation":[[5]]}}"#);
}

#[test]
fn observer_emission() {
    let five_state = fixture("five_state.json");
    let dot = stdout(&pdes(&["observer", &five_state, "--theta", "(>= x1 5)"]));
    assert_eq!(dot.matches("[label=\"{").count(), 6);
    let again = stdout(&pdes(&["observer", &five_state, "--theta", "(>= x1 5)"]));
    assert_eq!(dot, again);

    let rev = stdout(&pdes(&["observer", &five_state, "--theta", "(>= x1 5)", "--reverse"]));
    assert_eq!(rev.matches("[label=\"{").count(), 4);

    let none = stdout(&pdes(&["observer", &five_state, "--theta", "false"]));
    assert_eq!(none.matches("[label=\"{").count(), 1);

    let json: Value = serde_json::from_str(&stdout(&pdes(&["observer", &five_state, "--theta", "(>= x1 5)", "--emit", "json"]))).unwrap();
    assert!(schema("observer.schema.json").is_valid(&json));
    assert_eq!(json["states"].as_array().unwrap().len(), 6);
    assert_eq!(json["transitions"].as_array().unwrap().len(), 9);
}

#[test]
fn oracle_commands() {
    let five_state = fixture("five_state.json");
    let o = pdes(&["oracle", &five_state, "--property", "cso", "--secret", "q2", "--theta", "(>= x1 5)", "--hi", "9", "--max-units", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("violation"));

    let o = pdes(&["oracle", &five_state, "--property", "cso", "--theta", "(>= x1 5)"]);
    assert_eq!(o.status.code(), Some(0));

    let o = pdes(&["oracle", "selftest", "--seed", "5", "--models", "8", "--max-units", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("agree"));
}

#[test]
fn two_counter_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let efa = dir.path().join("inc.json");
    let efa = efa.to_str().unwrap();
    let o = pdes(&["encode-2cm", &fixture("inc.prog"), "-o", efa]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(efa).unwrap()).unwrap();
    assert!(schema("efa.schema.json").is_valid(&doc));
    assert_eq!(doc["states"].as_array().unwrap().len(), 4);

    let o = pdes(&["reach", efa, "--target", "q3", "--depth", "3", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["witness"]["params"].as_array().unwrap().last().unwrap(), &serde_json::json!([1, 0, 2]));

    let o = pdes(&["reach", efa, "--target", "q3", "--depth", "2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn simulate_and_transforms() {
    let five_state = fixture("five_state.json");
    let o = pdes(&["simulate", &five_state, "--events", "sigma2(6,5) sigma4(3)"]);
    assert!(stdout(&o).trim_end().ends_with("sigma4(3): {q4}"), "{}", stdout(&o));

    let model = schema("model.schema.json");
    let efa = schema("efa.schema.json");
    let rev: Value = serde_json::from_str(&stdout(&pdes(&["reverse", &five_state]))).unwrap();
    assert!(model.is_valid(&rev));
    assert_eq!(rev["initial"].as_array().unwrap().len(), 5);

    let registration = fixture("registration.json");
    let emb: Value = serde_json::from_str(&stdout(&pdes(&["embed", &registration]))).unwrap();
    assert!(efa.is_valid(&emb));
    let flat: Value = serde_json::from_str(&stdout(&pdes(&["flatten", &registration]))).unwrap();
    assert!(efa.is_valid(&flat));
    assert!(flat["transitions"].as_array().unwrap().iter().all(|t| t["k"] == 1));
}

#[test]
fn fixtures_match_schemas() {
    let model = schema("model.schema.json");
    let efa = schema("efa.schema.json");
    for (f, v) in [
        ("five_state.json", &model),
        ("five_state_three_initial.json", &model),
        ("registration.json", &model),
        ("registration_efa.json", &efa),
        ("increasing_efa.json", &efa),
    ] {
        let doc: Value = serde_json::from_str(&std::fs::read_to_string(fixture(f)).unwrap()).unwrap();
        assert!(v.is_valid(&doc), "{f}");
    }
}
