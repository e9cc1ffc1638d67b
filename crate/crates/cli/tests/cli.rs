use std::path::Path;
use std::process::{Command, Output};

use frel::classical::AbelianGroupoid;
use frel::cpm::CpmMap;
use frel::locality::{bell_example, EmpiricalModel};
use frel::measurement::Measurement;
use serde_json::Value;

fn frel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frel")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, value: &impl serde::Serialize) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string(value).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

const TRIANGLE: &str = r#"{"carrier":3,"nodes":[0,1,2],"edges":[[0,1],[0,2],[1,2]]}"#;
const BELL: &str = r#"{"parties":[2,2],"contexts":[["discrete","discrete"],["cyclic","cyclic"]]}"#;

#[test]
fn enumerates_three_structures_on_two_elements() {
    let out = frel(&["enumerate-structures", "--size", "2", "--json"]);
    assert!(out.status.success());
    let list: Vec<Value> = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(list.len(), 3);
    for v in list {
        let g: AbelianGroupoid = serde_json::from_value(v.clone()).unwrap();
        assert_eq!(serde_json::to_value(&g).unwrap(), v);
    }
    assert!(stdout(&frel(&["enumerate-structures", "--size", "2"])).starts_with("3 structures"));
}

#[test]
fn bundled_bell_example_is_local() {
    let out = frel(&["check-local"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let (first, rest) = text.split_once('\n').unwrap();
    assert_eq!(first, "LOCAL");
    let lhv: Value = serde_json::from_str(rest).unwrap();
    assert_eq!(lhv["distribution"]["support"].as_array().unwrap().len(), 2);
}

#[test]
fn triangle_exports_as_a_dot_triangle() {
    let out = frel(&["export-dot", "--state", TRIANGLE, "--name", "tri"]);
    let dot = stdout(&out);
    assert!(dot.starts_with("graph tri {"));
    assert_eq!(dot.matches(" -- ").count(), 3);
}

#[test]
fn emitted_models_read_back_identically() {
    let dir = tempfile::tempdir().unwrap();
    let (rho, _) = bell_example();
    let state = write(dir.path(), "state.json", &rho);
    let target = dir.path().join("model.json");
    let out = frel(&["model", "--state", &state, "--scenario", BELL, "--output", target.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&target).unwrap();
    let model: EmpiricalModel = serde_json::from_str(&text).unwrap();
    let again: Value = serde_json::to_value(&model).unwrap();
    assert_eq!(again, serde_json::from_str::<Value>(&text).unwrap());
    // The emitted scenario is itself accepted as input.
    let scenario = write(dir.path(), "scenario.json", &again["scenario"]);
    let out = frel(&["model", "--state", &state, "--scenario", &scenario, "--json"]);
    assert_eq!(serde_json::from_str::<Value>(&stdout(&out)).unwrap(), again);
}

#[test]
fn composes_maps_and_round_trips_them() {
    let dir = tempfile::tempdir().unwrap();
    let mut g = frel::gen::rng(2);
    let two = frel::relcore::FiniteSet::new(2);
    let f = frel::gen::random_cpm_map(&two, &two, &mut g);
    let h = frel::gen::random_cpm_map(&two, &frel::relcore::FiniteSet::new(3), &mut g);
    let (a, b) = (write(dir.path(), "f.json", &f), write(dir.path(), "h.json", &h));
    let out = frel(&["compose", "--first", &a, "--second", &b, "--json"]);
    let composite: CpmMap = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(composite, frel::cpm::compose_relational(&f, &h).unwrap());
}

#[test]
fn exit_codes_separate_domain_and_input_errors() {
    let z2 = r#"{"carrier":2,"blocks":[{"elements":[0,1],"unit":0,"table":[[0,1],[1,0]]}]}"#;
    assert!(stdout(&frel(&["decohere", "--structure", z2, "--state", r#"{"carrier":2,"nodes":[0],"edges":[]}"#]))
        .contains("nodes {0, 1}"));
    assert_eq!(frel(&["decohere", "--structure", z2, "--state", TRIANGLE]).status.code(), Some(1));
    assert_eq!(frel(&["decohere", "--structure", "{not json", "--state", TRIANGLE]).status.code(), Some(2));
    assert_eq!(frel(&["decohere", "--structure", "/no/such/file", "--state", TRIANGLE]).status.code(), Some(2));
    assert_eq!(frel(&["no-such-verb"]).status.code(), Some(2));
    assert_eq!(frel(&["local-map", "--scenario", BELL, "--budget", "4"]).status.code(), Some(1));
}

#[test]
fn random_measurements_are_seeded_and_decomposable() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str| stdout(&frel(&["measure", "--random-size", "3", "--seed", seed, "--json"]));
    let first = run("9");
    assert_eq!(first, run("9"));
    let m: Measurement = serde_json::from_str(&first).unwrap();
    let path = write(dir.path(), "m.json", &m);
    let out = frel(&["decompose-measurement", "--measurement", &path, "--json"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["f"].as_array().unwrap().len(), v["x_structure"]["blocks"].as_array().unwrap().len());
}

#[test]
fn searches_and_local_maps() {
    let z2 = r#"{"carrier":2,"blocks":[{"elements":[0,1],"unit":0,"table":[[0,1],[1,0]]}]}"#;
    assert_eq!(stdout(&frel(&["search-alt-dec", "--structure", z2])).trim(), "exhaustive: 113 candidates, no witness");
    let out = frel(&["local-map", "--scenario", BELL, "--json"]);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["inputs"].as_array().unwrap().len(), 4);
    assert_eq!(v["map"]["dom"], 16);
}

#[test]
fn fast_self_test_passes() {
    let out = frel(&["self-test", "--level", "fast"]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert_eq!(stdout(&out).lines().filter(|l| l.starts_with("[PASS]")).count(), 10);
}
