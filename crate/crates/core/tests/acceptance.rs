//! One line per acceptance criterion, each with its pinned time limit.

use std::io::Write;

use frel::selfcheck::{run_check, Level};

/// Lines go straight to stderr so they show even when output is captured.
fn criterion(id: usize) {
    let outcome = run_check(id, Level::Full).expect("known criterion");
    let _ = writeln!(std::io::stderr(), "{outcome}");
    assert!(outcome.passed, "{outcome}");
}

#[test]
fn c01_classical_structure_completeness() {
    criterion(1);
}

#[test]
fn c02_isometry_and_unitary_characterisation() {
    criterion(2);
}

#[test]
fn c03_graph_calculus_soundness() {
    criterion(3);
}

#[test]
fn c04_decoherence_characterisation() {
    criterion(4);
}

#[test]
fn c05_no_alternative_decoherence() {
    criterion(5);
}

#[test]
fn c06_measurement_decomposition() {
    criterion(6);
}

#[test]
fn c07_purity_laws() {
    criterion(7);
}

#[test]
fn c08_locality() {
    criterion(8);
}

#[test]
fn c09_local_map_law() {
    criterion(9);
}

#[test]
fn c10_separable_audit() {
    criterion(10);
}
