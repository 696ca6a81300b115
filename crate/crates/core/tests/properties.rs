mod common;

use common::suites;

#[test]
fn substitution_never_captures() {
    suites::capture_freedom(10_000).unwrap();
}

#[test]
fn by_name_repeats_by_value_does_not() {
    suites::effect_counts(200).unwrap();
}

#[test]
fn evaluator_lambda_and_rules_agree() {
    suites::oracle_triangle().unwrap();
}

#[test]
fn parse_print_round_trip() {
    suites::round_trip(500).unwrap();
}

#[test]
fn derivations_stable_under_reseeding() {
    suites::reseeding(64).unwrap();
}
