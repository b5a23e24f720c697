mod common;

use common::*;

fn run(name: &str, r: Outcome) {
    match r {
        Ok(n) => eprintln!("{name}: {n} cases"),
        Err(e) => panic!("{name}: {e}"),
    }
}

#[test]
fn observer_agrees_with_oracle() {
    run("oracle agreement", oracle_agreement(0..60));
}

#[test]
fn weight_sets_agree_with_walk_enumeration() {
    run("weight sets", epl_agreement(0..60));
}

#[test]
fn detector_and_observer_agree_on_spd() {
    run("spd agreement", spd_agreement(0..100));
}

#[test]
fn detector_covers_observer() {
    run("detector coverage", detector_coverage(0..60));
}

#[test]
fn scaling_preserves_verdicts() {
    run("scaling", scaling_invariance(15));
}

#[test]
fn normalization_is_idempotent() {
    run("normalize", normalize_idempotence(50));
}

#[test]
fn epset_operations_match_direct_evaluation() {
    run("epset", epset_laws(200, 7));
}

#[test]
fn subset_sum_sd_matches_brute_force() {
    run("subset sum", subset_sum_sweep(60, 3));
}
