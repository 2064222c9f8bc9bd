//! Acceptance suite: one test per verified claim, each printing a
//! pass/fail line. Inequalities are exact (no tolerance) unless a
//! tolerance is stated in the check itself.

use std::time::Instant;

use abl_cli::verify::{
    deepest_adversary_checks, entropy_checks, exact_opt_checks, lower_bound_checks,
    matching_adversary_checks, mehlhorn_bound_checks, offline_bound_checks, online_budget_checks,
    restructure_dp_checks, static_dp_equivalence_checks, structural_checks, Check,
};
use abl_core::cost::Model;

const SEED: u64 = 0xAB1;

fn report(criterion: &str, checks: &[Check]) {
    let failures: Vec<&Check> = checks.iter().filter(|c| !c.pass).collect();
    if failures.is_empty() {
        println!("[acceptance] {criterion}: PASS ({} checks)", checks.len());
    } else {
        println!("[acceptance] {criterion}: FAIL ({} of {} checks)", failures.len(), checks.len());
        for f in &failures {
            println!("    {} measured {} bound {} ({})", f.name, f.measured, f.bound, f.instance);
        }
    }
    assert!(failures.is_empty(), "{criterion}: {} failing checks", failures.len());
}

#[test]
fn criterion_1_offline_single_source_bound() {
    let start = Instant::now();
    let checks = offline_bound_checks(Model::SingleSource, SEED);
    let elapsed = start.elapsed();
    report("criterion 1 offline single-source bound", &checks);
    println!("[acceptance] criterion 1 runtime: {} ms", elapsed.as_millis());
    assert!(elapsed.as_secs() < 10, "criterion 1 grid took {elapsed:?}, budget is 10 s");
}

#[test]
fn criterion_2_offline_all_to_all_bound() {
    let checks = offline_bound_checks(Model::AllToAll, SEED);
    report("criterion 2 offline all-to-all bound", &checks);
}

#[test]
fn criterion_3_static_tree_bounds() {
    let checks = mehlhorn_bound_checks(SEED);
    report("criterion 3 static-tree entropy bounds", &checks);
}

#[test]
fn criterion_4_oracle_equivalence() {
    let mut checks = static_dp_equivalence_checks(SEED);
    checks.extend(exact_opt_checks(SEED));
    report("criterion 4 oracle equivalence", &checks);
}

#[test]
fn criterion_5_lower_bound_evidence() {
    let (checks, metrics) = lower_bound_checks();
    report("criterion 5 lower-bound evidence", &checks);
    for m in &metrics {
        println!("[acceptance] criterion 5 reported (below m >= 10C): {} = {:.4} ({})", m.name, m.value, m.instance);
    }
}

#[test]
fn criterion_6_round_robin_entropy() {
    let checks = entropy_checks();
    report("criterion 6 round-robin block entropy", &checks);
}

#[test]
fn criterion_7_online_budget_and_opt_trigger() {
    let mut checks = Vec::new();
    let (ss, _) = online_budget_checks(Model::SingleSource, SEED);
    checks.extend(ss);
    let (a2a, _) = online_budget_checks(Model::AllToAll, SEED);
    checks.extend(a2a);
    let (dp, metrics) = restructure_dp_checks(SEED);
    checks.extend(dp);
    report("criterion 7 online budget invariant and optimal trigger", &checks);
    for m in &metrics {
        println!("[acceptance] criterion 7 reported: {} = {:.4} ({})", m.name, m.value, m.instance);
    }
}

#[test]
fn criterion_8_competitive_ratio_construction() {
    let start = Instant::now();
    let mut checks = Vec::new();
    for n in [64u32, 256] {
        for c in [4.0f64, 16.0] {
            let (cs, ms) = matching_adversary_checks(n, 2000, c);
            checks.extend(cs);
            for m in &ms {
                println!("[acceptance] criterion 8 reported: {} = {:.1} ({})", m.name, m.value, m.instance);
            }
        }
    }
    let elapsed = start.elapsed();
    report("criterion 8 all-to-all competitive-ratio construction", &checks);
    println!("[acceptance] criterion 8 runtime: {} ms", elapsed.as_millis());
    assert!(elapsed.as_secs() < 30, "criterion 8 took {elapsed:?}, budget is 30 s");
}

#[test]
fn criterion_9_structural_properties() {
    let mut checks = structural_checks(SEED);
    checks.extend(deepest_adversary_checks(SEED));
    report("criterion 9 structural properties", &checks);
}
