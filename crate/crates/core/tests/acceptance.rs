//! One test per acceptance criterion; each prints a PASS/FAIL line with the
//! measured values underneath.

use nhqc::acceptance::{self, CriterionReport};

fn check(rep: CriterionReport) {
    println!("{rep}");
    assert!(rep.passed(), "{}", rep.summary_line());
}

#[test]
fn a1_ideal_gates() {
    check(acceptance::a1_ideal_gates());
}

#[test]
fn a2_rabi_coefficients() {
    check(acceptance::a2_rabi_coefficients());
}

#[test]
fn a3_rabi_elimination() {
    check(acceptance::a3_rabi_elimination());
}

#[test]
fn a4_detuning_ratios() {
    check(acceptance::a4_detuning_ratios());
}

#[test]
fn a5_compensation() {
    check(acceptance::a5_compensation());
}

#[test]
fn a6_oracle_agreement() {
    check(acceptance::a6_oracle_agreement());
}

#[test]
fn a7_headline() {
    check(acceptance::a7_headline());
}

#[test]
fn a8_invariants() {
    check(acceptance::a8_invariants());
}

#[test]
fn a9_region_ordering() {
    check(acceptance::a9_region_ordering());
}
