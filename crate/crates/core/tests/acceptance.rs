//! One test per acceptance criterion. Each prints a PASS/FAIL line before
//! asserting, so `cargo test --test acceptance -- --nocapture` doubles as the
//! report.

use gts::validation::{CheckResult, Suite};

fn check(id: u8) -> CheckResult {
    let report = Suite::default().run(&[id]);
    let r = report.results.into_iter().next().expect("known check id");
    println!("{r}");
    r
}

fn assert_check(id: u8) {
    let r = check(id);
    assert!(r.passed, "{r}");
}

#[test]
fn criterion_1_cumulant_means() {
    assert_check(1);
}

#[test]
fn criterion_2_skewness_kurtosis() {
    assert_check(2);
}

#[test]
fn criterion_3_std_dev_columns() {
    assert_check(3);
}

#[test]
fn criterion_4_exponent_identities() {
    assert_check(4);
}

#[test]
fn criterion_5_sd_levy_asymptotics() {
    assert_check(5);
}

#[test]
fn criterion_6_inversion_fidelity() {
    assert_check(6);
}

#[test]
fn criterion_7_simulation_convergence() {
    assert_check(7);
}

#[test]
fn criterion_8_mle_round_trip() {
    assert_check(8);
}

#[test]
fn criterion_9_frft_kernel() {
    assert_check(9);
}
