//! Acceptance checks, one PASS/FAIL line each. Exits non-zero on any failure.
//!
//! `QDIODE_SEED` overrides the default seed.

use qdiode::verify::{acceptance_suite, property_suite, DEFAULT_SEED};

fn main() {
    let seed = std::env::var("QDIODE_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_SEED);
    println!("acceptance (seed {seed})");
    let acceptance = acceptance_suite(seed);
    for r in &acceptance {
        println!("{}", r.line());
    }
    println!("invariants");
    let props = property_suite(seed);
    for r in &props {
        println!("{}", r.line());
    }
    let failed = acceptance.iter().chain(&props).filter(|r| !r.passed).count();
    println!("{} checks, {failed} failed", acceptance.len() + props.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
