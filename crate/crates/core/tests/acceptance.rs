//! Acceptance suite: runs every headline check at full size and prints one
//! pass/fail line per criterion.

use latticefd::verify::{run_all, VerifyConfig};

#[test]
fn acceptance() {
    let results = run_all(&VerifyConfig::default());
    let mut all_ok = true;
    for r in &results {
        println!(
            "[{}] criterion {:02} ({:.2}s) {} -- {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.id,
            r.seconds,
            r.name,
            r.detail
        );
        all_ok &= r.passed;
    }
    assert!(all_ok, "one or more acceptance criteria failed");
}
