//! Runs the randomized identity and derivative suites and prints a table.
//!
//! ```bash
//! cargo run --release --example verify_suites
//! ```

use infodist::checks::{euler_suite, gradient_suite};

fn main() -> infodist::Result<()> {
    let mut records = euler_suite(1, 1000)?;
    records.extend(gradient_suite(2, 100)?);
    println!(
        "{:<10} {:<34} {:>10} {:>10}  ok",
        "suite", "check", "worst", "limit"
    );
    for r in &records {
        println!(
            "{:<10} {:<34} {:>10.2e} {:>10.0e}  {}",
            r.suite,
            r.name,
            r.value,
            r.threshold.unwrap_or(f64::NAN),
            r.passed
        );
    }
    Ok(())
}
