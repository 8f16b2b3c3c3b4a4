//! One PASS/FAIL line per acceptance criterion; exits nonzero if any fail.

use foldsaddle::acceptance::{criteria, DEFAULT_SEED};

fn main() {
    let checks = criteria(DEFAULT_SEED);
    for c in &checks {
        println!("{c}");
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.id.as_str()).collect();
    println!("acceptance: {}/{} passed", checks.len() - failed.len(), checks.len());
    if !failed.is_empty() {
        println!("failed criteria: {}", failed.join(", "));
        std::process::exit(1);
    }
}
