//! Acceptance suite: one summary line per criterion, followed by its
//! sub-checks. Exits non-zero if any sub-check fails.

use equilib_validation::{run_group, ValidationConfig, CHECKS, DEFAULT_SEED};

fn main() {
    let cfg = ValidationConfig::new(DEFAULT_SEED);
    let mut failed = Vec::new();
    for (name, number) in CHECKS {
        match run_group(name, &cfg) {
            Ok(outcomes) => {
                let passed = outcomes.iter().filter(|o| o.passed).count();
                let ok = passed == outcomes.len();
                println!(
                    "{} criterion {number:>2} {name}: {passed}/{} sub-checks",
                    if ok { "PASS" } else { "FAIL" },
                    outcomes.len()
                );
                for o in &outcomes {
                    println!("    {}", o.line());
                }
                if !ok {
                    failed.push(number);
                }
            }
            Err(e) => {
                println!("FAIL criterion {number:>2} {name}: error: {e}");
                failed.push(number);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", CHECKS.len());
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
