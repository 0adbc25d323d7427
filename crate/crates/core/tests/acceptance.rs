//! One line per acceptance criterion; exits nonzero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use oscidos::verify::{run_criterion, VerifyConfig, CRITERIA};

fn main() -> ExitCode {
    let cfg = VerifyConfig::default();
    let mut failed = 0;
    for (id, name) in CRITERIA {
        let start = Instant::now();
        let line = match run_criterion(id, &cfg) {
            Some(r) => {
                if !r.passed {
                    failed += 1;
                }
                format!(
                    "{} {:>2} {:<32} measured {:.3e} bound {:.1e} ({:.1}s) {}",
                    if r.passed { "PASS" } else { "FAIL" },
                    id,
                    name,
                    r.measured,
                    r.bound,
                    start.elapsed().as_secs_f64(),
                    r.detail
                )
            }
            None => {
                failed += 1;
                format!("FAIL {id:>2} {name:<32} not implemented")
            }
        };
        println!("{line}");
    }
    println!("acceptance: {} of {} criteria passed", CRITERIA.len() - failed, CRITERIA.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
