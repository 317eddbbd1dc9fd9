//! Acceptance suite: one line per criterion, nonzero exit on any failure.
//! Set `LEDSTAT_SKIP_MC=1` to leave out the Monte Carlo criterion.

use std::process::ExitCode;

use ledstat::validation::{run_validation, ValidationProfile};

fn main() -> ExitCode {
    let profile = ValidationProfile {
        skip_montecarlo: std::env::var("LEDSTAT_SKIP_MC").is_ok_and(|v| v == "1"),
        ..Default::default()
    };
    let reports = run_validation(&profile);
    let verbose = std::env::args().any(|a| a == "--nocapture" || a == "--verbose");
    for r in &reports {
        println!("{r}");
        if verbose || !r.passed {
            for d in &r.details {
                println!("    {d}");
            }
        }
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    println!("acceptance: {} passed, {failed} failed", reports.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
