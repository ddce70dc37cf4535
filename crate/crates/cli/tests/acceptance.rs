//! Acceptance run at the stated sample sizes.
//!
//! Prints one `[PASS]`/`[FAIL]` line per criterion, then every individual
//! check. Criteria listed in `KNOWN_RED` are model-limited (see README) and
//! are reported as they come out without failing the target; any other
//! failing criterion exits nonzero. A canary run with a perturbed `a0`
//! must turn the exact mean-log check red.

use fasuav_cli::validate::{render_report, run_all, run_criterion, ValidationOptions};
use std::process::ExitCode;

const KNOWN_RED: [u32; 3] = [6, 7, 8];

fn main() -> ExitCode {
    let opts = ValidationOptions::acceptance();
    let reports = match run_all(&opts) {
        Ok(r) => r,
        Err(e) => {
            println!("{}", e.report());
            return ExitCode::FAILURE;
        }
    };
    println!("acceptance (seed {}):", opts.seed);
    print!("{}", render_report(&reports));

    let mut ok = true;
    for r in &reports {
        if !r.passed() && !KNOWN_RED.contains(&r.id) {
            println!("unexpected failure: criterion {}", r.id);
            ok = false;
        }
        if r.passed() && KNOWN_RED.contains(&r.id) {
            println!("note: criterion {} listed as red but passed", r.id);
        }
    }

    let canary = ValidationOptions {
        a0_factor: 1.05,
        ..ValidationOptions::with_trials(10_000)
    };
    match run_criterion(7, &canary) {
        Ok(r) => {
            let tripped = r.failures().any(|c| c.label.contains("2γ_E"));
            println!(
                "[{}] canary a0 x1.05 trips the exact mean-log check",
                if tripped { "PASS" } else { "FAIL" }
            );
            ok &= tripped;
        }
        Err(e) => {
            println!("{}", e.report());
            ok = false;
        }
    }

    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
