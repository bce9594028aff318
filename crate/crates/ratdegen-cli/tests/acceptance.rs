//! Runs every criterion of the verification battery and prints one
//! PASS/FAIL line each. Exits nonzero if any criterion fails.

use std::path::PathBuf;
use std::process::ExitCode;

use ratdegen::par::Exec;
use ratdegen::Tolerances;
use ratdegen_cli::suite::{criterion_count, run_one, SuiteConfig};

fn main() -> ExitCode {
    let cfg = SuiteConfig {
        seed: 0,
        tol: Tolerances::default(),
        exec: Exec::Parallel,
        bin: Some(PathBuf::from(env!("CARGO_BIN_EXE_ratdegen"))),
    };
    let mut failed = Vec::new();
    for id in 1..=criterion_count() {
        let r = run_one(id, &cfg);
        let status = if r.pass { "PASS" } else { "FAIL" };
        println!("{status} {:>2} {} ({:.2}s): {}", r.id, r.name, r.seconds, r.detail);
        if !r.pass {
            failed.push(r.id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: {} of {} criteria pass", criterion_count(), criterion_count());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
