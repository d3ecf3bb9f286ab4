//! Runs every acceptance criterion once and prints one line per criterion.
//! Plain `main` so the lines are shown without `--nocapture`.

use std::process::ExitCode;

use npch_core::acceptance::{results_json, Suite};

fn main() -> ExitCode {
    let workers = std::env::var("NPCH_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(1);
    let suite = Suite::new(0, workers).expect("suite setup");
    let mut failed = Vec::new();
    let mut results = Vec::new();
    for id in 1..=12u8 {
        match suite.run(id) {
            Ok(r) => {
                println!("{}", r.line());
                if !r.passed {
                    failed.push(id);
                }
                results.push(r);
            }
            Err(e) => {
                println!("criterion {id:2} ERROR {e}");
                failed.push(id);
            }
        }
    }
    let json = results_json(&results).expect("results serialize");
    if json.contains("seconds") {
        println!("timings leaked into the results json");
        return ExitCode::FAILURE;
    }
    if failed.is_empty() {
        println!("acceptance: 12/12 passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
