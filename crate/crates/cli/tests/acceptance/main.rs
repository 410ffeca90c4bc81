//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p agentmesh-cli --test acceptance`.

mod e2e;
mod gen;
mod messages;
mod schema;
mod stores;
mod workflow;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

/// Wall-clock limit for the whole suite.
const SUITE_TIME_LIMIT: Duration = Duration::from_secs(120);

pub type Outcome = Result<String, String>;

pub fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../testdata")
}

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_agentmesh")
}

type Criterion = (&'static str, fn() -> Outcome);

const CRITERIA: [Criterion; 10] = [
    ("message round-trip", messages::ac1_round_trip),
    ("default status", messages::ac2_default_status),
    ("agent card conformance", e2e::ac3_card_conformance),
    ("discovery oracle", stores::ac4_discovery_oracle),
    ("task state machine", stores::ac5_task_state_machine),
    ("schema validator", schema::ac6_schema_validator),
    ("workflow engine", workflow::ac7_workflow_engine),
    ("end-to-end stock query", e2e::ac8_stock_query),
    ("transport equivalence", e2e::ac9_transport_equivalence),
    ("error path", e2e::ac10_error_path),
];

fn main() -> ExitCode {
    std::panic::set_hook(Box::new(|_| {}));
    let started = Instant::now();
    let mut passed = 0;
    for (i, (title, check)) in CRITERIA.iter().enumerate() {
        let t = Instant::now();
        let outcome = match catch_unwind(AssertUnwindSafe(check)) {
            Ok(o) => o,
            Err(p) => Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into())),
        };
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => {
                passed += 1;
                println!("AC{:<2} PASS  {title} ({secs:.2}s): {detail}", i + 1);
            }
            Err(why) => println!("AC{:<2} FAIL  {title} ({secs:.2}s): {why}", i + 1),
        }
    }
    let elapsed = started.elapsed();
    let in_time = elapsed <= SUITE_TIME_LIMIT;
    println!(
        "{passed}/{} criteria passed in {:.1}s (limit {}s)",
        CRITERIA.len(),
        elapsed.as_secs_f64(),
        SUITE_TIME_LIMIT.as_secs()
    );
    if passed == CRITERIA.len() && in_time {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
