//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! with a nonzero status when any criterion fails.
//!
//! Pass criterion numbers as arguments to run a subset, e.g.
//! `cargo test --test acceptance -- 3 5`.

mod calibration;
mod invariants;
mod sage;
mod statistics;
mod support;

use std::time::Instant;

use support::Verdict;

type Criterion = (u32, &'static str, fn() -> Verdict);

const CRITERIA: [Criterion; 7] = [
    (1, "SAGE round trip", sage::round_trip),
    (2, "model order selection", sage::model_order),
    (3, "calibration", calibration::calibration),
    (4, "clustering oracle", clustering::clustering_oracle),
    (5, "statistics oracle", statistics::statistics_oracle),
    (6, "generator closure", closure::generator_closure),
    (7, "invariant suite", invariants::invariant_suite),
];

fn main() {
    let selected: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failures = 0;
    for (id, name, check) in CRITERIA {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let verdict = check();
        let status = if verdict.passed { "PASS" } else { "FAIL" };
        println!(
            "{status} [{id}] {name}: {} ({:.1} s)",
            verdict.detail,
            start.elapsed().as_secs_f64()
        );
        if !verdict.passed {
            failures += 1;
        }
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
