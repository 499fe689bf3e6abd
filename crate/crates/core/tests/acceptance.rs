//! Full-size acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria run one after another in a single test so the wall-clock
//! budgets of criteria 1 and 5 are measured without competing test threads.

use std::time::Duration;

use wellcond::suite::{self, SuiteConfig, CRITERIA};

#[test]
fn tolerances_are_pinned() {
    assert_eq!(suite::IDENTITY_TOL, 1e-8);
    assert_eq!(suite::BOUND_SLACK, 1e-7);
    assert_eq!(suite::SERIES_ROUNDING, 1e-10);
    assert_eq!(suite::ENCODING_TOL, 1e-9);
    assert_eq!(suite::RULE_SUITE_BUDGET, Duration::from_secs(60));
    assert_eq!(suite::PIPELINE_BUDGET, Duration::from_secs(120));
    assert_eq!(suite::GROUND_ENERGY_TOL, 1e-9);
    assert_eq!(suite::COIN_GAP_TAU, 0.034);
    assert_eq!(suite::PSD_FLOOR, -1e-9);
    assert_eq!(suite::SINGULAR_ZERO_TOL, 1e-9);
    assert_eq!(suite::CHANNEL_TOL, 1e-10);
    assert_eq!(suite::SIGMA_MULTIPLE, 3.0);
}

#[test]
fn full_size_counts() {
    let cfg = SuiteConfig::full();
    assert_eq!(cfg.rule_instances, 100);
    assert_eq!(cfg.cycle_instances, 50);
    assert_eq!(cfg.series_inputs, 1000);
    assert_eq!(cfg.circuits, 100);
    assert_eq!(cfg.singular_pairs, 100);
    assert_eq!(cfg.channels, 100);
    assert_eq!(cfg.chains, 50);
    assert_eq!(cfg.walk_trials, 100_000);
}

#[test]
fn acceptance() {
    let cfg = SuiteConfig::full();
    let mut failed = vec![];
    for (id, _) in CRITERIA {
        let r = suite::run(id, &cfg).unwrap();
        println!("{r}");
        for f in &r.failures {
            println!("    {f}");
        }
        if !r.passed {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
