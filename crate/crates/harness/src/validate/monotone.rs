//! Optimizer runs keep a monotone objective and feasible iterates.

use std::time::Instant;

use fasopt_core::bcd::{run_bcd, BcdResult, Mode};
use fasopt_core::config::SystemConfig;
use fasopt_core::scenario::sample_scenario;

use super::{Check, SuiteReport, SuiteSettings};

const SEEDS: usize = 20;
const SLACK: f64 = 1e-6;

/// Largest relative drop between consecutive values.
pub fn worst_drop(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut worst = 0.0f64;
    let mut prev: Option<f64> = None;
    for v in values {
        if let Some(p) = prev {
            worst = worst.max((p - v) / p.abs().max(f64::MIN_POSITIVE));
        }
        prev = Some(v);
    }
    worst
}

pub(crate) fn record_run(checks: &mut [Check; 4], cfg: &SystemConfig, r: &BcdResult, label: impl Fn() -> String) {
    checks[0].record(worst_drop(r.trace.iter().map(|t| t.tau)), &label);
    checks[1].record(worst_drop(r.tau_trace.iter().copied()), &label);
    checks[2].record(if r.layout.validate(cfg).is_ok() { 0.0 } else { 1.0 }, &label);
    checks[3].record((r.beams.total_power() - cfg.pmax) / cfg.pmax, &label);
}

pub fn monotonicity(settings: &SuiteSettings) -> SuiteReport {
    let started = Instant::now();
    let cfg = SystemConfig::default();
    let mut checks = [
        Check::new("block_trace", settings.tol(SLACK)),
        Check::new("outer_trace", settings.tol(SLACK)),
        Check::new("layout_feasible", 0.0),
        Check::new("power_excess", settings.tol(SLACK)),
    ];
    for seed in 0..settings.count(SEEDS) as u64 {
        let s = sample_scenario(&cfg, seed);
        match run_bcd(&s, &cfg, Mode::Proposed) {
            Ok(r) => record_run(&mut checks, &cfg, &r, || format!("seed {seed}")),
            Err(e) => checks[0].record(f64::INFINITY, || format!("seed {seed}: {e}")),
        }
    }
    SuiteReport::from_checks("monotonicity", checks.into(), started)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drops() {
        assert_eq!(worst_drop([1.0, 2.0, 2.0, 3.0]), 0.0);
        assert!((worst_drop([2.0, 1.0, 3.0]) - 0.5).abs() < 1e-15);
    }
}
