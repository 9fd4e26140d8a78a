//! Property suites behind `fasopt validate`.
//!
//! Every suite is a list of named checks. A check records one metric per case
//! (smaller is better) and fails when any case exceeds its tolerance or is not
//! finite. The strict profile multiplies every tolerance by one half.

mod bounds;
mod curvature;
mod derivatives;
pub mod instances;
mod monotone;
mod oracle;
mod solver;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

pub use bounds::bounds;
pub use curvature::curvature;
pub use derivatives::derivatives;
pub use monotone::monotonicity;
pub use oracle::hi_oracle;
pub use solver::solver;

/// Failing cases listed per check.
const MAX_LISTED: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Profile {
    #[default]
    Default,
    Strict,
}

impl Profile {
    pub fn tolerance_scale(self) -> f64 {
        match self {
            Profile::Default => 1.0,
            Profile::Strict => 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteSettings {
    pub tolerance_scale: f64,
    /// Overrides the number of random scenario instances of the
    /// instance-based suites.
    pub instances: Option<usize>,
}

impl SuiteSettings {
    pub fn new(profile: Profile, instances: Option<usize>) -> Self {
        Self { tolerance_scale: profile.tolerance_scale(), instances }
    }

    pub(crate) fn tol(&self, base: f64) -> f64 {
        base * self.tolerance_scale
    }

    pub(crate) fn count(&self, default: usize) -> usize {
        self.instances.unwrap_or(default)
    }
}

impl Default for SuiteSettings {
    fn default() -> Self {
        Self::new(Profile::Default, None)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub tolerance: f64,
    pub worst: f64,
    pub cases: usize,
    pub failed: usize,
    pub examples: Vec<String>,
}

impl Check {
    pub fn new(name: &'static str, tolerance: f64) -> Self {
        Self { name, tolerance, worst: f64::NEG_INFINITY, cases: 0, failed: 0, examples: Vec::new() }
    }

    /// Records one case; `label` is only evaluated for failures.
    pub fn record(&mut self, metric: f64, label: impl FnOnce() -> String) {
        self.cases += 1;
        if metric.is_nan() || metric > self.worst {
            self.worst = if metric.is_nan() { f64::INFINITY } else { metric };
        }
        if !(metric <= self.tolerance) {
            self.failed += 1;
            if self.examples.len() < MAX_LISTED {
                self.examples.push(format!("{}: {metric:e}", label()));
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failed == 0 && self.cases > 0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub elapsed_ms: u128,
}

impl SuiteReport {
    pub(crate) fn from_checks(suite: &'static str, checks: Vec<Check>, started: Instant) -> Self {
        let passed = checks.iter().all(Check::passed);
        Self { suite, passed, checks, elapsed_ms: started.elapsed().as_millis() }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {} ({} ms)", self.suite, if self.passed { "PASS" } else { "FAIL" }, self.elapsed_ms)?;
        for c in &self.checks {
            write!(f, "  {:<24} worst {:>12.3e}  tol {:>9.1e}  cases {:>7}  failed {}", c.name, c.worst, c.tolerance, c.cases, c.failed)?;
            for e in &c.examples {
                write!(f, "\n    {e}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Derivatives,
    Curvature,
    Bounds,
    HiOracle,
    Solver,
    Monotonicity,
}

impl Suite {
    pub const ALL: [Suite; 6] = [Suite::Derivatives, Suite::Curvature, Suite::Bounds, Suite::HiOracle, Suite::Solver, Suite::Monotonicity];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Derivatives => "derivatives",
            Suite::Curvature => "curvature",
            Suite::Bounds => "bounds",
            Suite::HiOracle => "hi_oracle",
            Suite::Solver => "solver",
            Suite::Monotonicity => "monotonicity",
        }
    }

    pub fn run(self, settings: &SuiteSettings) -> SuiteReport {
        match self {
            Suite::Derivatives => derivatives(settings),
            Suite::Curvature => curvature(settings),
            Suite::Bounds => bounds(settings),
            Suite::HiOracle => hi_oracle(settings),
            Suite::Solver => solver(settings),
            Suite::Monotonicity => monotonicity(settings),
        }
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| format!("unknown suite `{s}`"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_tracks_worst_and_failures() {
        let mut c = Check::new("x", 1e-3);
        c.record(1e-4, || unreachable!());
        c.record(2e-3, || "case 2".into());
        c.record(f64::NAN, || "case 3".into());
        assert_eq!((c.cases, c.failed), (3, 2));
        assert_eq!(c.worst, f64::INFINITY);
        assert_eq!(c.examples[0], "case 2: 2e-3");
        assert!(!c.passed());
        assert!(!Check::new("empty", 1.0).passed());
    }

    #[test]
    fn strict_halves_tolerances() {
        assert_eq!(SuiteSettings::new(Profile::Strict, None).tol(1e-6), 5e-7);
        assert_eq!(SuiteSettings::default().tol(1e-6), 1e-6);
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>(), Ok(s));
        }
    }
}
