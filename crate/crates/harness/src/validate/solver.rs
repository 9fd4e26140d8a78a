//! Conic solver certification on random feasible instances and brute-force
//! agreement on low-dimensional ones.

use std::time::Instant;

use fasopt_conic::certify::{boxed_problem, grid_oracle, random_problem};
use fasopt_conic::{solve_with, SolveStatus, SolverSettings};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Check, SuiteReport, SuiteSettings};

const PROBLEMS: usize = 200;
const GRID_PROBLEMS: usize = 16;
const GAP_TOLERANCE: f64 = 1e-6;
const RESIDUAL_TOLERANCE: f64 = 1e-7;
const ORACLE_TOLERANCE: f64 = 1e-4;

pub fn solver(settings: &SuiteSettings) -> SuiteReport {
    let started = Instant::now();
    let solver_settings = SolverSettings {
        feastol: settings.tol(RESIDUAL_TOLERANCE),
        gaptol: settings.tol(GAP_TOLERANCE),
        ..SolverSettings::default()
    };
    let mut status = Check::new("optimal_status", 0.0);
    let mut gap = Check::new("relative_gap", settings.tol(GAP_TOLERANCE));
    let mut residual = Check::new("residual", settings.tol(RESIDUAL_TOLERANCE));
    let mut oracle = Check::new("grid_oracle", settings.tol(ORACLE_TOLERANCE));

    let mut rng = ChaCha8Rng::seed_from_u64(5000);
    for trial in 0..PROBLEMS {
        let p = random_problem(&mut rng);
        let label = || format!("problem {trial} ({} vars)", p.n_vars());
        match solve_with(&p, &solver_settings) {
            Ok(sol) => {
                status.record(if sol.status == SolveStatus::Optimal { 0.0 } else { 1.0 }, || format!("{} {}", label(), sol.status));
                gap.record(sol.relative_gap, label);
                residual.record(sol.primal_residual.max(sol.dual_residual), label);
            }
            Err(e) => status.record(1.0, || format!("{}: {e}", label())),
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5001);
    for trial in 0..GRID_PROBLEMS {
        let p = boxed_problem(&mut rng, 2 + trial % 2);
        let label = || format!("boxed problem {trial}");
        match solve_with(&p, &solver_settings) {
            Ok(sol) if sol.is_optimal() => oracle.record((sol.objective - grid_oracle(&p, 2.0)).abs(), label),
            _ => oracle.record(f64::INFINITY, label),
        }
    }
    SuiteReport::from_checks("solver", vec![status, gap, residual, oracle], started)
}
