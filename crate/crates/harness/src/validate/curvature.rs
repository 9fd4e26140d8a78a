//! The uniform curvature constant dominates the Hessian of every expansion
//! term in both directions.

use std::time::Instant;

use fasopt_core::layout::Position;
use fasopt_core::surrogates::{RxExpansion, TrigSum, TxExpansion};
use nalgebra::Matrix2;
use rand::Rng;

use super::instances::{random_instance, uniform_point};
use super::{Check, SuiteReport, SuiteSettings};

const EXPANSIONS: usize = 20;
const SAMPLES: usize = 1000;
const TOLERANCE: f64 = 1e-9;

/// `−min(λ_min(κI − H), λ_min(κI + H)) / κ`; non-positive when `κ` dominates.
pub(crate) fn domination_gap(f: &TrigSum, t: &Position) -> f64 {
    let kappa = f.curvature_bound();
    if kappa == 0.0 {
        return 0.0;
    }
    let h = f.hessian(t);
    let eye = Matrix2::identity() * kappa;
    let below = (eye - h).symmetric_eigenvalues().min();
    let above = (eye + h).symmetric_eigenvalues().min();
    -below.min(above) / kappa
}

pub fn curvature(settings: &SuiteSettings) -> SuiteReport {
    let started = Instant::now();
    let tol = settings.tol(TOLERANCE);
    let mut checks = [
        Check::new("tx_signal", tol),
        Check::new("tx_interference", tol),
        Check::new("rx_signal", tol),
        Check::new("rx_interference", tol),
    ];
    for e in 0..settings.count(EXPANSIONS) as u64 {
        let mut inst = random_instance(2000 + e);
        let cfg = &inst.cfg;
        let k = inst.rng.random_range(0..cfg.n_users);
        let n = inst.rng.random_range(0..cfg.n_tx);
        let tx = TxExpansion::build(&inst.scenario, &inst.layout, &inst.beams, cfg, k, n);
        let rx = RxExpansion::build(&inst.scenario, &inst.layout, &inst.beams, cfg, k);
        let mut worst = [f64::NEG_INFINITY; 4];
        for _ in 0..SAMPLES {
            let t = uniform_point(&mut inst.rng, cfg.tx_halfwidth);
            let r = uniform_point(&mut inst.rng, cfg.rx_halfwidth);
            for (i, (f, p)) in [(&tx.upsilon, t), (&tx.xi_hat, t), (&rx.gamma, r), (&rx.gamma_tilde, r)].into_iter().enumerate() {
                worst[i] = worst[i].max(domination_gap(f, &p));
            }
        }
        for (check, w) in checks.iter_mut().zip(worst) {
            check.record(w, || format!("expansion {e} (user {k}, antenna {n})"));
        }
    }
    SuiteReport::from_checks("curvature", checks.into(), started)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DVector, Vector2};
    use num_complex::Complex64;

    #[test]
    fn single_path_gap_is_exact() {
        // |H| peaks at 2k²|c| for one unit-direction path, half of the bound
        let c = DVector::from_vec(vec![Complex64::new(0.7, 0.0)]);
        let f = TrigSum::new(&c, vec![Vector2::new(1.0, 0.0)], 0.125);
        assert!((domination_gap(&f, &Position::zeros()) + 0.5).abs() < 1e-12);
    }
}
