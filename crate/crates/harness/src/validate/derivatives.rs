//! Closed-form gradients and Hessians of the position expansions against
//! central finite differences.

use std::f64::consts::PI;
use std::time::Instant;

use fasopt_core::layout::Position;
use fasopt_core::surrogates::{RxExpansion, TrigSum};
use fasopt_core::surrogates::TxExpansion;
use nalgebra::Matrix2;
use rand::Rng;

use super::instances::{random_instance, uniform_point};
use super::{Check, SuiteReport, SuiteSettings};

const STATES: usize = 100;
const TOLERANCE: f64 = 1e-4;
/// Finite-difference step as a fraction of the wavelength.
const STEP: f64 = 1e-5;
/// Errors are relative to `max(|exact|, FLOOR · natural scale)`.
const FLOOR: f64 = 1e-3;

/// Relative gradient and Hessian errors of `f` at `t`.
pub(crate) fn fd_errors(f: &TrigSum, t: &Position) -> (f64, f64) {
    let h = STEP * f.wavelength;
    let k = 2.0 * PI / f.wavelength;
    let amp: f64 = f.amplitudes.iter().sum();
    if amp == 0.0 {
        return (0.0, 0.0);
    }
    let axes = [Position::new(h, 0.0), Position::new(0.0, h)];
    let fd_grad = Position::from_fn(|i, _| (f.value(&(t + axes[i])) - f.value(&(t - axes[i]))) / (2.0 * h));
    let fd_hess = Matrix2::from_fn(|i, j| (f.gradient(&(t + axes[j]))[i] - f.gradient(&(t - axes[j]))[i]) / (2.0 * h));
    let grad = f.gradient(t);
    let hess = f.hessian(t);
    let g_err = (fd_grad - grad).norm() / grad.norm().max(FLOOR * 2.0 * k * amp);
    let h_err = (fd_hess - hess).norm() / hess.norm().max(FLOOR * 2.0 * k * k * amp);
    (g_err, h_err)
}

pub fn derivatives(settings: &SuiteSettings) -> SuiteReport {
    let started = Instant::now();
    let tol = settings.tol(TOLERANCE);
    let mut checks = [
        Check::new("tx_signal_gradient", tol),
        Check::new("tx_signal_hessian", tol),
        Check::new("tx_interference_gradient", tol),
        Check::new("tx_interference_hessian", tol),
        Check::new("rx_signal_gradient", tol),
        Check::new("rx_signal_hessian", tol),
        Check::new("rx_interference_gradient", tol),
        Check::new("rx_interference_hessian", tol),
    ];
    for state in 0..STATES as u64 {
        let mut inst = random_instance(1000 + state);
        let cfg = &inst.cfg;
        let k = inst.rng.random_range(0..cfg.n_users);
        let n = inst.rng.random_range(0..cfg.n_tx);
        let tx = TxExpansion::build(&inst.scenario, &inst.layout, &inst.beams, cfg, k, n);
        let rx = RxExpansion::build(&inst.scenario, &inst.layout, &inst.beams, cfg, k);
        let t = uniform_point(&mut inst.rng, cfg.tx_halfwidth);
        let r = uniform_point(&mut inst.rng, cfg.rx_halfwidth);
        let label = || format!("state {state} (user {k}, antenna {n})");
        for (i, (f, p)) in [(&tx.upsilon, t), (&tx.xi_hat, t), (&rx.gamma, r), (&rx.gamma_tilde, r)].into_iter().enumerate() {
            let (g, h) = fd_errors(f, &p);
            checks[2 * i].record(g, label);
            checks[2 * i + 1].record(h, label);
        }
    }
    SuiteReport::from_checks("derivatives", checks.into(), started)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DVector, Vector2};
    use num_complex::Complex64;

    #[test]
    fn wrong_gradient_is_detected() {
        let c = DVector::from_vec(vec![Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.5)]);
        let f = TrigSum::new(&c, vec![Vector2::new(0.6, 0.2), Vector2::new(-0.1, 0.8)], 0.125);
        let t = Position::new(0.03, -0.07);
        let (g, h) = fd_errors(&f, &t);
        assert!(g < 1e-7 && h < 1e-7, "{g} {h}");
        let mut off = f.clone();
        off.wavelength *= 1.0 + 1e-3;
        let grad_wrong = (off.gradient(&t) - f.gradient(&t)).norm() / f.gradient(&t).norm();
        assert!(grad_wrong > 1e-4);
    }
}
