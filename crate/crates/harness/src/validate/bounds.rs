//! Every surrogate bound holds over its region and is tight at its
//! expansion point.

use std::time::Instant;

use fasopt_core::surrogates::{distance_linearization, BilinearBound, RxExpansion, TxExpansion};
use rand::Rng;

use super::instances::{random_instance, uniform_point};
use super::{Check, SuiteReport, SuiteSettings};

const INSTANCES: usize = 20;
const SAMPLES: usize = 1000;
const TOLERANCE: f64 = 1e-9;

pub fn bounds(settings: &SuiteSettings) -> SuiteReport {
    let started = Instant::now();
    let tol = settings.tol(TOLERANCE);
    let names = [
        "bilinear_valid",
        "bilinear_tight",
        "tx_signal_valid",
        "tx_signal_tight",
        "tx_majorizer_valid",
        "tx_second_order_valid",
        "tx_interference_tight",
        "spacing_valid",
        "spacing_tight",
        "rx_signal_valid",
        "rx_signal_tight",
        "rx_majorizer_valid",
        "rx_second_order_valid",
        "rx_interference_tight",
    ];
    let mut checks: Vec<Check> = names.iter().map(|n| Check::new(n, tol)).collect();
    let idx = |name: &str| names.iter().position(|n| *n == name).expect("registered check");

    for i in 0..settings.count(INSTANCES) as u64 {
        let mut inst = random_instance(3000 + i);
        let cfg = &inst.cfg;
        let s = &inst.scenario;
        let tag = |what: &str| format!("instance {i} {what}");

        let (tau_bar, mu_bar) = (inst.rng.random_range(0.1..10.0), inst.rng.random_range(0.1..10.0));
        let bb = BilinearBound::new(tau_bar, mu_bar);
        checks[idx("bilinear_tight")].record((bb.eval(tau_bar, mu_bar) - tau_bar * mu_bar).abs() / (tau_bar * mu_bar), || tag(""));
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..SAMPLES {
            let (t, m) = (inst.rng.random_range(0.0..20.0), inst.rng.random_range(0.0..20.0));
            worst = worst.max((t * m - bb.eval(t, m)) / (tau_bar * mu_bar + t * m));
        }
        checks[idx("bilinear_valid")].record(worst, || tag(""));

        for k in 0..cfg.n_users {
            let n = inst.rng.random_range(0..cfg.n_tx);
            let e = TxExpansion::build(s, &inst.layout, &inst.beams, cfg, k, n);
            let c = e.center;
            let sig0 = e.signal_at(s, &c);
            let del0 = e.delta_at(s, &c);
            let label = || tag(&format!("user {k} antenna {n}"));
            checks[idx("tx_signal_tight")].record((e.signal_lower_bound(&c) - sig0).abs() / sig0, label);
            let tight = ((e.delta_upper_bound(&c) - del0).abs()).max((e.delta_majorizer(&c) - del0).abs()) / del0;
            checks[idx("tx_interference_tight")].record(tight, label);

            let cuts = distance_linearization(&c, &inst.layout.tx, n, cfg.min_spacing).expect("distinct antennas");
            let others: Vec<_> = inst.layout.tx.iter().enumerate().filter(|(v, _)| *v != n).map(|(_, p)| *p).collect();
            let spacing_tight = cuts
                .iter()
                .zip(&others)
                .map(|(cut, tv)| (cut.slack(&c) - ((c - tv).norm() - cfg.min_spacing)).abs() / cfg.min_spacing)
                .fold(0.0, f64::max);
            checks[idx("spacing_tight")].record(spacing_tight, label);

            let mut w = [f64::NEG_INFINITY; 4];
            for _ in 0..SAMPLES {
                let t = uniform_point(&mut inst.rng, cfg.tx_halfwidth);
                let maj = e.delta_majorizer(&t);
                w[0] = w[0].max((e.signal_lower_bound(&t) - e.signal_at(s, &t)) / sig0);
                w[1] = w[1].max((e.delta_at(s, &t) - maj) / del0);
                w[2] = w[2].max((maj - e.delta_upper_bound(&t)) / del0);
                for (cut, tv) in cuts.iter().zip(&others) {
                    w[3] = w[3].max((cut.slack(&t) - ((t - tv).norm() - cfg.min_spacing)) / cfg.min_spacing);
                }
            }
            for (name, v) in ["tx_signal_valid", "tx_majorizer_valid", "tx_second_order_valid", "spacing_valid"].into_iter().zip(w) {
                checks[idx(name)].record(v, label);
            }

            let e = RxExpansion::build(s, &inst.layout, &inst.beams, cfg, k);
            let c = e.center;
            let sig0 = e.signal_at(s, &c);
            let del0 = e.delta_at(s, &c, cfg);
            let label = || tag(&format!("user {k}"));
            checks[idx("rx_signal_tight")].record((e.signal_lower_bound(&c) - sig0).abs() / sig0, label);
            let tight = ((e.delta_upper_bound(&c) - del0).abs()).max((e.delta_majorizer(&c) - del0).abs()) / del0;
            checks[idx("rx_interference_tight")].record(tight, label);
            let mut w = [f64::NEG_INFINITY; 3];
            for _ in 0..SAMPLES {
                let r = uniform_point(&mut inst.rng, cfg.rx_halfwidth);
                let maj = e.delta_majorizer(&r);
                w[0] = w[0].max((e.signal_lower_bound(&r) - e.signal_at(s, &r)) / sig0);
                w[1] = w[1].max((e.delta_at(s, &r, cfg) - maj) / del0);
                w[2] = w[2].max((maj - e.delta_upper_bound(&r)) / del0);
            }
            for (name, v) in ["rx_signal_valid", "rx_majorizer_valid", "rx_second_order_valid"].into_iter().zip(w) {
                checks[idx(name)].record(v, label);
            }
        }
    }
    SuiteReport::from_checks("bounds", checks, started)
}
