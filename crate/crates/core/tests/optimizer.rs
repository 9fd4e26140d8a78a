use std::sync::OnceLock;

use fasopt_core::baselines::{compare_schemes, run_scheme, SchemeId, SchemeRun};
use fasopt_core::bcd::BcdResult;
use fasopt_core::channel::{transmit_frm, transmit_frv};
use fasopt_core::config::SystemConfig;
use fasopt_core::hi::rate_report;
use fasopt_core::layout::{in_box, initial_layout, GEOMETRY_TOL};
use fasopt_core::scenario::sample_scenario;
use nalgebra::Vector2;

const SEED: u64 = 7;

fn proposed() -> &'static BcdResult {
    static RUN: OnceLock<BcdResult> = OnceLock::new();
    RUN.get_or_init(|| {
        let cfg = SystemConfig::default();
        run_scheme(SchemeId::Proposed, &sample_scenario(&cfg, SEED), &cfg).expect("default run")
    })
}

fn compared() -> &'static [SchemeRun] {
    static RUNS: OnceLock<Vec<SchemeRun>> = OnceLock::new();
    RUNS.get_or_init(|| {
        let cfg = SystemConfig::default();
        compare_schemes(&sample_scenario(&cfg, SEED), &cfg, &SchemeId::ALL).expect("default comparison")
    })
}

fn rate_of(id: SchemeId) -> f64 {
    compared().iter().find(|r| r.scheme == id).unwrap().result.min_rate()
}

#[test]
fn frm_stacks_transmit_responses() {
    let cfg = SystemConfig::default();
    let s = sample_scenario(&cfg, SEED);
    let tx = initial_layout(&cfg).unwrap().tx;
    for k in 0..cfg.n_users {
        let m = transmit_frm(&s, k, &tx);
        for (n, t) in tx.iter().enumerate() {
            assert_eq!(m.column(n).into_owned(), transmit_frv(&s, k, t).values);
        }
    }
}

#[test]
fn movable_antennas_never_lose_to_fixed_arrays() {
    let p = rate_of(SchemeId::Proposed);
    for other in [SchemeId::Tfa, SchemeId::Rfa, SchemeId::Fpa] {
        assert!(p >= rate_of(other) - 1e-6, "proposed {p} below {other} {}", rate_of(other));
    }
    assert!(rate_of(SchemeId::Tfa) >= rate_of(SchemeId::Fpa) - 1e-6);
    assert!(rate_of(SchemeId::Rfa) >= rate_of(SchemeId::Fpa) - 1e-6);
}

#[test]
fn proposed_run_is_monotone_and_feasible() {
    let cfg = SystemConfig::default();
    let r = proposed();
    for w in r.trace.windows(2) {
        assert!(w[1].tau >= w[0].tau * (1.0 - 1e-6), "{:?} then {:?}", w[0], w[1]);
    }
    for w in r.tau_trace.windows(2) {
        assert!(w[1] >= w[0] * (1.0 - 1e-6));
    }
    r.layout.validate(&cfg).unwrap();
    assert!(r.layout.min_tx_distance() >= cfg.min_spacing - GEOMETRY_TOL);
    assert!(r.beams.total_power() <= cfg.pmax * (1.0 + 1e-6));
    let report = &r.report;
    let min = report.rates.iter().copied().fold(f64::INFINITY, f64::min);
    assert_eq!(report.min_rate, min);
    for b in &report.breakdown {
        let sum = b.multiuser_interference + b.cu_distortion + b.bs_distortion + b.thermal;
        assert!((sum - b.total()).abs() <= 1e-9 * b.total());
    }
}

#[test]
fn converged_receivers_are_locally_stationary() {
    let cfg = SystemConfig::default();
    let s = sample_scenario(&cfg, SEED);
    let r = proposed();
    let base = rate_report(&s, &r.layout, &r.beams, &cfg).min_rate;
    let step = 1e-3;
    for k in 0..cfg.n_users {
        for d in [Vector2::new(step, 0.0), Vector2::new(-step, 0.0), Vector2::new(0.0, step), Vector2::new(0.0, -step)] {
            let mut layout = r.layout.clone();
            layout.rx[k] += d;
            if !in_box(&layout.rx[k], cfg.rx_halfwidth) {
                continue;
            }
            let moved = rate_report(&s, &layout, &r.beams, &cfg).min_rate;
            assert!(moved - base <= 1e-3, "receiver {k} moved by {d:?} gains {}", moved - base);
        }
    }
}
