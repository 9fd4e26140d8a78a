//! Closed-form received power against Monte Carlo sampling of the
//! impairment model, and the SINR identity that follows from it.

use std::time::Instant;

use fasopt_core::channel::UserChannel;
use fasopt_core::beams::outer;
use fasopt_core::hi::{expected_received_power, mc_distortion_oracle, sinr, Impairments};
use fasopt_core::scenario::complex_normal;
use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Check, SuiteReport, SuiteSettings};

const INSTANCES: usize = 50;
const SAMPLES: usize = 100_000;
/// Standard errors.
const POWER_TOLERANCE: f64 = 3.0;
const IDENTITY_TOLERANCE: f64 = 1e-9;

pub fn hi_oracle(settings: &SuiteSettings) -> SuiteReport {
    let started = Instant::now();
    let mut power = Check::new("received_power_z", settings.tol(POWER_TOLERANCE));
    let mut identity = Check::new("sinr_identity", settings.tol(IDENTITY_TOLERANCE));
    for i in 0..settings.count(INSTANCES) as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(4000 + i);
        let n = rng.random_range(2..=6);
        let users = rng.random_range(1..=3);
        let row = DVector::from_fn(n, |_, _| complex_normal(&mut rng, 1.0));
        let ws: Vec<DVector<Complex64>> = (0..users).map(|_| DVector::from_fn(n, |_, _| complex_normal(&mut rng, 0.5))).collect();
        let imp = Impairments { eta: rng.random_range(0.0..0.3), rho: rng.random_range(0.0..0.3), noise: rng.random_range(0.01..1.0) };
        let k = rng.random_range(0..users);
        let label = || format!("instance {i} (N={n}, K={users})");

        let closed = expected_received_power(&row, &ws, imp);
        let mc = mc_distortion_oracle(&row, &ws, k, imp, SAMPLES, 9000 + i);
        power.record((mc.mean_power - closed).abs() / mc.std_error, label);

        let mats: Vec<_> = ws.iter().map(outer).collect();
        let gram = UserChannel::from_row(row.clone()).gram;
        let direct = sinr(&gram, &mats, k, imp).expect("positive noise");
        let desired = (row.transpose() * &ws[k])[0].norm_sqr();
        let from_power = desired / ((1.0 + imp.rho) * closed - desired);
        identity.record((direct - from_power).abs() / direct, label);
    }
    SuiteReport::from_checks("hi_oracle", vec![power, identity], started)
}
