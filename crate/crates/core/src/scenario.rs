//! Random path geometry and path responses.
//!
//! Streams: every scenario draws from a ChaCha20 generator keyed by the
//! configuration seed, on stream number equal to the scenario seed. Scenario
//! `i` is therefore identical whether it is sampled alone, in a sweep, or on
//! any number of worker threads.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Vector2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::config::SystemConfig;

/// Angles of one user's paths, radians, each in `[0, π]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathGeometry {
    pub tx_elevation: Vec<f64>,
    pub tx_azimuth: Vec<f64>,
    pub rx_elevation: Vec<f64>,
    pub rx_azimuth: Vec<f64>,
    /// User location relative to the BS, meters.
    pub location: [f64; 2],
    pub distance: f64,
}

impl PathGeometry {
    /// Planar direction `(sinθ cosφ, cosθ)` of transmit path `l`.
    pub fn tx_direction(&self, l: usize) -> Vector2<f64> {
        direction(self.tx_elevation[l], self.tx_azimuth[l])
    }

    pub fn rx_direction(&self, m: usize) -> Vector2<f64> {
        direction(self.rx_elevation[m], self.rx_azimuth[m])
    }

    pub fn n_tx_paths(&self) -> usize {
        self.tx_elevation.len()
    }

    pub fn n_rx_paths(&self) -> usize {
        self.rx_elevation.len()
    }
}

fn direction(elevation: f64, azimuth: f64) -> Vector2<f64> {
    Vector2::new(elevation.sin() * azimuth.cos(), elevation.cos())
}

/// Everything random about one channel realization.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelScenario {
    pub seed: u64,
    pub wavelength: f64,
    pub users: Vec<PathGeometry>,
    /// Receive-paths × transmit-paths response per user.
    pub path_response: Vec<DMatrix<Complex64>>,
}

impl ChannelScenario {
    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    /// Mean per-entry power `g0 (d/d0)^{-α} / L` used for user `k`.
    pub fn path_variance(cfg: &SystemConfig, distance: f64) -> f64 {
        cfg.ref_gain * distance.powf(-cfg.pathloss_exponent) / cfg.n_paths as f64
    }
}

pub fn scenario_rng(cfg: &SystemConfig, seed: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.rng_seed);
    rng.set_stream(seed);
    rng
}

pub fn complex_normal(rng: &mut impl Rng, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

pub fn sample_scenario(cfg: &SystemConfig, seed: u64) -> ChannelScenario {
    let mut rng = scenario_rng(cfg, seed);
    let l = cfg.n_paths;
    let (x0, x1) = cfg.user_area.x_range();
    let (y0, y1) = cfg.user_area.y_range();
    let mut users = Vec::with_capacity(cfg.n_users);
    let mut path_response = Vec::with_capacity(cfg.n_users);
    for _ in 0..cfg.n_users {
        let mut angles = || (0..l).map(|_| rng.random_range(0.0..=PI)).collect::<Vec<f64>>();
        let tx_elevation = angles();
        let tx_azimuth = angles();
        let rx_elevation = angles();
        let rx_azimuth = angles();
        let location = [uniform(&mut rng, x0, x1), uniform(&mut rng, y0, y1)];
        let distance = location[0].hypot(location[1]);
        let var = ChannelScenario::path_variance(cfg, distance);
        let mut sigma = DMatrix::zeros(l, l);
        for i in 0..l {
            sigma[(i, i)] = complex_normal(&mut rng, var);
        }
        users.push(PathGeometry { tx_elevation, tx_azimuth, rx_elevation, rx_azimuth, location, distance });
        path_response.push(sigma);
    }
    ChannelScenario { seed, wavelength: cfg.wavelength, users, path_response }
}

fn uniform(rng: &mut impl Rng, a: f64, b: f64) -> f64 {
    if a == b {
        a
    } else {
        rng.random_range(a..=b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_scenario() {
        let cfg = SystemConfig::default();
        assert_eq!(sample_scenario(&cfg, 7), sample_scenario(&cfg, 7));
        assert_ne!(sample_scenario(&cfg, 7), sample_scenario(&cfg, 8));
    }

    #[test]
    fn geometry_within_ranges() {
        let cfg = SystemConfig::default();
        for seed in 0..20 {
            let s = sample_scenario(&cfg, seed);
            for u in &s.users {
                let all = u.tx_elevation.iter().chain(&u.tx_azimuth).chain(&u.rx_elevation).chain(&u.rx_azimuth);
                assert!(all.into_iter().all(|a| (0.0..=PI).contains(a)));
                assert!((20.0..=40.0).contains(&u.location[0]) && (-20.0..=0.0).contains(&u.location[1]));
                assert!(u.distance > 0.0);
            }
            for sigma in &s.path_response {
                for i in 0..sigma.nrows() {
                    for j in 0..sigma.ncols() {
                        if i != j {
                            assert_eq!(sigma[(i, j)], Complex64::new(0.0, 0.0));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn unit_distance_variance_sums_to_ref_gain() {
        let cfg = SystemConfig::default();
        let total = ChannelScenario::path_variance(&cfg, 1.0) * cfg.n_paths as f64;
        assert!((total - 1e-3).abs() < 1e-18);
    }
}
