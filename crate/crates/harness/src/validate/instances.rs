//! Random scenario instances with arbitrary feasible layouts and beams.

use fasopt_core::config::SystemConfig;
use fasopt_core::layout::{AntennaLayout, Position};
use fasopt_core::scenario::{complex_normal, sample_scenario, ChannelScenario};
use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Instance {
    pub cfg: SystemConfig,
    pub scenario: ChannelScenario,
    pub layout: AntennaLayout,
    /// Random beams at total power `pmax`.
    pub beams: Vec<DVector<Complex64>>,
    pub rng: ChaCha8Rng,
}

pub fn uniform_point(rng: &mut impl Rng, halfwidth: f64) -> Position {
    Position::new(rng.random_range(-halfwidth..=halfwidth), rng.random_range(-halfwidth..=halfwidth))
}

/// Default geometry with random impairment levels, a random spacing-feasible
/// transmit layout, random receive positions and random beams.
pub fn random_instance(index: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + index);
    let base = SystemConfig::default();
    let cfg = SystemConfig {
        hi_tx: rng.random_range(0.0..0.3),
        hi_rx: (0..base.n_users).map(|_| rng.random_range(0.0..0.3)).collect(),
        ..base
    };
    let scenario = sample_scenario(&cfg, index);
    let mut tx: Vec<Position> = Vec::with_capacity(cfg.n_tx);
    while tx.len() < cfg.n_tx {
        let p = uniform_point(&mut rng, cfg.tx_halfwidth);
        if tx.iter().all(|q| (q - p).norm() >= cfg.min_spacing) {
            tx.push(p);
        }
    }
    let rx = (0..cfg.n_users).map(|_| uniform_point(&mut rng, cfg.rx_halfwidth)).collect();
    let mut beams: Vec<DVector<Complex64>> =
        (0..cfg.n_users).map(|_| DVector::from_fn(cfg.n_tx, |_, _| complex_normal(&mut rng, 1.0))).collect();
    let total: f64 = beams.iter().map(|w| w.norm_squared()).sum();
    let scale = Complex64::new((cfg.pmax / total).sqrt(), 0.0);
    beams.iter_mut().for_each(|w| *w *= scale);
    Instance { cfg, scenario, layout: AntennaLayout { tx, rx }, beams, rng }
}
