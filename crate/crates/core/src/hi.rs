//! Impairment-aware SINR, its decomposition, rates and a sampling oracle.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use thiserror::Error;

use crate::beams::BeamformingSet;
use crate::channel::{assemble_channels, UserChannel};
use crate::config::SystemConfig;
use crate::layout::AntennaLayout;
use crate::scenario::{complex_normal, ChannelScenario};

const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum HiError {
    #[error("{0} is not Hermitian (deviation {1:.3e})")]
    NotHermitian(&'static str, f64),
    #[error("interference-plus-noise power {0:e} is not positive")]
    NonPositiveDelta(f64),
}

/// Terms of the SINR denominator, watts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaBreakdown {
    pub multiuser_interference: f64,
    pub cu_distortion: f64,
    pub bs_distortion: f64,
    pub thermal: f64,
}

impl DeltaBreakdown {
    pub fn total(&self) -> f64 {
        self.multiuser_interference + self.cu_distortion + self.bs_distortion + self.thermal
    }
}

/// `Re Tr(H W)`.
pub fn trace_product(h: &DMatrix<Complex64>, w: &DMatrix<Complex64>) -> f64 {
    let n = h.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (h[(i, j)] * w[(j, i)]).re;
        }
    }
    acc
}

/// `Tr(diag{H} W) = Σ_n H[n,n] W[n,n]`.
pub fn diag_trace_product(h: &DMatrix<Complex64>, w: &DMatrix<Complex64>) -> f64 {
    (0..h.nrows()).map(|n| h[(n, n)].re * w[(n, n)].re).sum()
}

fn check_hermitian(what: &'static str, m: &DMatrix<Complex64>) -> Result<(), HiError> {
    let scale = m.iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let dev = (m - m.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max);
    if dev > HERMITIAN_TOL * scale {
        Err(HiError::NotHermitian(what, dev))
    } else {
        Ok(())
    }
}

/// Impairment parameters seen by one user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Impairments {
    pub eta: f64,
    pub rho: f64,
    pub noise: f64,
}

impl Impairments {
    pub fn for_user(cfg: &SystemConfig, k: usize) -> Self {
        Self { eta: cfg.hi_tx, rho: cfg.hi_rx[k], noise: cfg.noise_power }
    }
}

pub fn delta_k(gram: &DMatrix<Complex64>, ws: &[DMatrix<Complex64>], k: usize, imp: Impairments) -> Result<DeltaBreakdown, HiError> {
    check_hermitian("channel Gram matrix", gram)?;
    for w in ws {
        check_hermitian("beamforming matrix", w)?;
    }
    Ok(delta_unchecked(gram, ws, k, imp))
}

pub(crate) fn delta_unchecked(gram: &DMatrix<Complex64>, ws: &[DMatrix<Complex64>], k: usize, imp: Impairments) -> DeltaBreakdown {
    let powers: Vec<f64> = ws.iter().map(|w| trace_product(gram, w)).collect();
    let all: f64 = powers.iter().sum();
    let diag: f64 = ws.iter().map(|w| diag_trace_product(gram, w)).sum();
    DeltaBreakdown {
        multiuser_interference: all - powers[k],
        cu_distortion: imp.rho * all,
        bs_distortion: imp.eta * (1.0 + imp.rho) * diag,
        thermal: (1.0 + imp.rho) * imp.noise,
    }
}

pub fn sinr(gram: &DMatrix<Complex64>, ws: &[DMatrix<Complex64>], k: usize, imp: Impairments) -> Result<f64, HiError> {
    let d = delta_k(gram, ws, k, imp)?.total();
    if !(d > 0.0) {
        return Err(HiError::NonPositiveDelta(d));
    }
    Ok(trace_product(gram, &ws[k]) / d)
}

/// SINR of every user for (possibly lifted) matrices `ws`.
pub fn sinrs(channels: &[UserChannel], ws: &[DMatrix<Complex64>], cfg: &SystemConfig) -> Vec<f64> {
    channels
        .iter()
        .enumerate()
        .map(|(k, ch)| {
            let d = delta_unchecked(&ch.gram, ws, k, Impairments::for_user(cfg, k)).total();
            trace_product(&ch.gram, &ws[k]) / d
        })
        .collect()
}

pub fn min_sinr(channels: &[UserChannel], ws: &[DMatrix<Complex64>], cfg: &SystemConfig) -> f64 {
    sinrs(channels, ws, cfg).into_iter().fold(f64::INFINITY, f64::min)
}

pub fn rate(sinr: f64) -> f64 {
    (1.0 + sinr).log2()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub sinr: Vec<f64>,
    /// bits/s/Hz.
    pub rates: Vec<f64>,
    pub min_rate: f64,
    pub breakdown: Vec<DeltaBreakdown>,
}

impl RateReport {
    pub fn from_matrices(channels: &[UserChannel], ws: &[DMatrix<Complex64>], cfg: &SystemConfig) -> Self {
        let mut sinr = Vec::with_capacity(channels.len());
        let mut breakdown = Vec::with_capacity(channels.len());
        for (k, ch) in channels.iter().enumerate() {
            let b = delta_unchecked(&ch.gram, ws, k, Impairments::for_user(cfg, k));
            sinr.push(trace_product(&ch.gram, &ws[k]) / b.total());
            breakdown.push(b);
        }
        let rates: Vec<f64> = sinr.iter().map(|&g| rate(g)).collect();
        let min_rate = rates.iter().copied().fold(f64::INFINITY, f64::min);
        Self { sinr, rates, min_rate, breakdown }
    }

    pub fn min_sinr(&self) -> f64 {
        self.sinr.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Rates of the extracted rank-one beams (never the lifted matrices).
pub fn rate_report(scenario: &ChannelScenario, layout: &AntennaLayout, beams: &BeamformingSet, cfg: &SystemConfig) -> RateReport {
    let channels = assemble_channels(scenario, layout);
    RateReport::from_matrices(&channels, &beams.rank_one_matrices(), cfg)
}

/// Sample estimate of the pre-distortion received power at one user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean_power: f64,
    pub std_error: f64,
    /// SINR implied by the estimate through the receive-distortion model.
    pub sinr: f64,
    pub samples: usize,
}

/// Draws `ȳ = h (Σ w_i s_i + z_t) + n` and averages `|ȳ|²`.
pub fn mc_distortion_oracle(
    row: &DVector<Complex64>,
    ws: &[DVector<Complex64>],
    k: usize,
    imp: Impairments,
    n_samples: usize,
    seed: u64,
) -> McEstimate {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let n = row.len();
    let gains: Vec<Complex64> = ws.iter().map(|w| (row.transpose() * w)[0]).collect();
    // per-antenna distortion variance η Σ_i |w_i(n)|²
    let tx_var: Vec<f64> = (0..n).map(|a| imp.eta * ws.iter().map(|w| w[a].norm_sqr()).sum::<f64>()).collect();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..n_samples {
        let mut y = complex_normal(&mut rng, imp.noise);
        for g in &gains {
            y += g * complex_normal(&mut rng, 1.0);
        }
        for a in 0..n {
            if tx_var[a] > 0.0 {
                y += row[a] * complex_normal(&mut rng, tx_var[a]);
            }
        }
        let p = y.norm_sqr();
        sum += p;
        sum_sq += p * p;
    }
    let m = n_samples as f64;
    let mean = sum / m;
    let var = ((sum_sq / m - mean * mean) * m / (m - 1.0)).max(0.0);
    let desired = gains[k].norm_sqr();
    McEstimate {
        mean_power: mean,
        std_error: (var / m).sqrt(),
        sinr: desired / ((1.0 + imp.rho) * mean - desired),
        samples: n_samples,
    }
}

/// Closed-form `E|ȳ_k|²`.
pub fn expected_received_power(row: &DVector<Complex64>, ws: &[DVector<Complex64>], imp: Impairments) -> f64 {
    let signal: f64 = ws.iter().map(|w| (row.transpose() * w)[0].norm_sqr()).sum();
    let distortion: f64 = (0..row.len())
        .map(|a| row[a].norm_sqr() * ws.iter().map(|w| w[a].norm_sqr()).sum::<f64>())
        .sum();
    signal + imp.eta * distortion + imp.noise
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beams::outer;
    use crate::channel::UserChannel;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample_row() -> DVector<Complex64> {
        DVector::from_vec(vec![c(0.3, -0.2), c(-1.1, 0.4), c(0.05, 0.9), c(0.7, 0.7)])
    }

    fn sample_beams() -> Vec<DVector<Complex64>> {
        vec![
            DVector::from_vec(vec![c(0.5, 0.1), c(-0.2, 0.3), c(0.0, -0.4), c(0.1, 0.1)]),
            DVector::from_vec(vec![c(-0.3, 0.2), c(0.6, 0.0), c(0.2, 0.2), c(-0.1, 0.5)]),
        ]
    }

    #[test]
    fn ideal_hardware_leaves_interference_and_noise() {
        let ch = UserChannel::from_row(sample_row());
        let ws: Vec<_> = sample_beams().iter().map(outer).collect();
        let imp = Impairments { eta: 0.0, rho: 0.0, noise: 1e-3 };
        let d = delta_k(&ch.gram, &ws, 0, imp).unwrap();
        assert_eq!((d.cu_distortion, d.bs_distortion, d.thermal), (0.0, 0.0, 1e-3));
        let cross = (sample_row().transpose() * &sample_beams()[1])[0].norm_sqr();
        assert!((d.multiuser_interference - cross).abs() < 1e-15);
    }

    #[test]
    fn single_user_matched_filter() {
        let h = sample_row();
        let p = 2.0;
        let w = h.conjugate() * c((p / h.norm_squared()).sqrt(), 0.0);
        let ch = UserChannel::from_row(h.clone());
        let imp = Impairments { eta: 0.0, rho: 0.0, noise: 0.1 };
        let g = sinr(&ch.gram, &[outer(&w)], 0, imp).unwrap();
        assert!((g - p * h.norm_squared() / 0.1).abs() < 1e-9 * g);
    }

    #[test]
    fn diag_identity_matches_per_antenna_sum() {
        let h = sample_row();
        let ch = UserChannel::from_row(h.clone());
        for w in sample_beams() {
            let direct: f64 = (0..4).map(|n| w[n].norm_sqr() * h[n].norm_sqr()).sum();
            let via = diag_trace_product(&ch.gram, &outer(&w));
            assert!((direct - via).abs() <= 1e-12 * direct);
        }
    }

    #[test]
    fn rejects_non_hermitian_input() {
        let mut g = UserChannel::from_row(sample_row()).gram;
        g[(0, 1)] += c(0.5, 0.0);
        let ws: Vec<_> = sample_beams().iter().map(outer).collect();
        let imp = Impairments { eta: 0.1, rho: 0.1, noise: 1.0 };
        assert!(matches!(delta_k(&g, &ws, 0, imp), Err(HiError::NotHermitian(..))));
    }

    #[test]
    fn oracle_without_beams_measures_noise() {
        let est = mc_distortion_oracle(&sample_row(), &[DVector::zeros(4)], 0, Impairments { eta: 0.3, rho: 0.0, noise: 2.0 }, 20_000, 1);
        assert!((est.mean_power - 2.0).abs() < 3.0 * est.std_error + 1e-12);
    }

    #[test]
    fn unit_sinr_is_one_bit() {
        assert_eq!(rate(1.0), 1.0);
        assert_eq!(rate(0.0), 0.0);
    }
}
