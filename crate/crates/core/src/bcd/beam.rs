//! Beamforming block: successive convex approximation of the max-min SINR
//! problem with sequential rank-one constraint relaxation.

use fasopt_conic::{max_eigpair, Affine, ProblemBuilder, SolveStatus};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::hermitian::MatrixVar;
use super::{full_power, relative_gain, StageStats};
use crate::beams::{BeamformingSet, RANK_ONE_FLAG};
use crate::channel::UserChannel;
use crate::config::SystemConfig;
use crate::hi::{delta_unchecked, min_sinr, trace_product, Impairments};
use crate::surrogates::{srcr_data, BilinearBound};

/// Relaxation parameter at or above which the cut pins `W_k` to a ray.
const RAY_THRESHOLD: f64 = 1.0 - 1e-9;
/// Consecutive failed solves that end the loop.
const MAX_FAILURES: usize = 3;

/// Relaxation state of the rank-one cuts.
#[derive(Debug, Clone, PartialEq)]
pub struct SrcrState {
    /// Per-user relaxation parameter in `[0, 1]`.
    pub theta: Vec<f64>,
    pub alpha: f64,
}

impl SrcrState {
    pub fn new(n_users: usize, alpha: f64) -> Self {
        Self { theta: vec![0.0; n_users], alpha }
    }
}

#[derive(Debug, Clone)]
pub struct BeamOutcome {
    /// Best accepted beams (never worse than the input).
    pub beams: BeamformingSet,
    /// True min-SINR of `beams`.
    pub tau: f64,
    /// Rank-one ratio `λ_max/Tr` of the last lifted iterate per user.
    pub final_ratio: Vec<f64>,
    /// Lifted min-SINR after each successful solve.
    pub lifted_trace: Vec<f64>,
    pub srcr: SrcrState,
    pub stats: StageStats,
    /// Ended after repeated solver failures.
    pub aborted: bool,
}

/// Linear coefficient matrix of `W_i` in the interference-plus-noise of user `k`.
pub(crate) fn interference_weight(gram: &DMatrix<Complex64>, k: usize, i: usize, imp: Impairments) -> DMatrix<Complex64> {
    let own = if i == k { 0.0 } else { 1.0 };
    let mut m = gram * Complex64::new(own + imp.rho, 0.0);
    for n in 0..gram.nrows() {
        m[(n, n)] += Complex64::new(imp.eta * (1.0 + imp.rho) * gram[(n, n)].re, 0.0);
    }
    m
}

/// One convex subproblem around the lifted iterate `ws`. Returns the new
/// lifted matrices in watts.
pub(crate) fn solve_beam_subproblem(
    channels: &[UserChannel],
    ws: &[DMatrix<Complex64>],
    srcr: &SrcrState,
    cfg: &SystemConfig,
) -> Result<Vec<DMatrix<Complex64>>, SolveStatus> {
    let k_users = channels.len();
    let n = cfg.n_tx;
    let noise = cfg.noise_power;
    let unit = cfg.pmax / noise;

    let signal: Vec<f64> = channels.iter().zip(ws).map(|(c, w)| trace_product(&c.gram, w) / noise).collect();
    let delta: Vec<f64> = (0..k_users)
        .map(|k| delta_unchecked(&channels[k].gram, ws, k, Impairments::for_user(cfg, k)).total() / noise)
        .collect();
    let tau_ref = signal.iter().zip(&delta).map(|(s, d)| s / d).fold(f64::INFINITY, f64::min).max(1e-9);
    // `τ` is measured in units of `τ̄` and `μ_k` in units of `δ̄_k`, so the
    // bilinear bound is expanded at (1, 1)
    let (c0, c_tau, c_mu) = BilinearBound::new(1.0, 1.0).affine_part();

    let mut b = ProblemBuilder::new();
    let tau = b.var();
    let mus = b.vars(k_users);
    let mats: Vec<MatrixVar> = (0..k_users)
        .map(|k| {
            if srcr.theta[k] >= RAY_THRESHOLD {
                MatrixVar::ray(&mut b, max_eigpair(&ws[k]).vector)
            } else {
                MatrixVar::full(&mut b, n)
            }
        })
        .collect();

    for k in 0..k_users {
        let imp = Impairments::for_user(cfg, k);
        let gram = &channels[k].gram;
        let rhs = mats[k].trace_with(&(gram * Complex64::new(unit / (tau_ref * delta[k]), 0.0)));
        let q = rhs - c0 - tau * c_tau - mus[k] * c_mu;
        b.soc(q.clone() + 1.0, vec![tau + mus[k], q - 1.0]);

        let mut slack = mus[k] - (1.0 + imp.rho) / delta[k];
        for (i, m) in mats.iter().enumerate() {
            slack = slack - m.trace_with(&(interference_weight(gram, k, i, imp) * Complex64::new(unit / delta[k], 0.0)));
        }
        b.nonneg(slack);

        let theta = srcr.theta[k];
        if theta > 0.0 && theta < RAY_THRESHOLD {
            let u = max_eigpair(&ws[k]).vector;
            b.nonneg(mats[k].quadratic(&u) - mats[k].trace() * theta);
        }
    }
    let mut power = Affine::constant(0.0);
    for m in &mats {
        power += m.trace();
    }
    b.le(power, 1.0);
    b.nonneg(tau);
    b.maximize(tau);

    let sol = b.solve().map_err(|_| SolveStatus::NumericalFailure)?;
    if !sol.raw.is_optimal() {
        return Err(sol.raw.status);
    }
    Ok(mats.iter().map(|m| m.value(&sol) * Complex64::new(cfg.pmax, 0.0)).collect())
}

/// Runs the beamforming block from `start` with fixed channels.
pub fn optimize_beamforming(channels: &[UserChannel], start: &BeamformingSet, cfg: &SystemConfig) -> BeamOutcome {
    let k_users = channels.len();
    let start_mats = start.rank_one_matrices();
    let mut best = start.clone();
    let mut best_tau = min_sinr(channels, &start_mats, cfg);
    let mut iterate = start_mats;
    let mut prev_lifted = best_tau;
    let mut srcr = SrcrState::new(k_users, cfg.srcr_alpha0);
    let mut ratios = vec![1.0; k_users];
    let mut stats = StageStats::default();
    let mut lifted_trace = Vec::new();
    let mut consecutive_failures = 0;
    let mut aborted = false;
    let mut last_free_gain = f64::INFINITY;

    for _ in 0..cfg.caps.beam {
        stats.solves += 1;
        let pinned = srcr.theta.iter().any(|&t| t >= RAY_THRESHOLD);
        match solve_beam_subproblem(channels, &iterate, &srcr, cfg) {
            Ok(next) => {
                consecutive_failures = 0;
                let lifted = min_sinr(channels, &next, cfg);
                for k in 0..k_users {
                    match srcr_data(&next[k], srcr.theta[k], srcr.alpha) {
                        Ok(cut) => {
                            ratios[k] = cut.rank_one_ratio;
                            srcr.theta[k] = cut.next_theta;
                        }
                        Err(_) => {
                            ratios[k] = 1.0;
                            srcr.theta[k] = 0.0;
                        }
                    }
                }
                let candidate = full_power(BeamformingSet::from_lifted(next.clone()), cfg.pmax);
                let tau = min_sinr(channels, &candidate.rank_one_matrices(), cfg);
                if tau > best_tau {
                    best_tau = tau;
                    best = candidate;
                }
                let gain = relative_gain(prev_lifted, lifted);
                if !pinned {
                    last_free_gain = gain;
                }
                lifted_trace.push(lifted);
                prev_lifted = lifted;
                iterate = next;
                if gain.abs() <= cfg.tolerances.beam && ratios.iter().all(|&r| r >= RANK_ONE_FLAG) {
                    if pinned && last_free_gain > cfg.tolerances.beam {
                        // pinned beams only re-balance power; reopen the
                        // directions while free steps still make progress
                        srcr.theta.iter_mut().for_each(|t| *t = 0.0);
                        continue;
                    }
                    break;
                }
            }
            Err(status) => {
                stats.record_failure(status);
                consecutive_failures += 1;
                srcr.alpha *= 0.5;
                for k in 0..k_users {
                    let ratio = srcr_data(&iterate[k], 0.0, 0.0).map(|c| c.rank_one_ratio).unwrap_or(1.0);
                    srcr.theta[k] = (ratio + srcr.alpha).min(1.0);
                }
                if consecutive_failures >= MAX_FAILURES {
                    aborted = true;
                    break;
                }
            }
        }
    }
    BeamOutcome { beams: best, tau: best_tau, final_ratio: ratios, lifted_trace, srcr, stats, aborted }
}

/// Matched-filter beams `w_k ∝ h_k^H` with equal power split.
pub fn matched_filter(channels: &[UserChannel], pmax: f64) -> BeamformingSet {
    let share = (pmax / channels.len() as f64).sqrt();
    let vectors: Vec<DVector<Complex64>> = channels
        .iter()
        .map(|c| {
            let norm = c.row.norm();
            if norm > 0.0 {
                c.row.conjugate() * Complex64::new(share / norm, 0.0)
            } else {
                DVector::zeros(c.row.len())
            }
        })
        .collect();
    BeamformingSet::from_vectors(vectors)
}
