//! Antenna-position blocks: one transmit antenna or one receive antenna at a
//! time, with the beams held fixed.

use fasopt_conic::{Affine, ProblemBuilder, SolveStatus, Var};
use nalgebra::DVector;
use num_complex::Complex64;

use super::{relative_gain, StageStats};
use crate::beams::BeamformingSet;
use crate::channel::{assemble_channels, UserChannel};
use crate::config::SystemConfig;
use crate::hi::{delta_unchecked, trace_product, Impairments};
use crate::layout::{check_spacing, AntennaLayout, Position};
use crate::scenario::ChannelScenario;
use crate::surrogates::{distance_linearization, BilinearBound, QuadraticModel, RxExpansion, SurrogateError, TxExpansion};

/// Extra clearance on the linearized spacing cuts so that solver tolerance
/// never lands a move inside the minimum distance, meters.
const SPACING_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct PositionOutcome {
    pub layout: AntennaLayout,
    /// True min-SINR after the block.
    pub tau: f64,
    /// Full passes over the antennas (transmit) or users (receive).
    pub rounds: usize,
    pub accepted: usize,
    pub stats: StageStats,
}

/// Per-user signal, interference-plus-noise and SINR.
pub(crate) fn user_terms(channels: &[UserChannel], ws: &[nalgebra::DMatrix<Complex64>], cfg: &SystemConfig) -> Vec<(f64, f64, f64)> {
    channels
        .iter()
        .enumerate()
        .map(|(k, ch)| {
            let s = trace_product(&ch.gram, &ws[k]);
            let d = delta_unchecked(&ch.gram, ws, k, Impairments::for_user(cfg, k)).total();
            (s, d, s / d)
        })
        .collect()
}

fn min_of(terms: &[(f64, f64, f64)]) -> f64 {
    terms.iter().map(|t| t.2).fold(f64::INFINITY, f64::min)
}

/// Adds `scale·(value + constant + slope·Δ − curvature/2 ‖Δ‖²) ≥ bilinear(τ, μ)`
/// with `Δ = λ z`. `τ` and `μ` are in units of their expansion values, so the
/// bilinear bound is expanded at (1, 1).
#[allow(clippy::too_many_arguments)]
fn add_signal_bound(b: &mut ProblemBuilder, model: &QuadraticModel, constant: f64, scale: f64, step: f64, z: [Var; 2], tau: Var, mu: Var) {
    let (c0, c_tau, c_mu) = BilinearBound::new(1.0, 1.0).affine_part();
    let q = Affine::constant(scale * (model.value + constant)) + z[0] * (scale * step * model.gradient.x) + z[1] * (scale * step * model.gradient.y)
        - c0
        - tau * c_tau
        - mu * c_mu;
    let w = (2.0 * scale * (-model.curvature).max(0.0)).sqrt() * step;
    b.soc(q.clone() + 1.0, vec![tau + mu, z[0] * w, z[1] * w, q - 1.0]);
}

/// Adds `μ ≥ scale·(value + constant + slope·Δ + curvature/2 ‖Δ‖²)`.
fn add_delta_bound(b: &mut ProblemBuilder, model: &QuadraticModel, constant: f64, scale: f64, step: f64, z: [Var; 2], mu: Var) {
    let p = Affine::from(mu) - scale * (model.value + constant) - z[0] * (scale * step * model.gradient.x) - z[1] * (scale * step * model.gradient.y);
    let w = (2.0 * scale * model.curvature.max(0.0)).sqrt() * step;
    if w > 0.0 {
        b.soc(p.clone() + 1.0, vec![z[0] * w, z[1] * w, p - 1.0]);
    } else {
        b.nonneg(p);
    }
}

fn add_box(b: &mut ProblemBuilder, center: &Position, step: f64, z: [Var; 2], halfwidth: f64) {
    for (axis, zv) in z.iter().enumerate() {
        b.nonneg(Affine::constant(halfwidth - center[axis]) - *zv * step);
        b.nonneg(Affine::constant(halfwidth + center[axis]) + *zv * step);
    }
}

fn clamp_box(p: Position, halfwidth: f64) -> Position {
    Position::new(p.x.clamp(-halfwidth, halfwidth), p.y.clamp(-halfwidth, halfwidth))
}

fn solve_move(b: &ProblemBuilder, z: [Var; 2], step: f64) -> Result<Position, SolveStatus> {
    let sol = b.solve().map_err(|_| SolveStatus::NumericalFailure)?;
    if !sol.raw.is_optimal() {
        return Err(sol.raw.status);
    }
    Ok(Position::new(sol.value(z[0]), sol.value(z[1])) * step)
}

/// Sweeps transmit antennas in ascending order, each with its own convex
/// subproblem; a move is kept only if the true min-SINR does not drop.
pub fn optimize_tx_positions(
    s: &ChannelScenario,
    layout: &AntennaLayout,
    beams: &BeamformingSet,
    cfg: &SystemConfig,
) -> Result<PositionOutcome, SurrogateError> {
    let ws = beams.rank_one_matrices();
    let vectors: &[DVector<Complex64>] = &beams.vectors;
    let mut layout = layout.clone();
    let mut terms = user_terms(&assemble_channels(s, &layout), &ws, cfg);
    let mut tau = min_of(&terms);
    let mut out = PositionOutcome { layout: layout.clone(), tau, rounds: 0, accepted: 0, stats: StageStats::default() };
    if beams.is_zero() || !(tau > 0.0) {
        return Ok(out);
    }
    let step = cfg.wavelength;
    for _ in 0..cfg.caps.tx_sweeps {
        out.rounds += 1;
        let sweep_start = tau;
        for n in 0..cfg.n_tx {
            let center = layout.tx[n];
            let cuts = distance_linearization(&center, &layout.tx, n, cfg.min_spacing + SPACING_MARGIN)?;
            let mut b = ProblemBuilder::new();
            let z = [b.var(), b.var()];
            let tau_var = b.var();
            for (k, &(_, delta, _)) in terms.iter().enumerate() {
                let e = TxExpansion::build(s, &layout, vectors, cfg, k, n);
                let mu = b.var();
                add_signal_bound(&mut b, &e.lower_model(), e.lambda_rest - e.omega, 1.0 / (tau * delta), step, z, tau_var, mu);
                add_delta_bound(&mut b, &e.upper_model(), e.c_const + e.pi_rest, 1.0 / delta, step, z, mu);
            }
            add_box(&mut b, &center, step, z, cfg.tx_halfwidth);
            for cut in &cuts {
                b.nonneg(Affine::constant(cut.slack(&center)) + z[0] * (step * cut.normal.x) + z[1] * (step * cut.normal.y));
            }
            b.nonneg(tau_var);
            b.maximize(tau_var);
            out.stats.solves += 1;
            let delta_pos = match solve_move(&b, z, step) {
                Ok(d) => d,
                Err(status) => {
                    out.stats.record_failure(status);
                    continue;
                }
            };
            let mut candidate = layout.clone();
            candidate.tx[n] = clamp_box(center + delta_pos, cfg.tx_halfwidth);
            if check_spacing(&candidate.tx, cfg.min_spacing).is_err() {
                continue;
            }
            let cand_terms = user_terms(&assemble_channels(s, &candidate), &ws, cfg);
            let cand_tau = min_of(&cand_terms);
            if cand_tau >= tau {
                layout = candidate;
                terms = cand_terms;
                tau = cand_tau;
                out.accepted += 1;
            }
        }
        if relative_gain(sweep_start, tau) <= cfg.tolerances.tx {
            break;
        }
    }
    out.layout = layout;
    out.tau = tau;
    Ok(out)
}

/// Moves each user's receive antenna against its own SINR; users are
/// independent, so all moves of a round are evaluated from the same state
/// and applied together.
pub fn optimize_rx_positions(s: &ChannelScenario, layout: &AntennaLayout, beams: &BeamformingSet, cfg: &SystemConfig) -> PositionOutcome {
    let ws = beams.rank_one_matrices();
    let mut layout = layout.clone();
    let mut terms = user_terms(&assemble_channels(s, &layout), &ws, cfg);
    let mut tau = min_of(&terms);
    let mut out = PositionOutcome { layout: layout.clone(), tau, rounds: 0, accepted: 0, stats: StageStats::default() };
    if beams.is_zero() || !(tau > 0.0) {
        return out;
    }
    let step = cfg.wavelength;
    for _ in 0..cfg.caps.rx {
        out.rounds += 1;
        let round_start = tau;
        let mut next = layout.clone();
        let mut moved = 0;
        for k in 0..cfg.n_users {
            let (_, delta, gamma) = terms[k];
            if !(gamma > 0.0) {
                continue;
            }
            let e = RxExpansion::build(s, &layout, &beams.vectors, cfg, k);
            let mut b = ProblemBuilder::new();
            let z = [b.var(), b.var()];
            let tau_var = b.var();
            let mu = b.var();
            add_signal_bound(&mut b, &e.lower_model(), -e.varpi, 1.0 / (gamma * delta), step, z, tau_var, mu);
            add_delta_bound(&mut b, &e.upper_model(), e.c_const, 1.0 / delta, step, z, mu);
            add_box(&mut b, &e.center, step, z, cfg.rx_halfwidth);
            b.nonneg(tau_var);
            b.maximize(tau_var);
            out.stats.solves += 1;
            let delta_pos = match solve_move(&b, z, step) {
                Ok(d) => d,
                Err(status) => {
                    out.stats.record_failure(status);
                    continue;
                }
            };
            let mut candidate = layout.clone();
            candidate.rx[k] = clamp_box(e.center + delta_pos, cfg.rx_halfwidth);
            let ch = crate::channel::assemble_channel(s, k, &candidate);
            let signal = trace_product(&ch.gram, &ws[k]);
            let d = delta_unchecked(&ch.gram, &ws, k, Impairments::for_user(cfg, k)).total();
            if signal / d >= gamma {
                next.rx[k] = candidate.rx[k];
                moved += 1;
            }
        }
        if moved > 0 {
            layout = next;
            terms = user_terms(&assemble_channels(s, &layout), &ws, cfg);
            tau = min_of(&terms);
            out.accepted += moved;
        }
        if moved == 0 || relative_gain(round_start, tau) <= cfg.tolerances.rx {
            break;
        }
    }
    out.layout = layout;
    out.tau = tau;
    out
}
