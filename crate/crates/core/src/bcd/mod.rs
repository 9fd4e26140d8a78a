//! Block coordinate descent over beams, transmit positions and receive
//! positions.
//!
//! Every block only accepts iterates whose true min-SINR (evaluated with the
//! extracted rank-one beams) is at least the incoming value, so the outer
//! objective trace is monotone by construction.

mod beam;
mod hermitian;
mod position;

pub use beam::{matched_filter, optimize_beamforming, BeamOutcome, SrcrState};
pub use position::{optimize_rx_positions, optimize_tx_positions, PositionOutcome};

use fasopt_conic::SolveStatus;
use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::beams::BeamformingSet;
use crate::channel::assemble_channels;
use crate::config::SystemConfig;
use crate::hi::{min_sinr, rate, rate_report, RateReport};
use crate::layout::{initial_layout, AntennaLayout, LayoutError};
use crate::scenario::ChannelScenario;
use crate::surrogates::SurrogateError;

#[derive(Debug, Error)]
pub enum BcdError {
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error(transparent)]
    Surrogate(#[from] SurrogateError),
}

/// Which position blocks run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Proposed,
    /// Transmit positions only.
    Tfa,
    /// Receive positions only.
    Rfa,
    /// Fixed positions.
    Fpa,
}

impl Mode {
    pub fn moves_tx(self) -> bool {
        matches!(self, Mode::Proposed | Mode::Tfa)
    }

    pub fn moves_rx(self) -> bool {
        matches!(self, Mode::Proposed | Mode::Rfa)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Init,
    Beam,
    Tx,
    Rx,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Init => "init",
            Stage::Beam => "beam",
            Stage::Tx => "tx",
            Stage::Rx => "rx",
        }
    }
}

/// Solver bookkeeping of one block invocation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageStats {
    pub solves: usize,
    pub failures: usize,
    pub last_failure: Option<SolveStatus>,
}

impl StageStats {
    fn record_failure(&mut self, status: SolveStatus) {
        self.failures += 1;
        self.last_failure = Some(status);
    }

    /// Status reported in traces: the last failure if any, else optimal.
    pub fn status(&self) -> Option<SolveStatus> {
        if self.solves == 0 {
            None
        } else {
            Some(self.last_failure.unwrap_or(SolveStatus::Optimal))
        }
    }

    fn absorb(&mut self, other: &StageStats) {
        self.solves += other.solves;
        self.failures += other.failures;
        if other.last_failure.is_some() {
            self.last_failure = other.last_failure;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    pub stage: Stage,
    /// True min-SINR after the block.
    pub tau: f64,
    /// bits/s/Hz.
    pub min_rate: f64,
    pub status: Option<SolveStatus>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    IterationCap,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LoopCounts {
    pub beam: StageStats,
    pub beam_aborts: usize,
    pub tx: StageStats,
    pub tx_sweeps: usize,
    pub tx_accepted: usize,
    pub rx: StageStats,
    pub rx_rounds: usize,
    pub rx_accepted: usize,
}

#[derive(Debug, Clone)]
pub struct BcdResult {
    pub mode: Mode,
    pub layout: AntennaLayout,
    pub beams: BeamformingSet,
    pub report: RateReport,
    pub trace: Vec<TraceRecord>,
    /// Min-SINR at the start and after every outer iteration.
    pub tau_trace: Vec<f64>,
    pub outer_iterations: usize,
    pub counts: LoopCounts,
    /// Rank-one ratio of the lifted matrices from the final beamforming block.
    pub rank_one_ratio: Vec<f64>,
    pub termination: Termination,
}

impl BcdResult {
    pub fn min_rate(&self) -> f64 {
        self.report.min_rate
    }

    pub fn min_sinr(&self) -> f64 {
        self.report.min_sinr()
    }
}

/// Starting point of a run.
#[derive(Debug, Clone)]
pub struct InitialState {
    pub layout: AntennaLayout,
    pub beams: BeamformingSet,
    pub tau: f64,
}

pub(crate) fn relative_gain(before: f64, after: f64) -> f64 {
    (after - before) / before.abs().max(1e-12)
}

/// Rescales every beam by one common factor so the total power is `pmax`.
/// With a fixed noise floor each SINR is increasing in that factor.
pub(crate) fn full_power(mut beams: BeamformingSet, pmax: f64) -> BeamformingSet {
    let total = beams.total_power();
    if total > 0.0 {
        let f = Complex64::new((pmax / total).sqrt(), 0.0);
        for v in &mut beams.vectors {
            *v *= f;
        }
    }
    beams
}

/// Grid transmit layout, centered receivers and matched-filter beams.
pub fn init_state(s: &ChannelScenario, cfg: &SystemConfig) -> Result<InitialState, LayoutError> {
    Ok(init_on_layout(s, initial_layout(cfg)?, cfg))
}

/// Matched-filter start on a given layout.
pub fn init_on_layout(s: &ChannelScenario, layout: AntennaLayout, cfg: &SystemConfig) -> InitialState {
    let channels = assemble_channels(s, &layout);
    let beams = matched_filter(&channels, cfg.pmax);
    let tau = min_sinr(&channels, &beams.rank_one_matrices(), cfg);
    InitialState { layout, beams, tau }
}

pub fn run_bcd(s: &ChannelScenario, cfg: &SystemConfig, mode: Mode) -> Result<BcdResult, BcdError> {
    let init = init_state(s, cfg)?;
    run_bcd_from(s, cfg, mode, init.layout, init.beams)
}

/// Runs the outer loop from a feasible layout and beams.
pub fn run_bcd_from(
    s: &ChannelScenario,
    cfg: &SystemConfig,
    mode: Mode,
    layout: AntennaLayout,
    beams: BeamformingSet,
) -> Result<BcdResult, BcdError> {
    layout.validate(cfg)?;
    let mut layout = layout;
    let mut beams = beams;
    let mut tau = min_sinr(&assemble_channels(s, &layout), &beams.rank_one_matrices(), cfg);
    let mut trace = vec![TraceRecord { iteration: 0, stage: Stage::Init, tau, min_rate: rate(tau), status: None }];
    let mut tau_trace = vec![tau];
    let mut counts = LoopCounts::default();
    let mut rank_one_ratio = beams.rank_one_ratio.clone();
    let mut termination = Termination::IterationCap;
    let mut outer_iterations = 0;

    for it in 1..=cfg.caps.outer {
        outer_iterations = it;
        let start = tau;

        let channels = assemble_channels(s, &layout);
        let b = optimize_beamforming(&channels, &beams, cfg);
        counts.beam.absorb(&b.stats);
        counts.beam_aborts += usize::from(b.aborted);
        if b.tau >= tau {
            tau = b.tau;
            beams = b.beams;
            rank_one_ratio = b.final_ratio;
        }
        trace.push(TraceRecord { iteration: it, stage: Stage::Beam, tau, min_rate: rate(tau), status: b.stats.status() });

        if mode.moves_tx() {
            let t = optimize_tx_positions(s, &layout, &beams, cfg)?;
            counts.tx.absorb(&t.stats);
            counts.tx_sweeps += t.rounds;
            counts.tx_accepted += t.accepted;
            if t.tau >= tau {
                tau = t.tau;
                layout = t.layout;
            }
            trace.push(TraceRecord { iteration: it, stage: Stage::Tx, tau, min_rate: rate(tau), status: t.stats.status() });
        }
        if mode.moves_rx() {
            let r = optimize_rx_positions(s, &layout, &beams, cfg);
            counts.rx.absorb(&r.stats);
            counts.rx_rounds += r.rounds;
            counts.rx_accepted += r.accepted;
            if r.tau >= tau {
                tau = r.tau;
                layout = r.layout;
            }
            trace.push(TraceRecord { iteration: it, stage: Stage::Rx, tau, min_rate: rate(tau), status: r.stats.status() });
        }
        tau_trace.push(tau);
        if relative_gain(start, tau) <= cfg.tolerances.outer {
            termination = Termination::Converged;
            break;
        }
    }

    let report = rate_report(s, &layout, &beams, cfg);
    Ok(BcdResult { mode, layout, beams, report, trace, tau_trace, outer_iterations, counts, rank_one_ratio, termination })
}

/// Beam vectors as plain complex columns (used when serializing results).
pub fn beam_columns(beams: &BeamformingSet) -> Vec<Vec<(f64, f64)>> {
    beams.vectors.iter().map(|v: &DVector<Complex64>| v.iter().map(|c| (c.re, c.im)).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::assemble_channel;
    use crate::layout::Position;
    use crate::scenario::sample_scenario;

    fn single_user_ideal() -> SystemConfig {
        SystemConfig { n_users: 1, hi_tx: 0.0, hi_rx: vec![0.0], ..SystemConfig::default() }
    }

    #[test]
    fn single_user_reaches_matched_filter_optimum() {
        let cfg = single_user_ideal();
        for seed in 0..3 {
            let s = sample_scenario(&cfg, seed);
            let layout = initial_layout(&cfg).unwrap();
            let channels = assemble_channels(&s, &layout);
            let optimum = cfg.pmax * channels[0].row.norm_squared() / cfg.noise_power;
            let start = BeamformingSet::from_vectors(vec![DVector::from_element(cfg.n_tx, Complex64::new((cfg.pmax / 4.0).sqrt(), 0.0))]);
            let out = optimize_beamforming(&channels, &start, &cfg);
            assert!((out.tau - optimum).abs() <= 0.01 * optimum, "seed {seed}: {} vs {optimum}", out.tau);
        }
    }

    #[test]
    fn init_uses_full_power_and_reports_min_sinr() {
        let cfg = SystemConfig::default();
        let s = sample_scenario(&cfg, 3);
        let init = init_state(&s, &cfg).unwrap();
        assert!((init.beams.total_power() - cfg.pmax).abs() < 1e-12 * cfg.pmax);
        assert!(init.layout.min_tx_distance() >= cfg.min_spacing - 1e-12);
        let report = rate_report(&s, &init.layout, &init.beams, &cfg);
        assert!((report.min_sinr() - init.tau).abs() < 1e-12 * init.tau);
    }

    #[test]
    fn zero_beams_leave_positions_unchanged() {
        let cfg = SystemConfig::default();
        let s = sample_scenario(&cfg, 1);
        let layout = initial_layout(&cfg).unwrap();
        let zero = BeamformingSet::from_vectors(vec![DVector::zeros(cfg.n_tx); cfg.n_users]);
        let t = optimize_tx_positions(&s, &layout, &zero, &cfg).unwrap();
        let r = optimize_rx_positions(&s, &layout, &zero, &cfg);
        assert_eq!(t.layout, layout);
        assert_eq!(r.layout, layout);
        assert_eq!(t.stats.solves + r.stats.solves, 0);
    }

    #[test]
    fn position_blocks_keep_feasibility_and_never_lower_objective() {
        let cfg = SystemConfig::default();
        for seed in [2, 5] {
            let s = sample_scenario(&cfg, seed);
            let init = init_state(&s, &cfg).unwrap();
            let t = optimize_tx_positions(&s, &init.layout, &init.beams, &cfg).unwrap();
            assert!(t.tau >= init.tau);
            assert!(t.layout.min_tx_distance() >= cfg.min_spacing - 1e-9);
            t.layout.validate(&cfg).unwrap();
            let r = optimize_rx_positions(&s, &t.layout, &init.beams, &cfg);
            assert!(r.tau >= t.tau);
            r.layout.validate(&cfg).unwrap();
            assert_eq!(r.layout.tx, t.layout.tx);
        }
    }

    #[test]
    fn receive_move_only_changes_own_channel() {
        let cfg = SystemConfig::default();
        let s = sample_scenario(&cfg, 4);
        let layout = initial_layout(&cfg).unwrap();
        let mut moved = layout.clone();
        moved.rx[0] = Position::new(0.1, -0.05);
        assert_eq!(assemble_channel(&s, 1, &layout).row, assemble_channel(&s, 1, &moved).row);
        assert_ne!(assemble_channel(&s, 0, &layout).row, assemble_channel(&s, 0, &moved).row);
    }

    #[test]
    fn fixed_mode_runs_only_beam_blocks() {
        let cfg = SystemConfig::default();
        let s = sample_scenario(&cfg, 7);
        let r = run_bcd(&s, &cfg, Mode::Fpa).unwrap();
        assert!(r.trace.iter().skip(1).all(|t| t.stage == Stage::Beam));
        assert_eq!(r.layout, initial_layout(&cfg).unwrap());
        assert!(r.tau_trace.windows(2).all(|w| w[1] >= w[0] - 1e-6 * w[0].abs()));
        assert!(r.beams.total_power() <= cfg.pmax * (1.0 + 1e-6));
    }

    #[test]
    fn proposed_trace_is_monotone_and_feasible() {
        let cfg = SystemConfig::default();
        let s = sample_scenario(&cfg, 7);
        let r = run_bcd(&s, &cfg, Mode::Proposed).unwrap();
        assert!(r.trace.windows(2).all(|w| w[1].tau >= w[0].tau - 1e-6 * w[0].tau.abs()));
        r.layout.validate(&cfg).unwrap();
        assert!(r.beams.total_power() <= cfg.pmax * (1.0 + 1e-6));
        assert!((r.min_sinr() - r.tau_trace.last().unwrap()).abs() < 1e-9 * r.min_sinr());
    }

    #[test]
    fn relative_gain_handles_zero_start() {
        assert_eq!(relative_gain(2.0, 3.0), 0.5);
        assert!(relative_gain(0.0, 1e-3) > 1.0);
    }
}
