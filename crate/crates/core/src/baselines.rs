//! Comparison schemes sharing one scenario and one scoring path.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bcd::{init_on_layout, run_bcd, run_bcd_from, BcdError, BcdResult, Mode};
use crate::config::SystemConfig;
use crate::layout::{selection_array, AntennaLayout, Position};
use crate::scenario::ChannelScenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeId {
    Proposed,
    Tfa,
    Eas,
    Rfa,
    Fpa,
}

impl SchemeId {
    pub const ALL: [SchemeId; 5] = [SchemeId::Proposed, SchemeId::Tfa, SchemeId::Eas, SchemeId::Rfa, SchemeId::Fpa];

    pub fn as_str(self) -> &'static str {
        match self {
            SchemeId::Proposed => "proposed",
            SchemeId::Tfa => "tfa",
            SchemeId::Eas => "eas",
            SchemeId::Rfa => "rfa",
            SchemeId::Fpa => "fpa",
        }
    }

    /// Schemes whose search space this one contains under the shared start.
    pub fn dominates(self) -> &'static [SchemeId] {
        match self {
            SchemeId::Proposed => &[SchemeId::Tfa, SchemeId::Eas, SchemeId::Rfa, SchemeId::Fpa],
            SchemeId::Tfa | SchemeId::Rfa => &[SchemeId::Fpa],
            SchemeId::Eas | SchemeId::Fpa => &[],
        }
    }

    fn mode(self) -> Option<Mode> {
        match self {
            SchemeId::Proposed => Some(Mode::Proposed),
            SchemeId::Tfa => Some(Mode::Tfa),
            SchemeId::Rfa => Some(Mode::Rfa),
            SchemeId::Fpa => Some(Mode::Fpa),
            SchemeId::Eas => None,
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, PartialEq)]
#[error("unknown scheme `{0}` (expected proposed, tfa, eas, rfa or fpa)")]
pub struct UnknownScheme(pub String);

impl FromStr for SchemeId {
    type Err = UnknownScheme;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SchemeId::ALL.into_iter().find(|id| id.as_str() == s).ok_or_else(|| UnknownScheme(s.to_string()))
    }
}

/// All `C(2N, N)` index subsets of the selection array, lexicographic.
pub fn eas_subsets(cfg: &SystemConfig) -> Vec<Vec<usize>> {
    (0..2 * cfg.n_tx).combinations(cfg.n_tx).collect()
}

/// Fixed receivers at their region centers and the given transmit subset.
fn subset_layout(array: &[Position], subset: &[usize], cfg: &SystemConfig) -> AntennaLayout {
    AntennaLayout { tx: subset.iter().map(|&i| array[i]).collect(), rx: vec![Position::zeros(); cfg.n_users] }
}

/// Best beamforming-only result over every antenna subset.
pub fn run_eas(s: &ChannelScenario, cfg: &SystemConfig) -> Result<BcdResult, BcdError> {
    let array = selection_array(cfg)?;
    let results: Vec<Result<BcdResult, BcdError>> = eas_subsets(cfg)
        .par_iter()
        .map(|subset| {
            let init = init_on_layout(s, subset_layout(&array, subset, cfg), cfg);
            run_bcd_from(s, cfg, Mode::Fpa, init.layout, init.beams)
        })
        .collect();
    let mut best: Option<BcdResult> = None;
    for r in results {
        let r = r?;
        if best.as_ref().is_none_or(|b| r.min_rate() > b.min_rate()) {
            best = Some(r);
        }
    }
    Ok(best.expect("at least one subset"))
}

pub fn run_scheme(id: SchemeId, s: &ChannelScenario, cfg: &SystemConfig) -> Result<BcdResult, BcdError> {
    match id.mode() {
        Some(mode) => run_bcd(s, cfg, mode),
        None => run_eas(s, cfg),
    }
}

/// Result of one scheme inside a paired comparison.
#[derive(Debug, Clone)]
pub struct SchemeRun {
    pub scheme: SchemeId,
    pub result: BcdResult,
    /// Set when the run was continued from a dominated scheme's final state
    /// because its own trajectory ended lower.
    pub restarted_from: Option<SchemeId>,
    /// Including any continuation.
    pub wall: Duration,
}

/// Runs `schemes` on one scenario. A scheme whose search space contains
/// another's but which ended below it is continued from that scheme's final
/// state, so the containment ordering holds per scenario.
pub fn compare_schemes(s: &ChannelScenario, cfg: &SystemConfig, schemes: &[SchemeId]) -> Result<Vec<SchemeRun>, BcdError> {
    let mut order: Vec<SchemeId> = schemes.iter().copied().unique().collect();
    // dominated schemes first
    order.sort_by_key(|id| id.dominates().len());
    let mut done: Vec<SchemeRun> = Vec::with_capacity(order.len());
    for id in order {
        let started = Instant::now();
        let mut run = SchemeRun { scheme: id, result: run_scheme(id, s, cfg)?, restarted_from: None, wall: Duration::ZERO };
        let best_below = done
            .iter()
            .filter(|r| id.dominates().contains(&r.scheme))
            .max_by(|a, b| a.result.min_rate().total_cmp(&b.result.min_rate()));
        if let (Some(below), Some(mode)) = (best_below, id.mode()) {
            if below.result.min_rate() > run.result.min_rate() {
                let cont = run_bcd_from(s, cfg, mode, below.result.layout.clone(), below.result.beams.clone())?;
                if cont.min_rate() > run.result.min_rate() {
                    run.result = cont;
                    run.restarted_from = Some(below.scheme);
                }
            }
        }
        run.wall = started.elapsed();
        done.push(run);
    }
    let mut out = Vec::with_capacity(schemes.len());
    for id in schemes.iter().copied().unique() {
        let pos = done.iter().position(|r| r.scheme == id).expect("scheme was run");
        out.push(done.swap_remove(pos));
    }
    Ok(out)
}
