use nalgebra::Vector2;
use thiserror::Error;

use crate::config::SystemConfig;

pub type Position = Vector2<f64>;

/// Geometric slack on box and spacing checks, meters.
pub const GEOMETRY_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum LayoutError {
    #[error("expected {expected} {what} positions, found {found}")]
    Count { what: &'static str, expected: usize, found: usize },
    #[error("{what} antenna {index} at ({x:.6}, {y:.6}) leaves its region of half-width {halfwidth}")]
    OutsideRegion { what: &'static str, index: usize, x: f64, y: f64, halfwidth: f64 },
    #[error("transmit antennas {a} and {b} are {distance:.6e} m apart, below the minimum {min:.6e} m")]
    TooClose { a: usize, b: usize, distance: f64, min: f64 },
    #[error("{count} antennas at spacing {pitch:.6e} m need a {needed:.6e} m square, region is {available:.6e} m")]
    GridDoesNotFit { count: usize, pitch: f64, needed: f64, available: f64 },
}

/// Transmit positions and one receive position per user, each relative to
/// its own region center.
#[derive(Debug, Clone, PartialEq)]
pub struct AntennaLayout {
    pub tx: Vec<Position>,
    pub rx: Vec<Position>,
}

pub fn in_box(p: &Position, halfwidth: f64) -> bool {
    p.x.abs() <= halfwidth + GEOMETRY_TOL && p.y.abs() <= halfwidth + GEOMETRY_TOL
}

impl AntennaLayout {
    pub fn validate(&self, cfg: &SystemConfig) -> Result<(), LayoutError> {
        if self.tx.len() != cfg.n_tx {
            return Err(LayoutError::Count { what: "transmit", expected: cfg.n_tx, found: self.tx.len() });
        }
        if self.rx.len() != cfg.n_users {
            return Err(LayoutError::Count { what: "receive", expected: cfg.n_users, found: self.rx.len() });
        }
        for (what, list, hw) in [("transmit", &self.tx, cfg.tx_halfwidth), ("receive", &self.rx, cfg.rx_halfwidth)] {
            if let Some((index, p)) = list.iter().enumerate().find(|(_, p)| !in_box(p, hw)) {
                return Err(LayoutError::OutsideRegion { what, index, x: p.x, y: p.y, halfwidth: hw });
            }
        }
        check_spacing(&self.tx, cfg.min_spacing)
    }

    /// Smallest pairwise transmit distance.
    pub fn min_tx_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for a in 0..self.tx.len() {
            for b in a + 1..self.tx.len() {
                best = best.min((self.tx[a] - self.tx[b]).norm());
            }
        }
        best
    }
}

pub fn check_spacing(points: &[Position], min: f64) -> Result<(), LayoutError> {
    for a in 0..points.len() {
        for b in a + 1..points.len() {
            let distance = (points[a] - points[b]).norm();
            if distance < min - GEOMETRY_TOL {
                return Err(LayoutError::TooClose { a, b, distance, min });
            }
        }
    }
    Ok(())
}

/// Grid shape `(cols, rows)` used for `n` transmit antennas.
pub fn grid_shape(n: usize) -> (usize, usize) {
    let cols = (n as f64).sqrt().ceil() as usize;
    let rows = n.div_ceil(cols);
    (cols, rows)
}

/// Shape of the `2N`-element selection array: the default grid with one
/// dimension doubled. Doubling an even dimension keeps the centered default
/// grid on the doubled lattice.
pub fn selection_shape(n: usize) -> (usize, usize) {
    let (cols, rows) = grid_shape(n);
    if cols % 2 == 0 && rows % 2 == 1 {
        (2 * cols, rows)
    } else {
        (cols, 2 * rows)
    }
}

/// Pitch shared by the default grid and the selection array.
pub fn grid_pitch(cfg: &SystemConfig) -> f64 {
    let (cols, rows) = selection_shape(cfg.n_tx);
    let span = (cols - 1).max(rows - 1).max(1);
    cfg.min_spacing.max(2.0 * cfg.tx_halfwidth / span as f64)
}

/// First `count` points of a centered `cols × rows` lattice at `pitch`, row-major.
pub fn centered_grid(count: usize, cols: usize, rows: usize, pitch: f64, halfwidth: f64) -> Result<Vec<Position>, LayoutError> {
    let width = pitch * (cols - 1) as f64;
    let height = pitch * (rows - 1) as f64;
    let needed = width.max(height);
    if needed > 2.0 * halfwidth + GEOMETRY_TOL {
        return Err(LayoutError::GridDoesNotFit { count, pitch, needed, available: 2.0 * halfwidth });
    }
    let mut out = Vec::with_capacity(count);
    'outer: for r in 0..rows {
        for c in 0..cols {
            if out.len() == count {
                break 'outer;
            }
            out.push(Position::new(c as f64 * pitch - width / 2.0, r as f64 * pitch - height / 2.0));
        }
    }
    Ok(out)
}

/// Default transmit layout: centered `ceil(√N)`-column grid.
pub fn initial_tx_grid(cfg: &SystemConfig) -> Result<Vec<Position>, LayoutError> {
    let (cols, rows) = grid_shape(cfg.n_tx);
    centered_grid(cfg.n_tx, cols, rows, grid_pitch(cfg), cfg.tx_halfwidth)
}

/// The `2N` candidate positions for antenna selection.
pub fn selection_array(cfg: &SystemConfig) -> Result<Vec<Position>, LayoutError> {
    let (cols, rows) = selection_shape(cfg.n_tx);
    let pts = centered_grid(2 * cfg.n_tx, cols, rows, grid_pitch(cfg), cfg.tx_halfwidth)?;
    check_spacing(&pts, cfg.min_spacing)?;
    Ok(pts)
}

pub fn initial_layout(cfg: &SystemConfig) -> Result<AntennaLayout, LayoutError> {
    let tx = initial_tx_grid(cfg)?;
    check_spacing(&tx, cfg.min_spacing)?;
    Ok(AntennaLayout { tx, rx: vec![Position::zeros(); cfg.n_users] })
}
