//! Field responses and per-user channels.
//!
//! Phases are measured from the region center, a fixed but otherwise
//! arbitrary reference that only contributes a global phase.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::layout::{AntennaLayout, Position};
use crate::scenario::ChannelScenario;

/// Unit-modulus response of every path at one antenna position.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldResponse {
    pub user: usize,
    pub position: Position,
    pub values: DVector<Complex64>,
}

fn response(wavelength: f64, position: &Position, dirs: impl ExactSizeIterator<Item = nalgebra::Vector2<f64>>) -> DVector<Complex64> {
    let k = TAU / wavelength;
    let vals: Vec<Complex64> = dirs.map(|a| Complex64::from_polar(1.0, k * a.dot(position))).collect();
    DVector::from_vec(vals)
}

pub fn transmit_frv(s: &ChannelScenario, k: usize, t: &Position) -> FieldResponse {
    let g = &s.users[k];
    let values = response(s.wavelength, t, (0..g.n_tx_paths()).map(|l| g.tx_direction(l)));
    FieldResponse { user: k, position: *t, values }
}

pub fn receive_frv(s: &ChannelScenario, k: usize, r: &Position) -> FieldResponse {
    let g = &s.users[k];
    let values = response(s.wavelength, r, (0..g.n_rx_paths()).map(|m| g.rx_direction(m)));
    FieldResponse { user: k, position: *r, values }
}

/// `L × N` matrix whose column `n` is the transmit response at `tx[n]`.
pub fn transmit_frm(s: &ChannelScenario, k: usize, tx: &[Position]) -> DMatrix<Complex64> {
    let l = s.users[k].n_tx_paths();
    let mut m = DMatrix::zeros(l, tx.len());
    for (n, t) in tx.iter().enumerate() {
        m.set_column(n, &transmit_frv(s, k, t).values);
    }
    m
}

/// Channel row `h = f^H Σ G` and its Gram matrix `H = h^H h`.
#[derive(Debug, Clone, PartialEq)]
pub struct UserChannel {
    /// Entries of the `1 × N` row.
    pub row: DVector<Complex64>,
    pub gram: DMatrix<Complex64>,
}

impl UserChannel {
    pub fn from_row(row: DVector<Complex64>) -> Self {
        let gram = row.conjugate() * row.transpose();
        Self { row, gram }
    }
}

/// Channel of user `k` given the frequency response matrix `g_mat` (cached by callers that move one antenna at a time).
pub fn channel_from_parts(s: &ChannelScenario, k: usize, rx: &Position, g_mat: &DMatrix<Complex64>) -> UserChannel {
    let f = receive_frv(s, k, rx).values;
    let row_t = g_mat.transpose() * s.path_response[k].transpose() * f.conjugate();
    UserChannel::from_row(row_t)
}

pub fn assemble_channel(s: &ChannelScenario, k: usize, layout: &AntennaLayout) -> UserChannel {
    channel_from_parts(s, k, &layout.rx[k], &transmit_frm(s, k, &layout.tx))
}

pub fn assemble_channels(s: &ChannelScenario, layout: &AntennaLayout) -> Vec<UserChannel> {
    (0..s.n_users()).map(|k| assemble_channel(s, k, layout)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SystemConfig;
    use crate::layout::initial_layout;
    use crate::scenario::{sample_scenario, PathGeometry};
    use std::f64::consts::FRAC_PI_2;

    fn one_path_scenario(n_users: usize) -> ChannelScenario {
        let user = PathGeometry {
            tx_elevation: vec![FRAC_PI_2],
            tx_azimuth: vec![0.0],
            rx_elevation: vec![FRAC_PI_2],
            rx_azimuth: vec![0.0],
            location: [1.0, 0.0],
            distance: 1.0,
        };
        ChannelScenario {
            seed: 0,
            wavelength: 0.125,
            users: vec![user; n_users],
            path_response: vec![DMatrix::identity(1, 1); n_users],
        }
    }

    #[test]
    fn origin_gives_all_ones() {
        let s = sample_scenario(&SystemConfig::default(), 3);
        let v = transmit_frv(&s, 0, &Position::zeros()).values;
        assert!(v.iter().all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-15));
        let v = receive_frv(&s, 1, &Position::zeros()).values;
        assert!(v.iter().all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn half_wavelength_broadside_flips_sign() {
        let s = one_path_scenario(1);
        let v = transmit_frv(&s, 0, &Position::new(0.0625, 0.0)).values;
        assert!((v[0] + Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let v = receive_frv(&s, 0, &Position::new(0.0625, 0.0)).values;
        assert!((v[0] + Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn unit_path_at_origin_gives_ones_row() {
        let s = one_path_scenario(1);
        let layout = AntennaLayout { tx: vec![Position::zeros(); 3], rx: vec![Position::zeros()] };
        let ch = assemble_channel(&s, 0, &layout);
        assert!(ch.row.iter().all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn frm_columns_are_frvs() {
        let cfg = SystemConfig::default();
        let s = sample_scenario(&cfg, 7);
        let layout = initial_layout(&cfg).unwrap();
        let m = transmit_frm(&s, 1, &layout.tx);
        for (n, t) in layout.tx.iter().enumerate() {
            assert_eq!(m.column(n).clone_owned(), transmit_frv(&s, 1, t).values);
        }
    }
}
