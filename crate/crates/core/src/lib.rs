//! Models and optimizers for fluid-antenna multiuser downlink beamforming
//! under transceiver hardware impairments.

pub mod beams;
pub mod channel;
pub mod config;
pub mod hi;
pub mod layout;
pub mod scenario;
pub mod surrogates;
pub mod bcd;
pub mod baselines;
