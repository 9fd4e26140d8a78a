//! Run configuration: physical constants, algorithm tolerances and iteration caps.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("malformed configuration: {0}")]
    Malformed(String),
    #[error("`{key}` = {value} is out of range ({bound})")]
    OutOfRange { key: &'static str, value: String, bound: &'static str },
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
}

/// Axis-aligned rectangle given by two opposite corners, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub corner_a: [f64; 2],
    pub corner_b: [f64; 2],
}

impl Rect {
    pub fn x_range(&self) -> (f64, f64) {
        let (a, b) = (self.corner_a[0], self.corner_b[0]);
        (a.min(b), a.max(b))
    }

    pub fn y_range(&self) -> (f64, f64) {
        let (a, b) = (self.corner_a[1], self.corner_b[1]);
        (a.min(b), a.max(b))
    }
}

/// Iteration caps of the optimizer loops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationCaps {
    pub outer: usize,
    /// Conic solves per beamforming call.
    pub beam: usize,
    /// Full N-antenna sweeps per transmit-position call.
    pub tx_sweeps: usize,
    /// Receive-position rounds per call.
    pub rx: usize,
}

/// Relative τ-gain thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub outer: f64,
    pub beam: f64,
    pub tx: f64,
    pub rx: f64,
}

/// Fully resolved configuration. All powers and gains are linear (watts, ratios).
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub n_tx: usize,
    pub n_users: usize,
    pub n_paths: usize,
    pub wavelength: f64,
    pub min_spacing: f64,
    /// Half the side of the square transmit region.
    pub tx_halfwidth: f64,
    /// Half the side of each square receive region.
    pub rx_halfwidth: f64,
    pub pmax: f64,
    pub noise_power: f64,
    pub hi_tx: f64,
    /// Receive impairment per user.
    pub hi_rx: Vec<f64>,
    pub pathloss_exponent: f64,
    pub ref_gain: f64,
    pub user_area: Rect,
    pub tolerances: Tolerances,
    pub caps: IterationCaps,
    pub srcr_alpha0: f64,
    pub rng_seed: u64,
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) * 1e-3
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * (w * 1e3).log10()
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

const KEYS: &[&str] = &[
    "n_tx_antennas",
    "n_users",
    "n_paths",
    "wavelength_m",
    "min_spacing_wavelengths",
    "region_size_wavelengths",
    "pmax_dbm",
    "noise_dbm",
    "eta",
    "rho",
    "pathloss_exponent",
    "ref_gain_db",
    "user_area_m",
    "eps",
    "eps_w",
    "eps_t",
    "eps_r",
    "max_outer_iters",
    "max_beam_iters",
    "max_tx_sweeps",
    "max_rx_iters",
    "srcr_alpha0",
    "seed",
];

impl Default for SystemConfig {
    fn default() -> Self {
        let wavelength = 0.125;
        let n_users = 2;
        Self {
            n_tx: 4,
            n_users,
            n_paths: 5,
            wavelength,
            min_spacing: wavelength / 2.0,
            tx_halfwidth: 2.0 * wavelength,
            rx_halfwidth: 2.0 * wavelength,
            pmax: dbm_to_watts(30.0),
            noise_power: dbm_to_watts(-80.0),
            hi_tx: 0.2,
            hi_rx: vec![0.2; n_users],
            pathloss_exponent: 2.8,
            ref_gain: db_to_linear(-30.0),
            user_area: Rect { corner_a: [20.0, 0.0], corner_b: [40.0, -20.0] },
            tolerances: Tolerances { outer: 1e-3, beam: 1e-3, tx: 1e-3, rx: 1e-3 },
            caps: IterationCaps { outer: 50, beam: 20, tx_sweeps: 10, rx: 10 },
            srcr_alpha0: 0.1,
            rng_seed: 0,
        }
    }
}

fn get_f64(obj: &Map<String, Value>, key: &'static str) -> Result<Option<f64>, ConfigError> {
    match obj.get(key) {
        None => Ok(None),
        Some(v) => v
            .as_f64()
            .map(Some)
            .ok_or_else(|| ConfigError::Malformed(format!("`{key}` must be a number, found {v}"))),
    }
}

fn get_usize(obj: &Map<String, Value>, key: &'static str) -> Result<Option<usize>, ConfigError> {
    match obj.get(key) {
        None => Ok(None),
        Some(v) => v
            .as_u64()
            .map(|x| Some(x as usize))
            .ok_or_else(|| ConfigError::Malformed(format!("`{key}` must be a non-negative integer, found {v}"))),
    }
}

fn out_of_range(key: &'static str, value: impl std::fmt::Display, bound: &'static str) -> ConfigError {
    ConfigError::OutOfRange { key, value: value.to_string(), bound }
}

/// Parses a JSON configuration document; absent keys take the defaults.
pub fn load_config(text: &str) -> Result<SystemConfig, ConfigError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::Malformed(e.to_string()))?;
    let obj = value
        .as_object()
        .ok_or_else(|| ConfigError::Malformed("top level must be an object".into()))?;
    SystemConfig::from_json(obj)
}

impl SystemConfig {
    pub fn from_json(obj: &Map<String, Value>) -> Result<Self, ConfigError> {
        if let Some(k) = obj.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(ConfigError::UnknownKey(k.clone()));
        }
        let mut cfg = SystemConfig::default();
        if let Some(v) = get_usize(obj, "n_tx_antennas")? {
            cfg.n_tx = v;
        }
        if let Some(v) = get_usize(obj, "n_users")? {
            cfg.n_users = v;
        }
        if let Some(v) = get_usize(obj, "n_paths")? {
            cfg.n_paths = v;
        }
        if let Some(v) = get_f64(obj, "wavelength_m")? {
            cfg.wavelength = v;
        }
        let spacing = get_f64(obj, "min_spacing_wavelengths")?.unwrap_or(0.5);
        let region = get_f64(obj, "region_size_wavelengths")?.unwrap_or(4.0);
        cfg.min_spacing = spacing * cfg.wavelength;
        cfg.tx_halfwidth = region * cfg.wavelength / 2.0;
        cfg.rx_halfwidth = cfg.tx_halfwidth;
        if let Some(v) = get_f64(obj, "pmax_dbm")? {
            cfg.pmax = dbm_to_watts(v);
        }
        if let Some(v) = get_f64(obj, "noise_dbm")? {
            cfg.noise_power = dbm_to_watts(v);
        }
        if let Some(v) = get_f64(obj, "eta")? {
            cfg.hi_tx = v;
        }
        cfg.hi_rx = match obj.get("rho") {
            None => vec![cfg.hi_tx; cfg.n_users],
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| v.as_f64().ok_or_else(|| ConfigError::Malformed(format!("`rho` entries must be numbers, found {v}"))))
                .collect::<Result<_, _>>()?,
            Some(v) => {
                let r = v
                    .as_f64()
                    .ok_or_else(|| ConfigError::Malformed(format!("`rho` must be a number or array, found {v}")))?;
                vec![r; cfg.n_users]
            }
        };
        if let Some(v) = get_f64(obj, "pathloss_exponent")? {
            cfg.pathloss_exponent = v;
        }
        if let Some(v) = get_f64(obj, "ref_gain_db")? {
            cfg.ref_gain = db_to_linear(v);
        }
        if let Some(v) = obj.get("user_area_m") {
            cfg.user_area = serde_json::from_value::<[[f64; 2]; 2]>(v.clone())
                .map(|[a, b]| Rect { corner_a: a, corner_b: b })
                .map_err(|e| ConfigError::Malformed(format!("`user_area_m`: {e}")))?;
        }
        let eps = get_f64(obj, "eps")?.unwrap_or(1e-3);
        cfg.tolerances = Tolerances {
            outer: eps,
            beam: get_f64(obj, "eps_w")?.unwrap_or(eps),
            tx: get_f64(obj, "eps_t")?.unwrap_or(eps),
            rx: get_f64(obj, "eps_r")?.unwrap_or(eps),
        };
        if let Some(v) = get_usize(obj, "max_outer_iters")? {
            cfg.caps.outer = v;
        }
        if let Some(v) = get_usize(obj, "max_beam_iters")? {
            cfg.caps.beam = v;
        }
        if let Some(v) = get_usize(obj, "max_tx_sweeps")? {
            cfg.caps.tx_sweeps = v;
        }
        if let Some(v) = get_usize(obj, "max_rx_iters")? {
            cfg.caps.rx = v;
        }
        if let Some(v) = get_f64(obj, "srcr_alpha0")? {
            cfg.srcr_alpha0 = v;
        }
        if let Some(v) = obj.get("seed") {
            cfg.rng_seed = v
                .as_u64()
                .ok_or_else(|| ConfigError::Malformed(format!("`seed` must be a non-negative integer, found {v}")))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_tx < 2 {
            return Err(out_of_range("n_tx_antennas", self.n_tx, ">= 2"));
        }
        if self.n_users < 2 {
            return Err(out_of_range("n_users", self.n_users, ">= 2"));
        }
        if self.n_paths < 1 {
            return Err(out_of_range("n_paths", self.n_paths, ">= 1"));
        }
        let positive = [
            ("wavelength_m", self.wavelength),
            ("min_spacing_wavelengths", self.min_spacing),
            ("region_size_wavelengths", self.tx_halfwidth),
            ("pmax_dbm", self.pmax),
            ("noise_dbm", self.noise_power),
            ("ref_gain_db", self.ref_gain),
            ("srcr_alpha0", self.srcr_alpha0),
        ];
        for (key, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(out_of_range(key, v, "> 0 and finite"));
            }
        }
        if !(0.0..=1.0).contains(&self.hi_tx) {
            return Err(out_of_range("eta", self.hi_tx, "[0, 1]"));
        }
        if self.hi_rx.len() != self.n_users {
            return Err(ConfigError::Malformed(format!(
                "`rho` has {} entries for {} users",
                self.hi_rx.len(),
                self.n_users
            )));
        }
        if let Some(r) = self.hi_rx.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(out_of_range("rho", r, "[0, 1]"));
        }
        if !self.pathloss_exponent.is_finite() || self.pathloss_exponent < 0.0 {
            return Err(out_of_range("pathloss_exponent", self.pathloss_exponent, ">= 0"));
        }
        let t = &self.tolerances;
        for (key, v) in [("eps", t.outer), ("eps_w", t.beam), ("eps_t", t.tx), ("eps_r", t.rx)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(out_of_range(key, v, "> 0"));
            }
        }
        let (x0, x1) = self.user_area.x_range();
        let (y0, y1) = self.user_area.y_range();
        let corners = [x0, x1, y0, y1];
        if corners.iter().any(|c| !c.is_finite()) {
            return Err(out_of_range("user_area_m", format!("{corners:?}"), "finite corners"));
        }
        // users at the BS would make the path loss singular
        if x0 <= 0.0 && x1 >= 0.0 && y0 <= 0.0 && y1 >= 0.0 {
            return Err(out_of_range("user_area_m", format!("{corners:?}"), "must exclude the origin"));
        }
        Ok(())
    }

    /// Serializes with the documented keys; `load_config` on the output recovers `self`.
    pub fn to_json(&self) -> Value {
        let rho = if self.hi_rx.iter().all(|&r| r == self.hi_tx) {
            Value::from(self.hi_tx)
        } else {
            Value::from(self.hi_rx.clone())
        };
        let mut m = Map::new();
        m.insert("n_tx_antennas".into(), self.n_tx.into());
        m.insert("n_users".into(), self.n_users.into());
        m.insert("n_paths".into(), self.n_paths.into());
        m.insert("wavelength_m".into(), self.wavelength.into());
        m.insert("min_spacing_wavelengths".into(), (self.min_spacing / self.wavelength).into());
        m.insert("region_size_wavelengths".into(), (2.0 * self.tx_halfwidth / self.wavelength).into());
        m.insert("pmax_dbm".into(), watts_to_dbm(self.pmax).into());
        m.insert("noise_dbm".into(), watts_to_dbm(self.noise_power).into());
        m.insert("eta".into(), self.hi_tx.into());
        m.insert("rho".into(), rho);
        m.insert("pathloss_exponent".into(), self.pathloss_exponent.into());
        m.insert("ref_gain_db".into(), linear_to_db(self.ref_gain).into());
        m.insert(
            "user_area_m".into(),
            serde_json::json!([self.user_area.corner_a, self.user_area.corner_b]),
        );
        m.insert("eps".into(), self.tolerances.outer.into());
        m.insert("eps_w".into(), self.tolerances.beam.into());
        m.insert("eps_t".into(), self.tolerances.tx.into());
        m.insert("eps_r".into(), self.tolerances.rx.into());
        m.insert("max_outer_iters".into(), self.caps.outer.into());
        m.insert("max_beam_iters".into(), self.caps.beam.into());
        m.insert("max_tx_sweeps".into(), self.caps.tx_sweeps.into());
        m.insert("max_rx_iters".into(), self.caps.rx.into());
        m.insert("srcr_alpha0".into(), self.srcr_alpha0.into());
        m.insert("seed".into(), self.rng_seed.into());
        Value::Object(m)
    }

    /// Field-wise comparison allowing `rel` relative error on real-valued fields
    /// (unit conversions at the boundary are not bit-exact).
    pub fn approx_eq(&self, other: &Self, rel: f64) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
        let reals = [
            (self.wavelength, other.wavelength),
            (self.min_spacing, other.min_spacing),
            (self.tx_halfwidth, other.tx_halfwidth),
            (self.rx_halfwidth, other.rx_halfwidth),
            (self.pmax, other.pmax),
            (self.noise_power, other.noise_power),
            (self.hi_tx, other.hi_tx),
            (self.pathloss_exponent, other.pathloss_exponent),
            (self.ref_gain, other.ref_gain),
            (self.srcr_alpha0, other.srcr_alpha0),
        ];
        self.n_tx == other.n_tx
            && self.n_users == other.n_users
            && self.n_paths == other.n_paths
            && self.hi_rx.len() == other.hi_rx.len()
            && self.hi_rx.iter().zip(&other.hi_rx).all(|(a, b)| close(*a, *b))
            && reals.iter().all(|&(a, b)| close(a, b))
            && self.user_area == other.user_area
            && self.tolerances == other.tolerances
            && self.caps == other.caps
            && self.rng_seed == other.rng_seed
    }

    /// Wavelength-normalized transmit region size `A/λ`.
    pub fn region_size_wavelengths(&self) -> f64 {
        2.0 * self.tx_halfwidth / self.wavelength
    }

    /// Replace `key` in the JSON form and re-resolve; used by parameter sweeps.
    pub fn with_override(&self, key: &str, value: Value) -> Result<Self, ConfigError> {
        let mut json = self.to_json();
        let obj = json.as_object_mut().expect("config serializes to an object");
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey(key.to_string()));
        }
        obj.insert(key.to_string(), value.clone());
        if key == "eta" {
            // impairments are swept jointly at BS and users
            obj.insert("rho".into(), value);
        }
        if key == "n_users" {
            let rho = obj.get("rho").cloned();
            if let Some(Value::Array(_)) = rho {
                obj.insert("rho".into(), Value::from(self.hi_tx));
            }
        }
        Self::from_json(obj)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pmax_30_dbm_is_one_watt() {
        let cfg = load_config(r#"{"pmax_dbm": 30}"#).unwrap();
        assert!((cfg.pmax - 1.0).abs() < 1e-15);
    }

    #[test]
    fn empty_document_gives_defaults() {
        let cfg = load_config("{}").unwrap();
        assert_eq!((cfg.n_tx, cfg.n_users, cfg.n_paths), (4, 2, 5));
        assert_eq!(cfg.hi_tx, 0.2);
        assert_eq!(cfg.hi_rx, vec![0.2, 0.2]);
        assert!((cfg.noise_power - 1e-11).abs() < 1e-24);
        assert!((cfg.ref_gain - 1e-3).abs() < 1e-18);
        assert!((cfg.tx_halfwidth - 0.25).abs() < 1e-15);
        assert!((cfg.min_spacing - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn eta_out_of_range_names_key() {
        match load_config(r#"{"eta": 1.5}"#) {
            Err(ConfigError::OutOfRange { key, .. }) => assert_eq!(key, "eta"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_and_unknown() {
        assert!(matches!(load_config("{"), Err(ConfigError::Malformed(_))));
        assert!(matches!(load_config(r#"{"n_tx_antennas": "four"}"#), Err(ConfigError::Malformed(_))));
        assert!(matches!(load_config(r#"{"bogus": 1}"#), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(load_config(r#"{"rho": [0.1]}"#), Err(ConfigError::Malformed(_))));
    }

    #[test]
    fn heterogeneous_rho() {
        let cfg = load_config(r#"{"rho": [0.1, 0.3]}"#).unwrap();
        assert_eq!(cfg.hi_rx, vec![0.1, 0.3]);
        let back = load_config(&cfg.to_json().to_string()).unwrap();
        assert!(back.approx_eq(&cfg, 1e-12));
    }

    #[test]
    fn eta_override_moves_rho() {
        let cfg = SystemConfig::default().with_override("eta", 0.05.into()).unwrap();
        assert_eq!(cfg.hi_tx, 0.05);
        assert_eq!(cfg.hi_rx, vec![0.05, 0.05]);
    }
}
