//! Parameter sweeps over paired seeds: `summary.csv` and `aggregate.csv`.

use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use fasopt_core::baselines::{compare_schemes, SchemeId};
use fasopt_core::config::SystemConfig;
use fasopt_core::scenario::sample_scenario;
use rayon::prelude::*;
use rayon::ThreadPool;
use serde_json::Value;

use crate::format::{csv_string, sig9};
use crate::workers::worker_pool;
use crate::{io_error, HarnessError};

pub const SUMMARY_FILE: &str = "summary.csv";
pub const AGGREGATE_FILE: &str = "aggregate.csv";
pub const DEFAULT_SEEDS: u64 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    PmaxDbm,
    NTxAntennas,
    NPaths,
    RegionSizeWavelengths,
    /// Sets the transmit and receive impairment levels together.
    Eta,
}

impl SweepParam {
    pub const ALL: [SweepParam; 5] =
        [SweepParam::PmaxDbm, SweepParam::NTxAntennas, SweepParam::NPaths, SweepParam::RegionSizeWavelengths, SweepParam::Eta];

    /// Configuration key the parameter overrides.
    pub fn key(self) -> &'static str {
        match self {
            SweepParam::PmaxDbm => "pmax_dbm",
            SweepParam::NTxAntennas => "n_tx_antennas",
            SweepParam::NPaths => "n_paths",
            SweepParam::RegionSizeWavelengths => "region_size_wavelengths",
            SweepParam::Eta => "eta",
        }
    }

    fn is_integer(self) -> bool {
        matches!(self, SweepParam::NTxAntennas | SweepParam::NPaths)
    }

    fn json_value(self, v: f64) -> Result<Value, HarnessError> {
        if self.is_integer() {
            if v.fract() != 0.0 || v < 0.0 {
                return Err(HarnessError::Sweep(format!("{} takes non-negative integers, found {v}", self.key())));
            }
            Ok(Value::from(v as u64))
        } else {
            Ok(Value::from(v))
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for SweepParam {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SweepParam::ALL.into_iter().find(|p| p.key() == s).ok_or_else(|| {
            let names: Vec<&str> = SweepParam::ALL.iter().map(|p| p.key()).collect();
            HarnessError::Sweep(format!("unknown parameter `{s}` (expected one of {})", names.join(", ")))
        })
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub schemes: Vec<SchemeId>,
    pub seeds: Vec<u64>,
    pub out: PathBuf,
}

impl SweepSpec {
    /// One resolved configuration per value; fails on empty lists or
    /// out-of-range values before anything runs.
    pub fn resolve(&self, base: &SystemConfig) -> Result<Vec<SystemConfig>, HarnessError> {
        for (what, empty) in [("values", self.values.is_empty()), ("schemes", self.schemes.is_empty()), ("seeds", self.seeds.is_empty())] {
            if empty {
                return Err(HarnessError::Sweep(format!("{what} list is empty")));
            }
        }
        self.values
            .iter()
            .map(|&v| Ok(base.with_override(self.param.key(), self.param.json_value(v)?)?))
            .collect()
    }
}

/// One row of `summary.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scheme: SchemeId,
    pub value: f64,
    pub seed: u64,
    pub outcome: Result<CellResult, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub min_rate: f64,
    pub iterations: usize,
    pub wall_ms: u128,
    pub continued_from: Option<SchemeId>,
}

/// Per-(scheme, value) mean over the successful seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub scheme: SchemeId,
    pub value: f64,
    pub n: usize,
    pub failures: usize,
    pub mean: f64,
    pub std_error: f64,
}

/// Runs every (value, seed) cell on the `FASOPT_WORKERS` pool.
pub fn run_cells(spec: &SweepSpec, configs: &[SystemConfig]) -> Result<Vec<SweepRow>, HarnessError> {
    Ok(run_cells_in(&worker_pool()?, spec, configs))
}

/// Rows come back in (value, seed, scheme) order regardless of scheduling.
pub fn run_cells_in(pool: &ThreadPool, spec: &SweepSpec, configs: &[SystemConfig]) -> Vec<SweepRow> {
    let cells: Vec<(usize, u64)> = (0..configs.len()).flat_map(|i| spec.seeds.iter().map(move |&s| (i, s))).collect();
    let rows: Vec<Vec<SweepRow>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(i, seed)| {
                let cfg = &configs[i];
                let value = spec.values[i];
                let scenario = sample_scenario(cfg, seed);
                match compare_schemes(&scenario, cfg, &spec.schemes) {
                    Ok(runs) => runs
                        .into_iter()
                        .map(|r| SweepRow {
                            scheme: r.scheme,
                            value,
                            seed,
                            outcome: Ok(CellResult {
                                min_rate: r.result.min_rate(),
                                iterations: r.result.outer_iterations,
                                wall_ms: r.wall.as_millis(),
                                continued_from: r.restarted_from,
                            }),
                        })
                        .collect(),
                    Err(e) => spec
                        .schemes
                        .iter()
                        .map(|&scheme| SweepRow { scheme, value, seed, outcome: Err(e.to_string()) })
                        .collect(),
                }
            })
            .collect()
    });
    rows.into_iter().flatten().collect()
}

pub fn aggregate(spec: &SweepSpec, rows: &[SweepRow]) -> Vec<AggregateRow> {
    let mut out = Vec::new();
    for &scheme in &spec.schemes {
        for &value in &spec.values {
            let cell: Vec<&SweepRow> = rows.iter().filter(|r| r.scheme == scheme && r.value == value).collect();
            let rates: Vec<f64> = cell.iter().filter_map(|r| r.outcome.as_ref().ok().map(|c| c.min_rate)).collect();
            let n = rates.len();
            let mean = if n > 0 { rates.iter().sum::<f64>() / n as f64 } else { f64::NAN };
            let std_error = if n > 1 {
                let var = rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                (var / n as f64).sqrt()
            } else {
                f64::NAN
            };
            out.push(AggregateRow { scheme, value, n, failures: cell.len() - n, mean, std_error });
        }
    }
    out
}

pub fn summary_csv(param: SweepParam, rows: &[SweepRow]) -> Result<String, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["scheme", "param", "value", "seed", "min_rate_bph", "iters", "wall_ms", "status", "continued_from"])?;
    for r in rows {
        let head = [r.scheme.as_str().to_string(), param.key().into(), sig9(r.value), r.seed.to_string()];
        let tail = match &r.outcome {
            Ok(c) => [
                sig9(c.min_rate),
                c.iterations.to_string(),
                c.wall_ms.to_string(),
                "ok".into(),
                c.continued_from.map_or(String::new(), |s| s.as_str().into()),
            ],
            Err(msg) => [String::new(), String::new(), String::new(), format!("error: {msg}"), String::new()],
        };
        w.write_record(head.iter().chain(tail.iter()))?;
    }
    Ok(csv_string(w)?)
}

pub fn aggregate_csv(param: SweepParam, rows: &[AggregateRow]) -> Result<String, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["scheme", "param", "value", "n", "failures", "mean_min_rate_bph", "std_error_bph"])?;
    for r in rows {
        w.write_record([
            r.scheme.as_str().to_string(),
            param.key().into(),
            sig9(r.value),
            r.n.to_string(),
            r.failures.to_string(),
            sig9(r.mean),
            sig9(r.std_error),
        ])?;
    }
    Ok(csv_string(w)?)
}

/// `fasopt sweep`.
pub fn cmd_sweep(base: &SystemConfig, spec: &SweepSpec) -> Result<Vec<AggregateRow>, HarnessError> {
    let configs = spec.resolve(base)?;
    let rows = run_cells(spec, &configs)?;
    let agg = aggregate(spec, &rows);
    let summary = summary_csv(spec.param, &rows)?;
    let aggregate = aggregate_csv(spec.param, &agg)?;
    fs::create_dir_all(&spec.out).map_err(io_error(&spec.out))?;
    for (name, body) in [(SUMMARY_FILE, summary), (AGGREGATE_FILE, aggregate)] {
        let path = spec.out.join(name);
        fs::write(&path, body).map_err(io_error(&path))?;
    }
    Ok(agg)
}

/// Seeds `0..count`.
pub fn seed_range(count: u64) -> Vec<u64> {
    (0..count).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rayon::ThreadPoolBuilder;
    use std::path::Path;

    fn spec(param: SweepParam, values: Vec<f64>, schemes: Vec<SchemeId>, seeds: u64, out: &Path) -> SweepSpec {
        SweepSpec { param, values, schemes, seeds: seed_range(seeds), out: out.to_path_buf() }
    }

    #[test]
    fn parameter_names() {
        for p in SweepParam::ALL {
            assert_eq!(p.key().parse::<SweepParam>().unwrap(), p);
        }
        assert!("rho".parse::<SweepParam>().is_err());
    }

    #[test]
    fn rejects_empty_and_out_of_range() {
        let dir = tempfile::tempdir().unwrap();
        let base = SystemConfig::default();
        assert!(spec(SweepParam::Eta, vec![], vec![SchemeId::Fpa], 1, dir.path()).resolve(&base).is_err());
        assert!(spec(SweepParam::Eta, vec![0.1], vec![], 1, dir.path()).resolve(&base).is_err());
        assert!(spec(SweepParam::Eta, vec![1.5], vec![SchemeId::Fpa], 1, dir.path()).resolve(&base).is_err());
        assert!(spec(SweepParam::NTxAntennas, vec![2.5], vec![SchemeId::Fpa], 1, dir.path()).resolve(&base).is_err());
        let cfgs = spec(SweepParam::Eta, vec![0.05], vec![SchemeId::Fpa], 1, dir.path()).resolve(&base).unwrap();
        assert_eq!(cfgs[0].hi_rx, vec![0.05, 0.05]);
    }

    #[test]
    fn eta_sweep_has_one_aggregate_row_per_scheme_and_value() {
        let dir = tempfile::tempdir().unwrap();
        let s = spec(SweepParam::Eta, vec![0.01, 0.05, 0.2], vec![SchemeId::Proposed, SchemeId::Tfa, SchemeId::Fpa], 1, dir.path());
        let agg = cmd_sweep(&SystemConfig::default(), &s).unwrap();
        assert_eq!(agg.len(), 9);
        let summary = fs::read_to_string(dir.path().join(SUMMARY_FILE)).unwrap();
        assert_eq!(summary.lines().count(), 1 + 9);
        assert!(summary.starts_with("scheme,param,value,seed,min_rate_bph,iters,wall_ms,"));
        let aggregate = fs::read_to_string(dir.path().join(AGGREGATE_FILE)).unwrap();
        assert_eq!(aggregate.lines().count(), 1 + 9);
        for scheme in [SchemeId::Proposed, SchemeId::Tfa, SchemeId::Fpa] {
            let means: Vec<f64> = agg.iter().filter(|r| r.scheme == scheme).map(|r| r.mean).collect();
            assert!(means.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{scheme}: {means:?}");
        }
    }

    #[test]
    fn failed_cells_become_status_rows() {
        let s = SweepSpec { param: SweepParam::Eta, values: vec![0.1], schemes: vec![SchemeId::Fpa], seeds: vec![0], out: PathBuf::new() };
        let rows = vec![SweepRow { scheme: SchemeId::Fpa, value: 0.1, seed: 0, outcome: Err("grid does not fit".into()) }];
        let agg = aggregate(&s, &rows);
        assert_eq!((agg[0].n, agg[0].failures), (0, 1));
        let csv = summary_csv(SweepParam::Eta, &rows).unwrap();
        assert!(csv.lines().nth(1).unwrap().contains("error: grid does not fit"));
    }

    #[test]
    fn rows_do_not_depend_on_worker_count() {
        let dir = tempfile::tempdir().unwrap();
        let s = spec(SweepParam::PmaxDbm, vec![10.0, 20.0], vec![SchemeId::Fpa], 3, dir.path());
        let cfgs = s.resolve(&SystemConfig::default()).unwrap();
        let strip = |rows: Vec<SweepRow>| -> Vec<(SchemeId, f64, u64, f64, usize)> {
            rows.into_iter().map(|r| {
                let c = r.outcome.unwrap();
                (r.scheme, r.value, r.seed, c.min_rate, c.iterations)
            }).collect()
        };
        let pool = |n| ThreadPoolBuilder::new().num_threads(n).build().unwrap();
        assert_eq!(strip(run_cells_in(&pool(3), &s, &cfgs)), strip(run_cells_in(&pool(1), &s, &cfgs)));
    }
}
