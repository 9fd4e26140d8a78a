//! Single scenario runs: `trace.csv` and `result.json`.

use std::fs;
use std::path::{Path, PathBuf};

use fasopt_core::baselines::{run_scheme, SchemeId};
use fasopt_core::bcd::{beam_columns, BcdResult};
use fasopt_core::config::{load_config, SystemConfig};
use fasopt_core::scenario::sample_scenario;
use serde_json::{json, Value};

use crate::format::{csv_string, sig9};
use crate::{io_error, HarnessError};

pub const TRACE_FILE: &str = "trace.csv";
pub const RESULT_FILE: &str = "result.json";

/// Reads and resolves a configuration file; no file means defaults.
pub fn read_config(path: Option<&Path>) -> Result<SystemConfig, HarnessError> {
    let Some(path) = path else {
        return Ok(SystemConfig::default());
    };
    let text = fs::read_to_string(path).map_err(io_error(path))?;
    load_config(&text).map_err(|source| HarnessError::Config { path: path.to_path_buf(), source })
}

pub fn trace_csv(result: &BcdResult) -> Result<String, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["iter", "loop", "tau", "min_rate_bph", "solver_status"])?;
    for r in &result.trace {
        let status = r.status.map_or("none", |s| s.as_str());
        w.write_record([r.iteration.to_string(), r.stage.as_str().into(), sig9(r.tau), sig9(r.min_rate), status.into()])?;
    }
    Ok(csv_string(w)?)
}

fn points(ps: &[nalgebra::Vector2<f64>]) -> Value {
    ps.iter().map(|p| json!([p.x, p.y])).collect()
}

pub fn result_json(cfg: &SystemConfig, seed: u64, scheme: SchemeId, result: &BcdResult) -> Value {
    let c = &result.counts;
    json!({
        "scheme": scheme.as_str(),
        "seed": seed,
        "config": cfg.to_json(),
        "min_rate_bph": result.min_rate(),
        "rates_bph": result.report.rates,
        "sinr": result.report.sinr,
        "layout": { "tx": points(&result.layout.tx), "rx": points(&result.layout.rx) },
        "beams": beam_columns(&result.beams),
        "total_power_w": result.beams.total_power(),
        "tau_trace": result.tau_trace,
        "outer_iterations": result.outer_iterations,
        "loop_counts": {
            "beam_solves": c.beam.solves,
            "beam_failures": c.beam.failures,
            "beam_aborts": c.beam_aborts,
            "tx_solves": c.tx.solves,
            "tx_failures": c.tx.failures,
            "tx_sweeps": c.tx_sweeps,
            "tx_accepted": c.tx_accepted,
            "rx_solves": c.rx.solves,
            "rx_failures": c.rx.failures,
            "rx_rounds": c.rx_rounds,
            "rx_accepted": c.rx_accepted,
        },
        "rank_one_ratio": result.rank_one_ratio,
        "termination": result.termination,
    })
}

/// Files of one run, rendered before anything touches the disk.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub result: BcdResult,
    pub trace_csv: String,
    pub result_json: String,
}

pub fn execute_run(cfg: &SystemConfig, seed: u64, scheme: SchemeId) -> Result<RunArtifacts, HarnessError> {
    let scenario = sample_scenario(cfg, seed);
    let result = run_scheme(scheme, &scenario, cfg)?;
    let trace_csv = trace_csv(&result)?;
    let result_json = serde_json::to_string_pretty(&result_json(cfg, seed, scheme, &result)).expect("json values serialize");
    Ok(RunArtifacts { result, trace_csv, result_json })
}

/// `fasopt run`: nothing is written unless the run succeeds.
pub fn cmd_run(config: Option<&Path>, seed: u64, scheme: SchemeId, out: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    let cfg = read_config(config)?;
    let art = execute_run(&cfg, seed, scheme)?;
    fs::create_dir_all(out).map_err(io_error(out))?;
    let files = [(TRACE_FILE, art.trace_csv), (RESULT_FILE, art.result_json + "\n")];
    let mut written = Vec::with_capacity(files.len());
    for (name, body) in files {
        let path = out.join(name);
        fs::write(&path, body).map_err(io_error(&path))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_scheme_traces_only_beam_blocks() {
        let dir = tempfile::tempdir().unwrap();
        cmd_run(None, 3, SchemeId::Fpa, dir.path()).unwrap();
        let trace = fs::read_to_string(dir.path().join(TRACE_FILE)).unwrap();
        let mut lines = trace.lines();
        assert_eq!(lines.next(), Some("iter,loop,tau,min_rate_bph,solver_status"));
        let loops: Vec<&str> = lines.map(|l| l.split(',').nth(1).unwrap()).collect();
        assert_eq!(loops[0], "init");
        assert!(loops[1..].iter().all(|&l| l == "beam"));
    }

    #[test]
    fn result_echoes_resolved_config() {
        let dir = tempfile::tempdir().unwrap();
        let cfg_path = dir.path().join("cfg.json");
        fs::write(&cfg_path, r#"{"pmax_dbm": 20, "eta": 0.1}"#).unwrap();
        let out = dir.path().join("out");
        cmd_run(Some(&cfg_path), 1, SchemeId::Fpa, &out).unwrap();
        let v: Value = serde_json::from_str(&fs::read_to_string(out.join(RESULT_FILE)).unwrap()).unwrap();
        let echoed = SystemConfig::from_json(v["config"].as_object().unwrap()).unwrap();
        assert!(echoed.approx_eq(&read_config(Some(&cfg_path)).unwrap(), 1e-12));
        assert_eq!(v["config"]["n_tx_antennas"], 4);
        assert!(v["min_rate_bph"].as_f64().unwrap() > 0.0);
    }

    #[test]
    fn missing_config_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("out");
        let err = cmd_run(Some(&dir.path().join("absent.json")), 0, SchemeId::Proposed, &out).unwrap_err();
        assert!(matches!(err, HarnessError::Io { .. }));
        assert!(!out.exists());
    }

    #[test]
    fn invalid_config_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let cfg_path = dir.path().join("cfg.json");
        fs::write(&cfg_path, r#"{"eta": 2}"#).unwrap();
        let out = dir.path().join("out");
        assert!(matches!(cmd_run(Some(&cfg_path), 0, SchemeId::Fpa, &out), Err(HarnessError::Config { .. })));
        assert!(!out.exists());
    }
}
