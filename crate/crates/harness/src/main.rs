use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fasopt_core::baselines::SchemeId;
use fasopt_harness::run::{cmd_run, read_config};
use fasopt_harness::sweep::{cmd_sweep, seed_range, SweepParam, SweepSpec, DEFAULT_SEEDS};
use fasopt_harness::validate::{Profile, Suite, SuiteSettings};

#[derive(Parser)]
#[command(name = "fasopt", version, about = "Max-min rate optimization for fluid-antenna links with hardware impairments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize one scenario and write trace.csv and result.json.
    Run {
        /// JSON configuration; defaults apply to absent keys (and to everything without a file).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "proposed")]
        scheme: SchemeId,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep one parameter over paired seeds and write summary.csv and aggregate.csv.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        param: SweepParam,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "proposed,tfa,eas,rfa,fpa")]
        schemes: Vec<SchemeId>,
        /// Seeds 0..N.
        #[arg(long, default_value_t = DEFAULT_SEEDS)]
        seeds: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the property suites; one JSON report per suite on stdout.
    Validate {
        /// Halve every tolerance.
        #[arg(long)]
        strict: bool,
        /// Random instances per instance-based suite (suite defaults otherwise).
        #[arg(long)]
        seeds: Option<usize>,
        /// Restrict to the named suites.
        #[arg(long, value_delimiter = ',')]
        suites: Vec<Suite>,
    },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config, seed, scheme, out } => match cmd_run(config.as_deref(), seed, scheme, &out) {
            Ok(files) => {
                for f in files {
                    println!("{}", f.display());
                }
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
        Command::Sweep { config, param, values, schemes, seeds, out } => {
            let base = match read_config(config.as_deref()) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            let spec = SweepSpec { param, values, schemes, seeds: seed_range(seeds), out };
            match cmd_sweep(&base, &spec) {
                Ok(rows) => {
                    let failures: usize = rows.iter().map(|r| r.failures).sum();
                    println!("{} aggregate rows, {failures} failed cells, written to {}", rows.len(), spec.out.display());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Validate { strict, seeds, suites } => {
            let profile = if strict { Profile::Strict } else { Profile::Default };
            let settings = SuiteSettings::new(profile, seeds);
            let selected = if suites.is_empty() { Suite::ALL.to_vec() } else { suites };
            let mut all_passed = true;
            for suite in selected {
                let report = suite.run(&settings);
                all_passed &= report.passed;
                eprint!("{report}");
                println!("{}", serde_json::to_string(&report).expect("report serializes"));
            }
            if all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn fail(e: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::FAILURE
}
