//! Command-line front end: loads a system from a JSON config, runs the
//! verification suites or a simulation, and writes reports and CSV.
//!
//! Every command returns a process exit code: 0 on success, 1 when a
//! property check or the integration failed, 2 on usage or config errors.

pub mod build;
pub mod config;
pub mod error;
pub mod run;

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

pub use config::RunConfig;
pub use error::{CliError, EXIT_FAILURE, EXIT_OK, EXIT_USAGE};

/// Default output directory when neither `--out`, the config nor
/// `METRIPLEX_OUT` name one.
pub const DEFAULT_OUT: &str = "out";

/// Names accepted by [`cmd_demo`].
pub const DEMOS: [&str; 6] = ["rigid_body", "kida", "viscous1d", "kdv", "ott_sudan", "euler2d"];

#[derive(Debug, Clone, Default)]
pub struct Options {
    /// `--out`; wins over everything else.
    pub out: Option<PathBuf>,
    /// Value of `METRIPLEX_OUT`; used when neither `--out` nor the config sets a directory.
    pub env_out: Option<PathBuf>,
    /// Overrides `verification.seed`.
    pub seed: Option<u64>,
    /// Worker threads for sweeps.
    pub jobs: Option<usize>,
    pub quiet: bool,
}

impl Options {
    fn base_dir(&self, cfg: &RunConfig) -> PathBuf {
        self.out.clone().or_else(|| cfg.output.dir.clone()).or_else(|| self.env_out.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
    }

    fn run_dir(&self, cfg: &RunConfig) -> PathBuf {
        self.base_dir(cfg).join(cfg.name())
    }

    fn seed(&self, cfg: &RunConfig) -> u64 {
        self.seed.unwrap_or(cfg.verification.seed)
    }

    fn say(&self, text: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", text.as_ref());
        }
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(CliError::io(path))
}

fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(CliError::io(dir))
}

/// Runs the verification suites of one (already expanded) config and
/// writes `report.json` and `report.txt` to its run directory.
pub fn verify_one(cfg: &RunConfig, opts: &Options) -> Result<i32, CliError> {
    let seed = opts.seed(cfg);
    let model = build::build(cfg, seed)?;
    let report = run::verify(&model, cfg, seed)?;
    let dir = opts.run_dir(cfg);
    prepare_dir(&dir)?;
    write(&dir.join("report.json"), &run::to_json(&report))?;
    let text = format!("{report}\n");
    write(&dir.join("report.txt"), text.as_bytes())?;
    opts.say(format!("== verify {} ({})\n{text}report: {}", cfg.name(), cfg.system.kind(), dir.join("report.json").display()));
    Ok(if report.verdict { EXIT_OK } else { EXIT_FAILURE })
}

/// Integrates one config and writes `trajectory.csv`, `summary.json` and,
/// for fields, `snapshot.csv`.
pub fn simulate_one(cfg: &RunConfig, opts: &Options) -> Result<i32, CliError> {
    let model = build::build(cfg, opts.seed(cfg))?;
    let sim = run::simulate(&model, cfg)?;
    let dir = opts.run_dir(cfg);
    prepare_dir(&dir)?;
    if !sim.csv.is_empty() {
        write(&dir.join("trajectory.csv"), &sim.csv)?;
    }
    if let Some(s) = &sim.snapshot {
        write(&dir.join("snapshot.csv"), s)?;
    }
    write(&dir.join("summary.json"), &run::to_json(&sim.summary))?;
    let s = &sim.summary;
    let mut text = format!(
        "== simulate {} ({}, mode {})\nstatus: {}\nH: {:.12e} -> {:.12e} (drift {:.3e})\nS: {:.12e} -> {:.12e}",
        s.name, s.system, s.mode, s.status, s.energy.initial, s.energy.last, s.energy.drift, s.entropy.initial, s.entropy.last
    );
    for v in &s.violations {
        text.push_str(&format!("\nviolation: {v}"));
    }
    text.push_str(&format!("\nsummary: {}", dir.join("summary.json").display()));
    opts.say(text);
    Ok(if s.is_clean() { EXIT_OK } else { EXIT_FAILURE })
}

/// Runs `f` on every expanded config, in parallel when `jobs > 1`, and
/// folds the exit codes (the worst one wins).
fn run_all(cfg: &RunConfig, opts: &Options, f: fn(&RunConfig, &Options) -> Result<i32, CliError>) -> i32 {
    let runs = match cfg.expand() {
        Ok(r) => r,
        Err(e) => return report_error(&e),
    };
    let jobs = opts.jobs.unwrap_or(1).max(1);
    let results: Vec<Result<i32, CliError>> = if jobs == 1 || runs.len() == 1 {
        runs.iter().map(|c| f(c, opts)).collect()
    } else {
        match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
            Ok(pool) => pool.install(|| runs.par_iter().map(|c| f(c, opts)).collect()),
            Err(e) => return report_error(&CliError::Usage(format!("cannot start {jobs} workers: {e}"))),
        }
    };
    results.iter().map(|r| r.as_ref().copied().unwrap_or_else(report_error)).max().unwrap_or(EXIT_OK)
}

fn report_error(e: &CliError) -> i32 {
    eprintln!("error: {e}");
    e.exit_code()
}

fn load(path: &Path) -> Result<RunConfig, i32> {
    RunConfig::load(path).map_err(|e| report_error(&e))
}

/// `verify <config>`: exit 0 iff every check passes.
pub fn cmd_verify(path: &Path, opts: &Options) -> i32 {
    match load(path) {
        Ok(cfg) => run_all(&cfg, opts, verify_one),
        Err(code) => code,
    }
}

/// `simulate <config>`: exit 0 on a clean run.
pub fn cmd_simulate(path: &Path, opts: &Options) -> i32 {
    match load(path) {
        Ok(cfg) => run_all(&cfg, opts, simulate_one),
        Err(code) => code,
    }
}

/// The canned config of a demo.
pub fn demo_config(name: &str) -> Option<RunConfig> {
    let text = match name {
        "rigid_body" => include_str!("../configs/rigid_body.json"),
        "kida" => include_str!("../configs/kida.json"),
        "viscous1d" => include_str!("../configs/viscous1d.json"),
        "kdv" => include_str!("../configs/kdv.json"),
        "ott_sudan" => include_str!("../configs/ott_sudan.json"),
        "euler2d" => include_str!("../configs/euler2d.json"),
        _ => return None,
    };
    Some(RunConfig::from_json(text).expect("bundled demo configs are valid"))
}

/// `demo <name>`: verification and simulation of a canned example, written
/// to `<out>/<name>/`.
pub fn cmd_demo(name: &str, opts: &Options) -> i32 {
    let Some(cfg) = demo_config(name) else {
        return report_error(&CliError::Usage(format!("unknown demo '{name}' (expected one of {})", DEMOS.join(", "))));
    };
    let v = run_all(&cfg, opts, verify_one);
    let s = run_all(&cfg, opts, simulate_one);
    v.max(s)
}
