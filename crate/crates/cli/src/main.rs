//! Configuration-driven front end for the trace-statistics toolkit.
//!
//! Every subcommand reads one JSON experiment configuration (all fields
//! defaulted except the seed), applies a handful of command-line overrides,
//! runs, and writes a CSV table next to a JSON sidecar echoing the resolved
//! configuration. Identical configurations produce byte-identical outputs,
//! whatever the thread count.
//!
//! Exit codes: 0 on success, 2 for configuration-class errors (bad flags,
//! malformed config, invalid model), 3 for numeric or statistical failures,
//! 1 for filesystem trouble. Failures print a single JSON line on stderr
//! and leave no partial output files.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rigidity_core::Error;

use commands::RunOutput;
use config::ExperimentConfig;

#[derive(Parser)]
#[command(
    name = "rigidity",
    version,
    about = "Trace statistics of one-dimensional random Schrodinger operators"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Validate a covariance model and its sampler on a uniform grid
    NoiseCheck(CommonArgs),
    /// Scan occupation-norm scaling over a list of horizons
    LtScaling(LtArgs),
    /// Estimate heat-trace moments by path sampling
    Trace(CommonArgs),
    /// Fit the decay exponent of the trace variance
    VarianceScan(CommonArgs),
    /// Estimate heat-trace moments by discretization and diagonalization
    Spectrum(CommonArgs),
    /// Tabulate the closed-form edge-variance benchmark against quadrature
    Airy(CommonArgs),
    /// Variance scan plus the rigidity verdict built from it
    Report(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON experiment configuration
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Comma-separated horizons, overrides the config t_list
    #[arg(long, value_name = "LIST")]
    t: Option<String>,
    /// Master RNG seed, overrides the config
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = one per core), overrides the config
    #[arg(long)]
    threads: Option<usize>,
    /// Output path stem, overrides the config
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LtArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Occupation-norm index, overrides the config
    #[arg(long)]
    q: Option<f64>,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.to_json_line());
            ExitCode::from(f.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let (name, common, q) = match &cli.cmd {
        Cmd::NoiseCheck(c) => ("noise-check", c, None),
        Cmd::LtScaling(l) => ("lt-scaling", &l.common, l.q),
        Cmd::Trace(c) => ("trace", c, None),
        Cmd::VarianceScan(c) => ("variance-scan", c, None),
        Cmd::Spectrum(c) => ("spectrum", c, None),
        Cmd::Airy(c) => ("airy", c, None),
        Cmd::Report(c) => ("report", c, None),
    };

    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(list) = &common.t {
        cfg.t_list = parse_t_list(list)?;
    }
    if let Some(seed) = common.seed {
        cfg.seed = Some(seed);
    }
    if let Some(threads) = common.threads {
        cfg.threads = threads;
    }
    if let Some(out) = &common.out {
        cfg.out = Some(out.clone());
    }
    if let Some(q) = q {
        cfg.q = q;
    }
    // refuse early, before any computation is spent
    if let Some(cp) = &common.config {
        let (_, csv_path, json_path) = output_paths(name, &cfg);
        for target in [&csv_path, &json_path] {
            if same_file(cp, target) {
                return Err(Error::Config(format!(
                    "output {} would overwrite the configuration file; pick a different --out",
                    target.display()
                ))
                .into());
            }
        }
    }

    let output = match &cli.cmd {
        Cmd::NoiseCheck(_) => commands::noise_check(&cfg),
        Cmd::LtScaling(_) => commands::lt_scaling(&cfg),
        Cmd::Trace(_) => commands::trace(&cfg),
        Cmd::VarianceScan(_) => commands::variance_scan_cmd(&cfg),
        Cmd::Spectrum(_) => commands::spectrum(&cfg),
        Cmd::Airy(_) => commands::airy(&cfg),
        Cmd::Report(_) => commands::report(&cfg),
    }?;
    write_outputs(name, &cfg, common.config.as_deref(), output)
}

fn parse_t_list(list: &str) -> Result<Vec<f64>, Failure> {
    list.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("cannot parse --t entry \"{s}\" as a number")).into())
        })
        .collect()
}

/// Output stem and the `.csv`/`.json` paths derived from it; the stem
/// defaults to the subcommand name in the working directory.
fn output_paths(name: &str, cfg: &ExperimentConfig) -> (PathBuf, PathBuf, PathBuf) {
    let stem = cfg.out.clone().unwrap_or_else(|| PathBuf::from(name));
    let stem =
        if stem.extension().is_some_and(|e| e == "csv") { stem.with_extension("") } else { stem };
    let csv_path = stem.with_extension("csv");
    let json_path = stem.with_extension("json");
    (stem, csv_path, json_path)
}

fn write_outputs(
    name: &str,
    cfg: &ExperimentConfig,
    config_path: Option<&std::path::Path>,
    output: RunOutput,
) -> Result<(), Failure> {
    let (stem, csv_path, json_path) = output_paths(name, cfg);
    if let Some(parent) = stem.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Failure::Io(parent.into(), e))?;
        }
    }
    if let Some(cp) = config_path {
        // double-checked after create_dir_all, when both parents resolve
        for target in [&csv_path, &json_path] {
            if same_file(cp, target) {
                return Err(Error::Config(format!(
                    "output {} would overwrite the configuration file; pick a different --out",
                    target.display()
                ))
                .into());
            }
        }
    }

    let mut artifacts = vec![base_name(&csv_path), base_name(&json_path)];
    let txt_path = stem.with_extension("txt");
    if output.text.is_some() {
        artifacts.push(base_name(&txt_path));
    }
    let sidecar = serde_json::json!({
        "tool": { "name": "rigidity", "version": env!("CARGO_PKG_VERSION") },
        "command": name,
        "config": cfg,
        "outputs": artifacts,
        "results": output.results,
    });
    let sidecar = format!(
        "{}\n",
        serde_json::to_string_pretty(&sidecar).expect("sidecar is valid JSON by construction")
    );

    std::fs::write(&csv_path, &output.csv).map_err(|e| Failure::Io(csv_path.clone(), e))?;
    std::fs::write(&json_path, sidecar).map_err(|e| Failure::Io(json_path.clone(), e))?;
    if let Some(text) = &output.text {
        std::fs::write(&txt_path, text).map_err(|e| Failure::Io(txt_path.clone(), e))?;
        print!("{text}");
    }
    println!("wrote {} and {}", csv_path.display(), json_path.display());
    Ok(())
}

fn base_name(path: &std::path::Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Path equality robust to relative spellings; the right-hand file may not
/// exist yet, so its parent anchors the comparison.
fn same_file(a: &std::path::Path, b: &std::path::Path) -> bool {
    fn resolve(p: &std::path::Path) -> PathBuf {
        let parent = match p.parent() {
            Some(q) if !q.as_os_str().is_empty() => q,
            _ => std::path::Path::new("."),
        };
        match (parent.canonicalize(), p.file_name()) {
            (Ok(c), Some(name)) => c.join(name),
            _ => p.to_path_buf(),
        }
    }
    resolve(a) == resolve(b)
}

/// Anything that can stop a run: a toolkit error with its contracted exit
/// code, or filesystem trouble around the output files.
enum Failure {
    Core(Error),
    Io(PathBuf, std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Core(e) => e.exit_code(),
            Failure::Io(..) => 1,
        }
    }

    fn to_json_line(&self) -> String {
        let (kind, message) = match self {
            Failure::Core(e) => {
                let kind = match e {
                    Error::Input(_) => "input",
                    Error::Config(_) => "config",
                    Error::Model(_) => "model",
                    Error::Numeric(_) => "numeric",
                    Error::Statistics(_) => "statistics",
                };
                (kind, e.to_string())
            }
            Failure::Io(path, e) => ("io", format!("cannot write {}: {e}", path.display())),
        };
        serde_json::json!({ "error": kind, "message": message, "exit": self.exit_code() })
            .to_string()
    }
}
