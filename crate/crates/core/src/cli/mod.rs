//! Batch command-line front end.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical or domain
//! error, 4 I/O error.

mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use config::{Format, RunConfig};
use output::{json as render_json, Outputs};

pub const THREADS_ENV: &str = "PARTIALWAVE_THREADS";

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numerical(String),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Numerical(m) | Failure::Io(m) => m,
        }
    }
}

impl From<crate::Error> for Failure {
    fn from(e: crate::Error) -> Self {
        Failure::Numerical(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "partialwave", version, about = "Partial-wave scattering toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Phase shifts and cross sections
    Scan(Common),
    /// Bound-state energies
    Bound(Common),
    /// Resonance decomposition and Fano fit
    Resonance(Common),
    /// Scattering time delays
    Delay(Common),
    /// Photodetachment dipoles, Cooper minima and threshold laws
    Photo(Common),
    /// JWKB barrier analysis
    Wkb(Common),
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides [output] directory)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated subset of csv,json,svg
    #[arg(long)]
    format: Option<String>,
    /// Worker threads, 0 = automatic
    #[arg(long)]
    threads: Option<usize>,
}

impl Command {
    fn parts(&self) -> (&'static str, &Common) {
        match self {
            Command::Scan(c) => ("scan", c),
            Command::Bound(c) => ("bound", c),
            Command::Resonance(c) => ("resonance", c),
            Command::Delay(c) => ("delay", c),
            Command::Photo(c) => ("photo", c),
            Command::Wkb(c) => ("wkb", c),
        }
    }
}

fn threads(flag: Option<usize>) -> Result<usize, Failure> {
    if let Some(n) = flag {
        return Ok(n);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Config(format!("config: {THREADS_ENV} = '{v}' is not a thread count"))),
        Err(_) => Ok(0),
    }
}

fn execute(name: &str, cfg: &RunConfig) -> Result<Outputs, Failure> {
    match name {
        "scan" => commands::scan(cfg),
        "bound" => commands::bound(cfg),
        "resonance" => commands::resonance(cfg),
        "delay" => commands::delay(cfg),
        "photo" => commands::photo(cfg),
        _ => commands::wkb(cfg),
    }
}

fn run_command(cmd: &Command) -> Result<(), Failure> {
    let (name, common) = cmd.parts();
    let cfg = RunConfig::load(&common.config).map_err(|e| Failure::Config(e.to_string()))?;
    let formats = match &common.format {
        Some(f) => Format::parse_list(f).map_err(|e| Failure::Config(e.to_string()))?,
        None => cfg.formats.clone().unwrap_or_else(|| [Format::Csv, Format::Json].into()),
    };
    let dir = common.out.clone().or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let n_threads = threads(common.threads)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(n_threads)
        .build()
        .map_err(|e| Failure::Config(format!("config: cannot start {n_threads} threads: {e}")))?;
    let outputs = pool.install(|| execute(name, &cfg))?;
    let written = outputs.write(&dir, &formats).map_err(|e| Failure::Io(format!("io: {}: {e}", dir.display())))?;
    write_manifest(&dir, name, &common.config, pool.current_num_threads(), &written)
}

fn write_manifest(dir: &Path, command: &str, config: &Path, threads: usize, files: &[PathBuf]) -> Result<(), Failure> {
    let stamp = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let names: Vec<String> =
        files.iter().filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned())).collect();
    let doc = json!({
        "command": command,
        "config": config.display().to_string(),
        "version": env!("CARGO_PKG_VERSION"),
        "threads": threads,
        "files": names,
        "unix_time": stamp,
    });
    let path = dir.join("manifest.json");
    std::fs::write(&path, render_json(&doc)).map_err(|e| Failure::Io(format!("io: {}: {e}", path.display())))
}

/// Parse `args` (program name first), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run_command(&cli.command) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("{}", f.message());
            f.exit_code()
        }
    }
}
