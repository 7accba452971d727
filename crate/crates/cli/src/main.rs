//! `dsim`: batch driver for the distributed source simulation toolkit.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde_json::Value;

use commands::Output;
use config::{ConfigError, Format, RunConfig};

#[derive(Parser)]
#[command(name = "dsim", version, about = "Exact analysis and simulation for distributed source simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON file with default values for any flag
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    flags: RunConfig,
}

#[derive(Subcommand)]
enum Command {
    /// Entropy, mutual information, maximal correlation and common information of a joint table
    Info { file: Option<PathBuf> },
    /// Divergence, bounds and structure of a simulation scheme
    AnalyzeScheme { file: Option<PathBuf> },
    /// Soft-covering sweep with exact per-codebook divergence
    SoftCover { file: Option<PathBuf> },
    /// Common-part codebook scheme on the four-symbol cross source
    Hybrid {
        /// Target table over (X, Y); defaults to the scheme's own single-letter law
        target: Option<PathBuf>,
    },
    /// Exact metrics of the block-parity construction
    Counterexample,
}

fn render_record(value: &Value, format: Format) -> Result<String> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(value)? + "\n"),
        Format::Csv => {
            let mut out = String::from("key,value\n");
            if let Value::Object(map) = value {
                for (k, v) in map {
                    let cell = match v {
                        Value::String(s) => s.clone(),
                        other => other.to_string(),
                    };
                    let quoted = if cell.contains([',', '"', '\n']) {
                        format!("\"{}\"", cell.replace('"', "\"\""))
                    } else {
                        cell
                    };
                    out.push_str(&format!("{k},{quoted}\n"));
                }
            }
            Ok(out)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let base = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    let mut cfg = base.overridden_by(&cli.flags);
    let handler: fn(&RunConfig) -> Result<Output> = match cli.command {
        Command::Info { file } => {
            cfg.input = file.or(cfg.input);
            commands::info
        }
        Command::AnalyzeScheme { file } => {
            cfg.input = file.or(cfg.input);
            commands::analyze_scheme
        }
        Command::SoftCover { file } => {
            cfg.input = file.or(cfg.input);
            commands::soft_cover
        }
        Command::Hybrid { target } => {
            cfg.input = target.or(cfg.input);
            commands::hybrid
        }
        Command::Counterexample => commands::counterexample,
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        if t == 0 {
            return Err(ConfigError("--threads must be positive".into()).into());
        }
        pool = pool.num_threads(t);
    }
    let output = pool.build()?.install(|| handler(&cfg))?;
    let text = match output {
        Output::Record(v) => render_record(&v, cfg.format())?,
        Output::Report(r) => match cfg.format() {
            Format::Json => r.to_json() + "\n",
            Format::Csv => r.to_csv()?,
        },
    };
    match &cfg.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// 3 for size caps, 2 for invalid input, 1 for anything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<dsim_core::Error>() {
        return match e {
            dsim_core::Error::CapExceeded { .. } => 3,
            dsim_core::Error::Io(_) => 1,
            _ => 2,
        };
    }
    if err.downcast_ref::<ConfigError>().is_some() || err.downcast_ref::<serde_json::Error>().is_some() {
        return 2;
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
