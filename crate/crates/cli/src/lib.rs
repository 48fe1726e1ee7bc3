//! Command-line front end: reconstruction, evaluation, sweeps, clone reports
//! and the annotation server.

pub mod commands;
pub mod config;
pub mod error;
pub mod server;

use std::ffi::OsString;
use std::io::Write;
use std::net::SocketAddr;
use std::path::PathBuf;

use blockhist::corpus_io::Format;
use blockhist::evaluation::sweep::{Stage, SweepOptions};
use clap::{Args, Parser, Subcommand};

use crate::commands::{ClonesRun, EvaluateRun, ReconstructRun};
use crate::config::{parse_format, parse_strategy, FileConfig, MatchingOverrides};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "blockhist",
    version,
    about = "Block-level version history for Markdown Q&A posts"
)]
pub struct Cli {
    /// Worker threads for parallel stages (default: all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// JSON configuration file; command-line flags take precedence
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Post history events (.jsonl or .csv)
    #[arg(long)]
    pub input: PathBuf,
    /// Input format: jsonl or csv (default: from the file extension)
    #[arg(long, value_parser = parse_format)]
    pub format: Option<Format>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reconstruct block lineages and export the result tables
    Reconstruct {
        #[command(flatten)]
        input: InputArgs,
        /// Directory for the CSV tables and summary.json
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        matching: MatchingOverrides,
    },
    /// Score one configuration against ground truth
    Evaluate {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        ground_truth: PathBuf,
        /// Timed repetitions (0 skips timing)
        #[arg(long)]
        repetitions: Option<usize>,
        /// Also write the result JSON here
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        matching: MatchingOverrides,
    },
    /// Search metric and threshold configurations on ground-truth samples
    Sweep {
        /// HISTORY=GROUND_TRUTH, repeatable
        #[arg(long = "sample")]
        samples: Vec<String>,
        /// Directory of sample subdirectories (history.jsonl|csv, ground_truth.csv)
        #[arg(long)]
        samples_dir: Option<PathBuf>,
        /// Last stage to run: coarse, fine or combined
        #[arg(long)]
        stage: Option<Stage>,
        #[arg(long)]
        repetitions: Option<usize>,
        #[arg(long, value_parser = parse_strategy)]
        strategy: Option<blockhist::history::Strategy>,
        #[arg(long)]
        output: PathBuf,
    },
    /// Report code blocks cloned across threads
    Clones {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        min_threads: Option<usize>,
        #[arg(long)]
        min_nloc: Option<usize>,
        /// Consider every version, not only the latest
        #[arg(long)]
        all_versions: bool,
        /// Output file; .csv for CSV, JSON otherwise (default: JSON on stdout)
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Serve the annotation API
    Serve {
        #[command(flatten)]
        input: InputArgs,
        /// Ground-truth CSV; created on the first save if missing
        #[arg(long)]
        ground_truth: PathBuf,
        #[arg(long)]
        host: Option<String>,
        #[arg(long)]
        port: Option<u16>,
        #[command(flatten)]
        matching: MatchingOverrides,
    },
}

fn init_threads(n: usize) -> Result<(), CliError> {
    if n == 0 {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    // Fails only if a pool exists already, e.g. when called twice in one process.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parses `args` and runs the command. Help and version output count as
/// success.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            write!(out, "{e}").map_err(|e| CliError::Internal(e.to_string()))?;
            return Ok(());
        }
        Err(e) => {
            let msg = e.to_string();
            let msg = msg.trim_end().strip_prefix("error: ").unwrap_or(msg.trim_end());
            return Err(CliError::Usage(msg.to_string()));
        }
    };
    execute(cli, out)
}

pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    if let Some(n) = cli.threads.or(file.threads) {
        init_threads(n)?;
    }
    match cli.command {
        Command::Reconstruct {
            input,
            output,
            matching,
        } => {
            let (config, strategy) = matching.or(file.matching).resolve()?;
            commands::reconstruct_cmd(
                ReconstructRun {
                    input: &input.input,
                    format: input.format,
                    output: &output,
                    config,
                    strategy,
                },
                out,
            )
        }
        Command::Evaluate {
            input,
            ground_truth,
            repetitions,
            output,
            matching,
        } => {
            let (config, strategy) = matching.or(file.matching).resolve()?;
            commands::evaluate_cmd(
                EvaluateRun {
                    input: &input.input,
                    format: input.format,
                    ground_truth: &ground_truth,
                    repetitions: repetitions.or(file.sweep.repetitions).unwrap_or(1),
                    output: output.as_deref(),
                    config,
                    strategy,
                },
                out,
            )
            .map(drop)
        }
        Command::Sweep {
            samples,
            samples_dir,
            stage,
            repetitions,
            strategy,
            output,
        } => {
            let paths = commands::sample_paths(&samples, samples_dir.as_deref())?;
            let samples = commands::load_samples(&paths)?;
            let opts = SweepOptions {
                repetitions: repetitions
                    .or(file.sweep.repetitions)
                    .unwrap_or(SweepOptions::default().repetitions),
                strategy: strategy.or(file.matching.strategy).unwrap_or_default(),
            };
            let stage = stage.or(file.sweep.stage).unwrap_or(Stage::Combined);
            commands::sweep_cmd(&samples, stage, opts, &output, out)
        }
        Command::Clones {
            input,
            min_threads,
            min_nloc,
            all_versions,
            output,
        } => commands::clones_cmd(
            ClonesRun {
                input: &input.input,
                format: input.format,
                min_threads: min_threads.or(file.clones.min_threads).unwrap_or(2),
                min_nloc: min_nloc.or(file.clones.min_nloc).unwrap_or(6),
                all_versions: all_versions || file.clones.all_versions.unwrap_or(false),
                output: output.as_deref(),
            },
            out,
        ),
        Command::Serve {
            input,
            ground_truth,
            host,
            port,
            matching,
        } => {
            let (config, strategy) = matching.or(file.matching).resolve()?;
            let host = host.or(file.server.host).unwrap_or_else(|| "127.0.0.1".into());
            let port = port.or(file.server.port).unwrap_or(8080);
            let addr: SocketAddr = format!("{host}:{port}")
                .parse()
                .map_err(|_| CliError::Usage(format!("invalid address {host}:{port}")))?;
            let corpus = commands::load_corpus(&input.input, input.format)?;
            let store = server::Store::open(corpus, &ground_truth, config, strategy).map_err(CliError::Data)?;
            serve(addr, store, out)
        }
    }
}

fn serve(addr: SocketAddr, store: server::Store, out: &mut dyn Write) -> Result<(), CliError> {
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| CliError::Internal(format!("cannot bind {addr}: {e}")))?;
        let local = listener.local_addr().map_err(|e| CliError::Internal(e.to_string()))?;
        writeln!(out, "listening on http://{local}").map_err(|e| CliError::Internal(e.to_string()))?;
        out.flush().map_err(|e| CliError::Internal(e.to_string()))?;
        axum::serve(listener, server::router(store))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| CliError::Internal(e.to_string()))
    })
}
