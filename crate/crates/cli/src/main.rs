//! `mtx`: per-stage pipeline driver (synth, distance, tree, segment, mesh)
//! plus the API server entry point.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mtx_core::io::SyntheticKind;
use mtx_core::segmentation::QueryMethod;
use mtx_core::MetricKind;

use commands::CliError;

#[derive(Debug, Parser)]
#[command(name = "mtx", version, about = "Trait-induced merge trees for multi-field volumes")]
struct Cli {
    /// Worker threads for parallel stages; 0 uses every core.
    #[arg(long, global = true, env = "MTX_THREADS", default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print grid, fields and value ranges of a dataset.
    Info {
        dataset: PathBuf,
        /// Derived quantity spec (JSON object or array) to evaluate first.
        #[arg(long)]
        derived: Option<PathBuf>,
    },
    /// Compute the distance field of a trait and store it as a one-field dataset.
    Distance {
        dataset: PathBuf,
        #[arg(long = "trait")]
        trait_file: PathBuf,
        #[arg(long)]
        derived: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Build, simplify and export the merge tree of a scalar field.
    Tree {
        field: PathBuf,
        #[arg(long, default_value = "persistence")]
        metric: MetricKind,
        #[arg(long, default_value_t = 0.0)]
        threshold: f64,
        /// Field to use when the dataset holds more than one.
        #[arg(long)]
        name: Option<String>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Segment a scalar field and write raw labels plus a legend.
    Segment {
        field: PathBuf,
        #[arg(long, default_value = "bd")]
        method: QueryMethod,
        /// Cut level, required by `subtrees`.
        #[arg(long)]
        cut: Option<f64>,
        #[arg(long, default_value = "persistence")]
        metric: MetricKind,
        #[arg(long, default_value_t = 0.0)]
        threshold: f64,
        #[arg(long)]
        name: Option<String>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Extract the level set at `--level` as an OBJ mesh.
    Mesh {
        field: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        level: f64,
        #[arg(long)]
        name: Option<String>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Write one of the synthetic datasets.
    Synth {
        #[arg(long)]
        kind: SyntheticKind,
        /// Grid size as `n` or `nx,ny,nz`.
        #[arg(long, default_value = "32", value_parser = parse_dims)]
        dims: [usize; 3],
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Serve the HTTP API (and optionally a UI directory) for a dataset.
    Serve {
        dataset: PathBuf,
        #[arg(long)]
        derived: Option<PathBuf>,
        #[arg(long, default_value_t = mtx_server::DEFAULT_PORT, value_parser = parse_port)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        /// Directory of static files served at `/`.
        #[arg(long)]
        ui: Option<PathBuf>,
    },
}

fn parse_dims(s: &str) -> Result<[usize; 3], String> {
    let parts: Vec<usize> = s
        .split([',', 'x'])
        .map(|p| p.trim().parse::<usize>().map_err(|_| format!("bad grid size '{s}'")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [n] => Ok([n; 3]),
        [x, y, z] => Ok([x, y, z]),
        _ => Err(format!("expected n or nx,ny,nz, got '{s}'")),
    }
}

fn parse_port(s: &str) -> Result<u16, String> {
    match s.parse::<u16>() {
        Ok(p) if p > 0 => Ok(p),
        _ => Err(format!("port must be in 1..=65535, got '{s}'")),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if !mtx_core::par::set_global_workers(cli.threads) {
        eprintln!("warning: worker pool already running, --threads ignored");
    }
    match cli.command {
        Command::Info { dataset, derived } => commands::info(&dataset, derived.as_deref()),
        Command::Distance { dataset, trait_file, derived, output } => {
            commands::distance(&dataset, &trait_file, derived.as_deref(), &output)
        }
        Command::Tree { field, metric, threshold, name, output } => {
            commands::tree(&field, name.as_deref(), metric, threshold, &output)
        }
        Command::Segment { field, method, cut, metric, threshold, name, output } => {
            let query = commands::query(method, metric, threshold, cut)?;
            commands::segment(&field, name.as_deref(), query, &output)
        }
        Command::Mesh { field, level, name, output } => {
            commands::mesh(&field, name.as_deref(), level, &output)
        }
        Command::Synth { kind, dims, seed, output } => commands::synth(kind, dims, seed, &output),
        Command::Serve { dataset, derived, port, host, ui } => {
            commands::serve(&dataset, derived.as_deref(), (host, port).into(), ui)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
