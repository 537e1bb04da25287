//! `monodecomp`: decompose a monolith's entities into candidate microservices
//! and evaluate the result.
//!
//! Exit status is 0 on success, 1 when the input is rejected by the domain
//! rules and 2 for usage or I/O problems.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use monodecomp::mojo::{AlignStrategy, ReferenceSide};
use monodecomp::Weights;

use config::{PipelineFlags, SweepFlags};

#[derive(Debug, Parser)]
#[command(name = "monodecomp", version, about = "Monolith decomposition and evaluation")]
struct Cli {
    /// TOML file with pipeline settings; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (falls back to the config file, then $MONODECOMP_OUT_DIR).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a trace file and print the findings.
    Validate { traces: PathBuf },
    /// Cluster the entities and cut the dendrogram into N clusters.
    Decompose {
        traces: PathBuf,
        /// Percent weights access,write,read,sequence summing to 100.
        #[arg(long, value_parser = parse_weights)]
        weights: Weights,
        /// Number of clusters.
        #[arg(long)]
        clusters: usize,
        #[command(flatten)]
        pipeline: PipelineFlags,
    },
    /// Redesign complexity of a decomposition.
    Complexity {
        traces: PathBuf,
        decomposition: PathBuf,
        #[command(flatten)]
        pipeline: PipelineFlags,
    },
    /// MoJoFM of one decomposition against another.
    Mojofm {
        decomposition: PathBuf,
        reference: PathBuf,
        /// How to reconcile differing entity sets.
        #[arg(long)]
        strategy: Option<AlignStrategy>,
        /// Which file is the reference: first or second.
        #[arg(long)]
        reference_side: Option<ReferenceSide>,
    },
    /// Run the weight and cluster-count sweep with regression.
    Sweep {
        traces: PathBuf,
        /// Expert decomposition to compare the best decompositions against.
        #[arg(long)]
        reference: Option<PathBuf>,
        /// How to reconcile entity sets with the reference.
        #[arg(long)]
        align_strategy: Option<AlignStrategy>,
        #[command(flatten)]
        pipeline: PipelineFlags,
        #[command(flatten)]
        sweep: SweepFlags,
    },
    /// Write a seeded synthetic trace file.
    Generate {
        #[command(flatten)]
        params: commands::GenArgs,
        /// Destination file; stdout when absent.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

fn parse_weights(s: &str) -> Result<Weights, String> {
    let parts: Vec<u32> = s
        .split(',')
        .map(|p| p.trim().parse::<u32>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [a, w, r, q] => Ok(Weights::new(a, w, r, q)),
        _ => Err(format!("expected four comma-separated weights, got {}", parts.len())),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(code) => code,
        Err(err) => {
            let domain = err.chain().find_map(|e| e.downcast_ref::<monodecomp::Error>());
            match domain {
                Some(e) if !matches!(e, monodecomp::Error::Io(_)) => {
                    eprintln!("error [{}]: {err:#}", e.code());
                    ExitCode::from(1)
                }
                _ => {
                    eprintln!("error: {err:#}");
                    ExitCode::from(2)
                }
            }
        }
    }
}
