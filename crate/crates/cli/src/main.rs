//! `spade`: robustness scores for a black-box mapping from paired samples.

mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Context;
use config::RunConfig;
use error::CliError;

#[derive(Parser)]
#[command(name = "spade", version, about)]
/// Builds kNN graphs over input and output samples and scores how much
/// the mapping between them distorts distances.
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    config: RunConfig,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Build a kNN graph and write it as SPGR
    Graph,
    /// Print the model score (and the Riemannian distance with --m)
    Score,
    /// Per-node scores as `node_id,score`
    NodeScores,
    /// Per-edge scores of the input graph as `p,q,score`
    EdgeScores,
    /// Weighted spectral coordinates per node
    Embed,
    /// Distance distortion of listed pairs, or top-scored versus random edges
    Dmd,
    /// Most exposed nodes as `rank,node_id,score`
    Rank,
    /// Compare scalable results with dense references
    OracleCheck,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Graph => "graph",
            Command::Score => "score",
            Command::NodeScores => "node-scores",
            Command::EdgeScores => "edge-scores",
            Command::Embed => "embed",
            Command::Dmd => "dmd",
            Command::Rank => "rank",
            Command::OracleCheck => "oracle-check",
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let base = match &cli.config.config {
        Some(path) => RunConfig::from_json_file(path)?,
        None => RunConfig::default(),
    };
    let name = cli.command.name();
    let ctx = Context::new(name, base.overlay(&cli.config).resolve(name)?);
    match cli.command {
        Command::Graph => commands::graph(&ctx),
        Command::Score => commands::score(&ctx),
        Command::NodeScores => commands::node_scores(&ctx),
        Command::EdgeScores => commands::edge_scores(&ctx),
        Command::Embed => commands::embed_cmd(&ctx),
        Command::Dmd => commands::dmd(&ctx),
        Command::Rank => commands::rank(&ctx),
        Command::OracleCheck => commands::oracle_check(&ctx),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            ExitCode::FAILURE
        }
    }
}
