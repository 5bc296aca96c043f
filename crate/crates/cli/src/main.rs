//! `donut`: the administrative command line.
//!
//! Exit codes: 0 ok, 1 validation findings, 2 usage error, 3 runtime failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;

#[derive(Parser)]
#[command(name = "donut", version, about = "Bibliographic corpus search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// One-way sync from a source directory of JSON pages into the corpus.
    Import {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Build the index file from a corpus.
    Index {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a query against an index file.
    Search {
        #[arg(long)]
        index: PathBuf,
        query: String,
        #[arg(long)]
        json: bool,
    },
    /// Report entries that break the tagging rule.
    Validate {
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Corpus statistics.
    Stats {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Outcome of a command, mapped onto the exit-code contract.
pub enum Status {
    Ok,
    Findings,
    Usage(String),
    Failure(String),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap exits 0 for --help/--version and 2 for usage errors
            e.exit();
        }
    };
    let status = match cli.command {
        Command::Import { source, corpus } => commands::import(&source, &corpus),
        Command::Index { corpus, out } => commands::index(&corpus, &out),
        Command::Search { index, query, json } => commands::search(&index, &query, json),
        Command::Validate { corpus } => commands::validate(&corpus),
        Command::Stats { corpus, format } => commands::stats(&corpus, matches!(format, Format::Json)),
        Command::Serve { config } => commands::serve(&config),
    };
    match status {
        Status::Ok => ExitCode::SUCCESS,
        Status::Findings => ExitCode::from(1),
        Status::Usage(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Status::Failure(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
