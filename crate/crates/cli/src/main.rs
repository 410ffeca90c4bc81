//! `agentmesh` command-line entry point.

mod commands;
mod render;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use tracing_subscriber::EnvFilter;

pub const DEFAULT_ENDPOINT: &str = "http://127.0.0.1:8080";

#[derive(Debug, Parser)]
#[command(name = "agentmesh", version, about = "Agent mesh service and remote client")]
pub struct Cli {
    /// Service base URL
    #[arg(long, global = true, env = "AGENTMESH_ENDPOINT", default_value = DEFAULT_ENDPOINT)]
    pub endpoint: String,
    /// Bearer token
    #[arg(long, global = true, env = "AGENTMESH_TOKEN", hide_env_values = true)]
    pub token: Option<String>,
    /// Print every result as a single JSON document
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the HTTP service until interrupted
    Serve {
        #[arg(long)]
        config: PathBuf,
        /// Override the configured bind address
        #[arg(long)]
        bind: Option<String>,
    },
    /// Send a natural-language query to the orchestrator
    Ask {
        query: String,
        /// Workflow step budget
        #[arg(long)]
        budget: Option<usize>,
        /// Recipient agent id; discovered by capability when omitted
        #[arg(long)]
        agent: Option<String>,
        /// Task id to attach to the request
        #[arg(long)]
        task_id: Option<String>,
    },
    /// Inspect tasks
    Tasks {
        #[command(subcommand)]
        action: Option<Inspect>,
    },
    /// Inspect registered agents
    Agents {
        #[command(subcommand)]
        action: Option<Inspect>,
    },
    /// Inspect MCP tools
    Tools {
        #[command(subcommand)]
        action: Option<Inspect>,
    },
    /// Check a card, tool description or message file
    Validate {
        kind: FileKind,
        file: PathBuf,
        /// On success print only the canonical JSON form
        #[arg(long)]
        canonical: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum Inspect {
    List,
    Show { id: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FileKind {
    Card,
    Tool,
    Message,
}

fn init_tracing(serving: bool) {
    let default = if serving { "info" } else { "warn" };
    let filter = EnvFilter::try_from_env("AGENTMESH_LOG").unwrap_or_else(|_| EnvFilter::new(default));
    let _ = tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .try_init();
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_tracing(matches!(cli.command, Command::Serve { .. }));
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            err.report(cli.json);
            ExitCode::from(err.exit_code())
        }
    }
}
