use std::io::Write;

use agentmesh_core::orchestrator::ANSWER_QUERY;
use agentmesh_core::runtime::query_message;
use agentmesh_core::{MessageStatus, TaskError, TransportError};
use agentmesh_service::{serve, HttpClient, ServeError, ServiceConfig};
use serde_json::{json, Value};

use crate::{render, validate, Cli, Command, Inspect};

const SENDER: &str = "agentmesh-cli";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("request failed: {0}")]
    Failed(TaskError),
    #[error(transparent)]
    Serve(#[from] ServeError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Transport(TransportError::Remote { .. }) | CliError::Failed(_) => 4,
            CliError::Transport(_) => 3,
            CliError::Serve(ServeError::Config(_) | ServeError::Runtime(_)) => 1,
            CliError::Serve(_) => 3,
        }
    }

    /// Writes the error to stderr. Remote errors are printed as their error body.
    pub fn report(&self, json: bool) {
        let body = match self {
            CliError::Transport(TransportError::Remote { error, .. }) | CliError::Failed(error) => {
                Some(error_body(error))
            }
            _ => None,
        };
        let line = match (body, json) {
            (Some(b), _) => b.to_string(),
            (None, true) => json!({"error": self.to_string()}).to_string(),
            (None, false) => format!("error: {self}"),
        };
        eprintln!("{line}");
    }
}

fn error_body(error: &TaskError) -> Value {
    json!({
        "code": error.code,
        "message": error.message,
        "details": error.details.clone().unwrap_or(Value::Null),
    })
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Serve { config, bind } => cmd_serve(config, bind.as_deref(), cli.json),
        Command::Ask {
            query,
            budget,
            agent,
            task_id,
        } => cmd_ask(cli, query, *budget, agent.as_deref(), task_id.as_deref()),
        Command::Tasks { action } => cmd_tasks(cli, action.as_ref()),
        Command::Agents { action } => cmd_agents(cli, action.as_ref()),
        Command::Tools { action } => cmd_tools(cli, action.as_ref()),
        Command::Validate { kind, file, canonical } => {
            let outcome = validate::validate_file(*kind, file);
            print!("{}", validate::render(&outcome, cli.json, *canonical));
            if outcome.is_valid() {
                Ok(())
            } else {
                Err(CliError::Validation(format!("{} is not a valid {}", file.display(), outcome.kind)))
            }
        }
    }
}

fn client(cli: &Cli) -> Result<HttpClient, CliError> {
    Ok(HttpClient::new(&cli.endpoint, cli.token.clone())?)
}

fn print_json(value: &Value) {
    println!("{}", agentmesh_core::canonical::to_canonical_string(value));
}

fn cmd_serve(path: &std::path::Path, bind: Option<&str>, json: bool) -> Result<(), CliError> {
    let mut config = ServiceConfig::load(path).map_err(ServeError::from)?;
    if let Some(b) = bind {
        config.bind_address = b.to_string();
    }
    serve(&config, |addr| {
        let url = format!("http://{addr}");
        if json {
            println!("{}", json!({ "listening": url }));
        } else {
            println!("agentmesh listening on {url}");
        }
        let _ = std::io::stdout().flush();
        tracing::info!(%addr, "service ready");
    })?;
    Ok(())
}

fn cmd_ask(
    cli: &Cli,
    query: &str,
    budget: Option<usize>,
    agent: Option<&str>,
    task_id: Option<&str>,
) -> Result<(), CliError> {
    let http = client(cli)?;
    let recipient = match agent {
        Some(a) => a.to_string(),
        None => {
            let cards = http.discover(Some(ANSWER_QUERY))?;
            cards
                .get(0)
                .and_then(|c| c.get("agent_id"))
                .and_then(Value::as_str)
                .map(String::from)
                .ok_or_else(|| CliError::Usage(format!("no agent offers {ANSWER_QUERY}; pass --agent")))?
        }
    };
    let mut msg = query_message(SENDER, &recipient, query, budget).map_err(|e| CliError::Usage(e.to_string()))?;
    msg.header.task_id = task_id.map(String::from);
    let reply = http.send_message(&msg)?;
    let body = Value::Object(reply.body.clone());
    let document = body.get("response").cloned().unwrap_or(Value::Null);
    if cli.json {
        print_json(&document);
    } else {
        print!("{}", render::response_text(&document));
    }
    if reply.header.status == MessageStatus::Failed {
        let error = body
            .get("error")
            .and_then(|e| serde_json::from_value::<TaskError>(e.clone()).ok())
            .unwrap_or_else(|| TaskError::new(agentmesh_core::ErrorCode::Internal, "request failed"));
        return Err(CliError::Failed(error));
    }
    Ok(())
}

fn cmd_tasks(cli: &Cli, action: Option<&Inspect>) -> Result<(), CliError> {
    let http = client(cli)?;
    match action.unwrap_or(&Inspect::List) {
        Inspect::List => {
            let tasks = http.tasks()?;
            if cli.json {
                print_json(&tasks);
            } else {
                print!("{}", render::task_table(&tasks));
            }
        }
        Inspect::Show { id } => {
            let task = http.task(id)?;
            if cli.json {
                print_json(&task);
            } else {
                print!("{}", render::task_detail(&task));
            }
        }
    }
    Ok(())
}

fn cmd_agents(cli: &Cli, action: Option<&Inspect>) -> Result<(), CliError> {
    let http = client(cli)?;
    match action.unwrap_or(&Inspect::List) {
        Inspect::List => {
            let cards = http.discover(None)?;
            if cli.json {
                print_json(&cards);
            } else {
                print!("{}", render::agent_table(&cards));
            }
        }
        Inspect::Show { id } => {
            // served canonical; printed unchanged in both modes
            println!("{}", http.card_text(id)?);
        }
    }
    Ok(())
}

fn cmd_tools(cli: &Cli, action: Option<&Inspect>) -> Result<(), CliError> {
    let http = client(cli)?;
    match action.unwrap_or(&Inspect::List) {
        Inspect::List => {
            let tools = http.tools()?;
            if cli.json {
                print_json(&tools);
            } else {
                print!("{}", render::tool_table(&tools));
            }
        }
        Inspect::Show { id } => {
            let tool = http.tool(id)?;
            if cli.json {
                print_json(&tool);
            } else {
                print!("{}", render::tool_detail(&tool));
            }
        }
    }
    Ok(())
}
