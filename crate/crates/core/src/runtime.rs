//! Assembles registry, tools, tasks and agents from card, tool and fixture files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde_json::{json, Map};

use crate::agent::{AgentError, Binding, ToolAgent};
use crate::card::{parse_agent_card, AgentCard, CardError};
use crate::message::{make_message, A2AMessage, MessageError};
use crate::mcp::{parse_tool_description, ToolError, Toolbox, ToolboxError};
use crate::orchestrator::{
    fixture_handlers, A2aPort, FixtureSet, OrchestratorAgent, OrchestratorError, TickerAliasTable,
    ANSWER_QUERY,
};
use crate::registry::{Registry, RegistryError};
use crate::task::{RetryPolicy, TaskStore, TaskStoreError};
use crate::transport::{AgentDirectory, InProcessTransport};

/// Capability name, tool id and function name of every built-in binding.
pub const CAPABILITY_BINDINGS: [(&str, &str, &str); 5] = [
    ("get_stock_price", "stock_data", "get_stock_price"),
    ("get_news", "web_scraper", "get_news"),
    ("get_company_info", "financial_data", "get_company_info"),
    ("get_financials", "financial_data", "get_financials"),
    ("analyze_company", "analysis_engine", "analyze_company"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct RuntimeConfig {
    pub card_dir: PathBuf,
    pub tool_dir: PathBuf,
    pub fixture_path: PathBuf,
    pub alias_path: PathBuf,
    pub task_log: Option<PathBuf>,
    pub retry: RetryPolicy,
    pub strict_params: bool,
}

impl RuntimeConfig {
    /// Standard layout under one directory: `cards/`, `tools/`,
    /// `fixtures/stocks.json`, `fixtures/aliases.json`.
    pub fn from_data_dir(dir: &Path) -> Self {
        RuntimeConfig {
            card_dir: dir.join("cards"),
            tool_dir: dir.join("tools"),
            fixture_path: dir.join("fixtures/stocks.json"),
            alias_path: dir.join("fixtures/aliases.json"),
            task_log: None,
            retry: RetryPolicy::default(),
            strict_params: false,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RuntimeError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Card { path: PathBuf, source: CardError },
    #[error("{path}: {source}")]
    Tool { path: PathBuf, source: ToolError },
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error(transparent)]
    Toolbox(#[from] ToolboxError),
    #[error(transparent)]
    Orchestrator(#[from] OrchestratorError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    TaskStore(#[from] TaskStoreError),
    #[error("no handlers available for tool {0:?}")]
    NoHandlers(String),
    #[error("more than one card offers {ANSWER_QUERY}: {0} and {1}")]
    DuplicateOrchestrator(String, String),
}

/// `*.json` files in `dir`, sorted by name.
pub fn json_files(dir: &Path) -> Result<Vec<PathBuf>, RuntimeError> {
    let io = |source| RuntimeError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "json") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn read(path: &Path) -> Result<String, RuntimeError> {
    std::fs::read_to_string(path).map_err(|source| RuntimeError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub struct Runtime {
    pub registry: Arc<Registry>,
    pub tasks: Arc<TaskStore>,
    pub toolbox: Arc<Toolbox>,
    pub directory: Arc<AgentDirectory>,
    orchestrator: Option<Arc<OrchestratorAgent>>,
}

impl std::fmt::Debug for Runtime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Runtime")
            .field("agents", &self.directory.ids())
            .field("tasks", &self.tasks.len())
            .finish()
    }
}

impl Runtime {
    pub fn load(config: &RuntimeConfig) -> Result<Self, RuntimeError> {
        let fixtures = Arc::new(FixtureSet::load(&config.fixture_path)?);
        let aliases = Arc::new(TickerAliasTable::load(&config.alias_path)?);

        let toolbox = Arc::new(if config.strict_params {
            Toolbox::strict()
        } else {
            Toolbox::new()
        });
        for path in json_files(&config.tool_dir)? {
            let desc = parse_tool_description(&read(&path)?)
                .map_err(|source| RuntimeError::Tool { path: path.clone(), source })?;
            let handlers = fixture_handlers(&desc.tool_id, Arc::clone(&fixtures))
                .ok_or_else(|| RuntimeError::NoHandlers(desc.tool_id.clone()))?;
            toolbox.register_tool(desc, handlers)?;
        }

        let mut cards: Vec<AgentCard> = Vec::new();
        for path in json_files(&config.card_dir)? {
            let card = parse_agent_card(&read(&path)?)
                .map_err(|source| RuntimeError::Card { path: path.clone(), source })?;
            cards.push(card);
        }

        let tasks = Arc::new(match &config.task_log {
            Some(p) => TaskStore::with_event_log(p)?,
            None => TaskStore::new(),
        });
        let registry = Arc::new(Registry::new());
        let directory = Arc::new(AgentDirectory::new());
        let bindings: BTreeMap<String, Binding> = CAPABILITY_BINDINGS
            .iter()
            .map(|(cap, tool, func)| (cap.to_string(), Binding::new(tool, func)))
            .collect();

        let mut orchestrator: Option<Arc<OrchestratorAgent>> = None;
        for card in cards {
            registry.register(card.clone())?;
            if card.has_capability(ANSWER_QUERY) {
                if let Some(prev) = &orchestrator {
                    return Err(RuntimeError::DuplicateOrchestrator(
                        prev.card().agent_id.clone(),
                        card.agent_id,
                    ));
                }
                let port = A2aPort::new(
                    &card.agent_id,
                    Arc::clone(&registry),
                    Arc::new(InProcessTransport::new(&directory)),
                );
                let agent = Arc::new(OrchestratorAgent::new(
                    card,
                    Arc::new(port),
                    Arc::clone(&aliases),
                    Arc::clone(&tasks),
                )?);
                directory.add(agent.clone());
                orchestrator = Some(agent);
            } else {
                let agent = ToolAgent::new(
                    card,
                    bindings.clone(),
                    Arc::clone(&toolbox),
                    Arc::clone(&tasks),
                    config.retry,
                )?;
                directory.add(Arc::new(agent));
            }
        }

        Ok(Runtime {
            registry,
            tasks,
            toolbox,
            directory,
            orchestrator,
        })
    }

    pub fn transport(&self) -> InProcessTransport {
        InProcessTransport::new(&self.directory)
    }

    pub fn orchestrator(&self) -> Option<&Arc<OrchestratorAgent>> {
        self.orchestrator.as_ref()
    }

    /// A query message from `sender` to the orchestrator.
    pub fn query_message(&self, sender: &str, query: &str, budget: Option<usize>) -> Result<A2AMessage, MessageError> {
        let recipient = self
            .orchestrator
            .as_ref()
            .map(|o| o.card().agent_id.as_str())
            .unwrap_or_default();
        query_message(sender, recipient, query, budget)
    }
}

/// Request body shape the orchestrator agent accepts.
pub fn query_message(
    sender: &str,
    orchestrator_id: &str,
    query: &str,
    budget: Option<usize>,
) -> Result<A2AMessage, MessageError> {
    let mut body = Map::new();
    body.insert("query".into(), json!(query));
    if let Some(b) = budget {
        body.insert("budget".into(), json!(b));
    }
    make_message(sender, orchestrator_id, body, vec![], None)
}
