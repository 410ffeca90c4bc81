//! Agent hosting and message transport.
//!
//! [`AgentDirectory::dispatch`] holds the receive-side semantics (validation,
//! recipient lookup, handling). The HTTP service and [`InProcessTransport`]
//! both go through it, so the two differ only in how bytes move.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Weak};

use parking_lot::RwLock;
use serde_json::json;

use crate::error_code::ErrorCode;
use crate::message::{message_from_wire, validate_message, A2AMessage};
use crate::task::TaskError;

/// A message handler addressed by agent id.
pub trait Agent: Send + Sync {
    fn agent_id(&self) -> &str;

    /// Produces the reply to `request`. Failures are reported in the reply
    /// (status `failed`), not as an `Err`.
    fn handle(&self, request: &A2AMessage) -> A2AMessage;
}

#[derive(Default)]
pub struct AgentDirectory {
    agents: RwLock<BTreeMap<String, Arc<dyn Agent>>>,
}

impl fmt::Debug for AgentDirectory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AgentDirectory").field("agents", &self.ids()).finish()
    }
}

impl AgentDirectory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds or replaces the agent under its id.
    pub fn add(&self, agent: Arc<dyn Agent>) {
        self.agents.write().insert(agent.agent_id().to_string(), agent);
    }

    pub fn get(&self, agent_id: &str) -> Option<Arc<dyn Agent>> {
        self.agents.read().get(agent_id).cloned()
    }

    pub fn ids(&self) -> Vec<String> {
        self.agents.read().keys().cloned().collect()
    }

    pub fn dispatch(&self, request: &A2AMessage) -> Result<A2AMessage, TaskError> {
        let report = validate_message(request);
        if !report.is_valid() {
            return Err(TaskError::new(ErrorCode::SchemaError, "message failed validation")
                .with_details(json!({ "violations": report.violations })));
        }
        let recipient = &request.header.recipient_agent_id;
        let agent = self.get(recipient).ok_or_else(|| {
            TaskError::new(ErrorCode::UnknownAgent, format!("no agent {recipient:?}"))
        })?;
        Ok(agent.handle(request))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TransportError {
    #[error("transport failure: {0}")]
    Network(String),
    #[error("remote error (HTTP {status}): {error}")]
    Remote { status: u16, error: TaskError },
    #[error("unreadable response: {0}")]
    InvalidResponse(String),
}

impl TransportError {
    pub fn code(&self) -> ErrorCode {
        match self {
            TransportError::Network(_) => ErrorCode::Internal,
            TransportError::Remote { error, .. } => error.code,
            TransportError::InvalidResponse(_) => ErrorCode::ParseError,
        }
    }

    /// The error as a task error record, for callers that store it.
    pub fn to_task_error(&self) -> TaskError {
        match self {
            TransportError::Remote { error, .. } => error.clone(),
            other => TaskError::new(other.code(), other.to_string()),
        }
    }
}

pub trait Transport: Send + Sync {
    fn send(&self, request: &A2AMessage) -> Result<A2AMessage, TransportError>;
}

/// Delivers messages to agents in the same process. Messages still pass
/// through their wire encoding in both directions.
#[derive(Debug, Clone)]
pub struct InProcessTransport {
    directory: Weak<AgentDirectory>,
}

impl InProcessTransport {
    pub fn new(directory: &Arc<AgentDirectory>) -> Self {
        InProcessTransport {
            directory: Arc::downgrade(directory),
        }
    }
}

impl Transport for InProcessTransport {
    fn send(&self, request: &A2AMessage) -> Result<A2AMessage, TransportError> {
        let directory = self
            .directory
            .upgrade()
            .ok_or_else(|| TransportError::Network("agent directory is gone".into()))?;
        let received = message_from_wire(&request.to_wire()).map_err(|e| {
            let error = TaskError::new(ErrorCode::ParseError, e.to_string());
            TransportError::Remote {
                status: error.code.http_status(),
                error,
            }
        })?;
        match directory.dispatch(&received) {
            Ok(reply) => message_from_wire(&reply.to_wire())
                .map_err(|e| TransportError::InvalidResponse(e.to_string())),
            Err(error) => Err(TransportError::Remote {
                status: error.code.http_status(),
                error,
            }),
        }
    }
}
