//! Specialized agents: each advertised capability is served by one tool function.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Duration;

use serde_json::{json, Value};

use crate::card::AgentCard;
use crate::error_code::ErrorCode;
use crate::message::{A2AMessage, JsonMap, MessageStatus};
use crate::mcp::Toolbox;
use crate::task::{Artifact, RetryPolicy, Task, TaskError, TaskState, TaskStore};
use crate::transport::Agent;

/// The tool function that serves a capability.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Binding {
    pub tool_id: String,
    pub function: String,
}

impl Binding {
    pub fn new(tool_id: &str, function: &str) -> Self {
        Binding {
            tool_id: tool_id.to_string(),
            function: function.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AgentError {
    #[error("agent {agent}: capability {capability:?} has no tool binding")]
    UnboundCapability { agent: String, capability: String },
    #[error("agent {agent}: capability {capability:?} is bound to missing tool function {tool_id}.{function}")]
    MissingTool {
        agent: String,
        capability: String,
        tool_id: String,
        function: String,
    },
}

/// Serves requests of the form `{"capability": .., "parameters": {..}}`,
/// optionally with `"session_id"`, by calling the bound tool function inside
/// a task.
pub struct ToolAgent {
    card: AgentCard,
    bindings: BTreeMap<String, Binding>,
    toolbox: Arc<Toolbox>,
    tasks: Arc<TaskStore>,
    retry: RetryPolicy,
}

impl std::fmt::Debug for ToolAgent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ToolAgent")
            .field("agent_id", &self.card.agent_id)
            .field("bindings", &self.bindings)
            .finish()
    }
}

impl ToolAgent {
    pub fn new(
        card: AgentCard,
        bindings: BTreeMap<String, Binding>,
        toolbox: Arc<Toolbox>,
        tasks: Arc<TaskStore>,
        retry: RetryPolicy,
    ) -> Result<Self, AgentError> {
        for cap in &card.capabilities {
            let b = bindings.get(&cap.name).ok_or_else(|| AgentError::UnboundCapability {
                agent: card.agent_id.clone(),
                capability: cap.name.clone(),
            })?;
            let exists = toolbox
                .description(&b.tool_id)
                .is_some_and(|d| d.function(&b.function).is_some());
            if !exists {
                return Err(AgentError::MissingTool {
                    agent: card.agent_id.clone(),
                    capability: cap.name.clone(),
                    tool_id: b.tool_id.clone(),
                    function: b.function.clone(),
                });
            }
        }
        Ok(ToolAgent {
            card,
            bindings,
            toolbox,
            tasks,
            retry,
        })
    }

    pub fn card(&self) -> &AgentCard {
        &self.card
    }

    fn serve(&self, request: &A2AMessage) -> Result<(String, Value), (Option<String>, TaskError)> {
        let capability = request
            .body
            .get("capability")
            .and_then(Value::as_str)
            .ok_or_else(|| {
                (
                    None,
                    TaskError::new(ErrorCode::SchemaError, "body.capability must be a string"),
                )
            })?;
        let binding = self.bindings.get(capability).filter(|_| self.card.has_capability(capability));
        let Some(binding) = binding else {
            return Err((
                None,
                TaskError::new(
                    ErrorCode::FnNotFound,
                    format!("agent {} has no capability {capability:?}", self.card.agent_id),
                ),
            ));
        };
        let params = request
            .body
            .get("parameters")
            .cloned()
            .unwrap_or_else(|| json!({}));
        let session = request.body.get("session_id").and_then(Value::as_str);

        let task_params = params.as_object().cloned().unwrap_or_default();
        let task = open_task(&self.tasks, request.header.task_id.as_deref(), capability, task_params)
            .map_err(|e| (None, e))?;
        let task_id = task.task_id;

        loop {
            match self
                .toolbox
                .call_function(&binding.tool_id, &binding.function, &params, session)
            {
                Ok(result) => {
                    self.tasks
                        .complete_task(&task_id, vec![Artifact::structured("result", result.value.clone())])
                        .map_err(|e| (Some(task_id.clone()), e.to_task_error()))?;
                    return Ok((task_id, result.value));
                }
                Err(error) => {
                    let task = self
                        .tasks
                        .fail_task(&task_id, error.clone(), &self.retry)
                        .map_err(|e| (Some(task_id.clone()), e.to_task_error()))?;
                    if task.state != TaskState::InProgress {
                        return Err((Some(task_id), error));
                    }
                    if let Some(delay) = task.retry_delay_ms {
                        std::thread::sleep(Duration::from_millis(delay));
                    }
                }
            }
        }
    }
}

impl Agent for ToolAgent {
    fn agent_id(&self) -> &str {
        &self.card.agent_id
    }

    fn handle(&self, request: &A2AMessage) -> A2AMessage {
        match self.serve(request) {
            Ok((task_id, result)) => {
                let mut body = JsonMap::new();
                body.insert("task_id".into(), Value::String(task_id.clone()));
                body.insert("result".into(), result);
                with_task_id(request.reply(MessageStatus::Processed, body), task_id)
            }
            Err((task_id, error)) => failure_reply(request, task_id, &error, JsonMap::new()),
        }
    }
}

/// Finds or creates the task a request refers to and moves it to `in_progress`.
///
/// A request without a task id gets a fresh task; an unseen id is adopted as
/// the new task's id; a known id must still be in `created`.
pub(crate) fn open_task(
    tasks: &TaskStore,
    requested: Option<&str>,
    task_type: &str,
    parameters: JsonMap,
) -> Result<Task, TaskError> {
    let created = match requested {
        None => tasks.create_task(task_type, parameters),
        Some(id) => match tasks.get(id) {
            Some(existing) => Ok(existing),
            None => tasks.create_task_with_id(id.to_string(), task_type, parameters),
        },
    }
    .map_err(|e| e.to_task_error())?;
    tasks
        .transition_task(&created.task_id, TaskState::InProgress)
        .map_err(|e| e.to_task_error())
}

pub(crate) fn with_task_id(mut reply: A2AMessage, task_id: String) -> A2AMessage {
    if reply.header.task_id.is_none() {
        reply.header.task_id = Some(task_id);
    }
    reply
}

/// A `failed` reply whose body carries `error` (and `task_id` when a task exists).
pub(crate) fn failure_reply(
    request: &A2AMessage,
    task_id: Option<String>,
    error: &TaskError,
    mut body: JsonMap,
) -> A2AMessage {
    body.insert("error".into(), serde_json::to_value(error).expect("TaskError serializes"));
    match task_id {
        Some(id) => {
            body.insert("task_id".into(), Value::String(id.clone()));
            with_task_id(request.reply(MessageStatus::Failed, body), id)
        }
        None => request.reply(MessageStatus::Failed, body),
    }
}

/// The error carried by a `failed` reply, if its body has a readable one.
pub fn reply_error(reply: &A2AMessage) -> Option<TaskError> {
    reply
        .body
        .get("error")
        .and_then(|e| serde_json::from_value(e.clone()).ok())
}
