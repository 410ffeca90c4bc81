//! The orchestrator as an agent, and the port its nodes use to reach other agents.

use std::sync::Arc;

use serde_json::{json, Map, Value};

use super::{build_workflow, OrchestratorError, TickerAliasTable};
use crate::agent::{failure_reply, open_task, reply_error, with_task_id};
use crate::card::AgentCard;
use crate::error_code::ErrorCode;
use crate::message::{make_message, A2AMessage, MessageStatus};
use crate::registry::Registry;
use crate::task::{Artifact, RetryPolicy, TaskError, TaskStore};
use crate::transport::{Agent, Transport};
use crate::workflow::{
    ExecutionTrace, HopRecord, WorkflowError, WorkflowGraph, WorkflowState, DEFAULT_BUDGET,
};

/// Capability that marks a card as the orchestrator's.
pub const ANSWER_QUERY: &str = "answer_query";

/// How workflow nodes obtain a capability's result.
pub trait CapabilityPort: Send + Sync {
    fn invoke(&self, capability: &str, params: Value) -> (Result<Value, TaskError>, Option<HopRecord>);
}

/// Finds a provider through the registry and asks it over a transport.
pub struct A2aPort {
    self_id: String,
    registry: Arc<Registry>,
    transport: Arc<dyn Transport>,
}

impl A2aPort {
    pub fn new(self_id: &str, registry: Arc<Registry>, transport: Arc<dyn Transport>) -> Self {
        A2aPort {
            self_id: self_id.to_string(),
            registry,
            transport,
        }
    }
}

impl CapabilityPort for A2aPort {
    fn invoke(&self, capability: &str, params: Value) -> (Result<Value, TaskError>, Option<HopRecord>) {
        let provider = self
            .registry
            .discover(capability)
            .into_iter()
            .find(|c| c.agent_id != self.self_id);
        let Some(provider) = provider else {
            return (
                Err(TaskError::new(
                    ErrorCode::UnknownAgent,
                    format!("no registered agent offers {capability:?}"),
                )),
                None,
            );
        };
        let mut body = Map::new();
        body.insert("capability".into(), json!(capability));
        body.insert("parameters".into(), params);
        let request = match make_message(&self.self_id, &provider.agent_id, body, vec![], None) {
            Ok(m) => m,
            Err(e) => return (Err(TaskError::new(ErrorCode::Internal, e.to_string())), None),
        };
        let mut hop = HopRecord {
            recipient: provider.agent_id.clone(),
            capability: capability.to_string(),
            task_id: None,
            request_status: request.header.status,
            response_status: MessageStatus::Failed,
        };
        let reply = match self.transport.send(&request) {
            Ok(r) => r,
            Err(e) => return (Err(e.to_task_error()), Some(hop)),
        };
        hop.task_id = reply.header.task_id.clone();
        hop.response_status = reply.header.status;
        let result = match reply.header.status {
            MessageStatus::Processed => reply.body.get("result").cloned().ok_or_else(|| {
                TaskError::new(ErrorCode::Internal, "reply carries no result")
            }),
            _ => Err(reply_error(&reply).unwrap_or_else(|| {
                TaskError::new(ErrorCode::Internal, "failed reply carries no error")
            })),
        };
        (result, Some(hop))
    }
}

/// Answers `{"query": .., "budget"?: ..}` requests by running the workflow
/// inside a task of type `answer_query`.
pub struct OrchestratorAgent {
    card: AgentCard,
    graph: WorkflowGraph<WorkflowState>,
    tasks: Arc<TaskStore>,
}

impl std::fmt::Debug for OrchestratorAgent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OrchestratorAgent")
            .field("agent_id", &self.card.agent_id)
            .finish()
    }
}

impl OrchestratorAgent {
    pub fn new(
        card: AgentCard,
        port: Arc<dyn CapabilityPort>,
        aliases: Arc<TickerAliasTable>,
        tasks: Arc<TaskStore>,
    ) -> Result<Self, OrchestratorError> {
        Ok(OrchestratorAgent {
            card,
            graph: build_workflow(port, aliases)?,
            tasks,
        })
    }

    pub fn card(&self) -> &AgentCard {
        &self.card
    }

    pub fn graph(&self) -> &WorkflowGraph<WorkflowState> {
        &self.graph
    }

    /// Runs the workflow for one query without creating a task.
    pub fn run(&self, query: &str, budget: usize) -> Result<(WorkflowState, ExecutionTrace), WorkflowError> {
        self.graph.run(WorkflowState::new(query), budget)
    }
}

fn workflow_error(e: &WorkflowError) -> TaskError {
    let code = match e {
        WorkflowError::BudgetExceeded { .. } => ErrorCode::BudgetExceeded,
        WorkflowError::NodeFailure { .. } => ErrorCode::NodeFailure,
        _ => ErrorCode::Internal,
    };
    TaskError::new(code, e.to_string())
}

fn route_value(trace: Option<&ExecutionTrace>) -> Value {
    json!(trace.map(|t| t.nodes()).unwrap_or_default())
}

impl Agent for OrchestratorAgent {
    fn agent_id(&self) -> &str {
        &self.card.agent_id
    }

    fn handle(&self, request: &A2AMessage) -> A2AMessage {
        let Some(query) = request.body.get("query").and_then(Value::as_str) else {
            let e = TaskError::new(ErrorCode::SchemaError, "body.query must be a string");
            return failure_reply(request, None, &e, Map::new());
        };
        let budget = match request.body.get("budget") {
            None | Some(Value::Null) => DEFAULT_BUDGET,
            Some(v) => match v.as_u64() {
                Some(b) => b as usize,
                None => {
                    let e = TaskError::new(ErrorCode::SchemaError, "body.budget must be a non-negative integer");
                    return failure_reply(request, None, &e, Map::new());
                }
            },
        };
        let mut params = Map::new();
        params.insert("query".into(), json!(query));
        let task = match open_task(&self.tasks, request.header.task_id.as_deref(), ANSWER_QUERY, params) {
            Ok(t) => t,
            Err(e) => return failure_reply(request, None, &e, Map::new()),
        };
        let task_id = task.task_id;
        let final_policy = RetryPolicy::default();

        match self.run(query, budget) {
            Ok((state, trace)) => {
                let response = state.response.clone().unwrap_or(Value::Null);
                let mut body = Map::new();
                body.insert("response".into(), response.clone());
                body.insert("route".into(), route_value(Some(&trace)));
                if let Some(first) = state.errors.first() {
                    let _ = self.tasks.fail_task(&task_id, first.clone().retryable(false), &final_policy);
                    return failure_reply(request, Some(task_id), first, body);
                }
                if let Err(e) = self
                    .tasks
                    .complete_task(&task_id, vec![Artifact::structured("response", response)])
                {
                    return failure_reply(request, Some(task_id), &e.to_task_error(), body);
                }
                body.insert("task_id".into(), json!(task_id));
                with_task_id(request.reply(MessageStatus::Processed, body), task_id)
            }
            Err(e) => {
                let error = workflow_error(&e);
                let _ = self.tasks.fail_task(&task_id, error.clone(), &final_policy);
                let mut body = Map::new();
                body.insert("route".into(), route_value(e.trace()));
                failure_reply(request, Some(task_id), &error, body)
            }
        }
    }
}
