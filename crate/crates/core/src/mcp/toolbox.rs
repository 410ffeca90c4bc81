use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use parking_lot::RwLock;
use serde::Serialize;
use serde_json::{json, Value};

use super::session::{SessionContext, SessionStore};
use super::tool::ToolDescription;
use super::validate::validate_value;
use crate::error_code::ErrorCode;
use crate::task::TaskError;

/// Failure reported by a tool handler.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{message}")]
pub struct HandlerError {
    pub message: String,
    pub retryable: bool,
}

impl HandlerError {
    pub fn new(message: impl Into<String>) -> Self {
        HandlerError {
            message: message.into(),
            retryable: false,
        }
    }

    pub fn retryable(message: impl Into<String>) -> Self {
        HandlerError {
            message: message.into(),
            retryable: true,
        }
    }
}

/// What a handler sees besides its parameters: the caller's session, if any.
pub struct CallContext<'a> {
    session: Option<&'a mut SessionContext>,
}

impl CallContext<'_> {
    pub fn session_id(&self) -> Option<&str> {
        self.session.as_deref().map(|s| s.session_id.as_str())
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.session.as_deref().and_then(|s| s.get(key))
    }

    /// Writes a session variable; a no-op for session-less calls.
    pub fn set(&mut self, key: &str, value: Value) {
        if let Some(s) = self.session.as_deref_mut() {
            s.set(key, value);
        }
    }
}

type HandlerFn = dyn Fn(&Value, &mut CallContext<'_>) -> Result<Value, HandlerError> + Send + Sync;

#[derive(Clone)]
pub struct Handler(Arc<HandlerFn>);

impl Handler {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(&Value, &mut CallContext<'_>) -> Result<Value, HandlerError> + Send + Sync + 'static,
    {
        Handler(Arc::new(f))
    }
}

impl fmt::Debug for Handler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Handler")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToolCallResult {
    pub value: Value,
    pub function: String,
    pub duration_ms: f64,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ToolboxError {
    #[error("handlers do not match functions of {tool_id}: missing {missing:?}, undeclared {undeclared:?}")]
    HandlerMismatch {
        tool_id: String,
        missing: Vec<String>,
        undeclared: Vec<String>,
    },
}

struct BoundTool {
    description: ToolDescription,
    handlers: HashMap<String, Handler>,
}

/// Registered tools and their handlers, plus the session store handlers use.
#[derive(Default)]
pub struct Toolbox {
    tools: RwLock<BTreeMap<String, Arc<BoundTool>>>,
    sessions: SessionStore,
    strict_params: bool,
}

impl fmt::Debug for Toolbox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Toolbox")
            .field("tools", &self.tools.read().keys().collect::<Vec<_>>())
            .field("strict_params", &self.strict_params)
            .finish()
    }
}

impl Toolbox {
    pub fn new() -> Self {
        Self::default()
    }

    /// Undeclared parameter keys become `PARAM_INVALID` instead of warnings.
    pub fn strict() -> Self {
        Toolbox {
            strict_params: true,
            ..Self::default()
        }
    }

    pub fn register_tool(
        &self,
        description: ToolDescription,
        handlers: HashMap<String, Handler>,
    ) -> Result<(), ToolboxError> {
        let declared: BTreeSet<&str> = description.functions.iter().map(|f| f.name.as_str()).collect();
        let provided: BTreeSet<&str> = handlers.keys().map(String::as_str).collect();
        if declared != provided {
            return Err(ToolboxError::HandlerMismatch {
                tool_id: description.tool_id.clone(),
                missing: declared.difference(&provided).map(|s| s.to_string()).collect(),
                undeclared: provided.difference(&declared).map(|s| s.to_string()).collect(),
            });
        }
        let id = description.tool_id.clone();
        self.tools.write().insert(
            id,
            Arc::new(BoundTool {
                description,
                handlers,
            }),
        );
        Ok(())
    }

    pub fn description(&self, tool_id: &str) -> Option<ToolDescription> {
        self.tools.read().get(tool_id).map(|t| t.description.clone())
    }

    pub fn descriptions(&self) -> Vec<ToolDescription> {
        self.tools.read().values().map(|t| t.description.clone()).collect()
    }

    /// Lookup, parameter validation, execution and result conversion, in that
    /// order; the first failing stage decides the error code.
    pub fn call_function(
        &self,
        tool_id: &str,
        function: &str,
        params: &Value,
        session: Option<&str>,
    ) -> Result<ToolCallResult, TaskError> {
        let tool = self.tools.read().get(tool_id).cloned().ok_or_else(|| {
            TaskError::new(ErrorCode::ToolNotFound, format!("no tool {tool_id:?}"))
        })?;
        let spec = tool.description.function(function).ok_or_else(|| {
            TaskError::new(
                ErrorCode::FnNotFound,
                format!("tool {tool_id:?} has no function {function:?}"),
            )
        })?;

        let check = validate_value(&spec.params_schema, params, self.strict_params);
        if !check.is_valid() {
            return Err(TaskError::new(
                ErrorCode::ParamInvalid,
                format!("parameters for {tool_id}.{function} do not match the schema"),
            )
            .with_details(json!({ "violations": check.violations })));
        }

        let session_handle = session.map(|id| self.sessions.handle(id)).transpose()?;
        let handler = tool
            .handlers
            .get(function)
            .expect("registration guarantees a handler per function");

        let started = Instant::now();
        let outcome = {
            let mut guard = session_handle.as_ref().map(|h| h.lock());
            let mut ctx = CallContext {
                session: guard.as_deref_mut(),
            };
            catch_unwind(AssertUnwindSafe(|| (handler.0)(params, &mut ctx)))
        };
        let duration_ms = started.elapsed().as_secs_f64() * 1000.0;

        let raw = match outcome {
            Ok(Ok(value)) => value,
            Ok(Err(e)) => {
                return Err(TaskError::new(ErrorCode::ExecFailed, e.message).retryable(e.retryable))
            }
            Err(_) => {
                return Err(TaskError::new(
                    ErrorCode::ExecFailed,
                    format!("handler for {tool_id}.{function} panicked"),
                ))
            }
        };

        let value = spec.convert_result(raw);
        let check = validate_value(&spec.returns_schema, &value, false);
        if !check.is_valid() {
            return Err(TaskError::new(
                ErrorCode::ExecFailed,
                format!("result of {tool_id}.{function} does not match returns_schema"),
            )
            .with_details(json!({ "detail": "RESULT_SCHEMA", "violations": check.violations })));
        }

        Ok(ToolCallResult {
            value,
            function: function.to_string(),
            duration_ms,
        })
    }

    pub fn open_session(&self) -> String {
        self.sessions.open()
    }

    pub fn update_context(&self, session_id: &str, key: &str, value: Value) -> Result<(), TaskError> {
        self.sessions.update(session_id, key, value)
    }

    pub fn read_context(&self, session_id: &str, key: &str) -> Result<Option<Value>, TaskError> {
        self.sessions.read(session_id, key)
    }

    pub fn close_session(&self, session_id: &str) -> Result<(), TaskError> {
        self.sessions.close(session_id)
    }

    pub fn sessions(&self) -> &SessionStore {
        &self.sessions
    }
}
