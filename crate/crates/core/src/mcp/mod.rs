//! Schema-described tools: descriptions, parameter validation, dispatch to
//! handlers and per-session context.

mod schema;
mod session;
mod tool;
mod toolbox;
mod validate;

pub use schema::{is_integral, literal_eq, type_matches, SchemaNode};
pub use session::{SessionContext, SessionStore};
pub use tool::{
    parse_tool_description, parse_tool_description_with_warnings, FunctionSpec, ToolDescription,
    ToolExample,
};
pub use toolbox::{CallContext, Handler, HandlerError, ToolCallResult, Toolbox, ToolboxError};
pub use validate::{validate_params, validate_value, ValidationOutcome, Violation, ViolationCode};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ToolError {
    #[error("malformed JSON: {0}")]
    Parse(String),
    #[error("tool schema error at {path}: {message}")]
    Schema { path: String, message: String },
}

impl ToolError {
    pub(crate) fn schema(path: &str, message: impl Into<String>) -> Self {
        ToolError::Schema {
            path: path.to_string(),
            message: message.into(),
        }
    }
}
