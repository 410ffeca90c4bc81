//! Error codes shared by the task manager, the tool layer and the wire service.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ErrorCode {
    ToolNotFound,
    FnNotFound,
    ParamInvalid,
    ExecFailed,
    Timeout,
    AuthFailed,
    UnknownTask,
    IllegalTransition,
    UnknownSession,
    UnknownAgent,
    ParseError,
    SchemaError,
    UnparseableRequest,
    UnknownTicker,
    MissingData,
    BudgetExceeded,
    NodeFailure,
    NotFound,
    Internal,
}

impl ErrorCode {
    pub const ALL: [ErrorCode; 19] = [
        ErrorCode::ToolNotFound,
        ErrorCode::FnNotFound,
        ErrorCode::ParamInvalid,
        ErrorCode::ExecFailed,
        ErrorCode::Timeout,
        ErrorCode::AuthFailed,
        ErrorCode::UnknownTask,
        ErrorCode::IllegalTransition,
        ErrorCode::UnknownSession,
        ErrorCode::UnknownAgent,
        ErrorCode::ParseError,
        ErrorCode::SchemaError,
        ErrorCode::UnparseableRequest,
        ErrorCode::UnknownTicker,
        ErrorCode::MissingData,
        ErrorCode::BudgetExceeded,
        ErrorCode::NodeFailure,
        ErrorCode::NotFound,
        ErrorCode::Internal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::ToolNotFound => "TOOL_NOT_FOUND",
            ErrorCode::FnNotFound => "FN_NOT_FOUND",
            ErrorCode::ParamInvalid => "PARAM_INVALID",
            ErrorCode::ExecFailed => "EXEC_FAILED",
            ErrorCode::Timeout => "TIMEOUT",
            ErrorCode::AuthFailed => "AUTH_FAILED",
            ErrorCode::UnknownTask => "UNKNOWN_TASK",
            ErrorCode::IllegalTransition => "ILLEGAL_TRANSITION",
            ErrorCode::UnknownSession => "UNKNOWN_SESSION",
            ErrorCode::UnknownAgent => "UNKNOWN_AGENT",
            ErrorCode::ParseError => "PARSE_ERROR",
            ErrorCode::SchemaError => "SCHEMA_ERROR",
            ErrorCode::UnparseableRequest => "UNPARSEABLE_REQUEST",
            ErrorCode::UnknownTicker => "UNKNOWN_TICKER",
            ErrorCode::MissingData => "MISSING_DATA",
            ErrorCode::BudgetExceeded => "BUDGET_EXCEEDED",
            ErrorCode::NodeFailure => "NODE_FAILURE",
            ErrorCode::NotFound => "NOT_FOUND",
            ErrorCode::Internal => "INTERNAL",
        }
    }

    /// HTTP status the wire service answers with when this code is the outcome.
    pub fn http_status(self) -> u16 {
        match self {
            ErrorCode::ParseError | ErrorCode::SchemaError | ErrorCode::ParamInvalid => 400,
            ErrorCode::AuthFailed => 401,
            ErrorCode::UnknownTask
            | ErrorCode::UnknownSession
            | ErrorCode::UnknownAgent
            | ErrorCode::ToolNotFound
            | ErrorCode::FnNotFound
            | ErrorCode::NotFound => 404,
            ErrorCode::IllegalTransition => 409,
            ErrorCode::ExecFailed => 502,
            _ => 500,
        }
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown error code {0:?}")]
pub struct UnknownErrorCode(pub String);

impl FromStr for ErrorCode {
    type Err = UnknownErrorCode;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ErrorCode::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| UnknownErrorCode(s.to_string()))
    }
}
