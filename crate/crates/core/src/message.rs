//! A2A message envelope: construction, validation and canonical wire form.
//!
//! The wire shape is `{"header":{...},"body":{...},"parts":[...]}`. Emission is
//! canonical (sorted keys, one line); parsing is loose and fills in defaults
//! for fields a sender left out.

use std::collections::BTreeMap;
use std::fmt;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use uuid::Uuid;

use crate::canonical::to_canonical_string;

pub type JsonMap = Map<String, Value>;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum MessageError {
    #[error("invalid party: {0}")]
    InvalidParty(String),
    #[error("malformed JSON: {0}")]
    Parse(String),
    #[error("message schema error: {0}")]
    Schema(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MessageStatus {
    #[default]
    Pending,
    Delivered,
    Processed,
    Failed,
}

impl MessageStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            MessageStatus::Pending => "pending",
            MessageStatus::Delivered => "delivered",
            MessageStatus::Processed => "processed",
            MessageStatus::Failed => "failed",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [
            MessageStatus::Pending,
            MessageStatus::Delivered,
            MessageStatus::Processed,
            MessageStatus::Failed,
        ]
        .into_iter()
        .find(|st| st.as_str() == s)
    }
}

impl fmt::Display for MessageStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MessageHeader {
    pub sender_agent_id: String,
    pub recipient_agent_id: String,
    pub task_id: Option<String>,
    pub message_id: String,
    /// ISO-8601 UTC text, kept verbatim as received.
    pub timestamp: String,
    pub status: MessageStatus,
}

/// Kind of a message part. Kinds other than text and data survive parsing so
/// that validation can report them.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PartKind {
    Text,
    Data,
    Other(String),
}

impl PartKind {
    pub fn as_str(&self) -> &str {
        match self {
            PartKind::Text => "text",
            PartKind::Data => "data",
            PartKind::Other(s) => s,
        }
    }

    fn from_wire(s: &str) -> Self {
        match s {
            "text" => PartKind::Text,
            "data" => PartKind::Data,
            other => PartKind::Other(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MessagePart {
    pub kind: PartKind,
    /// A JSON string for text parts, a JSON object for data parts.
    pub content: Value,
    pub metadata: BTreeMap<String, String>,
}

impl MessagePart {
    pub fn text(content: impl Into<String>) -> Self {
        MessagePart {
            kind: PartKind::Text,
            content: Value::String(content.into()),
            metadata: BTreeMap::new(),
        }
    }

    pub fn data(content: JsonMap) -> Self {
        MessagePart {
            kind: PartKind::Data,
            content: Value::Object(content),
            metadata: BTreeMap::new(),
        }
    }

    pub fn with_metadata(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.metadata.insert(key.into(), value.into());
        self
    }

    pub fn as_text(&self) -> Option<&str> {
        match (&self.kind, &self.content) {
            (PartKind::Text, Value::String(s)) => Some(s),
            _ => None,
        }
    }

    pub fn as_data(&self) -> Option<&JsonMap> {
        match (&self.kind, &self.content) {
            (PartKind::Data, Value::Object(m)) => Some(m),
            _ => None,
        }
    }

    fn to_value(&self) -> Value {
        json!({
            "kind": self.kind.as_str(),
            "content": self.content,
            "metadata": self.metadata,
        })
    }

    fn from_value(index: usize, value: &Value) -> Result<Self, MessageError> {
        let obj = value
            .as_object()
            .ok_or_else(|| MessageError::Schema(format!("parts[{index}] is not an object")))?;
        let kind = obj
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| MessageError::Schema(format!("parts[{index}].kind missing")))?;
        let content = obj.get("content").cloned().unwrap_or(Value::Null);
        let metadata = match obj.get("metadata") {
            None | Some(Value::Null) => BTreeMap::new(),
            Some(Value::Object(m)) => m
                .iter()
                .map(|(k, v)| match v {
                    Value::String(s) => Ok((k.clone(), s.clone())),
                    _ => Err(MessageError::Schema(format!(
                        "parts[{index}].metadata.{k} is not a string"
                    ))),
                })
                .collect::<Result<_, _>>()?,
            Some(_) => {
                return Err(MessageError::Schema(format!(
                    "parts[{index}].metadata is not an object"
                )))
            }
        };
        Ok(MessagePart {
            kind: PartKind::from_wire(kind),
            content,
            metadata,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct A2AMessage {
    pub header: MessageHeader,
    pub body: JsonMap,
    pub parts: Vec<MessagePart>,
}

/// Fields that `message_from_wire` had to fill in because the sender omitted them.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseReport {
    pub timestamp_defaulted: bool,
    pub message_id_generated: bool,
    pub status_defaulted: bool,
}

/// Current UTC time with second precision, e.g. `2025-04-14T09:30:00Z`.
pub fn now_timestamp() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true)
}

pub fn make_message(
    sender: &str,
    recipient: &str,
    body: JsonMap,
    parts: Vec<MessagePart>,
    task_id: Option<String>,
) -> Result<A2AMessage, MessageError> {
    if sender.is_empty() || recipient.is_empty() {
        return Err(MessageError::InvalidParty(
            "sender and recipient must be non-empty".into(),
        ));
    }
    if sender == recipient {
        return Err(MessageError::InvalidParty(format!(
            "sender and recipient are both {sender:?}"
        )));
    }
    Ok(A2AMessage {
        header: MessageHeader {
            sender_agent_id: sender.to_string(),
            recipient_agent_id: recipient.to_string(),
            task_id,
            message_id: Uuid::new_v4().to_string(),
            timestamp: now_timestamp(),
            status: MessageStatus::Pending,
        },
        body,
        parts,
    })
}

impl A2AMessage {
    /// Builds the reply envelope: parties swapped, task id carried over.
    pub fn reply(&self, status: MessageStatus, body: JsonMap) -> A2AMessage {
        A2AMessage {
            header: MessageHeader {
                sender_agent_id: self.header.recipient_agent_id.clone(),
                recipient_agent_id: self.header.sender_agent_id.clone(),
                task_id: self.header.task_id.clone(),
                message_id: Uuid::new_v4().to_string(),
                timestamp: now_timestamp(),
                status,
            },
            body,
            parts: Vec::new(),
        }
    }

    pub fn to_value(&self) -> Value {
        let h = &self.header;
        json!({
            "header": {
                "sender_agent_id": h.sender_agent_id,
                "recipient_agent_id": h.recipient_agent_id,
                "task_id": h.task_id,
                "message_id": h.message_id,
                "timestamp": h.timestamp,
                "status": h.status.as_str(),
            },
            "body": self.body,
            "parts": self.parts.iter().map(MessagePart::to_value).collect::<Vec<_>>(),
        })
    }

    pub fn to_wire(&self) -> String {
        message_to_wire(self)
    }

    pub fn from_value(value: &Value) -> Result<(A2AMessage, ParseReport), MessageError> {
        let root = value
            .as_object()
            .ok_or_else(|| MessageError::Schema("message is not a JSON object".into()))?;
        let header = root
            .get("header")
            .and_then(Value::as_object)
            .ok_or_else(|| MessageError::Schema("header missing".into()))?;

        let required = |key: &str| -> Result<String, MessageError> {
            match header.get(key) {
                Some(Value::String(s)) => Ok(s.clone()),
                Some(_) => Err(MessageError::Schema(format!("header.{key} is not a string"))),
                None => Err(MessageError::Schema(format!("header.{key} missing"))),
            }
        };
        let optional = |key: &str| -> Result<Option<String>, MessageError> {
            match header.get(key) {
                None | Some(Value::Null) => Ok(None),
                Some(Value::String(s)) => Ok(Some(s.clone())),
                Some(_) => Err(MessageError::Schema(format!("header.{key} is not a string"))),
            }
        };

        let mut report = ParseReport::default();
        let sender_agent_id = required("sender_agent_id")?;
        let recipient_agent_id = required("recipient_agent_id")?;
        let task_id = optional("task_id")?;
        let message_id = optional("message_id")?.unwrap_or_else(|| {
            report.message_id_generated = true;
            Uuid::new_v4().to_string()
        });
        let timestamp = optional("timestamp")?.unwrap_or_else(|| {
            report.timestamp_defaulted = true;
            now_timestamp()
        });
        let status = match optional("status")? {
            None => {
                report.status_defaulted = true;
                MessageStatus::Pending
            }
            Some(s) => MessageStatus::parse(&s)
                .ok_or_else(|| MessageError::Schema(format!("unknown status {s:?}")))?,
        };

        let body = match root.get("body") {
            None | Some(Value::Null) => JsonMap::new(),
            Some(Value::Object(m)) => m.clone(),
            Some(_) => return Err(MessageError::Schema("body is not an object".into())),
        };
        let parts = match root.get("parts") {
            None | Some(Value::Null) => Vec::new(),
            Some(Value::Array(items)) => items
                .iter()
                .enumerate()
                .map(|(i, v)| MessagePart::from_value(i, v))
                .collect::<Result<_, _>>()?,
            Some(_) => return Err(MessageError::Schema("parts is not an array".into())),
        };

        Ok((
            A2AMessage {
                header: MessageHeader {
                    sender_agent_id,
                    recipient_agent_id,
                    task_id,
                    message_id,
                    timestamp,
                    status,
                },
                body,
                parts,
            },
            report,
        ))
    }
}

/// Canonical single-line JSON for `msg`.
pub fn message_to_wire(msg: &A2AMessage) -> String {
    to_canonical_string(&msg.to_value())
}

pub fn message_from_wire(text: &str) -> Result<A2AMessage, MessageError> {
    message_from_wire_with_report(text).map(|(m, _)| m)
}

pub fn message_from_wire_with_report(text: &str) -> Result<(A2AMessage, ParseReport), MessageError> {
    let value: Value = serde_json::from_str(text).map_err(|e| MessageError::Parse(e.to_string()))?;
    A2AMessage::from_value(&value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationKind {
    EmptySender,
    EmptyRecipient,
    SameParty,
    BadMessageId,
    BadTimestamp,
    EmptyTaskId,
    PartShapeMismatch,
    UnknownPartKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageViolation {
    pub code: ViolationKind,
    pub path: String,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<MessageViolation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn contains(&self, code: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }

    fn push(&mut self, code: ViolationKind, path: impl Into<String>, detail: impl Into<String>) {
        self.violations.push(MessageViolation {
            code,
            path: path.into(),
            detail: detail.into(),
        });
    }
}

/// Parses an ISO-8601 timestamp and requires a zero UTC offset.
pub fn parse_utc_timestamp(s: &str) -> Option<DateTime<Utc>> {
    let parsed = DateTime::parse_from_rfc3339(s).ok()?;
    (parsed.offset().local_minus_utc() == 0).then(|| parsed.with_timezone(&Utc))
}

pub fn validate_message(msg: &A2AMessage) -> ValidationReport {
    let mut report = ValidationReport::default();
    let h = &msg.header;
    if h.sender_agent_id.is_empty() {
        report.push(ViolationKind::EmptySender, "header.sender_agent_id", "empty sender");
    }
    if h.recipient_agent_id.is_empty() {
        report.push(
            ViolationKind::EmptyRecipient,
            "header.recipient_agent_id",
            "empty recipient",
        );
    }
    if !h.sender_agent_id.is_empty() && h.sender_agent_id == h.recipient_agent_id {
        report.push(
            ViolationKind::SameParty,
            "header.recipient_agent_id",
            "sender and recipient are the same agent",
        );
    }
    if Uuid::parse_str(&h.message_id).is_err() {
        report.push(
            ViolationKind::BadMessageId,
            "header.message_id",
            format!("{:?} is not a UUID", h.message_id),
        );
    }
    if parse_utc_timestamp(&h.timestamp).is_none() {
        report.push(
            ViolationKind::BadTimestamp,
            "header.timestamp",
            format!("{:?} is not an ISO-8601 UTC timestamp", h.timestamp),
        );
    }
    if matches!(&h.task_id, Some(t) if t.is_empty()) {
        report.push(ViolationKind::EmptyTaskId, "header.task_id", "task_id is empty");
    }
    for (i, part) in msg.parts.iter().enumerate() {
        let path = format!("parts[{i}]");
        match (&part.kind, &part.content) {
            (PartKind::Text, Value::String(_)) | (PartKind::Data, Value::Object(_)) => {}
            (PartKind::Other(kind), _) => report.push(
                ViolationKind::UnknownPartKind,
                path,
                format!("unsupported part kind {kind:?}"),
            ),
            (kind, _) => report.push(
                ViolationKind::PartShapeMismatch,
                path,
                format!("content does not match part kind {:?}", kind.as_str()),
            ),
        }
    }
    report
}
