use std::path::Path;

use agentmesh_core::card::{parse_agent_card, CardError};
use agentmesh_core::mcp::{parse_tool_description_with_warnings, ToolError};
use agentmesh_core::message::{message_from_wire_with_report, validate_message, MessageError};
use agentmesh_core::ErrorCode;
use serde_json::{json, Value};

use crate::FileKind;

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub kind: &'static str,
    pub file: String,
    pub violations: Vec<Value>,
    pub warnings: Vec<String>,
    pub canonical: Option<String>,
}

impl Outcome {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

fn violation(code: impl serde::Serialize, path: &str, detail: impl Into<String>) -> Value {
    json!({ "code": code, "path": path, "detail": detail.into() })
}

pub fn validate_file(kind: FileKind, file: &Path) -> Outcome {
    let mut out = Outcome {
        kind: match kind {
            FileKind::Card => "card",
            FileKind::Tool => "tool",
            FileKind::Message => "message",
        },
        file: file.display().to_string(),
        violations: Vec::new(),
        warnings: Vec::new(),
        canonical: None,
    };
    let text = match std::fs::read_to_string(file) {
        Ok(t) => t,
        Err(e) => {
            out.violations.push(violation("IO_ERROR", "", e.to_string()));
            return out;
        }
    };
    match kind {
        FileKind::Card => match parse_agent_card(&text) {
            Ok(card) => out.canonical = Some(card.to_canonical_json()),
            Err(CardError::Parse(m)) => out.violations.push(violation(ErrorCode::ParseError, "", m)),
            Err(CardError::Schema(m)) => out.violations.push(violation(ErrorCode::SchemaError, "", m)),
        },
        FileKind::Tool => match parse_tool_description_with_warnings(&text) {
            Ok((tool, warnings)) => {
                out.canonical = Some(tool.to_canonical_json());
                out.warnings = warnings;
            }
            Err(ToolError::Parse(m)) => out.violations.push(violation(ErrorCode::ParseError, "", m)),
            Err(ToolError::Schema { path, message }) => {
                out.violations.push(violation(ErrorCode::SchemaError, &path, message))
            }
        },
        FileKind::Message => match message_from_wire_with_report(&text) {
            Ok((msg, report)) => {
                for v in validate_message(&msg).violations {
                    out.violations.push(violation(v.code, &v.path, v.detail));
                }
                for (flag, field) in [
                    (report.status_defaulted, "header.status"),
                    (report.message_id_generated, "header.message_id"),
                    (report.timestamp_defaulted, "header.timestamp"),
                ] {
                    if flag {
                        out.warnings.push(format!("{field} missing; default applied"));
                    }
                }
                if out.is_valid() {
                    out.canonical = Some(msg.to_wire());
                }
            }
            Err(MessageError::Parse(m)) => out.violations.push(violation(ErrorCode::ParseError, "", m)),
            Err(e) => out.violations.push(violation(ErrorCode::SchemaError, "", e.to_string())),
        },
    }
    out
}

pub fn render(out: &Outcome, json: bool, canonical_only: bool) -> String {
    if canonical_only {
        if let Some(c) = &out.canonical {
            return format!("{c}\n");
        }
    }
    if json {
        let canonical: Value = out
            .canonical
            .as_deref()
            .map(|c| serde_json::from_str(c).expect("canonical output is JSON"))
            .unwrap_or(Value::Null);
        let doc = json!({
            "kind": out.kind,
            "file": out.file,
            "valid": out.is_valid(),
            "violations": out.violations,
            "warnings": out.warnings,
            "canonical": canonical,
        });
        return format!("{}\n", agentmesh_core::canonical::to_canonical_string(&doc));
    }
    let mut s = String::new();
    if out.is_valid() {
        s.push_str(&format!("ok: {} is a valid {}\n", out.file, out.kind));
    } else {
        s.push_str(&format!("invalid {}: {}\n", out.kind, out.file));
        for v in &out.violations {
            let path = v["path"].as_str().unwrap_or_default();
            let at = if path.is_empty() { String::new() } else { format!(" at {path}") };
            s.push_str(&format!("  {}{}: {}\n", v["code"].as_str().unwrap_or("?"), at, v["detail"].as_str().unwrap_or_default()));
        }
    }
    for w in &out.warnings {
        s.push_str(&format!("  warning: {w}\n"));
    }
    s
}
