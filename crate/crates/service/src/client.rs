//! Blocking HTTP client for the service, usable as a message transport.

use std::time::Duration;

use agentmesh_core::message::message_from_wire;
use agentmesh_core::{A2AMessage, ErrorCode, TaskError, Transport, TransportError};
use reqwest::blocking::{Client, RequestBuilder};
use reqwest::header::{AUTHORIZATION, CONTENT_TYPE};
use serde_json::Value;

#[derive(Debug, Clone)]
pub struct HttpClient {
    base: String,
    token: Option<String>,
    http: Client,
}

impl HttpClient {
    pub fn new(endpoint: &str, token: Option<String>) -> Result<Self, TransportError> {
        Self::with_timeout(endpoint, token, Duration::from_secs(30))
    }

    pub fn with_timeout(endpoint: &str, token: Option<String>, timeout: Duration) -> Result<Self, TransportError> {
        let http = Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| TransportError::Network(e.to_string()))?;
        Ok(HttpClient {
            base: endpoint.trim_end_matches('/').to_string(),
            token: token.filter(|t| !t.is_empty()),
            http,
        })
    }

    pub fn endpoint(&self) -> &str {
        &self.base
    }

    fn authorize(&self, req: RequestBuilder) -> RequestBuilder {
        match &self.token {
            Some(t) => req.header(AUTHORIZATION, format!("Bearer {t}")),
            None => req,
        }
    }

    fn execute(&self, req: RequestBuilder) -> Result<String, TransportError> {
        let resp = self
            .authorize(req)
            .send()
            .map_err(|e| TransportError::Network(e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp.text().map_err(|e| TransportError::Network(e.to_string()))?;
        if (200..300).contains(&status) {
            return Ok(text);
        }
        Err(TransportError::Remote {
            status,
            error: parse_error_body(&text, status),
        })
    }

    /// GET `path` (starting with `/`) and parse the JSON body.
    pub fn get_json(&self, path: &str) -> Result<Value, TransportError> {
        let text = self.execute(self.http.get(format!("{}{path}", self.base)))?;
        serde_json::from_str(&text).map_err(|e| TransportError::InvalidResponse(e.to_string()))
    }

    /// GET `path` and return the body text unchanged.
    pub fn get_text(&self, path: &str) -> Result<String, TransportError> {
        self.execute(self.http.get(format!("{}{path}", self.base)))
    }

    pub fn post_json(&self, path: &str, body: &Value) -> Result<Value, TransportError> {
        let req = self
            .http
            .post(format!("{}{path}", self.base))
            .header(CONTENT_TYPE, "application/json")
            .body(body.to_string());
        let text = self.execute(req)?;
        serde_json::from_str(&text).map_err(|e| TransportError::InvalidResponse(e.to_string()))
    }

    /// POSTs the canonical wire form and parses the reply message.
    pub fn send_message(&self, msg: &A2AMessage) -> Result<A2AMessage, TransportError> {
        let req = self
            .http
            .post(format!("{}/a2a/messages", self.base))
            .header(CONTENT_TYPE, "application/json")
            .body(msg.to_wire());
        let text = self.execute(req)?;
        let reply = message_from_wire(&text).map_err(|e| TransportError::InvalidResponse(e.to_string()))?;
        if let Some(sent) = &msg.header.task_id {
            if reply.header.task_id.as_ref() != Some(sent) {
                return Err(TransportError::InvalidResponse(format!(
                    "reply task_id {:?} does not echo {sent:?}",
                    reply.header.task_id
                )));
            }
        }
        Ok(reply)
    }

    pub fn card_text(&self, agent_id: &str) -> Result<String, TransportError> {
        self.get_text(&format!("/agents/{}/card", encode(agent_id)))
    }

    pub fn discover(&self, capability: Option<&str>) -> Result<Value, TransportError> {
        match capability {
            Some(c) => self.get_json(&format!("/registry/agents?capability={}", encode(c))),
            None => self.get_json("/registry/agents"),
        }
    }

    pub fn task(&self, task_id: &str) -> Result<Value, TransportError> {
        self.get_json(&format!("/tasks/{}", encode(task_id)))
    }

    pub fn tasks(&self) -> Result<Value, TransportError> {
        self.get_json("/tasks")
    }

    pub fn tools(&self) -> Result<Value, TransportError> {
        self.get_json("/mcp/tools")
    }

    pub fn tool(&self, tool_id: &str) -> Result<Value, TransportError> {
        self.get_json(&format!("/mcp/tools/{}", encode(tool_id)))
    }

    pub fn call_tool(
        &self,
        tool_id: &str,
        function: &str,
        params: &Value,
        session: Option<&str>,
    ) -> Result<Value, TransportError> {
        let mut path = format!("/mcp/tools/{}/call/{}", encode(tool_id), encode(function));
        if let Some(s) = session {
            path.push_str(&format!("?session={}", encode(s)));
        }
        self.post_json(&path, params)
    }

    pub fn health(&self) -> Result<Value, TransportError> {
        self.get_json("/healthz")
    }
}

impl Transport for HttpClient {
    fn send(&self, request: &A2AMessage) -> Result<A2AMessage, TransportError> {
        self.send_message(request)
    }
}

fn parse_error_body(text: &str, status: u16) -> TaskError {
    let parsed: Option<TaskError> = serde_json::from_str::<Value>(text).ok().and_then(|v| {
        let code = serde_json::from_value::<ErrorCode>(v.get("code")?.clone()).ok()?;
        let message = v.get("message").and_then(Value::as_str).unwrap_or_default();
        let mut e = TaskError::new(code, message);
        if let Some(d) = v.get("details").filter(|d| !d.is_null()) {
            e = e.with_details(d.clone());
        }
        Some(e)
    });
    parsed.unwrap_or_else(|| {
        let snippet: String = text.chars().take(200).collect();
        TaskError::new(ErrorCode::Internal, format!("HTTP {status}: {snippet}"))
    })
}

/// Percent-encodes everything outside the URL-safe unreserved set.
fn encode(segment: &str) -> String {
    let mut out = String::with_capacity(segment.len());
    for b in segment.bytes() {
        if b.is_ascii_alphanumeric() || matches!(b, b'-' | b'_' | b'.' | b'~') {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out
}
