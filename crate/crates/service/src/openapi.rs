use serde_json::{json, Value};

fn op(summary: &str, ok: &str) -> Value {
    json!({
        "summary": summary,
        "security": [{"bearer": []}],
        "responses": {
            "200": {"description": ok},
            "401": {"description": "missing or invalid bearer token", "content": {"application/json": {"schema": {"$ref": "#/components/schemas/Error"}}}}
        }
    })
}

fn path_param(name: &str) -> Value {
    json!({"name": name, "in": "path", "required": true, "schema": {"type": "string"}})
}

/// OpenAPI 3.0 description of the service endpoints (documentation only).
pub fn openapi_document() -> Value {
    let mut card = op("Agent card in canonical JSON", "agent card");
    card["parameters"] = json!([path_param("id")]);
    let mut discover = op("Registered agent cards, optionally filtered by capability", "list of cards");
    discover["parameters"] = json!([{"name": "capability", "in": "query", "required": false, "schema": {"type": "string"}}]);
    let mut tool = op("Tool description", "tool description");
    tool["parameters"] = json!([path_param("tool_id")]);
    let mut call = op("Call a tool function with a JSON parameter object", "{function, result, duration_ms}");
    call["parameters"] = json!([
        path_param("tool_id"),
        path_param("function"),
        {"name": "session", "in": "query", "required": false, "schema": {"type": "string"}}
    ]);
    call["requestBody"] = json!({"content": {"application/json": {"schema": {"type": "object"}}}});
    let mut task = op("Task record", "task");
    task["parameters"] = json!([path_param("id")]);
    let mut message = op("Deliver an agent-to-agent message and return the reply message", "reply message");
    message["requestBody"] = json!({"required": true, "content": {"application/json": {"schema": {"$ref": "#/components/schemas/Message"}}}});

    json!({
        "openapi": "3.0.3",
        "info": {"title": "agentmesh", "version": env!("CARGO_PKG_VERSION")},
        "paths": {
            "/a2a/messages": {"post": message},
            "/agents/{id}/card": {"get": card},
            "/registry/agents": {"get": discover},
            "/mcp/tools": {"get": op("All tool descriptions", "list of tool descriptions")},
            "/mcp/tools/{tool_id}": {"get": tool},
            "/mcp/tools/{tool_id}/call/{function}": {"post": call},
            "/tasks": {"get": op("All tasks in creation order", "list of tasks")},
            "/tasks/{id}": {"get": task},
            "/healthz": {"get": op("Liveness probe", "status")},
            "/openapi.json": {"get": op("This document", "OpenAPI document")}
        },
        "components": {
            "securitySchemes": {"bearer": {"type": "http", "scheme": "bearer"}},
            "schemas": {
                "Error": {
                    "type": "object",
                    "required": ["code", "message", "details"],
                    "properties": {
                        "code": {"type": "string"},
                        "message": {"type": "string"},
                        "details": {}
                    }
                },
                "Message": {
                    "type": "object",
                    "required": ["header"],
                    "properties": {
                        "header": {"type": "object"},
                        "body": {"type": "object"},
                        "parts": {"type": "array", "items": {"type": "object"}}
                    }
                }
            }
        }
    })
}
