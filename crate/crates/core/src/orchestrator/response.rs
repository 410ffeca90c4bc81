//! Response documents produced by the terminal nodes.

use serde_json::{json, Map, Value};

use crate::workflow::{WorkflowState, SLOT_ANALYSIS, SLOT_COMPANY, SLOT_FINANCIALS, SLOT_NEWS, SLOT_STOCK};

/// Section name and the slot it is built from, in output order.
pub const SECTION_ORDER: [(&str, &str); 5] = [
    ("price", SLOT_STOCK),
    ("news", SLOT_NEWS),
    ("company", SLOT_COMPANY),
    ("financials", SLOT_FINANCIALS),
    ("analysis", SLOT_ANALYSIS),
];

pub const ERRORS_SECTION: &str = "errors";

fn section(name: &str, content: Value) -> Value {
    json!({ "name": name, "content": content })
}

fn errors_value(state: &WorkflowState) -> Value {
    serde_json::to_value(&state.errors).expect("TaskError serializes")
}

/// One section per populated slot, then the errors section.
pub fn build_response(state: &WorkflowState) -> Value {
    let mut sections: Vec<Value> = SECTION_ORDER
        .iter()
        .filter(|(_, slot)| state.is_populated(slot))
        .map(|(name, slot)| section(name, state.data_slots[*slot].clone()))
        .collect();
    sections.push(section(ERRORS_SECTION, errors_value(state)));
    json!({
        "query": state.request,
        "tickers": state.tickers,
        "sections": sections,
        "summary": summary(state),
    })
}

pub fn build_error_response(state: &WorkflowState) -> Value {
    let detail: Vec<String> = state.errors.iter().map(|e| e.to_string()).collect();
    json!({
        "query": state.request,
        "tickers": state.tickers,
        "sections": [section(ERRORS_SECTION, errors_value(state))],
        "summary": format!("The request could not be completed. {}", detail.join("; ")),
    })
}

fn summary(state: &WorkflowState) -> String {
    let mut lines = Vec::new();
    for symbol in &state.tickers {
        let get = |slot: &str| state.slot_entry(slot, symbol).and_then(Value::as_object);
        let name = get(SLOT_COMPANY)
            .and_then(|c| c.get("name"))
            .and_then(Value::as_str)
            .unwrap_or(symbol);
        let mut parts = Vec::new();
        if let Some(s) = get(SLOT_STOCK) {
            parts.push(format!(
                "price {} ({:+}%)",
                num(s, "price"),
                s.get("change_percent").and_then(Value::as_f64).unwrap_or(0.0)
            ));
        }
        if let Some(n) = get(SLOT_NEWS) {
            let count = n.get("headlines").and_then(Value::as_array).map_or(0, Vec::len);
            parts.push(format!("{count} recent headlines"));
        }
        if let Some(f) = get(SLOT_FINANCIALS) {
            parts.push(format!(
                "fiscal {} net income {}",
                num(f, "fiscal_year"),
                num(f, "net_income")
            ));
        }
        if let Some(a) = get(SLOT_ANALYSIS) {
            parts.push(format!(
                "verdict {}",
                a.get("verdict").and_then(Value::as_str).unwrap_or("neutral")
            ));
        }
        if !parts.is_empty() {
            lines.push(format!("{name} ({symbol}): {}.", parts.join(", ")));
        }
    }
    if !state.errors.is_empty() {
        lines.push(format!("{} error(s) occurred.", state.errors.len()));
    }
    lines.join(" ")
}

fn num(obj: &Map<String, Value>, key: &str) -> String {
    match obj.get(key) {
        Some(Value::Number(n)) => match n.as_f64() {
            Some(f) if n.is_f64() => f.to_string(),
            _ => n.to_string(),
        },
        _ => "n/a".to_string(),
    }
}

/// Section names of a response document, in order.
pub fn section_names(response: &Value) -> Vec<String> {
    response["sections"]
        .as_array()
        .map(|s| {
            s.iter()
                .filter_map(|x| x["name"].as_str().map(String::from))
                .collect()
        })
        .unwrap_or_default()
}
