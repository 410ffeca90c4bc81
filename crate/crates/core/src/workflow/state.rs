use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::message::MessageStatus;
use crate::orchestrator::Intent;
use crate::task::TaskError;

pub const SLOT_STOCK: &str = "stock";
pub const SLOT_NEWS: &str = "news";
pub const SLOT_COMPANY: &str = "company";
pub const SLOT_FINANCIALS: &str = "financials";
pub const SLOT_ANALYSIS: &str = "analysis";

/// One request/response exchange with another agent during a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopRecord {
    pub recipient: String,
    pub capability: String,
    pub task_id: Option<String>,
    pub request_status: MessageStatus,
    pub response_status: MessageStatus,
}

/// Per-request state threaded through the orchestrator's workflow.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WorkflowState {
    pub request: String,
    pub tickers: Vec<String>,
    pub intents: Vec<Intent>,
    pub plan: Vec<String>,
    pub plan_cursor: usize,
    /// Slot name -> (symbol -> data).
    pub data_slots: BTreeMap<String, Value>,
    pub errors: Vec<TaskError>,
    pub response: Option<Value>,
    pub hops: Vec<HopRecord>,
}

impl WorkflowState {
    pub fn new(request: impl Into<String>) -> Self {
        WorkflowState {
            request: request.into(),
            ..Default::default()
        }
    }

    pub fn slot(&self, name: &str) -> Option<&serde_json::Map<String, Value>> {
        self.data_slots.get(name).and_then(Value::as_object)
    }

    pub fn slot_entry(&self, name: &str, symbol: &str) -> Option<&Value> {
        self.slot(name).and_then(|m| m.get(symbol))
    }

    pub fn put_slot(&mut self, name: &str, symbol: &str, value: Value) {
        let slot = self
            .data_slots
            .entry(name.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
        if let Value::Object(map) = slot {
            map.insert(symbol.to_string(), value);
        }
    }

    pub fn is_populated(&self, name: &str) -> bool {
        self.slot(name).is_some_and(|m| !m.is_empty())
    }
}
