use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub node: String,
    /// Edge taken out of the node: a router label, `"plain"`, `"error"`, or
    /// `None` when the run stopped here.
    pub label: Option<String>,
    pub duration_ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExecutionTrace {
    pub steps: Vec<TraceStep>,
}

impl ExecutionTrace {
    pub(crate) fn push(&mut self, node: &str, label: Option<String>, duration_ms: f64) {
        self.steps.push(TraceStep {
            node: node.to_string(),
            label,
            duration_ms,
        });
    }

    pub fn nodes(&self) -> Vec<&str> {
        self.steps.iter().map(|s| s.node.as_str()).collect()
    }

    /// Node and label pairs, i.e. the trace without timings.
    pub fn route(&self) -> Vec<(String, Option<String>)> {
        self.steps
            .iter()
            .map(|s| (s.node.clone(), s.label.clone()))
            .collect()
    }

    /// One `{node, label, duration_ms}` object per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for step in &self.steps {
            out.push_str(&serde_json::to_string(step).expect("trace steps serialize"));
            out.push('\n');
        }
        out
    }
}
