//! Deterministic state-graph executor.
//!
//! Nodes are handlers over a shared state value. After a node runs, the engine
//! follows its plain edge, or asks its router for a label and follows the
//! mapped edge. Cycles are allowed; a step budget bounds every run.

mod state;
mod trace;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;
use std::time::Instant;

pub use state::{HopRecord, WorkflowState, SLOT_ANALYSIS, SLOT_COMPANY, SLOT_FINANCIALS, SLOT_NEWS, SLOT_STOCK};
pub use trace::{ExecutionTrace, TraceStep};

pub const DEFAULT_BUDGET: usize = 64;

/// Label a router (or the engine, on handler failure) uses for the error route.
pub const ERROR_LABEL: &str = "error";
pub const PLAIN_LABEL: &str = "plain";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{message}")]
pub struct NodeError {
    pub message: String,
}

impl NodeError {
    pub fn new(message: impl Into<String>) -> Self {
        NodeError {
            message: message.into(),
        }
    }
}

type NodeFn<S> = dyn Fn(&mut S) -> Result<(), NodeError> + Send + Sync;
type RouterFn<S> = dyn Fn(&S) -> String + Send + Sync;
type ErrorHook<S> = dyn Fn(&mut S, &str, &NodeError) + Send + Sync;

enum Outgoing<S> {
    Plain(String),
    Conditional {
        router: Arc<RouterFn<S>>,
        mapping: BTreeMap<String, String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("node {0:?} already exists")]
    DuplicateNode(String),
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("node {0:?} already has an outgoing rule")]
    ConflictingEdge(String),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WorkflowError {
    #[error("step budget of {budget} exhausted")]
    BudgetExceeded { budget: usize, trace: ExecutionTrace },
    #[error("node {node:?} failed: {message}")]
    NodeFailure {
        node: String,
        message: String,
        trace: ExecutionTrace,
    },
    #[error("router of {node:?} returned unmapped label {label:?}")]
    RouterLabelUnknown {
        node: String,
        label: String,
        trace: ExecutionTrace,
    },
    #[error("node {node:?} has no outgoing rule and is not terminal")]
    DeadEnd { node: String, trace: ExecutionTrace },
    #[error("graph has no entry node")]
    NoEntry,
}

impl WorkflowError {
    pub fn trace(&self) -> Option<&ExecutionTrace> {
        match self {
            WorkflowError::BudgetExceeded { trace, .. }
            | WorkflowError::NodeFailure { trace, .. }
            | WorkflowError::RouterLabelUnknown { trace, .. }
            | WorkflowError::DeadEnd { trace, .. } => Some(trace),
            WorkflowError::NoEntry => None,
        }
    }
}

pub struct WorkflowGraph<S> {
    nodes: BTreeMap<String, Arc<NodeFn<S>>>,
    outgoing: BTreeMap<String, Outgoing<S>>,
    entry: Option<String>,
    terminals: BTreeSet<String>,
    on_error: Option<Arc<ErrorHook<S>>>,
}

impl<S> Default for WorkflowGraph<S> {
    fn default() -> Self {
        WorkflowGraph {
            nodes: BTreeMap::new(),
            outgoing: BTreeMap::new(),
            entry: None,
            terminals: BTreeSet::new(),
            on_error: None,
        }
    }
}

impl<S> fmt::Debug for WorkflowGraph<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WorkflowGraph")
            .field("nodes", &self.nodes.keys().collect::<Vec<_>>())
            .field("entry", &self.entry)
            .field("terminals", &self.terminals)
            .finish()
    }
}

impl<S> WorkflowGraph<S> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node<F>(&mut self, id: &str, handler: F) -> Result<(), GraphError>
    where
        F: Fn(&mut S) -> Result<(), NodeError> + Send + Sync + 'static,
    {
        if self.nodes.contains_key(id) {
            return Err(GraphError::DuplicateNode(id.to_string()));
        }
        self.nodes.insert(id.to_string(), Arc::new(handler));
        Ok(())
    }

    pub fn add_edge(&mut self, from: &str, to: &str) -> Result<(), GraphError> {
        self.require(from)?;
        self.require(to)?;
        if self.outgoing.contains_key(from) {
            return Err(GraphError::ConflictingEdge(from.to_string()));
        }
        self.outgoing
            .insert(from.to_string(), Outgoing::Plain(to.to_string()));
        Ok(())
    }

    pub fn add_conditional_edges<R, I, K, V>(
        &mut self,
        from: &str,
        router: R,
        mapping: I,
    ) -> Result<(), GraphError>
    where
        R: Fn(&S) -> String + Send + Sync + 'static,
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        self.require(from)?;
        if self.outgoing.contains_key(from) {
            return Err(GraphError::ConflictingEdge(from.to_string()));
        }
        let mapping: BTreeMap<String, String> = mapping
            .into_iter()
            .map(|(k, v)| (k.into(), v.into()))
            .collect();
        for target in mapping.values() {
            self.require(target)?;
        }
        self.outgoing.insert(
            from.to_string(),
            Outgoing::Conditional {
                router: Arc::new(router),
                mapping,
            },
        );
        Ok(())
    }

    pub fn set_entry(&mut self, id: &str) -> Result<(), GraphError> {
        self.require(id)?;
        self.entry = Some(id.to_string());
        Ok(())
    }

    pub fn add_terminal(&mut self, id: &str) -> Result<(), GraphError> {
        self.require(id)?;
        self.terminals.insert(id.to_string());
        Ok(())
    }

    /// Called with the failing node and its error before the engine follows
    /// that node's `"error"` mapping.
    pub fn on_error<F>(&mut self, hook: F)
    where
        F: Fn(&mut S, &str, &NodeError) + Send + Sync + 'static,
    {
        self.on_error = Some(Arc::new(hook));
    }

    fn require(&self, id: &str) -> Result<(), GraphError> {
        if self.nodes.contains_key(id) {
            Ok(())
        } else {
            Err(GraphError::UnknownNode(id.to_string()))
        }
    }

    pub fn entry(&self) -> Option<&str> {
        self.entry.as_deref()
    }

    pub fn is_terminal(&self, id: &str) -> bool {
        self.terminals.contains(id)
    }

    pub fn node_ids(&self) -> impl Iterator<Item = &str> {
        self.nodes.keys().map(String::as_str)
    }

    /// Whether leaving `from` under `label` can reach `to`. `label` is
    /// [`PLAIN_LABEL`] for plain edges.
    pub fn has_edge(&self, from: &str, label: &str, to: &str) -> bool {
        match self.outgoing.get(from) {
            Some(Outgoing::Plain(t)) => label == PLAIN_LABEL && t == to,
            Some(Outgoing::Conditional { mapping, .. }) => mapping.get(label).is_some_and(|t| t == to),
            None => false,
        }
    }

    pub fn run(&self, mut state: S, budget: usize) -> Result<(S, ExecutionTrace), WorkflowError> {
        let mut current = self.entry.clone().ok_or(WorkflowError::NoEntry)?;
        let mut trace = ExecutionTrace::default();
        loop {
            if trace.steps.len() >= budget {
                return Err(WorkflowError::BudgetExceeded { budget, trace });
            }
            let handler = Arc::clone(&self.nodes[&current]);
            let started = Instant::now();
            let result = handler(&mut state);
            let duration_ms = started.elapsed().as_secs_f64() * 1000.0;

            let (label, next) = match (result, self.outgoing.get(&current)) {
                (Err(err), Some(Outgoing::Conditional { mapping, .. }))
                    if mapping.contains_key(ERROR_LABEL) =>
                {
                    if let Some(hook) = &self.on_error {
                        hook(&mut state, &current, &err);
                    }
                    (Some(ERROR_LABEL.to_string()), Some(mapping[ERROR_LABEL].clone()))
                }
                (Err(err), _) => {
                    trace.push(&current, None, duration_ms);
                    return Err(WorkflowError::NodeFailure {
                        node: current,
                        message: err.message,
                        trace,
                    });
                }
                (Ok(()), _) if self.terminals.contains(&current) => (None, None),
                (Ok(()), Some(Outgoing::Plain(to))) => (Some(PLAIN_LABEL.to_string()), Some(to.clone())),
                (Ok(()), Some(Outgoing::Conditional { router, mapping })) => {
                    let label = router(&state);
                    match mapping.get(&label) {
                        Some(to) => (Some(label), Some(to.clone())),
                        None => {
                            trace.push(&current, Some(label.clone()), duration_ms);
                            return Err(WorkflowError::RouterLabelUnknown {
                                node: current,
                                label,
                                trace,
                            });
                        }
                    }
                }
                (Ok(()), None) => {
                    trace.push(&current, None, duration_ms);
                    return Err(WorkflowError::DeadEnd {
                        node: current,
                        trace,
                    });
                }
            };
            trace.push(&current, label, duration_ms);
            match next {
                Some(n) => current = n,
                None => return Ok((state, trace)),
            }
        }
    }
}
