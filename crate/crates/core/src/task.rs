//! Task lifecycle: creation, state transitions, artifacts, failures and retry.
//!
//! Legal transitions:
//!
//! ```text
//! created -> in_progress -> completed
//!               |   ^
//!               v   | (retry)
//!              failed
//! ```

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Arc;

use chrono::{DateTime, Utc};
use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use uuid::Uuid;

use crate::error_code::ErrorCode;
use crate::message::JsonMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskState {
    Created,
    InProgress,
    Completed,
    Failed,
}

impl TaskState {
    pub const ALL: [TaskState; 4] = [
        TaskState::Created,
        TaskState::InProgress,
        TaskState::Completed,
        TaskState::Failed,
    ];

    pub fn can_transition_to(self, next: TaskState) -> bool {
        use TaskState::*;
        matches!(
            (self, next),
            (Created, InProgress) | (InProgress, Completed) | (InProgress, Failed) | (Failed, InProgress)
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TaskState::Created => "created",
            TaskState::InProgress => "in_progress",
            TaskState::Completed => "completed",
            TaskState::Failed => "failed",
        }
    }
}

impl fmt::Display for TaskState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub state: TaskState,
    pub timestamp: DateTime<Utc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArtifactKind {
    Document,
    StructuredData,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub artifact_id: String,
    pub kind: ArtifactKind,
    pub content: Value,
    #[serde(default)]
    pub metadata: std::collections::BTreeMap<String, String>,
}

impl Artifact {
    pub fn document(id: impl Into<String>, text: impl Into<String>) -> Self {
        Artifact {
            artifact_id: id.into(),
            kind: ArtifactKind::Document,
            content: Value::String(text.into()),
            metadata: Default::default(),
        }
    }

    pub fn structured(id: impl Into<String>, content: Value) -> Self {
        Artifact {
            artifact_id: id.into(),
            kind: ArtifactKind::StructuredData,
            content,
            metadata: Default::default(),
        }
    }
}

/// Error record attached to a failed task, and the error type of tool calls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, thiserror::Error)]
#[error("{code}: {message}")]
pub struct TaskError {
    pub code: ErrorCode,
    pub message: String,
    #[serde(default)]
    pub retryable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
}

impl TaskError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        TaskError {
            code,
            message: message.into(),
            retryable: false,
            details: None,
        }
    }

    pub fn retryable(mut self, retryable: bool) -> Self {
        self.retryable = retryable;
        self
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.details = Some(details);
        self
    }
}

/// Exponential backoff: retry `n` (1-based) waits `backoff_base_ms * 2^(n-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub backoff_base_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 3,
            backoff_base_ms: 100,
        }
    }
}

impl RetryPolicy {
    pub fn new(max_attempts: u32, backoff_base_ms: u64) -> Result<Self, TaskStoreError> {
        let policy = RetryPolicy {
            max_attempts,
            backoff_base_ms,
        };
        policy.check()?;
        Ok(policy)
    }

    fn check(&self) -> Result<(), TaskStoreError> {
        if self.max_attempts == 0 || self.backoff_base_ms == 0 {
            return Err(TaskStoreError::InvalidPolicy);
        }
        Ok(())
    }

    pub fn delay_ms(&self, attempt: u32) -> u64 {
        let exp = attempt.saturating_sub(1);
        if exp >= 64 {
            return u64::MAX;
        }
        self.backoff_base_ms.saturating_mul(1u64 << exp)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub task_id: String,
    pub task_type: String,
    pub parameters: JsonMap,
    pub state: TaskState,
    pub history: Vec<HistoryEntry>,
    pub artifacts: Vec<Artifact>,
    pub error: Option<TaskError>,
    pub attempts: u32,
    /// Delay scheduled before the current retry, set when a failure was retried.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retry_delay_ms: Option<u64>,
}

#[derive(Debug, thiserror::Error)]
pub enum TaskStoreError {
    #[error("task type must be non-empty")]
    InvalidType,
    #[error("unknown task {0}")]
    UnknownTask(String),
    #[error("illegal transition {from} -> {to}")]
    IllegalTransition { from: TaskState, to: TaskState },
    #[error("duplicate artifact id {0}")]
    DuplicateArtifact(String),
    #[error("duplicate task id {0}")]
    DuplicateTask(String),
    #[error("retry policy needs max_attempts >= 1 and backoff_base_ms >= 1")]
    InvalidPolicy,
    #[error("event log: {0}")]
    Io(#[from] std::io::Error),
}

impl TaskStoreError {
    pub fn code(&self) -> ErrorCode {
        match self {
            TaskStoreError::UnknownTask(_) => ErrorCode::UnknownTask,
            TaskStoreError::IllegalTransition { .. } => ErrorCode::IllegalTransition,
            TaskStoreError::InvalidType
            | TaskStoreError::DuplicateArtifact(_)
            | TaskStoreError::DuplicateTask(_)
            | TaskStoreError::InvalidPolicy => ErrorCode::SchemaError,
            TaskStoreError::Io(_) => ErrorCode::Internal,
        }
    }

    pub fn to_task_error(&self) -> TaskError {
        TaskError::new(self.code(), self.to_string())
    }
}

/// One line of the JSON-lines event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskEvent {
    pub task_id: String,
    pub state: TaskState,
    pub timestamp: DateTime<Utc>,
    pub attempts: u32,
}

pub fn read_event_log(path: &Path) -> std::io::Result<Vec<TaskEvent>> {
    let reader = BufReader::new(File::open(path)?);
    let mut events = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        events.push(
            serde_json::from_str(&line)
                .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?,
        );
    }
    Ok(events)
}

#[derive(Default)]
struct Tasks {
    by_id: HashMap<String, Arc<Mutex<Task>>>,
    order: Vec<String>,
}

/// Concurrent task store. Operations on one task are serialized by that
/// task's lock; different tasks proceed independently.
#[derive(Default)]
pub struct TaskStore {
    tasks: RwLock<Tasks>,
    log: Option<Mutex<File>>,
}

impl fmt::Debug for TaskStore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TaskStore")
            .field("tasks", &self.tasks.read().order.len())
            .field("logging", &self.log.is_some())
            .finish()
    }
}

impl TaskStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// A store that appends every history event to `path` as a JSON line.
    pub fn with_event_log(path: &Path) -> Result<Self, TaskStoreError> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(TaskStore {
            tasks: RwLock::default(),
            log: Some(Mutex::new(file)),
        })
    }

    pub fn create_task(&self, task_type: &str, parameters: JsonMap) -> Result<Task, TaskStoreError> {
        self.create_task_with_id(Uuid::new_v4().to_string(), task_type, parameters)
    }

    pub fn create_task_with_id(
        &self,
        task_id: String,
        task_type: &str,
        parameters: JsonMap,
    ) -> Result<Task, TaskStoreError> {
        if task_type.is_empty() {
            return Err(TaskStoreError::InvalidType);
        }
        let task = Task {
            task_id: task_id.clone(),
            task_type: task_type.to_string(),
            parameters,
            state: TaskState::Created,
            history: vec![HistoryEntry {
                state: TaskState::Created,
                timestamp: Utc::now(),
            }],
            artifacts: Vec::new(),
            error: None,
            attempts: 0,
            retry_delay_ms: None,
        };
        {
            let mut tasks = self.tasks.write();
            if tasks.by_id.contains_key(&task_id) {
                return Err(TaskStoreError::DuplicateTask(task_id));
            }
            tasks
                .by_id
                .insert(task_id.clone(), Arc::new(Mutex::new(task.clone())));
            tasks.order.push(task_id);
        }
        self.log_event(&task)?;
        Ok(task)
    }

    pub fn get(&self, task_id: &str) -> Option<Task> {
        self.handle(task_id).ok().map(|h| h.lock().clone())
    }

    /// Tasks in creation order.
    pub fn list(&self) -> Vec<Task> {
        let tasks = self.tasks.read();
        tasks
            .order
            .iter()
            .filter_map(|id| tasks.by_id.get(id))
            .map(|t| t.lock().clone())
            .collect()
    }

    pub fn len(&self) -> usize {
        self.tasks.read().order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn transition_task(&self, task_id: &str, new_state: TaskState) -> Result<Task, TaskStoreError> {
        self.with_task(task_id, |task| {
            check_transition(task, new_state)?;
            match new_state {
                TaskState::Failed => {
                    task.error = Some(TaskError::new(
                        ErrorCode::ExecFailed,
                        "task marked failed without an error record",
                    ));
                }
                TaskState::InProgress if task.state == TaskState::Failed => {
                    task.error = None;
                    task.attempts += 1;
                }
                _ => {}
            }
            push_state(task, new_state);
            Ok(vec![task.history.len() - 1])
        })
    }

    /// Attaches an artifact to an in-progress task.
    pub fn attach_artifact(&self, task_id: &str, artifact: Artifact) -> Result<Task, TaskStoreError> {
        self.with_task(task_id, |task| {
            if task.state != TaskState::InProgress {
                return Err(TaskStoreError::IllegalTransition {
                    from: task.state,
                    to: TaskState::InProgress,
                });
            }
            if task.artifacts.iter().any(|a| a.artifact_id == artifact.artifact_id) {
                return Err(TaskStoreError::DuplicateArtifact(artifact.artifact_id));
            }
            task.artifacts.push(artifact);
            Ok(vec![])
        })
    }

    pub fn complete_task(&self, task_id: &str, artifacts: Vec<Artifact>) -> Result<Task, TaskStoreError> {
        self.with_task(task_id, |task| {
            check_transition(task, TaskState::Completed)?;
            let mut ids: HashSet<&str> =
                task.artifacts.iter().map(|a| a.artifact_id.as_str()).collect();
            for a in &artifacts {
                if !ids.insert(a.artifact_id.as_str()) {
                    return Err(TaskStoreError::DuplicateArtifact(a.artifact_id.clone()));
                }
            }
            task.artifacts.extend(artifacts);
            task.error = None;
            push_state(task, TaskState::Completed);
            Ok(vec![task.history.len() - 1])
        })
    }

    /// Records a failure. A retryable error with attempts left is recorded as
    /// `failed` followed immediately by a retry back to `in_progress`.
    pub fn fail_task(
        &self,
        task_id: &str,
        error: TaskError,
        policy: &RetryPolicy,
    ) -> Result<Task, TaskStoreError> {
        policy.check()?;
        self.with_task(task_id, |task| {
            check_transition(task, TaskState::Failed)?;
            push_state(task, TaskState::Failed);
            let failed_at = task.history.len() - 1;
            if error.retryable && task.attempts < policy.max_attempts {
                task.attempts += 1;
                task.retry_delay_ms = Some(policy.delay_ms(task.attempts));
                task.error = None;
                push_state(task, TaskState::InProgress);
                Ok(vec![failed_at, failed_at + 1])
            } else {
                task.error = Some(error);
                task.retry_delay_ms = None;
                Ok(vec![failed_at])
            }
        })
    }

    fn handle(&self, task_id: &str) -> Result<Arc<Mutex<Task>>, TaskStoreError> {
        self.tasks
            .read()
            .by_id
            .get(task_id)
            .cloned()
            .ok_or_else(|| TaskStoreError::UnknownTask(task_id.to_string()))
    }

    // `op` returns the indices of history entries it appended; each is logged
    // while the task lock is still held so per-task log order matches history.
    fn with_task(
        &self,
        task_id: &str,
        op: impl FnOnce(&mut Task) -> Result<Vec<usize>, TaskStoreError>,
    ) -> Result<Task, TaskStoreError> {
        let handle = self.handle(task_id)?;
        let mut guard = handle.lock();
        let mut draft = guard.clone();
        let appended = op(&mut draft)?;
        *guard = draft;
        if let Some(log) = &self.log {
            let mut file = log.lock();
            for idx in appended {
                let entry = &guard.history[idx];
                write_event(&mut file, &guard, entry)?;
            }
        }
        Ok(guard.clone())
    }

    fn log_event(&self, task: &Task) -> Result<(), TaskStoreError> {
        if let Some(log) = &self.log {
            write_event(&mut log.lock(), task, &task.history[0])?;
        }
        Ok(())
    }
}

fn write_event(file: &mut File, task: &Task, entry: &HistoryEntry) -> std::io::Result<()> {
    let event = TaskEvent {
        task_id: task.task_id.clone(),
        state: entry.state,
        timestamp: entry.timestamp,
        attempts: task.attempts,
    };
    let line = serde_json::to_string(&event).expect("task events serialize");
    writeln!(file, "{line}")
}

fn check_transition(task: &Task, to: TaskState) -> Result<(), TaskStoreError> {
    if task.state.can_transition_to(to) {
        Ok(())
    } else {
        Err(TaskStoreError::IllegalTransition {
            from: task.state,
            to,
        })
    }
}

fn push_state(task: &mut Task, state: TaskState) {
    let now = Utc::now();
    let last = task.history.last().map(|h| h.timestamp).unwrap_or(now);
    task.history.push(HistoryEntry {
        state,
        timestamp: now.max(last),
    });
    task.state = state;
}
