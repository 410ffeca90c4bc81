use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use chrono::{DateTime, Utc};
use parking_lot::{Mutex, RwLock};
use serde::Serialize;
use serde_json::Value;
use uuid::Uuid;

use crate::error_code::ErrorCode;
use crate::task::TaskError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionContext {
    pub session_id: String,
    pub variables: BTreeMap<String, Value>,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
}

impl SessionContext {
    fn new(session_id: String) -> Self {
        let now = Utc::now();
        SessionContext {
            session_id,
            variables: BTreeMap::new(),
            created_at: now,
            updated_at: now,
        }
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.variables.get(key)
    }

    pub fn set(&mut self, key: impl Into<String>, value: Value) {
        self.variables.insert(key.into(), value);
        self.updated_at = Utc::now().max(self.updated_at);
    }
}

/// Sessions by id. Each session has its own lock, so updates to one session
/// are serialized without blocking others.
#[derive(Debug, Default)]
pub struct SessionStore {
    sessions: RwLock<HashMap<String, Arc<Mutex<SessionContext>>>>,
}

fn unknown(session_id: &str) -> TaskError {
    TaskError::new(ErrorCode::UnknownSession, format!("unknown session {session_id}"))
}

impl SessionStore {
    pub fn open(&self) -> String {
        let id = Uuid::new_v4().to_string();
        self.sessions
            .write()
            .insert(id.clone(), Arc::new(Mutex::new(SessionContext::new(id.clone()))));
        id
    }

    pub(crate) fn handle(&self, session_id: &str) -> Result<Arc<Mutex<SessionContext>>, TaskError> {
        self.sessions
            .read()
            .get(session_id)
            .cloned()
            .ok_or_else(|| unknown(session_id))
    }

    pub fn update(&self, session_id: &str, key: &str, value: Value) -> Result<(), TaskError> {
        self.handle(session_id)?.lock().set(key, value);
        Ok(())
    }

    /// `Ok(None)` for a key that was never written.
    pub fn read(&self, session_id: &str, key: &str) -> Result<Option<Value>, TaskError> {
        Ok(self.handle(session_id)?.lock().get(key).cloned())
    }

    pub fn snapshot(&self, session_id: &str) -> Result<SessionContext, TaskError> {
        Ok(self.handle(session_id)?.lock().clone())
    }

    pub fn close(&self, session_id: &str) -> Result<(), TaskError> {
        self.sessions
            .write()
            .remove(session_id)
            .map(|_| ())
            .ok_or_else(|| unknown(session_id))
    }
}
