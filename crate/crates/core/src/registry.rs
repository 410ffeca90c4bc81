//! In-memory agent registry with capability discovery.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use parking_lot::{Mutex, RwLock};

use crate::card::{AgentCard, CardError};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum RegistryError {
    #[error("invalid agent card: {0}")]
    InvalidCard(#[from] CardError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegistryEntry {
    pub card: AgentCard,
    pub registered_at: DateTime<Utc>,
}

/// Cards keyed by `agent_id`. Readers see either the previous or the new
/// card for an id, never a partially written one.
#[derive(Debug, Default)]
pub struct Registry {
    entries: RwLock<BTreeMap<String, RegistryEntry>>,
    clock: Mutex<Option<DateTime<Utc>>>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Validates and stores `card`, replacing any card with the same id.
    pub fn register(&self, card: AgentCard) -> Result<DateTime<Utc>, RegistryError> {
        card.validate()?;
        let registered_at = self.tick();
        self.entries.write().insert(
            card.agent_id.clone(),
            RegistryEntry {
                card,
                registered_at,
            },
        );
        Ok(registered_at)
    }

    // registration timestamps never go backwards, even if the wall clock does
    fn tick(&self) -> DateTime<Utc> {
        let mut last = self.clock.lock();
        let now = Utc::now();
        let ts = match *last {
            Some(prev) if prev > now => prev,
            _ => now,
        };
        *last = Some(ts);
        ts
    }

    pub fn get_card(&self, agent_id: &str) -> Option<AgentCard> {
        self.entries.read().get(agent_id).map(|e| e.card.clone())
    }

    pub fn get_entry(&self, agent_id: &str) -> Option<RegistryEntry> {
        self.entries.read().get(agent_id).cloned()
    }

    /// Cards advertising a capability named exactly `capability_name`, by ascending agent id.
    pub fn discover(&self, capability_name: &str) -> Vec<AgentCard> {
        self.entries
            .read()
            .values()
            .filter(|e| e.card.has_capability(capability_name))
            .map(|e| e.card.clone())
            .collect()
    }

    pub fn deregister(&self, agent_id: &str) -> bool {
        self.entries.write().remove(agent_id).is_some()
    }

    /// All cards by ascending agent id.
    pub fn list(&self) -> Vec<AgentCard> {
        self.entries.read().values().map(|e| e.card.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.read().is_empty()
    }
}
