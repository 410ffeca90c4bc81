//! Agent cards: the JSON metadata an agent publishes so others can find it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::canonical::to_canonical_string;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum CardError {
    #[error("malformed JSON: {0}")]
    Parse(String),
    #[error("agent card schema error: {0}")]
    Schema(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemaTypeName {
    String,
    Number,
    Integer,
    Boolean,
    Object,
    Array,
}

impl SchemaTypeName {
    pub const ALL: [SchemaTypeName; 6] = [
        SchemaTypeName::String,
        SchemaTypeName::Number,
        SchemaTypeName::Integer,
        SchemaTypeName::Boolean,
        SchemaTypeName::Object,
        SchemaTypeName::Array,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SchemaTypeName::String => "string",
            SchemaTypeName::Number => "number",
            SchemaTypeName::Integer => "integer",
            SchemaTypeName::Boolean => "boolean",
            SchemaTypeName::Object => "object",
            SchemaTypeName::Array => "array",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.as_str() == s)
    }
}

impl fmt::Display for SchemaTypeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Capability {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub parameters: BTreeMap<String, SchemaTypeName>,
    #[serde(default)]
    pub returns: BTreeMap<String, SchemaTypeName>,
    /// Extra string-valued keys found next to the capability fields (for
    /// example a `"timestamp": "string"` sibling of `returns`). They are kept
    /// and re-emitted at the same level.
    #[serde(flatten)]
    pub metadata: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AuthScheme {
    #[default]
    None,
    Bearer,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuthRequirement {
    #[serde(default)]
    pub scheme: AuthScheme,
    #[serde(default)]
    pub scopes: Vec<String>,
}

impl AuthRequirement {
    fn is_default(&self) -> bool {
        self.scheme == AuthScheme::None && self.scopes.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentCard {
    pub agent_id: String,
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub version: String,
    pub capabilities: Vec<Capability>,
    #[serde(default, skip_serializing_if = "AuthRequirement::is_default")]
    pub auth: AuthRequirement,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
}

/// `MAJOR.MINOR.PATCH`, each a run of ASCII digits.
pub fn is_semver_triple(version: &str) -> bool {
    let parts: Vec<&str> = version.split('.').collect();
    parts.len() == 3
        && parts
            .iter()
            .all(|p| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit()))
}

impl AgentCard {
    pub fn validate(&self) -> Result<(), CardError> {
        if self.agent_id.is_empty() {
            return Err(CardError::Schema("agent_id is empty".into()));
        }
        if self.name.is_empty() {
            return Err(CardError::Schema("name is empty".into()));
        }
        if !is_semver_triple(&self.version) {
            return Err(CardError::Schema(format!(
                "version {:?} is not MAJOR.MINOR.PATCH",
                self.version
            )));
        }
        if self.capabilities.is_empty() {
            return Err(CardError::Schema("capabilities is empty".into()));
        }
        let mut seen = BTreeSet::new();
        for cap in &self.capabilities {
            if cap.name.is_empty() {
                return Err(CardError::Schema("capability with empty name".into()));
            }
            if !seen.insert(cap.name.as_str()) {
                return Err(CardError::Schema(format!(
                    "duplicate capability {:?}",
                    cap.name
                )));
            }
        }
        if self.auth.scheme == AuthScheme::None && !self.auth.scopes.is_empty() {
            return Err(CardError::Schema("auth scheme none cannot carry scopes".into()));
        }
        Ok(())
    }

    pub fn capability(&self, name: &str) -> Option<&Capability> {
        self.capabilities.iter().find(|c| c.name == name)
    }

    pub fn has_capability(&self, name: &str) -> bool {
        self.capability(name).is_some()
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("agent cards always serialize")
    }

    pub fn to_canonical_json(&self) -> String {
        to_canonical_string(&self.to_value())
    }

    pub fn from_value(value: Value) -> Result<AgentCard, CardError> {
        let card: AgentCard =
            serde_json::from_value(value).map_err(|e| CardError::Schema(e.to_string()))?;
        card.validate()?;
        Ok(card)
    }
}

pub fn parse_agent_card(text: &str) -> Result<AgentCard, CardError> {
    let value: Value = serde_json::from_str(text).map_err(|e| CardError::Parse(e.to_string()))?;
    AgentCard::from_value(value)
}
