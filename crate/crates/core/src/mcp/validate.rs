//! Recursive-descent conformance check of a value against a [`SchemaNode`].

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::schema::{literal_eq, type_matches, SchemaNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationCode {
    TypeMismatch,
    MissingRequired,
    EnumViolation,
    ExtraProperty,
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ViolationCode::TypeMismatch => "TYPE_MISMATCH",
            ViolationCode::MissingRequired => "MISSING_REQUIRED",
            ViolationCode::EnumViolation => "ENUM_VIOLATION",
            ViolationCode::ExtraProperty => "EXTRA_PROPERTY",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Violation {
    /// JSON path of the offending value, e.g. `$.headlines[2].title`.
    pub path: String,
    pub code: ViolationCode,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationOutcome {
    pub violations: Vec<Violation>,
    /// Undeclared object keys when validating permissively.
    pub warnings: Vec<Violation>,
}

impl ValidationOutcome {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Permissive validation: undeclared keys are allowed (see [`validate_value`] for warnings).
pub fn validate_params(schema: &SchemaNode, value: &Value) -> Vec<Violation> {
    validate_value(schema, value, false).violations
}

/// Validates `value`. With `strict`, undeclared object keys are violations
/// instead of warnings.
pub fn validate_value(schema: &SchemaNode, value: &Value, strict: bool) -> ValidationOutcome {
    let mut out = ValidationOutcome::default();
    walk(schema, value, "$".to_string(), strict, &mut out);
    out
}

fn walk(schema: &SchemaNode, value: &Value, path: String, strict: bool, out: &mut ValidationOutcome) {
    if !type_matches(schema.ty, value) {
        out.violations.push(Violation {
            detail: format!("expected {}, found {}", schema.ty, json_kind(value)),
            path,
            code: ViolationCode::TypeMismatch,
        });
        return;
    }
    if let Some(allowed) = &schema.enum_values {
        if !allowed.iter().any(|lit| literal_eq(lit, value)) {
            out.violations.push(Violation {
                detail: format!("{value} is not one of the allowed values"),
                path: path.clone(),
                code: ViolationCode::EnumViolation,
            });
        }
    }
    match value {
        Value::Object(map) => {
            for key in &schema.required {
                if !map.contains_key(key) {
                    out.violations.push(Violation {
                        path: format!("{path}.{key}"),
                        code: ViolationCode::MissingRequired,
                        detail: format!("required key {key:?} missing"),
                    });
                }
            }
            for (key, sub) in &schema.properties {
                if let Some(child) = map.get(key) {
                    walk(sub, child, format!("{path}.{key}"), strict, out);
                }
            }
            let mut extras: Vec<&String> = map
                .keys()
                .filter(|k| !schema.properties.contains_key(*k))
                .collect();
            extras.sort();
            for key in extras {
                let v = Violation {
                    path: format!("{path}.{key}"),
                    code: ViolationCode::ExtraProperty,
                    detail: format!("undeclared key {key:?}"),
                };
                if strict {
                    out.violations.push(v);
                } else {
                    out.warnings.push(v);
                }
            }
        }
        Value::Array(items) => {
            if let Some(item_schema) = &schema.items {
                for (i, item) in items.iter().enumerate() {
                    walk(item_schema, item, format!("{path}[{i}]"), strict, out);
                }
            }
        }
        _ => {}
    }
}

fn json_kind(value: &Value) -> &'static str {
    match value {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}
