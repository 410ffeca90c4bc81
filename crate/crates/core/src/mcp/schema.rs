//! JSON-Schema subset used by tool descriptions: the six basic types plus
//! `properties`, `required`, `items` and `enum`.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{Map, Value};

use super::ToolError;
use crate::card::SchemaTypeName;

const KNOWN_KEYWORDS: [&str; 6] = ["type", "properties", "required", "items", "enum", "description"];

#[derive(Debug, Clone, PartialEq)]
pub struct SchemaNode {
    pub ty: SchemaTypeName,
    pub properties: BTreeMap<String, SchemaNode>,
    pub required: Vec<String>,
    pub items: Option<Box<SchemaNode>>,
    pub enum_values: Option<Vec<Value>>,
    pub description: Option<String>,
    /// Keywords outside the supported subset. Kept for re-emission, never enforced.
    pub unknown_keywords: BTreeMap<String, Value>,
}

impl SchemaNode {
    pub fn of(ty: SchemaTypeName) -> Self {
        SchemaNode {
            ty,
            properties: BTreeMap::new(),
            required: Vec::new(),
            items: None,
            enum_values: None,
            description: None,
            unknown_keywords: BTreeMap::new(),
        }
    }

    pub fn object(properties: impl IntoIterator<Item = (String, SchemaNode)>, required: Vec<String>) -> Self {
        SchemaNode {
            properties: properties.into_iter().collect(),
            required,
            ..SchemaNode::of(SchemaTypeName::Object)
        }
    }

    pub fn array(items: SchemaNode) -> Self {
        SchemaNode {
            items: Some(Box::new(items)),
            ..SchemaNode::of(SchemaTypeName::Array)
        }
    }

    pub fn with_enum(mut self, values: Vec<Value>) -> Self {
        self.enum_values = Some(values);
        self
    }

    /// Parses a schema, appending a warning for every unsupported keyword.
    pub fn parse(value: &Value, path: &str, warnings: &mut Vec<String>) -> Result<Self, ToolError> {
        let obj = value
            .as_object()
            .ok_or_else(|| ToolError::schema(path, "schema is not an object"))?;
        let ty = match obj.get("type") {
            Some(Value::String(s)) => SchemaTypeName::parse(s)
                .ok_or_else(|| ToolError::schema(path, format!("unknown type {s:?}")))?,
            Some(_) => return Err(ToolError::schema(path, "type is not a string")),
            None => return Err(ToolError::schema(path, "type missing")),
        };
        let mut node = SchemaNode::of(ty);

        if let Some(props) = obj.get("properties") {
            if ty != SchemaTypeName::Object {
                return Err(ToolError::schema(path, "properties only allowed on object schemas"));
            }
            let props = props
                .as_object()
                .ok_or_else(|| ToolError::schema(path, "properties is not an object"))?;
            for (key, sub) in props {
                let child = SchemaNode::parse(sub, &format!("{path}.properties.{key}"), warnings)?;
                node.properties.insert(key.clone(), child);
            }
        }

        if let Some(req) = obj.get("required") {
            if ty != SchemaTypeName::Object {
                return Err(ToolError::schema(path, "required only allowed on object schemas"));
            }
            let list = req
                .as_array()
                .ok_or_else(|| ToolError::schema(path, "required is not an array"))?;
            let mut seen = BTreeSet::new();
            for item in list {
                let name = item
                    .as_str()
                    .ok_or_else(|| ToolError::schema(path, "required entries must be strings"))?;
                if !node.properties.contains_key(name) {
                    return Err(ToolError::schema(
                        path,
                        format!("required key {name:?} is not declared in properties"),
                    ));
                }
                if seen.insert(name) {
                    node.required.push(name.to_string());
                }
            }
        }

        match (ty, obj.get("items")) {
            (SchemaTypeName::Array, Some(items)) => {
                node.items = Some(Box::new(SchemaNode::parse(items, &format!("{path}.items"), warnings)?));
            }
            (SchemaTypeName::Array, None) => {
                return Err(ToolError::schema(path, "array schema needs items"));
            }
            (_, Some(_)) => return Err(ToolError::schema(path, "items only allowed on array schemas")),
            (_, None) => {}
        }

        if let Some(values) = obj.get("enum") {
            let values = values
                .as_array()
                .ok_or_else(|| ToolError::schema(path, "enum is not an array"))?;
            if let Some(bad) = values.iter().find(|v| !type_matches(ty, v)) {
                return Err(ToolError::schema(
                    path,
                    format!("enum literal {bad} does not have type {ty}"),
                ));
            }
            node.enum_values = Some(values.clone());
        }

        match obj.get("description") {
            None => {}
            Some(Value::String(s)) => node.description = Some(s.clone()),
            Some(_) => return Err(ToolError::schema(path, "description is not a string")),
        }

        for (key, value) in obj {
            if !KNOWN_KEYWORDS.contains(&key.as_str()) {
                warnings.push(format!("{path}: unsupported keyword {key:?} ignored"));
                node.unknown_keywords.insert(key.clone(), value.clone());
            }
        }
        Ok(node)
    }

    pub fn to_value(&self) -> Value {
        let mut obj = Map::new();
        for (k, v) in &self.unknown_keywords {
            obj.insert(k.clone(), v.clone());
        }
        obj.insert("type".into(), Value::String(self.ty.as_str().into()));
        if !self.properties.is_empty() {
            obj.insert(
                "properties".into(),
                Value::Object(
                    self.properties
                        .iter()
                        .map(|(k, v)| (k.clone(), v.to_value()))
                        .collect(),
                ),
            );
        }
        if !self.required.is_empty() {
            obj.insert(
                "required".into(),
                Value::Array(self.required.iter().cloned().map(Value::String).collect()),
            );
        }
        if let Some(items) = &self.items {
            obj.insert("items".into(), items.to_value());
        }
        if let Some(values) = &self.enum_values {
            obj.insert("enum".into(), Value::Array(values.clone()));
        }
        if let Some(d) = &self.description {
            obj.insert("description".into(), Value::String(d.clone()));
        }
        Value::Object(obj)
    }
}

/// Integers are numbers with no fractional part, whichever way they were written.
pub fn is_integral(value: &Value) -> bool {
    match value {
        Value::Number(n) => {
            n.is_i64() || n.is_u64() || n.as_f64().is_some_and(|f| f.is_finite() && f.fract() == 0.0)
        }
        _ => false,
    }
}

pub fn type_matches(ty: SchemaTypeName, value: &Value) -> bool {
    match ty {
        SchemaTypeName::String => value.is_string(),
        SchemaTypeName::Number => value.is_number(),
        SchemaTypeName::Integer => is_integral(value),
        SchemaTypeName::Boolean => value.is_boolean(),
        SchemaTypeName::Object => value.is_object(),
        SchemaTypeName::Array => value.is_array(),
    }
}

/// JSON equality, except that numbers compare by numeric value (`1 == 1.0`).
pub fn literal_eq(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => x.as_f64() == y.as_f64(),
        (Value::Array(x), Value::Array(y)) => {
            x.len() == y.len() && x.iter().zip(y).all(|(p, q)| literal_eq(p, q))
        }
        (Value::Object(x), Value::Object(y)) => {
            x.len() == y.len()
                && x.iter().all(|(k, v)| y.get(k).is_some_and(|w| literal_eq(v, w)))
        }
        _ => a == b,
    }
}
