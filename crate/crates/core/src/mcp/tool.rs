use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Map, Value};

use super::schema::SchemaNode;
use super::validate::validate_value;
use super::ToolError;
use crate::canonical::to_canonical_string;
use crate::card::{is_semver_triple, SchemaTypeName};

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionSpec {
    pub name: String,
    pub description: String,
    pub params_schema: SchemaNode,
    pub returns_schema: SchemaNode,
    /// Renames applied to the keys of a handler's object result before it is
    /// checked against `returns_schema` (handler key -> declared key).
    pub field_map: BTreeMap<String, String>,
}

impl FunctionSpec {
    /// Applies `field_map` to an object result; other values pass through.
    pub fn convert_result(&self, value: Value) -> Value {
        match value {
            Value::Object(map) if !self.field_map.is_empty() => Value::Object(
                map.into_iter()
                    .map(|(k, v)| (self.field_map.get(&k).cloned().unwrap_or(k), v))
                    .collect(),
            ),
            other => other,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToolExample {
    pub function: String,
    pub params: Value,
    pub result: Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToolDescription {
    pub tool_id: String,
    pub name: String,
    pub description: String,
    pub version: String,
    pub functions: Vec<FunctionSpec>,
    pub examples: Vec<ToolExample>,
}

pub fn parse_tool_description(text: &str) -> Result<ToolDescription, ToolError> {
    parse_tool_description_with_warnings(text).map(|(t, _)| t)
}

pub fn parse_tool_description_with_warnings(
    text: &str,
) -> Result<(ToolDescription, Vec<String>), ToolError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ToolError::Parse(e.to_string()))?;
    let mut warnings = Vec::new();
    let tool = ToolDescription::from_value(&value, &mut warnings)?;
    Ok((tool, warnings))
}

fn string_field(obj: &Map<String, Value>, key: &str, path: &str, required: bool) -> Result<String, ToolError> {
    match obj.get(key) {
        Some(Value::String(s)) => Ok(s.clone()),
        Some(_) => Err(ToolError::schema(path, format!("{key} is not a string"))),
        None if required => Err(ToolError::schema(path, format!("{key} missing"))),
        None => Ok(String::new()),
    }
}

impl ToolDescription {
    pub fn function(&self, name: &str) -> Option<&FunctionSpec> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn from_value(value: &Value, warnings: &mut Vec<String>) -> Result<Self, ToolError> {
        let obj = value
            .as_object()
            .ok_or_else(|| ToolError::schema("$", "tool description is not an object"))?;
        let tool_id = string_field(obj, "tool_id", "$", true)?;
        if tool_id.is_empty() {
            return Err(ToolError::schema("$", "tool_id is empty"));
        }
        let name = string_field(obj, "name", "$", true)?;
        let description = string_field(obj, "description", "$", false)?;
        let version = string_field(obj, "version", "$", true)?;
        if !is_semver_triple(&version) {
            return Err(ToolError::schema("$", format!("version {version:?} is not MAJOR.MINOR.PATCH")));
        }

        let raw_functions = obj
            .get("functions")
            .and_then(Value::as_array)
            .ok_or_else(|| ToolError::schema("$", "functions missing or not an array"))?;
        if raw_functions.is_empty() {
            return Err(ToolError::schema("$", "functions is empty"));
        }
        let mut functions = Vec::with_capacity(raw_functions.len());
        let mut names = BTreeSet::new();
        for (i, raw) in raw_functions.iter().enumerate() {
            let path = format!("$.functions[{i}]");
            let f = parse_function(raw, &path, warnings)?;
            if !names.insert(f.name.clone()) {
                return Err(ToolError::schema(&path, format!("duplicate function {:?}", f.name)));
            }
            functions.push(f);
        }

        let mut tool = ToolDescription {
            tool_id,
            name,
            description,
            version,
            functions,
            examples: Vec::new(),
        };

        if let Some(raw_examples) = obj.get("examples") {
            let list = raw_examples
                .as_array()
                .ok_or_else(|| ToolError::schema("$", "examples is not an array"))?;
            for (i, raw) in list.iter().enumerate() {
                let path = format!("$.examples[{i}]");
                let example = parse_example(raw, &path)?;
                tool.check_example(&example, &path)?;
                tool.examples.push(example);
            }
        }

        for key in obj.keys() {
            if !["tool_id", "name", "description", "version", "functions", "examples"].contains(&key.as_str()) {
                warnings.push(format!("$: unsupported field {key:?} ignored"));
            }
        }
        Ok(tool)
    }

    fn check_example(&self, example: &ToolExample, path: &str) -> Result<(), ToolError> {
        let f = self.function(&example.function).ok_or_else(|| {
            ToolError::schema(path, format!("example names unknown function {:?}", example.function))
        })?;
        if !validate_value(&f.params_schema, &example.params, false).is_valid() {
            return Err(ToolError::schema(path, "example params do not satisfy params_schema"));
        }
        if !validate_value(&f.returns_schema, &example.result, false).is_valid() {
            return Err(ToolError::schema(path, "example result does not satisfy returns_schema"));
        }
        Ok(())
    }

    pub fn to_value(&self) -> Value {
        json!({
            "tool_id": self.tool_id,
            "name": self.name,
            "description": self.description,
            "version": self.version,
            "functions": self.functions.iter().map(|f| {
                let mut obj = json!({
                    "name": f.name,
                    "description": f.description,
                    "params_schema": f.params_schema.to_value(),
                    "returns_schema": f.returns_schema.to_value(),
                });
                if !f.field_map.is_empty() {
                    obj["field_map"] = json!(f.field_map);
                }
                obj
            }).collect::<Vec<_>>(),
            "examples": self.examples.iter().map(|e| json!({
                "function": e.function,
                "params": e.params,
                "result": e.result,
            })).collect::<Vec<_>>(),
        })
    }

    pub fn to_canonical_json(&self) -> String {
        to_canonical_string(&self.to_value())
    }
}

fn parse_function(raw: &Value, path: &str, warnings: &mut Vec<String>) -> Result<FunctionSpec, ToolError> {
    let obj = raw
        .as_object()
        .ok_or_else(|| ToolError::schema(path, "function is not an object"))?;
    let name = string_field(obj, "name", path, true)?;
    if name.is_empty() {
        return Err(ToolError::schema(path, "function name is empty"));
    }
    let description = string_field(obj, "description", path, false)?;
    let params_schema = SchemaNode::parse(
        obj.get("params_schema")
            .ok_or_else(|| ToolError::schema(path, "params_schema missing"))?,
        &format!("{path}.params_schema"),
        warnings,
    )?;
    if params_schema.ty != SchemaTypeName::Object {
        return Err(ToolError::schema(path, "params_schema must have type object"));
    }
    let returns_schema = SchemaNode::parse(
        obj.get("returns_schema")
            .ok_or_else(|| ToolError::schema(path, "returns_schema missing"))?,
        &format!("{path}.returns_schema"),
        warnings,
    )?;
    let field_map = match obj.get("field_map") {
        None => BTreeMap::new(),
        Some(Value::Object(m)) => m
            .iter()
            .map(|(k, v)| {
                v.as_str()
                    .map(|s| (k.clone(), s.to_string()))
                    .ok_or_else(|| ToolError::schema(path, "field_map values must be strings"))
            })
            .collect::<Result<_, _>>()?,
        Some(_) => return Err(ToolError::schema(path, "field_map is not an object")),
    };
    Ok(FunctionSpec {
        name,
        description,
        params_schema,
        returns_schema,
        field_map,
    })
}

fn parse_example(raw: &Value, path: &str) -> Result<ToolExample, ToolError> {
    let obj = raw
        .as_object()
        .ok_or_else(|| ToolError::schema(path, "example is not an object"))?;
    Ok(ToolExample {
        function: string_field(obj, "function", path, true)?,
        params: obj.get("params").cloned().unwrap_or(Value::Object(Map::new())),
        result: obj.get("result").cloned().unwrap_or(Value::Null),
    })
}
