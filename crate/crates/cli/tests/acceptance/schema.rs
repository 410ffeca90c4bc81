use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use agentmesh_core::mcp::{parse_tool_description, validate_value, Handler, HandlerError, SchemaNode, Toolbox};
use agentmesh_core::ErrorCode;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use serde_json::{json, Map, Value};

use crate::{ensure, Outcome};

const CASES: usize = 10_000;
const MAX_DEPTH: u32 = 3;
/// Share of cases (non-strict) that must fall on each side of the verdict.
const MIN_VERDICT_SHARE: f64 = 0.2;
const SEED: u64 = 0xA2A_0006;

const KEYS: [&str; 3] = ["p", "q", "r"];
const TYPES: [&str; 6] = ["string", "number", "integer", "boolean", "object", "array"];

fn universe_scalar(rng: &mut StdRng) -> Value {
    [
        Value::Null,
        json!(true),
        json!(false),
        json!(0),
        json!(1),
        json!(-1),
        json!(1.5),
        json!(2.0),
        json!(""),
        json!("a"),
        json!("b"),
    ]
    .choose(rng)
    .unwrap()
    .clone()
}

fn literal_for(ty: &str, rng: &mut StdRng) -> Value {
    match ty {
        "string" => json!(["a", "b", ""][rng.gen_range(0..3)]),
        "number" => json!([0.0, 1.5, -1.0][rng.gen_range(0..3)]),
        "integer" => json!([0, 1, -1][rng.gen_range(0..3)]),
        _ => json!(rng.gen_bool(0.5)),
    }
}

fn random_schema(rng: &mut StdRng, depth: u32) -> Value {
    let ty = TYPES[rng.gen_range(0..if depth == 0 { 4 } else { 6 })];
    let mut s = Map::new();
    s.insert("type".into(), json!(ty));
    match ty {
        "object" => {
            let mut props = Map::new();
            for k in KEYS {
                if rng.gen_bool(0.6) {
                    props.insert(k.into(), random_schema(rng, depth - 1));
                }
            }
            let required: Vec<&String> = props.keys().filter(|_| rng.gen_bool(0.5)).collect();
            s.insert("required".into(), json!(required));
            s.insert("properties".into(), Value::Object(props));
        }
        "array" => {
            s.insert("items".into(), random_schema(rng, depth - 1));
        }
        _ if rng.gen_bool(0.25) => {
            let lits: Vec<Value> = (0..rng.gen_range(1..=2)).map(|_| literal_for(ty, rng)).collect();
            s.insert("enum".into(), Value::Array(lits));
        }
        _ => {}
    }
    Value::Object(s)
}

fn random_value(rng: &mut StdRng, schema: &Value) -> Value {
    if rng.gen_bool(0.2) {
        return universe_scalar(rng);
    }
    match schema["type"].as_str().unwrap() {
        "object" => {
            let mut m = Map::new();
            for (k, sub) in schema["properties"].as_object().unwrap() {
                if rng.gen_bool(0.85) {
                    m.insert(k.clone(), random_value(rng, sub));
                }
            }
            if rng.gen_bool(0.15) {
                m.insert(KEYS[rng.gen_range(0..3)].into(), universe_scalar(rng));
            }
            if rng.gen_bool(0.1) {
                m.insert("extra".into(), universe_scalar(rng));
            }
            Value::Object(m)
        }
        "array" => {
            let n = rng.gen_range(0..=3);
            Value::Array((0..n).map(|_| random_value(rng, &schema["items"])).collect())
        }
        ty => match schema.get("enum").and_then(Value::as_array) {
            Some(lits) if rng.gen_bool(0.6) => lits.choose(rng).unwrap().clone(),
            _ => literal_for(ty, rng),
        },
    }
}

fn same_literal(a: &Value, b: &Value) -> bool {
    if a.is_number() && b.is_number() {
        a.as_f64() == b.as_f64()
    } else {
        a == b
    }
}

/// Brute-force conformance read straight off the schema JSON.
fn oracle(schema: &Value, value: &Value, strict: bool) -> bool {
    let ty_ok = match schema["type"].as_str().unwrap() {
        "string" => value.is_string(),
        "number" => value.is_number(),
        "integer" => value.is_number() && value.as_f64().is_some_and(|f| f.fract() == 0.0),
        "boolean" => value.is_boolean(),
        "object" => value.is_object(),
        "array" => value.is_array(),
        _ => false,
    };
    if !ty_ok {
        return false;
    }
    if let Some(lits) = schema.get("enum").and_then(Value::as_array) {
        if !lits.iter().any(|l| same_literal(l, value)) {
            return false;
        }
    }
    if let Some(obj) = value.as_object() {
        let props = schema["properties"].as_object().unwrap();
        let required_ok = schema["required"]
            .as_array()
            .unwrap()
            .iter()
            .all(|r| obj.contains_key(r.as_str().unwrap()));
        let members_ok = obj.iter().all(|(k, v)| match props.get(k) {
            Some(sub) => oracle(sub, v, strict),
            None => !strict,
        });
        return required_ok && members_ok;
    }
    if let Some(items) = value.as_array() {
        return items.iter().all(|v| oracle(&schema["items"], v, strict));
    }
    true
}

const TOOL: &str = r#"{
  "tool_id": "calc", "name": "Calc", "description": "", "version": "1.0.0",
  "functions": [{
    "name": "run", "description": "",
    "params_schema": {"type": "object", "properties": {"x": {"type": "integer"}}, "required": ["x"]},
    "returns_schema": {"type": "object", "properties": {"y": {"type": "integer"}}, "required": ["y"]}
  }]
}"#;

#[derive(Clone, Copy, Debug)]
enum Behaviour {
    Ok,
    Error,
    Panic,
}

/// Expected code and whether it must carry the RESULT_SCHEMA detail.
fn expected(
    tool: bool,
    function: bool,
    params: bool,
    session: Option<bool>,
    behaviour: Behaviour,
    result_ok: bool,
) -> Option<(ErrorCode, bool)> {
    if !tool {
        Some((ErrorCode::ToolNotFound, false))
    } else if !function {
        Some((ErrorCode::FnNotFound, false))
    } else if !params {
        Some((ErrorCode::ParamInvalid, false))
    } else if session == Some(false) {
        Some((ErrorCode::UnknownSession, false))
    } else {
        match behaviour {
            Behaviour::Error | Behaviour::Panic => Some((ErrorCode::ExecFailed, false)),
            Behaviour::Ok if !result_ok => Some((ErrorCode::ExecFailed, true)),
            Behaviour::Ok => None,
        }
    }
}

fn precedence_matrix() -> Result<usize, String> {
    let mut combos = 0;
    for tool in [true, false] {
        for function in [true, false] {
            for params in [true, false] {
                for session in [None, Some(true), Some(false)] {
                    for behaviour in [Behaviour::Ok, Behaviour::Error, Behaviour::Panic] {
                        for result_ok in [true, false] {
                            combos += 1;
                            let calls = Arc::new(AtomicUsize::new(0));
                            let c = calls.clone();
                            let handler = Handler::new(move |_, _| {
                                c.fetch_add(1, Ordering::SeqCst);
                                match behaviour {
                                    Behaviour::Ok if result_ok => Ok(json!({"y": 1})),
                                    Behaviour::Ok => Ok(json!({"y": "one"})),
                                    Behaviour::Error => Err(HandlerError::new("boom")),
                                    Behaviour::Panic => panic!("boom"),
                                }
                            });
                            let toolbox = Toolbox::new();
                            toolbox
                                .register_tool(
                                    parse_tool_description(TOOL).unwrap(),
                                    HashMap::from([("run".to_string(), handler)]),
                                )
                                .map_err(|e| e.to_string())?;
                            let session_id = match session {
                                None => None,
                                Some(true) => Some(toolbox.open_session()),
                                Some(false) => Some("no-such-session".to_string()),
                            };
                            let got = toolbox.call_function(
                                if tool { "calc" } else { "nope" },
                                if function { "run" } else { "walk" },
                                &if params { json!({"x": 2}) } else { json!({"x": "two"}) },
                                session_id.as_deref(),
                            );
                            let label = format!(
                                "tool={tool} fn={function} params={params} session={session:?} {behaviour:?} result_ok={result_ok}"
                            );
                            match (expected(tool, function, params, session, behaviour, result_ok), got) {
                                (None, Ok(r)) => ensure(r.value == json!({"y": 1}), || label.clone())?,
                                (None, Err(e)) => return Err(format!("{label}: unexpected {}", e.code)),
                                (Some((code, _)), Ok(_)) => return Err(format!("{label}: expected {code}")),
                                (Some((code, result_schema)), Err(err)) => {
                                    ensure(err.code == code, || format!("{label}: {} != {code}", err.code))?;
                                    let detail = err.details.as_ref().and_then(|d| d.get("detail")).and_then(Value::as_str);
                                    ensure((detail == Some("RESULT_SCHEMA")) == result_schema, || {
                                        format!("{label}: detail {detail:?}")
                                    })?;
                                    let ran = code == ErrorCode::ExecFailed;
                                    ensure((calls.load(Ordering::SeqCst) == 1) == ran, || {
                                        format!("{label}: handler ran = {}", !ran)
                                    })?;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(combos)
}

pub fn ac6_schema_validator() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED);
    let mut conforming = 0usize;
    for case in 0..CASES {
        let depth = rng.gen_range(0..=MAX_DEPTH);
        let schema_json = random_schema(&mut rng, depth);
        let schema = SchemaNode::parse(&schema_json, "$", &mut Vec::new()).map_err(|e| e.to_string())?;
        let value = random_value(&mut rng, &schema_json);
        for strict in [false, true] {
            let want = oracle(&schema_json, &value, strict);
            let got = validate_value(&schema, &value, strict).is_valid();
            ensure(got == want, || {
                format!("case {case} strict={strict}: validator {got}, oracle {want}; schema {schema_json} value {value}")
            })?;
            if want && !strict {
                conforming += 1;
            }
        }
    }
    let share = conforming as f64 / CASES as f64;
    ensure((MIN_VERDICT_SHARE..=1.0 - MIN_VERDICT_SHARE).contains(&share), || {
        format!("verdicts unbalanced: {conforming}/{CASES} conforming")
    })?;
    let combos = precedence_matrix()?;
    ensure(combos == 144, || format!("{combos} precedence combinations"))?;
    Ok(format!(
        "{CASES} cases x 2 modes agree with the oracle ({conforming} conforming); {combos} precedence combinations"
    ))
}
