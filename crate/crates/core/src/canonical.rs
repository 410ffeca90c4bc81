//! Canonical JSON emission.
//!
//! Canonical text is a single line, object keys sorted by their UTF-8 bytes,
//! no insignificant whitespace, and non-ASCII characters written as-is. Two
//! values that compare equal always produce the same bytes, regardless of the
//! map implementation backing `serde_json::Value`.

use serde::Serialize;
use serde_json::Value;

/// Writes `value` as canonical JSON text.
pub fn to_canonical_string(value: &Value) -> String {
    let mut out = String::new();
    write_value(value, &mut out);
    out
}

/// Serializes any `Serialize` type through `serde_json::Value` and emits it canonically.
pub fn to_canonical_string_of<T: Serialize>(value: &T) -> serde_json::Result<String> {
    Ok(to_canonical_string(&serde_json::to_value(value)?))
}

/// Re-emits arbitrary JSON text in canonical form.
pub fn canonicalize_text(text: &str) -> serde_json::Result<String> {
    let value: Value = serde_json::from_str(text)?;
    Ok(to_canonical_string(&value))
}

fn write_value(value: &Value, out: &mut String) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => out.push_str(&n.to_string()),
        Value::String(s) => write_string(s, out),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            let mut entries: Vec<(&String, &Value)> = map.iter().collect();
            entries.sort_by(|a, b| a.0.as_bytes().cmp(b.0.as_bytes()));
            out.push('{');
            for (i, (key, item)) in entries.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_string(key, out);
                out.push(':');
                write_value(item, out);
            }
            out.push('}');
        }
    }
}

fn write_string(s: &str, out: &mut String) {
    // serde_json escapes only quotes, backslashes and control characters.
    out.push_str(&serde_json::to_string(s).expect("string serialization is infallible"));
}
