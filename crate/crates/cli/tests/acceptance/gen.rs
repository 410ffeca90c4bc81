//! Seeded generators for messages and JSON values.

use agentmesh_core::message::{A2AMessage, JsonMap, MessageHeader, MessagePart, MessageStatus, PartKind};
use chrono::{SecondsFormat, TimeZone, Utc};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::Value;

const CHAR_POOL: &[char] = &[
    'a', 'b', 'Z', '0', '9', ' ', '-', '_', '.', '"', '\\', '/', '\n', '\t', '\u{0}', '\u{1f}', '\u{7f}',
    'é', 'ß', '中', '삼', '\u{2028}', '😀', '\u{fffd}',
];

pub fn string(rng: &mut StdRng, min: usize, max: usize) -> String {
    let n = rng.gen_range(min..=max);
    (0..n).map(|_| *CHAR_POOL.choose(rng).unwrap()).collect()
}

fn finite_f64(rng: &mut StdRng) -> f64 {
    loop {
        let f = match rng.gen_range(0..4) {
            0 => f64::from_bits(rng.gen()),
            1 => rng.gen_range(-1e6..1e6),
            2 => rng.gen_range(-1.0..1.0) * 1e-300,
            _ => rng.gen_range(-1000i64..1000) as f64 / 100.0,
        };
        if f.is_finite() {
            return f;
        }
    }
}

pub fn json_value(rng: &mut StdRng, depth: u32) -> Value {
    let leaf = depth == 0 || rng.gen_bool(0.5);
    if leaf {
        return match rng.gen_range(0..6) {
            0 => Value::Null,
            1 => Value::Bool(rng.gen()),
            2 => Value::from(rng.gen::<i64>()),
            3 => Value::from(rng.gen::<u64>()),
            4 => Value::from(finite_f64(rng)),
            _ => Value::String(string(rng, 0, 12)),
        };
    }
    if rng.gen_bool(0.5) {
        let n = rng.gen_range(0..4);
        Value::Array((0..n).map(|_| json_value(rng, depth - 1)).collect())
    } else {
        Value::Object(json_map(rng, depth - 1))
    }
}

pub fn json_map(rng: &mut StdRng, depth: u32) -> JsonMap {
    let n = rng.gen_range(0..5);
    (0..n).map(|_| (string(rng, 0, 8), json_value(rng, depth))).collect()
}

fn part(rng: &mut StdRng) -> MessagePart {
    let metadata = (0..rng.gen_range(0..3))
        .map(|_| (string(rng, 1, 6), string(rng, 0, 8)))
        .collect();
    let (kind, content) = match rng.gen_range(0..3) {
        0 => (PartKind::Text, Value::String(string(rng, 0, 20))),
        1 => (PartKind::Data, Value::Object(json_map(rng, 2))),
        _ => (
            PartKind::Other(["image", "file", "audio"].choose(rng).unwrap().to_string()),
            json_value(rng, 2),
        ),
    };
    MessagePart { kind, content, metadata }
}

pub fn status(rng: &mut StdRng) -> MessageStatus {
    *[
        MessageStatus::Pending,
        MessageStatus::Delivered,
        MessageStatus::Processed,
        MessageStatus::Failed,
    ]
    .choose(rng)
    .unwrap()
}

pub fn message(rng: &mut StdRng) -> A2AMessage {
    let secs = rng.gen_range(0i64..4_102_444_800);
    A2AMessage {
        header: MessageHeader {
            sender_agent_id: string(rng, 1, 16),
            recipient_agent_id: string(rng, 1, 16),
            task_id: rng.gen_bool(0.5).then(|| string(rng, 1, 16)),
            message_id: uuid::Uuid::from_u128(rng.gen()).to_string(),
            timestamp: Utc
                .timestamp_opt(secs, 0)
                .unwrap()
                .to_rfc3339_opts(SecondsFormat::Secs, true),
            status: status(rng),
        },
        body: json_map(rng, 3),
        parts: (0..rng.gen_range(0..4)).map(|_| part(rng)).collect(),
    }
}
