use std::process::Command;

use agentmesh_core::message::{
    message_from_wire, message_from_wire_with_report, validate_message, MessageStatus,
};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};

use crate::{bin, data_dir, ensure, gen, Outcome};

const ROUND_TRIP_CASES: usize = 1000;
/// Generated messages canonicalized by two separate CLI processes each.
const CROSS_PROCESS_CASES: usize = 25;
const MUTATED_FIXTURES: usize = 100;
const SEED: u64 = 0xA2A_0001;

fn canonical_via_cli(path: &std::path::Path) -> Result<Vec<u8>, String> {
    let out = Command::new(bin())
        .args(["validate", "message"])
        .arg(path)
        .arg("--canonical")
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("validate {} exited {:?}", path.display(), out.status.code())
    })?;
    Ok(out.stdout)
}

pub fn ac1_round_trip() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED);
    let mut valid = Vec::new();
    for case in 0..ROUND_TRIP_CASES {
        let m = gen::message(&mut rng);
        let wire = m.to_wire();
        let back = message_from_wire(&wire).map_err(|e| format!("case {case}: {e}"))?;
        ensure(back == m, || format!("case {case}: round trip changed the message\n{wire}"))?;
        ensure(back.to_wire() == wire, || format!("case {case}: re-emission differs"))?;
        ensure(!wire.contains('\n'), || format!("case {case}: wire form spans lines"))?;
        if validate_message(&m).is_valid() && valid.len() < CROSS_PROCESS_CASES {
            valid.push(m);
        }
    }
    ensure(valid.len() == CROSS_PROCESS_CASES, || {
        format!("only {} valid messages generated", valid.len())
    })?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut files = vec![(data_dir().join("messages/query.json"), None)];
    for (i, m) in valid.iter().enumerate() {
        let path = dir.path().join(format!("m{i}.json"));
        // pretty and reordered on disk so the CLI has real work to do
        std::fs::write(&path, serde_json::to_string_pretty(&m.to_value()).unwrap()).map_err(|e| e.to_string())?;
        files.push((path, Some(format!("{}\n", m.to_wire()))));
    }
    for (path, expected) in &files {
        let first = canonical_via_cli(path)?;
        let second = canonical_via_cli(path)?;
        ensure(first == second, || format!("{}: two runs differ", path.display()))?;
        if let Some(e) = expected {
            ensure(first == e.as_bytes(), || {
                format!("{}: CLI output differs from in-process emission", path.display())
            })?;
        }
    }
    Ok(format!(
        "{ROUND_TRIP_CASES} messages exact; {} files byte-stable across 2 processes",
        files.len()
    ))
}

fn mutate(rng: &mut StdRng, base: &Value) -> Value {
    let mut v = base.clone();
    let header = v["header"].as_object_mut().unwrap();
    header.insert("status".into(), json!(gen::status(rng).as_str()));
    for _ in 0..rng.gen_range(1..=4) {
        let header = v["header"].as_object_mut().unwrap();
        match rng.gen_range(0..8) {
            0 => {
                header.insert("sender_agent_id".into(), json!(gen::string(rng, 1, 10)));
            }
            1 => {
                header.remove("task_id");
            }
            2 => {
                header.remove("timestamp");
            }
            3 => {
                header.remove("message_id");
            }
            4 => {
                v["body"] = Value::Object(gen::json_map(rng, 3));
            }
            5 => {
                v.as_object_mut().unwrap().remove("parts");
            }
            6 => {
                v.as_object_mut().unwrap().remove("body");
            }
            _ => {
                let parts = v
                    .as_object_mut()
                    .unwrap()
                    .entry("parts")
                    .or_insert_with(|| json!([]));
                parts
                    .as_array_mut()
                    .unwrap()
                    .push(json!({"kind": "text", "content": gen::string(rng, 0, 10)}));
            }
        }
    }
    v
}

pub fn ac2_default_status() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED + 2);
    let bases: Vec<Value> = ["query.json", "stock_request.json", "same_party.json"]
        .iter()
        .map(|f| {
            let text = std::fs::read_to_string(data_dir().join("messages").join(f)).unwrap();
            serde_json::from_str(&text).unwrap()
        })
        .collect();
    let mut kept = 0;
    for case in 0..MUTATED_FIXTURES {
        let base = bases.choose(&mut rng).unwrap();
        let mut v = mutate(&mut rng, base);
        let status = v["header"]["status"].clone();
        // control: an explicit status survives the same mutations
        let (with_status, _) = message_from_wire_with_report(&v.to_string()).map_err(|e| format!("case {case}: {e}"))?;
        ensure(json!(with_status.header.status.as_str()) == status, || {
            format!("case {case}: explicit status {status} not kept")
        })?;
        if with_status.header.status != MessageStatus::Pending {
            kept += 1;
        }
        v["header"].as_object_mut().unwrap().remove("status");
        let text = if rng.gen_bool(0.5) { v.to_string() } else { serde_json::to_string_pretty(&v).unwrap() };
        let (m, report) = message_from_wire_with_report(&text).map_err(|e| format!("case {case}: {e}"))?;
        ensure(m.header.status == MessageStatus::Pending, || {
            format!("case {case}: parsed as {:?}", m.header.status)
        })?;
        ensure(report.status_defaulted, || format!("case {case}: default not reported"))?;
    }
    Ok(format!(
        "{MUTATED_FIXTURES} mutated fixtures parse to pending; {kept} controls kept a non-pending status"
    ))
}
