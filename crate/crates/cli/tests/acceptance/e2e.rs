use std::collections::BTreeSet;
use std::process::Command;

use agentmesh_core::canonical::{canonicalize_text, to_canonical_string};
use agentmesh_core::message::MessageStatus;
use agentmesh_core::runtime::query_message;
use agentmesh_core::{parse_agent_card, Runtime, RuntimeConfig, TaskState, Transport};
use agentmesh_service::{spawn, HttpClient, ServerHandle, ServiceConfig};
use serde_json::{json, Value};

use crate::{bin, data_dir, ensure, Outcome};

const TOKEN: &str = "acceptance-token";
const SAMSUNG_QUERY: &str =
    "Please provide the recent stock price, news, and investment perspective analysis for Samsung Electronics.";
const UNKNOWN_TICKER_QUERY: &str = "What is the stock price of ZZZZZ?";
/// Keys removed (at any depth) before comparing replies.
const NORMALIZED_KEYS: [&str; 3] = ["task_id", "message_id", "timestamp"];
const EXPECTED_ROUTE: [&str; 8] = [
    "parse_request",
    "plan_tasks",
    "get_stock_data",
    "get_news_data",
    "get_company_info",
    "get_financial_data",
    "analyze_data",
    "generate_response",
];
const EXPECTED_SECTIONS: [&str; 5] = ["price", "news", "company", "financials", "analysis"];
const HOP_CAPABILITIES: [&str; 5] = [
    "analyze_company",
    "get_company_info",
    "get_financials",
    "get_news",
    "get_stock_price",
];

const TRANSPORT_QUERIES: [&str; 20] = [
    SAMSUNG_QUERY,
    "latest news for AAPL",
    "price of AAPL and MSFT",
    "company overview of Tesla",
    "financial statements of SK hynix",
    "investment outlook for 삼성전자",
    "stock price, news, company overview and financial statements for MSFT",
    "How is TSLA trading today?",
    "analysis of Apple Inc",
    "news about Microsoft Corporation and Tesla Motors",
    "stock price of ZZZZZ",
    "hello",
    "",
    "SK하이닉스 price and news",
    "revenue and profit of 000660.KS",
    "Compare the share price of Samsung and Apple",
    "news, analysis for TSLA",
    UNKNOWN_TICKER_QUERY,
    "company info for AAPL, MSFT, TSLA",
    "recent stock price for 005930.KS",
];

fn runtime() -> Runtime {
    Runtime::load(&RuntimeConfig::from_data_dir(&data_dir())).expect("shipped data loads")
}

fn server() -> Result<ServerHandle, String> {
    let cfg = ServiceConfig::for_data_dir(&data_dir(), "127.0.0.1:0", vec![TOKEN.into()]);
    spawn(&cfg).map_err(|e| e.to_string())
}

fn normalize(v: &Value) -> Value {
    match v {
        Value::Object(m) => Value::Object(
            m.iter()
                .filter(|(k, _)| !NORMALIZED_KEYS.contains(&k.as_str()))
                .map(|(k, v)| (k.clone(), normalize(v)))
                .collect(),
        ),
        Value::Array(a) => Value::Array(a.iter().map(normalize).collect()),
        other => other.clone(),
    }
}

fn section_names(response: &Value) -> Vec<String> {
    response["sections"]
        .as_array()
        .map(|s| s.iter().filter_map(|x| x["name"].as_str().map(String::from)).collect())
        .unwrap_or_default()
}

fn route(body: &Value) -> Vec<String> {
    body["route"]
        .as_array()
        .map(|r| r.iter().filter_map(|n| n.as_str().map(String::from)).collect())
        .unwrap_or_default()
}

fn is_subsequence(needle: &[&str], hay: &[String]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|n| it.any(|h| h == n))
}

/// Reply body and status for `query` sent in-process.
fn ask_in_process(rt: &Runtime, query: &str) -> Result<(MessageStatus, Value), String> {
    let request = rt.query_message("acceptance", query, None).map_err(|e| e.to_string())?;
    let reply = rt.transport().send(&request).map_err(|e| e.to_string())?;
    Ok((reply.header.status, Value::Object(reply.body)))
}

pub fn ac3_card_conformance() -> Outcome {
    let path = data_dir().join("cards/stock-price-agent.json");
    let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
    let card = parse_agent_card(&text).map_err(|e| e.to_string())?;
    card.validate().map_err(|e| e.to_string())?;
    let expected = canonicalize_text(&text).map_err(|e| e.to_string())?;
    ensure(card.to_canonical_json() == expected, || "re-emitted card differs from fixture".into())?;

    let status = Command::new(bin()).args(["validate", "card"]).arg(&path).output().map_err(|e| e.to_string())?;
    ensure(status.status.success(), || format!("validate card exited {:?}", status.status.code()))?;

    let srv = server()?;
    let client = HttpClient::new(&srv.base_url(), Some(TOKEN.into())).map_err(|e| e.to_string())?;
    let served = client.card_text("stock-price-agent").map_err(|e| e.to_string())?;
    ensure(served == expected, || format!("served card differs:\n{served}\n{expected}"))?;
    Ok(format!("fixture valid; served card byte-equal to canonical form ({} bytes)", served.len()))
}

pub fn ac8_stock_query() -> Outcome {
    let rt = runtime();
    let (status, body) = ask_in_process(&rt, SAMSUNG_QUERY)?;
    ensure(status == MessageStatus::Processed, || format!("reply status {status:?}: {body}"))?;

    let r = route(&body);
    ensure(r.first().map(String::as_str) == Some("parse_request"), || format!("route {r:?}"))?;
    ensure(r.last().map(String::as_str) == Some("generate_response"), || format!("route {r:?}"))?;
    ensure(is_subsequence(&EXPECTED_ROUTE, &r), || format!("route {r:?} misses the expected order"))?;
    ensure(!r.iter().any(|n| n == "handle_error"), || format!("route {r:?} visits handle_error"))?;

    let response = &body["response"];
    let names = section_names(response);
    ensure(names[..EXPECTED_SECTIONS.len().min(names.len())] == EXPECTED_SECTIONS, || {
        format!("sections {names:?}")
    })?;
    ensure(
        response["sections"][EXPECTED_SECTIONS.len()]["content"] == json!([]),
        || "errors section is not empty".into(),
    )?;

    let tasks = rt.tasks.list();
    let hop_tasks: Vec<_> = tasks.iter().filter(|t| t.task_type != "answer_query").collect();
    let types: BTreeSet<&str> = hop_tasks.iter().map(|t| t.task_type.as_str()).collect();
    ensure(hop_tasks.len() == HOP_CAPABILITIES.len(), || format!("{} hop tasks", hop_tasks.len()))?;
    ensure(types.into_iter().eq(HOP_CAPABILITIES), || "hop task types differ".into())?;
    ensure(tasks.iter().all(|t| t.state == TaskState::Completed), || "a task did not complete".into())?;

    // per-hop view: every recorded hop points at its own completed task
    let rt2 = runtime();
    let (state, _) = rt2.orchestrator().ok_or("no orchestrator")?.run(SAMSUNG_QUERY, 64).map_err(|e| e.to_string())?;
    ensure(state.hops.len() == HOP_CAPABILITIES.len() && rt2.tasks.len() == state.hops.len(), || {
        format!("{} hops, {} tasks", state.hops.len(), rt2.tasks.len())
    })?;
    for hop in &state.hops {
        let id = hop.task_id.as_deref().ok_or("hop without task id")?;
        let task = rt2.tasks.get(id).ok_or("hop task missing")?;
        ensure(task.state == TaskState::Completed && task.task_type == hop.capability, || {
            format!("hop {} task {:?}", hop.capability, task.state)
        })?;
    }

    let (_, again) = ask_in_process(&runtime(), SAMSUNG_QUERY)?;
    let a = to_canonical_string(&normalize(&body));
    let b = to_canonical_string(&normalize(&again));
    ensure(a == b, || "re-run differs after normalization".into())?;
    Ok(format!(
        "route {} steps, sections {:?}, {} completed hop tasks, re-run byte-identical ({} bytes)",
        r.len(),
        names,
        hop_tasks.len(),
        a.len()
    ))
}

fn cli_ask(base_url: &str, query: &str) -> Result<std::process::Output, String> {
    Command::new(bin())
        .args(["ask", query, "--json", "--endpoint", base_url])
        .env("AGENTMESH_TOKEN", TOKEN)
        .env_remove("AGENTMESH_ENDPOINT")
        .output()
        .map_err(|e| e.to_string())
}

pub fn ac9_transport_equivalence() -> Outcome {
    let srv = server()?;
    let http = HttpClient::new(&srv.base_url(), Some(TOKEN.into())).map_err(|e| e.to_string())?;
    let rt = runtime();
    let mut failed = 0;
    for (i, q) in TRANSPORT_QUERIES.iter().enumerate() {
        let (local_status, local) = ask_in_process(&rt, q)?;
        let request = query_message("acceptance", "orchestrator", q, None).map_err(|e| e.to_string())?;
        let reply = http.send(&request).map_err(|e| format!("query {i}: {e}"))?;
        ensure(reply.header.status == local_status, || {
            format!("query {i} {q:?}: status {:?} vs {local_status:?}", reply.header.status)
        })?;
        let remote = Value::Object(reply.body);
        ensure(normalize(&remote) == normalize(&local), || {
            format!("query {i} {q:?}: bodies differ\nhttp: {remote}\nin-process: {local}")
        })?;
        if local_status == MessageStatus::Failed {
            failed += 1;
        }
    }

    // the CLI client prints the same document
    for q in [SAMSUNG_QUERY, "price of AAPL and MSFT"] {
        let out = cli_ask(&srv.base_url(), q)?;
        ensure(out.status.success(), || format!("ask exited {:?}", out.status.code()))?;
        let (_, local) = ask_in_process(&rt, q)?;
        let want = format!("{}\n", to_canonical_string(&normalize(&local["response"])));
        ensure(out.stdout == want.as_bytes(), || format!("CLI document differs for {q:?}"))?;
    }

    let anon = HttpClient::new(&srv.base_url(), None).map_err(|e| e.to_string())?;
    let wrong = HttpClient::new(&srv.base_url(), Some("wrong".into())).map_err(|e| e.to_string())?;
    let probe = query_message("acceptance", "orchestrator", "hello", None).map_err(|e| e.to_string())?;
    let mut probes = 0;
    for client in [&anon, &wrong] {
        let calls: Vec<(&str, Result<Value, agentmesh_core::TransportError>)> = vec![
            ("POST /a2a/messages", client.send_message(&probe).map(|_| Value::Null)),
            ("GET /agents/{id}/card", client.get_json("/agents/stock-price-agent/card")),
            ("GET /registry/agents", client.discover(Some("get_stock_price"))),
            ("GET /mcp/tools", client.tools()),
            ("GET /mcp/tools/{id}", client.tool("stock_data")),
            (
                "POST /mcp/tools/{id}/call/{fn}",
                client.call_tool("stock_data", "get_stock_price", &json!({"symbol": "AAPL"}), None),
            ),
            ("GET /tasks", client.tasks()),
            ("GET /tasks/{id}", client.task("any")),
            ("GET /healthz", client.health()),
            ("GET /openapi.json", client.get_json("/openapi.json")),
        ];
        for (endpoint, result) in calls {
            probes += 1;
            match result {
                Err(agentmesh_core::TransportError::Remote { status: 401, error }) => {
                    ensure(error.code == agentmesh_core::ErrorCode::AuthFailed, || {
                        format!("{endpoint}: code {}", error.code)
                    })?;
                }
                other => return Err(format!("{endpoint} without a valid token: {other:?}")),
            }
        }
    }
    Ok(format!(
        "{} queries identical over HTTP and in-process ({failed} failing as expected); CLI matches; {probes} unauthenticated probes got 401",
        TRANSPORT_QUERIES.len()
    ))
}

pub fn ac10_error_path() -> Outcome {
    let mut codes = BTreeSet::new();
    for _ in 0..2 {
        let (status, body) = ask_in_process(&runtime(), UNKNOWN_TICKER_QUERY)?;
        ensure(status == MessageStatus::Failed, || format!("status {status:?}"))?;
        let r = route(&body);
        ensure(r.last().map(String::as_str) == Some("handle_error"), || format!("route {r:?}"))?;
        ensure(!r.iter().any(|n| n.starts_with("get_") || n == "analyze_data"), || {
            format!("route {r:?} fetched data")
        })?;
        let response = &body["response"];
        ensure(section_names(response) == ["errors"], || format!("sections {:?}", section_names(response)))?;
        let code = response["sections"][0]["content"][0]["code"].as_str().unwrap_or_default().to_string();
        ensure(body["error"]["code"] == json!(code), || "reply error and section disagree".into())?;
        codes.insert(code);
    }
    ensure(codes.len() == 1 && codes.contains("UNKNOWN_TICKER"), || format!("codes {codes:?}"))?;

    let srv = server()?;
    let out = cli_ask(&srv.base_url(), UNKNOWN_TICKER_QUERY)?;
    ensure(out.status.code() == Some(4), || format!("CLI exit {:?}", out.status.code()))?;
    let printed: Value = serde_json::from_slice(&out.stdout).map_err(|e| format!("CLI stdout: {e}"))?;
    ensure(section_names(&printed) == ["errors"], || "CLI document is not errors-only".into())?;
    let stderr: Value = serde_json::from_slice(&out.stderr).map_err(|e| format!("CLI stderr: {e}"))?;
    ensure(stderr["code"] == "UNKNOWN_TICKER", || format!("CLI stderr {stderr}"))?;
    Ok("routes to handle_error; errors-only response; code UNKNOWN_TICKER stable over runs, HTTP and CLI".into())
}
