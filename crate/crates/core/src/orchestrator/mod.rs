//! Stock-information orchestration: request parsing, planning, data collection
//! through specialized agents, analysis and response assembly, all run as a
//! workflow graph.

mod analysis;
mod fixtures;
mod host;
mod response;
mod tickers;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

pub use analysis::{analyze, net_income_margin, verdict_for, Analysis, Verdict};
pub use fixtures::{
    fixture_handlers, CompanyProfile, Financials, FixtureSet, Headline, Sentiment, StockFixture,
    CHANGE_PERCENT_TOLERANCE,
};
pub use host::{A2aPort, CapabilityPort, OrchestratorAgent, ANSWER_QUERY};
pub use response::{build_error_response, build_response, section_names, ERRORS_SECTION, SECTION_ORDER};
pub use tickers::{extract_tickers, TickerAliasTable};

use crate::error_code::ErrorCode;
use crate::task::TaskError;
use crate::workflow::{
    GraphError, WorkflowGraph, WorkflowState, ERROR_LABEL, SLOT_ANALYSIS, SLOT_COMPANY,
    SLOT_FINANCIALS, SLOT_NEWS, SLOT_STOCK,
};

pub const NODE_PARSE_REQUEST: &str = "parse_request";
pub const NODE_PLAN_TASKS: &str = "plan_tasks";
pub const NODE_GET_STOCK_DATA: &str = "get_stock_data";
pub const NODE_GET_NEWS_DATA: &str = "get_news_data";
pub const NODE_GET_COMPANY_INFO: &str = "get_company_info";
pub const NODE_GET_FINANCIAL_DATA: &str = "get_financial_data";
pub const NODE_ANALYZE_DATA: &str = "analyze_data";
pub const NODE_GENERATE_RESPONSE: &str = "generate_response";
pub const NODE_HANDLE_ERROR: &str = "handle_error";

/// Plan positions in their fixed order; a plan is always a subsequence.
pub const CANONICAL_PLAN: [&str; 6] = [
    NODE_GET_STOCK_DATA,
    NODE_GET_NEWS_DATA,
    NODE_GET_COMPANY_INFO,
    NODE_GET_FINANCIAL_DATA,
    NODE_ANALYZE_DATA,
    NODE_GENERATE_RESPONSE,
];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OrchestratorError {
    #[error("fixture error: {0}")]
    Fixture(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Intent {
    Price,
    News,
    CompanyInfo,
    Financials,
    Analysis,
}

impl Intent {
    pub const ALL: [Intent; 5] = [
        Intent::Price,
        Intent::News,
        Intent::CompanyInfo,
        Intent::Financials,
        Intent::Analysis,
    ];

    /// Lowercase phrases that select this intent.
    pub fn keywords(self) -> &'static [&'static str] {
        match self {
            Intent::Price => &["price", "stock price"],
            Intent::News => &["news"],
            Intent::CompanyInfo => &["company", "status", "overview"],
            Intent::Financials => &["financial", "statement"],
            Intent::Analysis => &["analysis", "investment perspective", "outlook"],
        }
    }

    pub fn node(self) -> &'static str {
        match self {
            Intent::Price => NODE_GET_STOCK_DATA,
            Intent::News => NODE_GET_NEWS_DATA,
            Intent::CompanyInfo => NODE_GET_COMPANY_INFO,
            Intent::Financials => NODE_GET_FINANCIAL_DATA,
            Intent::Analysis => NODE_ANALYZE_DATA,
        }
    }

    /// Capability the node asks another agent for.
    pub fn capability(self) -> &'static str {
        match self {
            Intent::Price => "get_stock_price",
            Intent::News => "get_news",
            Intent::CompanyInfo => "get_company_info",
            Intent::Financials => "get_financials",
            Intent::Analysis => "analyze_company",
        }
    }

    pub fn slot(self) -> &'static str {
        match self {
            Intent::Price => SLOT_STOCK,
            Intent::News => SLOT_NEWS,
            Intent::CompanyInfo => SLOT_COMPANY,
            Intent::Financials => SLOT_FINANCIALS,
            Intent::Analysis => SLOT_ANALYSIS,
        }
    }
}

/// Intents named in `text`, sorted, with analysis pulling in every data intent.
pub fn detect_intents(text: &str) -> Vec<Intent> {
    let lower = text.to_lowercase();
    let mut found: Vec<Intent> = Intent::ALL
        .into_iter()
        .filter(|i| i.keywords().iter().any(|k| lower.contains(k)))
        .collect();
    if found.contains(&Intent::Analysis) {
        found = Intent::ALL.to_vec();
    }
    found
}

/// Fills in intents and tickers; problems are recorded in `state.errors`.
pub fn parse_request(state: &mut WorkflowState, aliases: &TickerAliasTable) {
    if state.request.trim().is_empty() {
        state
            .errors
            .push(TaskError::new(ErrorCode::UnparseableRequest, "the request is empty"));
        return;
    }
    state.intents = detect_intents(&state.request);
    state.tickers = extract_tickers(&state.request, aliases);
    if state.intents.is_empty() {
        state.errors.push(TaskError::new(
            ErrorCode::UnparseableRequest,
            "the request names no supported information (price, news, company, financials, analysis)",
        ));
    } else if state.tickers.is_empty() {
        state.errors.push(TaskError::new(
            ErrorCode::UnknownTicker,
            "the request mentions no known ticker symbol or company name",
        ));
    }
}

pub fn plan_for(intents: &[Intent]) -> Vec<String> {
    let mut plan: Vec<String> = Intent::ALL
        .into_iter()
        .filter(|i| intents.contains(i))
        .map(|i| i.node().to_string())
        .collect();
    plan.push(NODE_GENERATE_RESPONSE.to_string());
    plan
}

/// Computes the plan on the first visit; later visits only route.
pub fn plan_tasks(state: &mut WorkflowState) {
    if state.plan.is_empty() && state.errors.is_empty() {
        state.plan = plan_for(&state.intents);
        state.plan_cursor = 0;
    }
}

pub fn route_after_planning(state: &WorkflowState) -> String {
    if !state.errors.is_empty() {
        return ERROR_LABEL.to_string();
    }
    state
        .plan
        .get(state.plan_cursor)
        .cloned()
        .unwrap_or_else(|| NODE_GENERATE_RESPONSE.to_string())
}

fn collect(state: &mut WorkflowState, port: &dyn CapabilityPort, intent: Intent) {
    for symbol in state.tickers.clone() {
        let (result, hop) = port.invoke(intent.capability(), json!({ "symbol": symbol }));
        state.hops.extend(hop);
        match result {
            Ok(value) => state.put_slot(intent.slot(), &symbol, value),
            Err(e) => state.errors.push(e),
        }
    }
}

fn analyze_node(state: &mut WorkflowState, port: &dyn CapabilityPort) {
    let data = [Intent::Price, Intent::News, Intent::CompanyInfo, Intent::Financials];
    if !data.iter().any(|i| state.is_populated(i.slot())) {
        state.errors.push(TaskError::new(
            ErrorCode::MissingData,
            "no collected data is available for analysis",
        ));
        return;
    }
    for symbol in state.tickers.clone() {
        let mut params = Map::new();
        params.insert("symbol".into(), Value::String(symbol.clone()));
        for intent in data {
            if let Some(v) = state.slot_entry(intent.slot(), &symbol) {
                params.insert(intent.slot().into(), v.clone());
            }
        }
        if params.len() == 1 {
            state.errors.push(TaskError::new(
                ErrorCode::MissingData,
                format!("no collected data for {symbol}"),
            ));
            continue;
        }
        let (result, hop) = port.invoke(Intent::Analysis.capability(), Value::Object(params));
        state.hops.extend(hop);
        match result {
            Ok(value) => state.put_slot(SLOT_ANALYSIS, &symbol, value),
            Err(e) => state.errors.push(e),
        }
    }
}

/// The orchestrator's graph: parse, plan, then loop back to the planner after
/// every data or analysis node until it routes to a terminal.
pub fn build_workflow(
    port: Arc<dyn CapabilityPort>,
    aliases: Arc<TickerAliasTable>,
) -> Result<WorkflowGraph<WorkflowState>, OrchestratorError> {
    let mut g = WorkflowGraph::new();
    g.add_node(NODE_PARSE_REQUEST, move |s: &mut WorkflowState| {
        parse_request(s, &aliases);
        Ok(())
    })?;
    g.add_node(NODE_PLAN_TASKS, |s: &mut WorkflowState| {
        plan_tasks(s);
        Ok(())
    })?;
    for intent in [Intent::Price, Intent::News, Intent::CompanyInfo, Intent::Financials] {
        let port = Arc::clone(&port);
        g.add_node(intent.node(), move |s: &mut WorkflowState| {
            collect(s, port.as_ref(), intent);
            s.plan_cursor += 1;
            Ok(())
        })?;
    }
    let analysis_port = Arc::clone(&port);
    g.add_node(NODE_ANALYZE_DATA, move |s: &mut WorkflowState| {
        analyze_node(s, analysis_port.as_ref());
        s.plan_cursor += 1;
        Ok(())
    })?;
    g.add_node(NODE_GENERATE_RESPONSE, |s: &mut WorkflowState| {
        s.response = Some(build_response(s));
        Ok(())
    })?;
    g.add_node(NODE_HANDLE_ERROR, |s: &mut WorkflowState| {
        s.response = Some(build_error_response(s));
        Ok(())
    })?;

    g.set_entry(NODE_PARSE_REQUEST)?;
    g.add_edge(NODE_PARSE_REQUEST, NODE_PLAN_TASKS)?;
    let mut mapping: Vec<(&str, &str)> = CANONICAL_PLAN.iter().map(|n| (*n, *n)).collect();
    mapping.push((ERROR_LABEL, NODE_HANDLE_ERROR));
    g.add_conditional_edges(NODE_PLAN_TASKS, route_after_planning, mapping)?;
    for node in &CANONICAL_PLAN[..5] {
        g.add_edge(node, NODE_PLAN_TASKS)?;
    }
    g.add_terminal(NODE_GENERATE_RESPONSE)?;
    g.add_terminal(NODE_HANDLE_ERROR)?;
    g.on_error(|s: &mut WorkflowState, node, err| {
        s.errors.push(TaskError::new(
            ErrorCode::NodeFailure,
            format!("node {node} failed: {err}"),
        ));
    });
    Ok(g)
}
