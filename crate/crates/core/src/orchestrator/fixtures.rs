//! Market-data fixtures and the tool handlers that serve them.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::analysis::analyze;
use super::OrchestratorError;
use crate::mcp::{Handler, HandlerError};

/// Largest allowed gap between `change_percent` and `100·change/(price−change)`.
pub const CHANGE_PERCENT_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sentiment {
    Positive,
    Negative,
    Neutral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Headline {
    pub title: String,
    pub date: String,
    pub sentiment: Sentiment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompanyProfile {
    pub name: String,
    pub sector: String,
    pub summary: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Financials {
    pub revenue: f64,
    pub operating_income: f64,
    pub net_income: f64,
    pub fiscal_year: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StockFixture {
    pub price: f64,
    pub change: f64,
    pub change_percent: f64,
    pub volume: u64,
    pub news: Vec<Headline>,
    pub company: CompanyProfile,
    pub financials: Financials,
}

impl StockFixture {
    /// `change_percent` implied by price and change.
    pub fn implied_change_percent(&self) -> f64 {
        100.0 * self.change / (self.price - self.change)
    }

    fn check(&self, symbol: &str) -> Result<(), OrchestratorError> {
        if symbol.is_empty() || symbol != symbol.to_uppercase() {
            return Err(OrchestratorError::Fixture(format!(
                "symbol {symbol:?} must be non-empty uppercase"
            )));
        }
        let implied = self.implied_change_percent();
        if !implied.is_finite() || (implied - self.change_percent).abs() > CHANGE_PERCENT_TOLERANCE {
            return Err(OrchestratorError::Fixture(format!(
                "{symbol}: change_percent {} disagrees with price/change ({implied:.4})",
                self.change_percent
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FixtureSet {
    stocks: BTreeMap<String, StockFixture>,
}

impl FixtureSet {
    pub fn from_json(text: &str) -> Result<Self, OrchestratorError> {
        let stocks: BTreeMap<String, StockFixture> =
            serde_json::from_str(text).map_err(|e| OrchestratorError::Fixture(e.to_string()))?;
        for (symbol, fixture) in &stocks {
            fixture.check(symbol)?;
        }
        Ok(FixtureSet { stocks })
    }

    pub fn load(path: &Path) -> Result<Self, OrchestratorError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| OrchestratorError::Fixture(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn get(&self, symbol: &str) -> Option<&StockFixture> {
        self.stocks.get(symbol)
    }

    pub fn symbols(&self) -> impl Iterator<Item = &str> {
        self.stocks.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &StockFixture)> {
        self.stocks.iter().map(|(k, v)| (k.as_str(), v))
    }
}

fn lookup<'a>(fixtures: &'a FixtureSet, params: &Value) -> Result<(&'a str, &'a StockFixture), HandlerError> {
    let symbol = params["symbol"].as_str().unwrap_or_default();
    fixtures
        .stocks
        .get_key_value(symbol)
        .map(|(k, v)| (k.as_str(), v))
        .ok_or_else(|| HandlerError::new(format!("no market data for symbol {symbol:?}")))
}

/// Handlers backing the shipped tool descriptions, keyed by function name.
/// `None` for tool ids this module does not implement.
pub fn fixture_handlers(tool_id: &str, fixtures: Arc<FixtureSet>) -> Option<HashMap<String, Handler>> {
    let f = fixtures;
    let handlers: Vec<(&str, Handler)> = match tool_id {
        "stock_data" => vec![(
            "get_stock_price",
            Handler::new(move |p, _| {
                let (symbol, s) = lookup(&f, p)?;
                // the upstream source names the price field last_price
                Ok(json!({
                    "symbol": symbol,
                    "last_price": s.price,
                    "change": s.change,
                    "change_percent": s.change_percent,
                    "volume": s.volume,
                }))
            }),
        )],
        "web_scraper" => vec![(
            "get_news",
            Handler::new(move |p, _| {
                let (symbol, s) = lookup(&f, p)?;
                let limit = match p.get("limit").and_then(Value::as_i64) {
                    Some(n) if n < 0 => return Err(HandlerError::new("limit must be non-negative")),
                    Some(n) => n as usize,
                    None => usize::MAX,
                };
                let headlines: Vec<&Headline> = s.news.iter().take(limit).collect();
                Ok(json!({ "symbol": symbol, "headlines": headlines }))
            }),
        )],
        "financial_data" => {
            let g = Arc::clone(&f);
            vec![
                (
                    "get_company_info",
                    Handler::new(move |p, _| {
                        let (symbol, s) = lookup(&f, p)?;
                        let c = &s.company;
                        Ok(json!({
                            "symbol": symbol,
                            "name": c.name,
                            "sector": c.sector,
                            "summary": c.summary,
                        }))
                    }),
                ),
                (
                    "get_financials",
                    Handler::new(move |p, _| {
                        let (symbol, s) = lookup(&g, p)?;
                        let fin = &s.financials;
                        Ok(json!({
                            "symbol": symbol,
                            "revenue": fin.revenue,
                            "operating_income": fin.operating_income,
                            "net_income": fin.net_income,
                            "fiscal_year": fin.fiscal_year,
                        }))
                    }),
                ),
            ]
        }
        "analysis_engine" => vec![(
            "analyze_company",
            Handler::new(|p, _| {
                let analysis = analyze(p).map_err(HandlerError::new)?;
                Ok(serde_json::to_value(analysis).expect("analysis serializes"))
            }),
        )],
        _ => return None,
    };
    Some(
        handlers
            .into_iter()
            .map(|(name, h)| (name.to_string(), h))
            .collect(),
    )
}
