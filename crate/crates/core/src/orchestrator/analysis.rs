//! Rule-based SWOT summary and verdict.
//!
//! Strengths: rising share price, positive operating income.
//! Weaknesses: falling share price, operating loss.
//! Opportunities / threats: headlines tagged positive / negative.
//! Verdict: sign of `change_percent + net_income_margin`, zero is neutral.

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Favorable,
    Neutral,
    Unfavorable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub symbol: String,
    pub strengths: Vec<String>,
    pub weaknesses: Vec<String>,
    pub opportunities: Vec<String>,
    pub threats: Vec<String>,
    pub verdict: Verdict,
}

/// Net income as a percentage of revenue; `None` when revenue is zero.
pub fn net_income_margin(net_income: f64, revenue: f64) -> Option<f64> {
    (revenue != 0.0).then(|| 100.0 * net_income / revenue)
}

pub fn verdict_for(change_percent: f64, net_margin: f64) -> Verdict {
    let score = change_percent + net_margin;
    if score > 0.0 {
        Verdict::Favorable
    } else if score < 0.0 {
        Verdict::Unfavorable
    } else {
        Verdict::Neutral
    }
}

fn number(v: &Value, key: &str) -> Option<f64> {
    v.get(key).and_then(Value::as_f64)
}

/// Input shape: `{symbol, stock?, news?, company?, financials?}` where each
/// optional part is the corresponding tool result.
pub fn analyze(input: &Value) -> Result<Analysis, String> {
    let symbol = input
        .get("symbol")
        .and_then(Value::as_str)
        .ok_or("symbol is required")?
        .to_string();
    let part = |k: &str| input.get(k).filter(|v| v.is_object());
    let (stock, news, company, financials) =
        (part("stock"), part("news"), part("company"), part("financials"));
    if stock.is_none() && news.is_none() && company.is_none() && financials.is_none() {
        return Err(format!("no collected data to analyze for {symbol}"));
    }

    let mut a = Analysis {
        symbol,
        strengths: Vec::new(),
        weaknesses: Vec::new(),
        opportunities: Vec::new(),
        threats: Vec::new(),
        verdict: Verdict::Neutral,
    };

    let change_percent = stock.and_then(|s| number(s, "change_percent"));
    if let Some(cp) = change_percent {
        if cp > 0.0 {
            a.strengths.push(format!("Share price up {cp}% in the latest session"));
        } else if cp < 0.0 {
            a.weaknesses.push(format!("Share price down {}% in the latest session", -cp));
        }
    }

    let mut margin = None;
    if let Some(fin) = financials {
        let year = fin.get("fiscal_year").and_then(Value::as_i64).unwrap_or_default();
        if let Some(oi) = number(fin, "operating_income") {
            if oi > 0.0 {
                a.strengths.push(format!("Operating income of {oi} in fiscal {year}"));
            } else if oi < 0.0 {
                a.weaknesses.push(format!("Operating loss of {} in fiscal {year}", -oi));
            }
        }
        if let (Some(ni), Some(rev)) = (number(fin, "net_income"), number(fin, "revenue")) {
            margin = net_income_margin(ni, rev);
        }
    }

    if let Some(headlines) = news.and_then(|n| n.get("headlines")).and_then(Value::as_array) {
        for h in headlines {
            let title = h.get("title").and_then(Value::as_str).unwrap_or_default().to_string();
            match h.get("sentiment").and_then(Value::as_str) {
                Some("positive") => a.opportunities.push(title),
                Some("negative") => a.threats.push(title),
                _ => {}
            }
        }
    }

    a.verdict = verdict_for(change_percent.unwrap_or(0.0), margin.unwrap_or(0.0));
    Ok(a)
}
