//! Ticker extraction: direct symbol tokens plus longest-match company-name aliases.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use super::OrchestratorError;

/// Company-name aliases, normalized by case-folding and trimming.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TickerAliasTable {
    entries: BTreeMap<String, String>,
}

fn fold(c: char) -> char {
    c.to_lowercase().next().unwrap_or(c)
}

fn normalize(name: &str) -> String {
    name.trim().chars().map(fold).collect()
}

impl TickerAliasTable {
    pub fn from_pairs<I, K, V>(pairs: I) -> Result<Self, OrchestratorError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let mut entries = BTreeMap::new();
        for (name, symbol) in pairs {
            let (name, symbol) = (name.as_ref(), symbol.as_ref());
            let key = normalize(name);
            if key.is_empty() {
                return Err(OrchestratorError::Fixture("empty alias name".into()));
            }
            if symbol.is_empty() || symbol != symbol.to_uppercase() {
                return Err(OrchestratorError::Fixture(format!(
                    "alias {name:?} maps to non-uppercase symbol {symbol:?}"
                )));
            }
            if let Some(prev) = entries.insert(key, symbol.to_string()) {
                if prev != symbol {
                    return Err(OrchestratorError::Fixture(format!(
                        "alias {name:?} maps to both {prev} and {symbol}"
                    )));
                }
            }
        }
        Ok(TickerAliasTable { entries })
    }

    /// Parses the alias file: a JSON object of name -> symbol.
    pub fn from_json(text: &str) -> Result<Self, OrchestratorError> {
        let map: BTreeMap<String, String> =
            serde_json::from_str(text).map_err(|e| OrchestratorError::Fixture(e.to_string()))?;
        Self::from_pairs(map)
    }

    pub fn load(path: &Path) -> Result<Self, OrchestratorError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| OrchestratorError::Fixture(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn lookup(&self, name: &str) -> Option<&str> {
        self.entries.get(&normalize(name)).map(String::as_str)
    }

    pub fn symbols(&self) -> BTreeSet<&str> {
        self.entries.values().map(String::as_str).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Symbols mentioned in `text`, de-duplicated, in order of first mention.
///
/// A symbol is found either as a standalone token of one to five uppercase
/// ASCII letters that is a known symbol, or through the longest alias name
/// that matches at a word boundary (case-insensitive). Known symbols that are
/// not plain letter runs, such as `005930.KS`, are matched like aliases.
pub fn extract_tickers(text: &str, aliases: &TickerAliasTable) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let folded: Vec<char> = chars.iter().copied().map(fold).collect();
    let known = aliases.symbols();
    let mut hits: Vec<(usize, String)> = Vec::new();

    let mut i = 0;
    while i < chars.len() {
        if !chars[i].is_alphanumeric() {
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() && chars[i].is_alphanumeric() {
            i += 1;
        }
        let token: String = chars[start..i].iter().collect();
        if (1..=5).contains(&token.len())
            && token.bytes().all(|b| b.is_ascii_uppercase())
            && known.contains(token.as_str())
        {
            hits.push((start, token));
        }
    }

    // symbols the token rule cannot see (e.g. `005930.KS`) are scanned like aliases
    let mut names: Vec<(Vec<char>, &str)> = aliases
        .entries
        .iter()
        .map(|(name, symbol)| (name.chars().collect(), symbol.as_str()))
        .chain(
            known
                .iter()
                .filter(|s| !s.bytes().all(|b| b.is_ascii_uppercase()))
                .map(|s| (s.chars().map(fold).collect(), *s)),
        )
        .collect();
    names.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));

    let boundary = |c: char| !c.is_ascii_alphanumeric();
    let mut i = 0;
    'scan: while i < folded.len() {
        if i == 0 || boundary(folded[i - 1]) {
            for (name, symbol) in &names {
                let end = i + name.len();
                if end <= folded.len()
                    && folded[i..end] == name[..]
                    && (end == folded.len() || boundary(folded[end]))
                {
                    hits.push((i, symbol.to_string()));
                    i = end;
                    continue 'scan;
                }
            }
        }
        i += 1;
    }

    hits.sort_by_key(|(pos, _)| *pos);
    let mut seen = BTreeSet::new();
    hits.into_iter()
        .filter(|(_, s)| seen.insert(s.clone()))
        .map(|(_, s)| s)
        .collect()
}
