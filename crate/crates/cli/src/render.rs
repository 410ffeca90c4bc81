//! Plain-text views of service documents.

use serde_json::Value;

fn str_of<'a>(v: &'a Value, key: &str) -> &'a str {
    v.get(key).and_then(Value::as_str).unwrap_or("")
}

fn items(v: &Value) -> &[Value] {
    v.as_array().map(Vec::as_slice).unwrap_or_default()
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).unwrap_or_default()
}

fn indent(text: &str) -> String {
    text.lines().map(|l| format!("  {l}\n")).collect()
}

pub fn response_text(doc: &Value) -> String {
    let mut s = String::new();
    s.push_str(&format!("query: {}\n", str_of(doc, "query")));
    let tickers: Vec<&str> = items(&doc["tickers"]).iter().filter_map(Value::as_str).collect();
    s.push_str(&format!("tickers: {}\n", tickers.join(", ")));
    for section in items(&doc["sections"]) {
        let content = &section["content"];
        if str_of(section, "name") == "errors" && items(content).is_empty() {
            continue;
        }
        s.push_str(&format!("\n[{}]\n", str_of(section, "name")));
        s.push_str(&indent(&pretty(content)));
    }
    s.push_str(&format!("\nsummary: {}\n", str_of(doc, "summary")));
    s
}

fn table(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<String>| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        format!("{}\n", padded.join("  ").trim_end())
    };
    let mut s = line(header.iter().map(|h| h.to_string()).collect());
    for row in rows {
        s.push_str(&line(row));
    }
    s
}

pub fn task_table(tasks: &Value) -> String {
    let rows = items(tasks)
        .iter()
        .map(|t| {
            vec![
                str_of(t, "task_id").to_string(),
                str_of(t, "task_type").to_string(),
                str_of(t, "state").to_string(),
                t["attempts"].to_string(),
            ]
        })
        .collect();
    table(&["TASK", "TYPE", "STATE", "ATTEMPTS"], rows)
}

pub fn task_detail(task: &Value) -> String {
    let mut s = format!(
        "task {}\n  type: {}\n  state: {}\n  attempts: {}\n",
        str_of(task, "task_id"),
        str_of(task, "task_type"),
        str_of(task, "state"),
        task["attempts"]
    );
    s.push_str("  history:\n");
    for h in items(&task["history"]) {
        s.push_str(&format!("    {}\n", h));
    }
    if let Some(err) = task.get("error").filter(|e| !e.is_null()) {
        s.push_str(&format!("  error: {} {}\n", str_of(err, "code"), str_of(err, "message")));
    }
    for a in items(&task["artifacts"]) {
        s.push_str(&format!("  artifact:\n{}", indent(&indent(&pretty(a)))));
    }
    s
}

pub fn agent_table(cards: &Value) -> String {
    let rows = items(cards)
        .iter()
        .map(|c| {
            let caps: Vec<&str> = items(&c["capabilities"]).iter().map(|cap| str_of(cap, "name")).collect();
            vec![
                str_of(c, "agent_id").to_string(),
                str_of(c, "version").to_string(),
                caps.join(","),
            ]
        })
        .collect();
    table(&["AGENT", "VERSION", "CAPABILITIES"], rows)
}

pub fn tool_table(tools: &Value) -> String {
    let rows = items(tools)
        .iter()
        .map(|t| {
            let fns: Vec<&str> = items(&t["functions"]).iter().map(|f| str_of(f, "name")).collect();
            vec![
                str_of(t, "tool_id").to_string(),
                str_of(t, "version").to_string(),
                fns.join(","),
            ]
        })
        .collect();
    table(&["TOOL", "VERSION", "FUNCTIONS"], rows)
}

pub fn tool_detail(tool: &Value) -> String {
    let mut s = format!(
        "tool {} ({})\n  {}\n",
        str_of(tool, "tool_id"),
        str_of(tool, "version"),
        str_of(tool, "description")
    );
    for f in items(&tool["functions"]) {
        s.push_str(&format!("  fn {}: {}\n", str_of(f, "name"), str_of(f, "description")));
    }
    s
}
