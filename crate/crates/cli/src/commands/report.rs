//! Renders a JSON report written by another subcommand as a text table.

use std::path::Path;

use serde_json::Value;

use polykit::report::{format_fixed2, format_percent, format_signed_fixed2};

use crate::error::CliError;
use crate::output::bold;

fn num(v: &Value) -> Option<f64> {
    v.as_f64()
}

fn percent(v: &Value) -> String {
    num(v).map(format_percent).unwrap_or_else(|| "-".to_string())
}

/// Left-aligned columns separated by two spaces; the first row is bold.
fn table(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> =
        (0..cols).map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for (i, row) in rows.iter().enumerate() {
        let line: Vec<String> =
            row.iter().enumerate().map(|(c, s)| format!("{s:<w$}", w = widths[c])).collect();
        let line = line.join("  ").trim_end().to_string();
        out.push_str(&if i == 0 { bold(&line) } else { line });
        out.push('\n');
    }
    out
}

fn render_eval(doc: &Value) -> String {
    let langs: Vec<&str> =
        doc["languages"].as_array().map(|a| a.iter().filter_map(Value::as_str).collect()).unwrap_or_default();
    let mut head = vec!["dataset".to_string(), "metric".to_string()];
    head.extend(langs.iter().map(|l| l.to_string()));
    head.push("all".to_string());
    let mut rows = vec![head];
    for row in doc["rows"].as_array().into_iter().flatten() {
        let mut r = vec![row["dataset"].as_str().unwrap_or("").to_string(), row["metric"].as_str().unwrap_or("").to_string()];
        r.extend(langs.iter().map(|l| percent(&row["per_language"][l])));
        r.push(percent(&row["overall"]));
        rows.push(r);
    }
    let mut avg = vec!["Avg".to_string(), "-".to_string()];
    avg.extend(langs.iter().map(|l| percent(&doc["avg"]["per_language"][l])));
    avg.push(percent(&doc["avg"]["overall"]));
    rows.push(avg);
    format!("model {}\n{}", doc["model"].as_str().unwrap_or("?"), table(&rows))
}

fn render_buckets(doc: &Value) -> String {
    let mut rows = vec![["dataset", "feature", "bucket", "range", "count", "score"].map(String::from).to_vec()];
    for entry in doc["datasets"].as_array().into_iter().flatten() {
        for report in entry["reports"].as_array().into_iter().flatten() {
            for b in report["buckets"].as_array().into_iter().flatten() {
                let range = match (num(&b["lo"]), num(&b["hi"])) {
                    (Some(lo), Some(hi)) => format!("[{lo}, {hi}]"),
                    _ => "-".to_string(),
                };
                rows.push(vec![
                    entry["dataset"].as_str().unwrap_or("").to_string(),
                    report["feature"].as_str().unwrap_or("").to_string(),
                    b["label"].as_str().unwrap_or("").to_string(),
                    range,
                    b["count"].to_string(),
                    percent(&b["score"]),
                ]);
            }
        }
    }
    format!("model {}\n{}", doc["model"].as_str().unwrap_or("?"), table(&rows))
}

fn render_diagnosis(doc: &Value) -> String {
    let r = &doc["report"];
    let fixed = |v: &Value| num(v).map(format_fixed2).unwrap_or_default();
    let signed = |v: &Value| num(v).map(format_signed_fixed2).unwrap_or_default();
    let mut rows = vec![["kind", "key", "m1", "m2", "delta"].map(String::from).to_vec()];
    let o = &r["overall"];
    rows.push(vec!["overall".into(), "-".into(), fixed(&o["m1"]), fixed(&o["m2"]), signed(&o["delta"])]);
    for kind in ["per_language", "per_bucket"] {
        for (k, d) in r[kind].as_object().into_iter().flatten() {
            let label = kind.trim_start_matches("per_").to_string();
            rows.push(vec![label, k.clone(), fixed(&d["m1"]), fixed(&d["m2"]), signed(&d["delta"])]);
        }
    }
    for (k, d) in r["per_family"].as_object().into_iter().flatten() {
        rows.push(vec!["family".into(), k.clone(), String::new(), String::new(), signed(d)]);
    }
    for kind in ["max_positive", "max_negative"] {
        let e = &r[kind];
        rows.push(vec![kind.into(), e["key"].as_str().unwrap_or("-").into(), String::new(), String::new(), signed(&e["delta"])]);
    }
    format!(
        "{} vs {} ({})\n{}",
        doc["m1"].as_str().unwrap_or("?"),
        doc["m2"].as_str().unwrap_or("?"),
        doc["scope"].as_str().unwrap_or("?"),
        table(&rows)
    )
}

fn render_sig(doc: &Value) -> String {
    let r = &doc["result"];
    let rows = vec![
        vec!["pairing".to_string(), doc["pairing"].as_str().unwrap_or("?").to_string()],
        vec!["W".to_string(), r["statistic"].to_string()],
        vec!["n".to_string(), r["n_effective"].to_string()],
        vec!["p".to_string(), r["p_value"].to_string()],
        vec!["method".to_string(), r["method"].as_str().unwrap_or("?").to_string()],
        vec!["alternative".to_string(), r["alternative"].as_str().unwrap_or("?").to_string()],
    ];
    table(&rows)
}

pub fn render(doc: &Value) -> Option<String> {
    if doc.get("rows").is_some() && doc.get("avg").is_some() {
        Some(render_eval(doc))
    } else if doc.get("datasets").is_some() {
        Some(render_buckets(doc))
    } else if doc.get("report").is_some() {
        Some(render_diagnosis(doc))
    } else if doc.get("result").is_some() {
        Some(render_sig(doc))
    } else {
        None
    }
}

pub fn run(input: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(input).map_err(|e| CliError::input(format!("{}: {e}", input.display())))?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", input.display())))?;
    let rendered = render(&doc).ok_or_else(|| CliError::input(format!("{}: not a polykit report", input.display())))?;
    if let Some(h) = doc.get("header") {
        println!(
            "# polykit {}  seed {}  regime {}  config {}",
            h["version"].as_str().unwrap_or("?"),
            h["seed"],
            h["regime"].as_str().unwrap_or("?"),
            h["config_hash"].as_str().map(|s| &s[..s.len().min(12)]).unwrap_or("?")
        );
    }
    print!("{rendered}");
    Ok(())
}
