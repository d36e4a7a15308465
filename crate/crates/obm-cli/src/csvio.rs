//! Minimal CSV writing/parsing for the toolkit's own table formats.
//!
//! Values are written with Rust's shortest round-trip float formatting, so
//! everything the tool emits parses back to the same `f64`.

use std::io::Write;
use std::path::Path;

/// Writes `header` and `rows` to `path`.
pub fn write_csv(path: &Path, header: &str, rows: &[String]) -> std::io::Result<()> {
    let mut out = String::with_capacity(rows.len() * 32 + header.len() + 2);
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(row);
        out.push('\n');
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(out.as_bytes())
}

fn parse_f64(field: &str) -> Option<f64> {
    match field.trim() {
        "inf" => Some(f64::INFINITY),
        other => other.parse().ok(),
    }
}

/// Parses `l,f(l)` rows (header optional). Values may be `inf`.
pub fn parse_candidate_csv(text: &str) -> Result<Vec<(usize, f64)>, String> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let first = fields.next().unwrap_or("");
        let second = fields.next().ok_or_else(|| format!("line {}: missing value", lineno + 1))?;
        if fields.next().is_some() {
            return Err(format!("line {}: too many fields", lineno + 1));
        }
        let Ok(l) = first.trim().parse::<usize>() else {
            if lineno == 0 {
                continue; // header
            }
            return Err(format!("line {}: bad level {first:?}", lineno + 1));
        };
        let v = parse_f64(second).ok_or_else(|| format!("line {}: bad value {second:?}", lineno + 1))?;
        rows.push((l, v));
    }
    Ok(rows)
}

/// Parses a CSV with one header line into (header fields, numeric rows);
/// used by the round-trip tests for the bounds and simulation tables.
pub fn parse_numeric_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .ok_or("empty csv")?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != header.len() {
            return Err(format!("row {}: {} fields, expected {}", lineno + 2, fields.len(), header.len()));
        }
        let row: Option<Vec<f64>> = fields
            .iter()
            .map(|f| match f.trim() {
                "true" => Some(1.0),
                "false" => Some(0.0),
                other => parse_f64(other),
            })
            .collect();
        match row {
            Some(r) => rows.push(r),
            // Rows with non-numeric fields (e.g. labels) keep their numeric tail.
            None => {
                let r: Vec<f64> = fields.iter().filter_map(|f| parse_f64(f)).collect();
                rows.push(r);
            }
        }
    }
    Ok((header, rows))
}
