//! Machine-readable output: a JSON envelope with check metadata, plus a
//! CSV rendering for tabular payloads.
//!
//! Floating-point numbers are rendered with 17 significant digits in both
//! formats so every 64-bit value round-trips exactly and repeated runs are
//! byte-identical.

use serde::Serialize;
use serde_json::Value;

/// One named check with the numbers needed to re-verify it externally.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub pass: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
}

impl CheckRecord {
    /// `lhs <= rhs + tolerance`.
    pub fn upper(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            pass: lhs <= rhs + tolerance,
            lhs,
            rhs,
            tolerance,
        }
    }

    /// `lhs >= rhs - tolerance`.
    pub fn lower(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            pass: lhs >= rhs - tolerance,
            lhs,
            rhs,
            tolerance,
        }
    }

    /// `|lhs - rhs| <= tolerance`.
    pub fn close(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            pass: (lhs - rhs).abs() <= tolerance,
            lhs,
            rhs,
            tolerance,
        }
    }

    pub fn failed(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass: false,
            lhs: 1.0,
            rhs: 0.0,
            tolerance: 0.0,
        }
    }
}

/// The envelope every command emits.
#[derive(Debug, Clone, Serialize)]
pub struct OutputEnvelope {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub params: Value,
    pub results: Value,
    pub checks: Vec<CheckRecord>,
}

impl OutputEnvelope {
    pub fn new(command: &str, seed: u64, params: Value, results: Value) -> Self {
        Self {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed,
            params,
            results,
            checks: Vec::new(),
        }
    }

    pub fn any_check_failed(&self) -> bool {
        self.checks.iter().any(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("envelope serializes");
        let mut out = String::new();
        write_value(&mut out, &value, 0);
        out.push('\n');
        out
    }
}

/// 17-significant-digit rendering that round-trips any finite f64.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_value(out: &mut String, value: &Value, indent: usize) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else {
                out.push_str(&fmt17(n.as_f64().expect("finite number")));
            }
        }
        Value::String(s) => {
            out.push_str(&serde_json::to_string(s).expect("string serializes"));
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push('\n');
                push_indent(out, indent + 1);
                write_value(out, item, indent + 1);
            }
            out.push('\n');
            push_indent(out, indent);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push('{');
            for (i, (key, item)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push('\n');
                push_indent(out, indent + 1);
                out.push_str(&serde_json::to_string(key).expect("key serializes"));
                out.push_str(": ");
                write_value(out, item, indent + 1);
            }
            out.push('\n');
            push_indent(out, indent);
            out.push('}');
        }
    }
}

fn push_indent(out: &mut String, indent: usize) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

/// A tabular rendering of the command's main payload.
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn render(&self) -> String {
        let mut out = String::new();
        write_row(&mut out, &self.header);
        for row in &self.rows {
            write_row(&mut out, row);
        }
        out
    }

    /// The checks list as a table, shared by commands whose main payload
    /// is the verification itself.
    pub fn from_checks(checks: &[CheckRecord]) -> Self {
        Self {
            header: ["name", "pass", "lhs", "rhs", "tolerance"]
                .map(String::from)
                .to_vec(),
            rows: checks
                .iter()
                .map(|c| {
                    vec![
                        c.name.clone(),
                        c.pass.to_string(),
                        fmt17(c.lhs),
                        fmt17(c.rhs),
                        fmt17(c.tolerance),
                    ]
                })
                .collect(),
        }
    }
}

fn write_row(out: &mut String, fields: &[String]) {
    for (i, field) in fields.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        if field.contains([',', '"', '\n', '\r']) {
            out.push('"');
            out.push_str(&field.replace('"', "\"\""));
            out.push('"');
        } else {
            out.push_str(field);
        }
    }
    out.push_str("\r\n");
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_rendering_roundtrips() {
        for x in [0.25, 1e-9, 2.3408993166587777e-3, 0.0, 1.0 / 3.0] {
            let s = fmt17(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, x, "{s}");
        }
    }

    #[test]
    fn json_is_parseable_and_deterministic() {
        let mut env = OutputEnvelope::new(
            "demo",
            7,
            serde_json::json!({"alpha": 0.5, "count": 3}),
            serde_json::json!({"values": [1.0, 0.25]}),
        );
        env.checks.push(CheckRecord::upper("demo-check", 0.1, 0.2, 0.0));
        let a = env.to_json();
        let b = env.to_json();
        assert_eq!(a, b);
        let parsed: serde_json::Value = serde_json::from_str(&a).unwrap();
        assert_eq!(parsed["command"], "demo");
        assert_eq!(parsed["checks"][0]["pass"], true);
    }

    #[test]
    fn csv_quotes_special_fields() {
        let table = CsvTable {
            header: vec!["a".into(), "b".into()],
            rows: vec![vec!["x,y".into(), "plain".into()]],
        };
        assert_eq!(table.render(), "a,b\r\n\"x,y\",plain\r\n");
    }
}
