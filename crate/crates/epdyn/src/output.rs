//! Artifact writers. Every artifact carries the tool version, config hash and tolerances.

use serde_json::Value;
use std::fmt::Write as _;

pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Extra `#` header lines.
    pub notes: Vec<String>,
}

pub enum Artifact {
    Csv(Table),
    Json(Value),
}

pub struct Provenance<'a> {
    pub task: &'a str,
    pub config_sha256: &'a str,
    /// Tolerance overrides as JSON.
    pub tolerances: &'a str,
}

/// 17 significant digits.
pub fn format_value(x: f64) -> String {
    format!("{x:.16e}")
}

impl Artifact {
    pub fn render(&self, p: &Provenance<'_>) -> String {
        match self {
            Artifact::Csv(t) => {
                let mut s = String::new();
                let _ = writeln!(s, "# epdyn {}", env!("CARGO_PKG_VERSION"));
                let _ = writeln!(s, "# task {}", p.task);
                let _ = writeln!(s, "# config_sha256 {}", p.config_sha256);
                let _ = writeln!(s, "# tolerances {}", p.tolerances);
                for n in &t.notes {
                    let _ = writeln!(s, "# {n}");
                }
                let _ = writeln!(s, "{}", t.columns.join(","));
                for row in &t.rows {
                    let cells: Vec<String> = row.iter().map(|&x| format_value(x)).collect();
                    let _ = writeln!(s, "{}", cells.join(","));
                }
                s
            }
            Artifact::Json(v) => {
                let mut v = v.clone();
                let tol: Value = serde_json::from_str(p.tolerances).unwrap_or(Value::Null);
                let header = serde_json::json!({
                    "tool": "epdyn",
                    "version": env!("CARGO_PKG_VERSION"),
                    "task": p.task,
                    "config_sha256": p.config_sha256,
                    "tolerances": tol,
                });
                if let Value::Object(m) = &mut v {
                    m.insert("header".into(), header);
                }
                let mut s = serde_json::to_string_pretty(&v).expect("report serializes");
                s.push('\n');
                s
            }
        }
    }
}
