//! Deterministic CSV and JSON reports.

use std::collections::BTreeMap;

use clap::ValueEnum;
use commlab::scalar::rational_string;
use commlab::Rational;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Row {
    pub metric: String,
    pub value: String,
    pub exact: bool,
    pub notes: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Report {
    pub header: BTreeMap<String, String>,
    pub rows: Vec<Row>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        let mut header = BTreeMap::new();
        header.insert("command".to_string(), command.to_string());
        header.insert("version".to_string(), env!("CARGO_PKG_VERSION").to_string());
        Report { header, rows: Vec::new() }
    }

    pub fn config(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.header.insert(key.to_string(), value.to_string());
        self
    }

    pub fn push(&mut self, metric: &str, value: impl ToString, exact: bool, notes: &str) -> &mut Self {
        self.rows.push(Row { metric: metric.to_string(), value: value.to_string(), exact, notes: notes.to_string() });
        self
    }

    pub fn rational(&mut self, metric: &str, value: &Rational, notes: &str) -> &mut Self {
        self.push(metric, rational_string(value), true, notes)
    }

    pub fn float(&mut self, metric: &str, value: f64, notes: &str) -> &mut Self {
        self.push(metric, format!("{value:.6}"), false, notes)
    }

    pub fn value(&self, metric: &str) -> Option<&str> {
        self.rows.iter().find(|r| r.metric == metric).map(|r| r.value.as_str())
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(self).expect("plain data") + "\n",
            Format::Csv => {
                let mut out = String::new();
                for (k, v) in &self.header {
                    out.push_str(&format!("# {k}={v}\n"));
                }
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["metric", "value", "exact", "notes"]).expect("in-memory write");
                for r in &self.rows {
                    w.write_record([r.metric.as_str(), r.value.as_str(), if r.exact { "true" } else { "false" }, r.notes.as_str()])
                        .expect("in-memory write");
                }
                out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8 fields"));
                out
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_commas() {
        let mut r = Report::new("x");
        r.push("a,b", 1, true, "");
        let text = r.render(Format::Csv);
        assert!(text.contains("\"a,b\",1,true,"));
        assert!(text.starts_with("# command=x\n"));
    }

    #[test]
    fn json_mirrors_rows() {
        let mut r = Report::new("x");
        r.rational("p", &commlab::scalar::ratio(1, 4), "note");
        let v: serde_json::Value = serde_json::from_str(&r.render(Format::Json)).unwrap();
        assert_eq!(v["rows"][0]["value"], "1/4");
    }
}
