//! Tab-separated machine lines plus an aligned text table for every
//! metric the crate reports.

use std::fmt::Write as _;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub metric: String,
    /// Key columns between the metric name and the value, e.g. mode and k.
    pub keys: Vec<String>,
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Report {
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Machine,
}

impl std::str::FromStr for Format {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "text" => Ok(Format::Text),
            "machine" => Ok(Format::Machine),
            other => Err(crate::Error::invalid(format!("unknown format {other:?}"))),
        }
    }
}

fn fmt_value(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v:.0}")
    } else {
        format!("{v:.6}")
    }
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn push<K: ToString>(&mut self, metric: &str, keys: impl IntoIterator<Item = K>, value: f64) {
        self.rows.push(Row {
            metric: metric.to_string(),
            keys: keys.into_iter().map(|k| k.to_string()).collect(),
            value,
        });
    }

    pub fn extend(&mut self, other: Report) {
        self.rows.extend(other.rows);
    }

    pub fn get(&self, metric: &str, keys: &[&str]) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.metric == metric && r.keys.iter().map(String::as_str).eq(keys.iter().copied()))
            .map(|r| r.value)
    }

    /// One `metric<TAB>key...<TAB>value` line per row.
    pub fn to_machine(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            out.push_str(&r.metric);
            for k in &r.keys {
                out.push('\t');
                out.push_str(k);
            }
            let _ = writeln!(out, "\t{}", fmt_value(r.value));
        }
        out
    }

    /// Column-aligned rendering of the same rows.
    pub fn to_table(&self) -> String {
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                let mut c = vec![r.metric.clone()];
                c.extend(r.keys.iter().cloned());
                c.push(fmt_value(r.value));
                c
            })
            .collect();
        let cols = cells.iter().map(Vec::len).max().unwrap_or(0);
        let widths: Vec<usize> = (0..cols)
            .map(|i| cells.iter().filter_map(|c| c.get(i)).map(String::len).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for c in &cells {
            let line: Vec<String> = c.iter().enumerate().map(|(i, s)| format!("{s:<w$}", w = widths[i])).collect();
            let _ = writeln!(out, "{}", line.join("  ").trim_end());
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.to_table(),
            Format::Machine => self.to_machine(),
        }
    }
}
