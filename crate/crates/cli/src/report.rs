//! Report rows and their text/csv/json renderings.
//!
//! Every command emits the same leading columns so the output can be
//! concatenated and plotted:
//! `op, bytes_in, cr, t_homo_s, t_oracle_s, speedup, max_abs_diff`.
//! Some commands append their own columns after these.

use clap::ValueEnum;
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Csv,
    Json,
}

pub const COLUMNS: [&str; 7] = ["op", "bytes_in", "cr", "t_homo_s", "t_oracle_s", "speedup", "max_abs_diff"];

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Num(f64),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn text(&self) -> String {
        match self {
            Cell::Num(v) => {
                // shortest form when it is short, so values like -0.04 stay exact
                let short = v.to_string();
                if short.len() <= 8 {
                    short
                } else if (1e-3..1e6).contains(&v.abs()) {
                    format!("{v:.6}")
                } else {
                    format!("{v:.4e}")
                }
            }
            Cell::Empty => "-".into(),
            other => other.csv(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Num(v) if v.is_finite() => json!(v),
            Cell::Num(_) | Cell::Empty => Value::Null,
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

/// One measured operation.
#[derive(Debug, Clone)]
pub struct Row {
    pub op: String,
    /// Compressed bytes read by the homomorphic path.
    pub bytes_in: u64,
    /// Uncompressed size of the operands, the basis for throughput.
    pub raw_bytes: u64,
    pub cr: f64,
    pub t_homo_s: f64,
    pub t_oracle_s: Option<f64>,
    pub max_abs_diff: Option<f64>,
    pub extra: Vec<Cell>,
    /// Set when verification failed; the row is still reported.
    pub mismatch: Option<String>,
}

impl Row {
    pub fn speedup(&self) -> Option<f64> {
        self.t_oracle_s.map(|t| t / self.t_homo_s)
    }

    fn fixed(&self) -> Vec<Cell> {
        vec![
            Cell::Text(self.op.clone()),
            Cell::Int(self.bytes_in),
            Cell::Num(self.cr),
            Cell::Num(self.t_homo_s),
            self.t_oracle_s.into(),
            self.speedup().into(),
            self.max_abs_diff.into(),
        ]
    }

    fn throughput(&self, t: Option<f64>) -> Cell {
        t.filter(|&t| t > 0.0).map(|t| self.raw_bytes as f64 / t / 1e9).into()
    }
}

/// Rows sharing one set of trailing columns.
#[derive(Debug, Clone)]
pub struct Table {
    pub extra: Vec<&'static str>,
    pub rows: Vec<Row>,
}

impl Table {
    pub fn new(extra: &[&'static str]) -> Self {
        Table { extra: extra.to_vec(), rows: Vec::new() }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.csv(),
            Format::Json => self.json(),
            Format::Text => self.text(),
        }
    }

    fn csv(&self) -> String {
        let mut out = COLUMNS.iter().chain(&self.extra).copied().collect::<Vec<_>>().join(",");
        out.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.fixed().iter().chain(&r.extra).map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    fn json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut m = Map::new();
                for (k, c) in COLUMNS.iter().zip(r.fixed()) {
                    m.insert(k.to_string(), c.json());
                }
                m.insert("raw_bytes".into(), json!(r.raw_bytes));
                m.insert("throughput_homo_gbs".into(), r.throughput(Some(r.t_homo_s)).json());
                m.insert("throughput_oracle_gbs".into(), r.throughput(r.t_oracle_s).json());
                for (k, c) in self.extra.iter().zip(&r.extra) {
                    m.insert(k.to_string(), c.json());
                }
                Value::Object(m)
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&rows).expect("report serializes");
        s.push('\n');
        s
    }

    fn text(&self) -> String {
        let mut header: Vec<&str> = COLUMNS.to_vec();
        header.splice(4..4, ["homo_gb_s"]);
        header.splice(6..6, ["oracle_gb_s"]);
        header.extend(&self.extra);
        let mut grid = vec![header.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
        for r in &self.rows {
            let mut cells = r.fixed();
            cells.insert(4, r.throughput(Some(r.t_homo_s)));
            cells.insert(6, r.throughput(r.t_oracle_s));
            cells.extend(r.extra.iter().cloned());
            grid.push(cells.iter().map(Cell::text).collect());
        }
        let widths: Vec<usize> =
            (0..header.len()).map(|c| grid.iter().map(|row| row[c].len()).max().unwrap_or(0)).collect();
        let mut out = String::new();
        for row in grid {
            let line: Vec<String> = row.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}")).collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        }
        out
    }
}
