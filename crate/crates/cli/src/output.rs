//! Tabular output in CSV or JSON.
//!
//! Floats are written with `Debug`, the shortest decimal that
//! parses back to the same `f64`.

use crate::config::Format;
use anyhow::{Context, Result};
use geoatt::integrator::Trajectory;
use serde::Serialize;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Table { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                write!(s, "{v:?}").expect("writing to a string");
            }
            s.push('\n');
        }
        s
    }

    pub fn render(&self, format: Format) -> Result<String> {
        Ok(match format {
            Format::Csv => self.to_csv(),
            Format::Json => serde_json::to_string(self)? + "\n",
        })
    }
}

pub fn trajectory_columns(n: usize) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    for i in 1..=n {
        for j in 1..=n {
            cols.push(format!("r{i}{j}"));
        }
    }
    cols.extend(["V", "Vdot", "u_norm_sq"].map(String::from));
    cols.extend((1..=n).map(|i| format!("err_axis_{i}")));
    cols.extend((1..=n).map(|i| format!("dist_axis_{i}")));
    cols.push("ortho_resid".into());
    cols
}

pub fn trajectory_table(traj: &Trajectory) -> Table {
    let n = traj.dim();
    let mut table = Table::new(trajectory_columns(n));
    for s in &traj.samples {
        let m = s.state.matrix();
        let mut row = Vec::with_capacity(table.columns.len());
        row.push(s.t);
        for i in 0..n {
            for j in 0..n {
                row.push(m[(i, j)]);
            }
        }
        row.extend([s.v, s.vdot, s.norm_u_sq]);
        row.extend(&s.axis_error);
        row.extend(&s.traveled);
        row.push(s.ortho_residual);
        table.push(row);
    }
    table
}

/// Writes to `path`, or to stdout when there is none.
pub fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips_floats() {
        let mut t = Table::new(vec!["a".into(), "b".into()]);
        let x = 0.1 + 0.2;
        t.push(vec![x, 1e-300]);
        let csv = t.to_csv();
        assert_eq!(csv.lines().next(), Some("a,b"));
        let parsed: Vec<f64> = csv.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(parsed, vec![x, 1e-300]);
    }

    #[test]
    fn column_names() {
        let cols = trajectory_columns(3);
        assert_eq!(cols.len(), 1 + 9 + 3 + 3 + 3 + 1);
        assert_eq!(cols[1], "r11");
        assert_eq!(cols[9], "r33");
        assert_eq!(cols.last().unwrap(), "ortho_resid");
    }
}
