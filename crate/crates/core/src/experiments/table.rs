use std::io::Write;

use serde::Serialize;
use serde_json::Value;

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

impl Column {
    pub fn new(name: &str, unit: &str) -> Self {
        Self {
            name: name.into(),
            unit: unit.into(),
        }
    }
}

/// One row per grid point. A failed point keeps its coordinates and
/// carries the error text instead of results.
#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub study: String,
    pub columns: Vec<Column>,
    /// Number of leading columns that are grid coordinates.
    pub keys: usize,
    pub rows: Vec<Vec<f64>>,
    pub errors: Vec<Option<String>>,
    pub config: Value,
    pub config_hash: String,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c.name == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| r.get(k).copied().unwrap_or(f64::NAN))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn failures(&self) -> usize {
        self.errors.iter().filter(|e| e.is_some()).count()
    }

    /// CSV preceded by `#` comment lines holding the study name, the
    /// effective config and its hash. Contains nothing time dependent, so
    /// equal inputs give equal bytes.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# study: {}", self.study)?;
        writeln!(w, "# config: {}", serde_json::to_string(&self.config)?)?;
        writeln!(w, "# config_hash: {}", self.config_hash)?;
        let header: Vec<String> = self
            .columns
            .iter()
            .map(|c| {
                if c.unit.is_empty() {
                    c.name.clone()
                } else {
                    format!("{} [{}]", c.name, c.unit)
                }
            })
            .collect();
        writeln!(w, "{},error", header.join(","))?;
        for (row, err) in self.rows.iter().zip(&self.errors) {
            let mut cells: Vec<String> = (0..self.columns.len())
                .map(|k| match row.get(k) {
                    Some(x) if x.is_finite() => format!("{x}"),
                    _ => String::new(),
                })
                .collect();
            cells.push(
                err.as_deref()
                    .map(|e| format!("\"{}\"", e.replace('"', "'")))
                    .unwrap_or_default(),
            );
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }
}
