//! Nodal scalar fields (temperature differences, gradients) and their CSV
//! form.

use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// Per-node temperature difference ΔT relative to ambient, °K.
#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureField {
    pub values: Vec<f64>,
}

impl TemperatureField {
    pub fn zeros(node_count: usize) -> Self {
        Self {
            values: vec![0.0; node_count],
        }
    }

    pub fn constant(node_count: usize, value: f64) -> Self {
        Self {
            values: vec![value; node_count],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_mesh(&self, mesh: &Mesh) -> Result<()> {
        if self.values.len() != mesh.node_count() {
            return Err(Error::Shape(format!(
                "field has {} values but mesh has {} nodes",
                self.values.len(),
                mesh.node_count()
            )));
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("node_id,delta_t\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{i},{v}\n"));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let values = parse_node_scalar_csv(text, "delta_t")?;
        Ok(Self { values })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_csv(&text)
    }
}

/// Root-mean-squared difference between two nodal fields over all nodes.
pub fn rmse(a: &TemperatureField, b: &TemperatureField) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!(
            "rmse over mismatched node sets: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::Shape("rmse over empty fields".into()));
    }
    let sum: f64 = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok((sum / a.len() as f64).sqrt())
}

/// Parses a `node_id,<name>` CSV with dense node ids starting at 0.
pub(crate) fn parse_node_scalar_csv(text: &str, value_column: &str) -> Result<Vec<f64>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty field CSV".into()))?;
    let expected = format!("node_id,{value_column}");
    if header.trim() != expected {
        return Err(Error::Parse(format!(
            "field CSV header {header:?}, expected {expected:?}"
        )));
    }
    let mut values = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let id: usize = parts
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Parse(format!("field CSV line {}: bad node id", lineno + 2)))?;
        let value: f64 = parts
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Parse(format!("field CSV line {}: bad value", lineno + 2)))?;
        if id != values.len() {
            return Err(Error::Parse(format!(
                "field CSV line {}: node ids must be dense, got {id}",
                lineno + 2
            )));
        }
        values.push(value);
    }
    Ok(values)
}
