//! Numeric CSV tables with a header row.

use std::path::Path;

use anyhow::{anyhow, bail, Context};

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column_index(&self, name: &str) -> anyhow::Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| anyhow!("column `{name}` not found; columns are {:?}", self.columns))
    }
}

/// Reads the columns not listed in `drop`. Dropped columns need not be
/// numeric. Errors name the file line of the offending row.
pub fn read_table(path: &Path, drop: &[String]) -> anyhow::Result<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let header: Vec<String> = reader
        .headers()
        .with_context(|| format!("reading header of {}", path.display()))?
        .iter()
        .map(str::to_string)
        .collect();
    if let Some(d) = drop.iter().find(|d| !header.contains(d)) {
        bail!("column `{d}` to drop not found; columns are {header:?}");
    }
    let keep: Vec<usize> = (0..header.len()).filter(|&j| !drop.contains(&header[j])).collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.with_context(|| format!("malformed row in {}", path.display()))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            bail!("line {line}: {} fields, header has {}", record.len(), header.len());
        }
        let row = keep
            .iter()
            .map(|&j| {
                let field = &record[j];
                match field.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(anyhow!("line {line}, column `{}`: `{field}` is not a finite number", header[j])),
                }
            })
            .collect::<anyhow::Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(Table { columns: keep.iter().map(|&j| header[j].clone()).collect(), rows })
}
