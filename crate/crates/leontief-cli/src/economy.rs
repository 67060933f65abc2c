//! CSV ingestion of economy tables.
//!
//! Schema: header `sector,<label...>[,demand][,total]`, one row per sector
//! whose first cell repeats the label. The matrix cells are either observed
//! transactions or ready-made technical coefficients, declared by the
//! caller. Numbers parse in plain or scientific notation; thousands
//! separators are rejected by the number parser.

use std::path::Path;

use leontief_core::Mat;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PayloadKind {
    /// Observed inter-sector flows; coefficients are derived by dividing
    /// each column by its sector's total use.
    Transactions,
    /// The matrix already holds technical coefficients.
    Coefficients,
}

/// A parsed and validated economy table.
#[derive(Debug, Clone)]
pub struct EconomyFile {
    pub labels: Vec<String>,
    pub kind: PayloadKind,
    pub matrix: Mat,
    pub demand: Option<Vec<f64>>,
    pub totals: Option<Vec<f64>>,
}

impl EconomyFile {
    pub fn n(&self) -> usize {
        self.labels.len()
    }
}

fn parse_cell(text: &str, row: usize, col: usize) -> Result<f64, CliError> {
    let trimmed = text.trim();
    let value: f64 = trimmed.parse().map_err(|_| {
        CliError::Input(format!(
            "cell at data row {}, column {} is not a number: '{trimmed}'",
            row + 1,
            col + 1
        ))
    })?;
    if !value.is_finite() {
        return Err(CliError::Input(format!(
            "cell at data row {}, column {} is not finite",
            row + 1,
            col + 1
        )));
    }
    if value < 0.0 {
        return Err(CliError::Input(format!(
            "negative value {} at data row {}, column {}",
            value,
            row + 1,
            col + 1
        )));
    }
    Ok(value)
}

/// Reads an economy table from a CSV file.
pub fn parse_economy(path: &Path, kind: PayloadKind) -> Result<EconomyFile, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;

    let mut records = reader.records();
    let header = records
        .next()
        .ok_or_else(|| CliError::Input("empty file".into()))?
        .map_err(|e| CliError::Input(format!("malformed header: {e}")))?;
    let cells: Vec<String> = header.iter().map(|c| c.trim().to_string()).collect();
    if cells.is_empty() || !cells[0].eq_ignore_ascii_case("sector") {
        return Err(CliError::Input(
            "header must start with a 'sector' column".into(),
        ));
    }

    let mut tail = &cells[1..];
    let has_total = tail.last().is_some_and(|c| c.eq_ignore_ascii_case("total"));
    if has_total {
        tail = &tail[..tail.len() - 1];
    }
    let has_demand = tail
        .last()
        .is_some_and(|c| c.eq_ignore_ascii_case("demand"));
    if has_demand {
        tail = &tail[..tail.len() - 1];
    }
    let labels: Vec<String> = tail.to_vec();
    let n = labels.len();
    if n == 0 {
        return Err(CliError::Input("no sector columns in the header".into()));
    }
    for (i, l) in labels.iter().enumerate() {
        if l.is_empty() {
            return Err(CliError::Input(format!(
                "empty sector label in column {}",
                i + 2
            )));
        }
        if labels[..i].contains(l) {
            return Err(CliError::Input(format!("duplicate sector label '{l}'")));
        }
    }

    let expected_cols = 1 + n + usize::from(has_demand) + usize::from(has_total);
    let mut matrix = Vec::with_capacity(n * n);
    let mut demand = if has_demand {
        Some(Vec::with_capacity(n))
    } else {
        None
    };
    let mut totals = if has_total {
        Some(Vec::with_capacity(n))
    } else {
        None
    };
    let mut row_count = 0usize;

    for (r, record) in records.enumerate() {
        let record =
            record.map_err(|e| CliError::Input(format!("malformed data row {}: {e}", r + 1)))?;
        if record.iter().all(|c| c.trim().is_empty()) {
            continue;
        }
        if row_count >= n {
            return Err(CliError::Input(format!(
                "more data rows than the {n} sectors in the header"
            )));
        }
        if record.len() != expected_cols {
            return Err(CliError::Input(format!(
                "data row {} has {} cells, expected {expected_cols}",
                r + 1,
                record.len()
            )));
        }
        let label = record.get(0).unwrap_or("").trim();
        if label != labels[row_count] {
            return Err(CliError::Input(format!(
                "data row {} is labeled '{label}' but the header orders '{}' here",
                r + 1,
                labels[row_count]
            )));
        }
        for c in 0..n {
            matrix.push(parse_cell(record.get(1 + c).unwrap_or(""), r, 1 + c)?);
        }
        let mut next = 1 + n;
        if let Some(d) = demand.as_mut() {
            d.push(parse_cell(record.get(next).unwrap_or(""), r, next)?);
            next += 1;
        }
        if let Some(t) = totals.as_mut() {
            t.push(parse_cell(record.get(next).unwrap_or(""), r, next)?);
        }
        row_count += 1;
    }
    if row_count != n {
        return Err(CliError::Input(format!(
            "found {row_count} data rows for {n} sectors"
        )));
    }

    let matrix = Mat::new(n, n, matrix).map_err(|e| CliError::Input(e.to_string()))?;
    Ok(EconomyFile {
        labels,
        kind,
        matrix,
        demand,
        totals,
    })
}
