//! Flat result rows for sweep output (CSV) and their round-trip parsing.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// One oracle-vs-solver comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub label: String,
    pub n: usize,
    pub epsilon: f64,
    pub seed: u64,
    /// Exhaustive optimum when available.
    pub opt: f64,
    pub best_g: f64,
    /// `opt - best_g`.
    pub gap: f64,
    /// Guarantee `5 sqrt(eps)`.
    pub bound: f64,
    pub within_bound: bool,
}

pub fn rows_to_csv(rows: &[CompareRow]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer
            .serialize(row)
            .map_err(|e| Error::Driver(format!("csv: {e}")))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Driver(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Driver(format!("csv: {e}")))
}

pub fn rows_from_csv(text: &str) -> Result<Vec<CompareRow>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    reader
        .deserialize()
        .map(|r| r.map_err(|e| Error::Driver(format!("csv: {e}"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_identity() {
        let rows = vec![
            CompareRow {
                label: "gnp,n=10,p=0.5".into(),
                n: 10,
                epsilon: 0.04,
                seed: 7,
                opt: 0.5520833333333333,
                best_g: 0.5520833333333333,
                gap: 0.0,
                bound: 1.0,
                within_bound: true,
            },
            CompareRow {
                label: "with,comma \"quoted\"".into(),
                n: 3,
                epsilon: 0.25,
                seed: 0,
                opt: 0.1,
                best_g: 0.09999999999999999,
                gap: 1e-17,
                bound: 2.5,
                within_bound: true,
            },
        ];
        let text = rows_to_csv(&rows).unwrap();
        let back = rows_from_csv(&text).unwrap();
        assert_eq!(rows, back);
    }
}
