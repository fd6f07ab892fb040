//! Predictions exchange file: UTF-8 CSV with header
//! `index,n2_pred,isat_pred,alpha_pred,n2_true,isat_true,alpha_true`,
//! all values in normalized label space.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Triplet};
use crate::error::{Error, Result};

pub const HEADER: [&str; 7] = [
    "index",
    "n2_pred",
    "isat_pred",
    "alpha_pred",
    "n2_true",
    "isat_true",
    "alpha_true",
];

/// Largest tolerated gap between a CSV truth and the dataset label.
pub const TRUTH_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub index: usize,
    pub pred: Triplet,
    pub truth: Triplet,
}

#[derive(Debug, Deserialize)]
struct RawRow {
    index: usize,
    n2_pred: f64,
    isat_pred: f64,
    alpha_pred: f64,
    n2_true: f64,
    isat_true: f64,
    alpha_true: f64,
}

fn csv_error(e: csv::Error) -> Error {
    Error::Format(format!("predictions csv: {e}"))
}

pub fn write_predictions<W: Write>(out: W, rows: &[PredictionRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER).map_err(csv_error)?;
    for r in rows {
        let mut record = vec![r.index.to_string()];
        record.extend(r.pred.iter().chain(&r.truth).map(|v| format!("{v:.16e}")));
        w.write_record(&record).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_predictions_file(path: &Path, rows: &[PredictionRow]) -> Result<()> {
    write_predictions(std::fs::File::create(path)?, rows)
}

/// Parses an exchange CSV. The header must match exactly; truths must lie in
/// `[0, 1]` and every value must be finite. Predictions are not range-checked.
pub fn read_predictions<R: Read>(input: R) -> Result<Vec<PredictionRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(csv_error)?.clone();
    if header.iter().ne(HEADER) {
        return Err(Error::Format(format!(
            "unexpected header {:?}, expected {}",
            header.iter().collect::<Vec<_>>(),
            HEADER.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (line, record) in r.deserialize::<RawRow>().enumerate() {
        let raw = record.map_err(csv_error)?;
        let row = PredictionRow {
            index: raw.index,
            pred: [raw.n2_pred, raw.isat_pred, raw.alpha_pred],
            truth: [raw.n2_true, raw.isat_true, raw.alpha_true],
        };
        if !row.pred.iter().chain(&row.truth).all(|v| v.is_finite()) {
            return Err(Error::Format(format!("row {}: non-finite value", line + 1)));
        }
        if !row.truth.iter().all(|t| (-1e-9..=1.0 + 1e-9).contains(t)) {
            return Err(Error::Format(format!(
                "row {}: truth {:?} outside [0, 1]",
                line + 1,
                row.truth
            )));
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn read_predictions_file(path: &Path) -> Result<Vec<PredictionRow>> {
    read_predictions(std::fs::File::open(path)?)
}

/// Checks that every row's index exists in `dataset` exactly once and that its
/// truth agrees with the normalized dataset label within [`TRUTH_TOLERANCE`].
pub fn check_against_dataset(rows: &[PredictionRow], dataset: &Dataset) -> Result<()> {
    let mut seen = vec![false; dataset.len()];
    for row in rows {
        if row.index < seen.len() && std::mem::replace(&mut seen[row.index], true) {
            return Err(Error::Format(format!("index {} appears more than once", row.index)));
        }
        let expected = dataset.normalized_labels(row.index)?;
        for k in 0..3 {
            if (expected[k] - row.truth[k]).abs() > TRUTH_TOLERANCE {
                return Err(Error::Format(format!(
                    "index {}: csv truth {:?} does not match dataset label {:?}",
                    row.index, row.truth, expected
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let rows = vec![
            PredictionRow {
                index: 3,
                pred: [0.1, 1.0 / 3.0, 0.987654321987],
                truth: [0.0, 0.5, 1.0],
            },
            PredictionRow {
                index: 0,
                pred: [-0.01, 1.02, 2e-12],
                truth: [1.0 / 49.0, 0.25, 0.75],
            },
        ];
        let mut buf = Vec::new();
        write_predictions(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("index,n2_pred,isat_pred,alpha_pred,n2_true,isat_true,alpha_true\n"));
        assert_eq!(read_predictions(&buf[..]).unwrap(), rows);
    }

    #[test]
    fn rejects_bad_header_and_truths() {
        let bad = "idx,n2_pred,isat_pred,alpha_pred,n2_true,isat_true,alpha_true\n";
        assert!(read_predictions(bad.as_bytes()).is_err());
        let out_of_range = format!("{}\n0,0.1,0.1,0.1,1.5,0.1,0.1\n", HEADER.join(","));
        assert!(read_predictions(out_of_range.as_bytes()).is_err());
        let short = format!("{}\n0,0.1,0.1\n", HEADER.join(","));
        assert!(read_predictions(short.as_bytes()).is_err());
        let nan = format!("{}\n0,NaN,0.1,0.1,0.5,0.1,0.1\n", HEADER.join(","));
        assert!(read_predictions(nan.as_bytes()).is_err());
    }
}
