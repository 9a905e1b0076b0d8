//! CSV ingestion.
//!
//! One observation per row, `d` numeric columns. A first row containing any
//! non-numeric field is treated as a header.

use std::path::Path;

use crate::blocks::SampleMatrix;
use crate::error::{Error, Result};

/// Reads a numeric CSV file into a [`SampleMatrix`].
pub fn read_matrix(path: &Path) -> Result<SampleMatrix> {
    let text = std::fs::read_to_string(path)?;
    parse_matrix(&text, &path.display().to_string())
}

/// Parses CSV text; `origin` names the source in error messages.
///
/// Rows are reported 1-based as they appear in the file (header included),
/// fields 1-based.
pub fn parse_matrix(text: &str, origin: &str) -> Result<SampleMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut data = Vec::new();
    let mut width: Option<usize> = None;
    let mut n_rows = 0;
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 1;
        let record = record.map_err(|e| Error::Parse {
            path: origin.to_string(),
            row: line,
            field: 0,
            reason: e.to_string(),
        })?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: Vec<Result<f64, usize>> = record
            .iter()
            .enumerate()
            .map(|(i, f)| f.parse::<f64>().map_err(|_| i + 1))
            .collect();
        if idx == 0 && parsed.iter().any(Result::is_err) {
            // header
            continue;
        }
        let mut row = Vec::with_capacity(parsed.len());
        for (i, value) in parsed.into_iter().enumerate() {
            match value {
                Ok(x) if x.is_finite() => row.push(x),
                Ok(_) => {
                    return Err(Error::Parse {
                        path: origin.to_string(),
                        row: line,
                        field: i + 1,
                        reason: "non-finite value".into(),
                    })
                }
                Err(field) => {
                    return Err(Error::Parse {
                        path: origin.to_string(),
                        row: line,
                        field,
                        reason: format!("cannot parse `{}` as a number", &record[field - 1]),
                    })
                }
            }
        }
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::Parse {
                    path: origin.to_string(),
                    row: line,
                    field: row.len().min(w) + 1,
                    reason: format!("expected {w} fields, found {}", row.len()),
                })
            }
            _ => {}
        }
        data.extend(row);
        n_rows += 1;
    }
    let dim = width.ok_or_else(|| Error::Format(format!("{origin}: no numeric rows")))?;
    SampleMatrix::new(data, n_rows, dim)
}

/// Reads a vector stored as a single row or a single column.
pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let m = read_matrix(path)?;
    if m.n_rows() == 1 || m.dim() == 1 {
        Ok(m.as_slice().to_vec())
    } else {
        Err(Error::Format(format!(
            "{}: expected a single row or column, found {}x{}",
            path.display(),
            m.n_rows(),
            m.dim()
        )))
    }
}

/// Writes rows as CSV without a header.
pub fn write_matrix<W: std::io::Write>(out: W, sample: &SampleMatrix) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for row in sample.rows() {
        w.write_record(row.iter().map(|x| format!("{x:?}")))
            .map_err(|e| Error::Format(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_detected() {
        let m = parse_matrix("x,y\n1,2\n3,4\n", "t").unwrap();
        assert_eq!((m.n_rows(), m.dim()), (2, 2));
        let m = parse_matrix("1,2\n3,4\n", "t").unwrap();
        assert_eq!(m.n_rows(), 2);
        assert_eq!(m.row(1), &[3.0, 4.0]);
    }

    #[test]
    fn errors_name_row_and_field() {
        let err = parse_matrix("a,b\n1,2\n3,oops\n", "data.csv").unwrap_err();
        match err {
            Error::Parse { row, field, .. } => assert_eq!((row, field), (3, 2)),
            e => panic!("unexpected {e}"),
        }
        let err = parse_matrix("1,2\n3\n", "data.csv").unwrap_err();
        assert!(matches!(err, Error::Parse { row: 2, .. }));
        assert!(parse_matrix("x,y\n", "t").is_err());
        assert!(parse_matrix("1,inf\n", "t").is_err());
    }

    #[test]
    fn write_then_read() {
        let m = SampleMatrix::from_rows(&[[0.1, -2.5e-300], [3.0, 1.0 / 3.0]]).unwrap();
        let mut buf = Vec::new();
        write_matrix(&mut buf, &m).unwrap();
        let back = parse_matrix(std::str::from_utf8(&buf).unwrap(), "buf").unwrap();
        assert_eq!(back, m);
    }
}
