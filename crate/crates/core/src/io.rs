//! Reading return series and writing tidy CSV tables.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{GtsError, Result};

/// Daily returns in percent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReturnSeries {
    pub values: Vec<f64>,
    pub source: String,
}

/// What the single column of an input file holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SeriesKind {
    /// Price levels; converted to `100·(ln P_i − ln P_{i-1})`.
    Prices,
    /// Returns in percent, used as they are.
    Returns,
}

/// Reads a one-column CSV file. A non-numeric first row is taken as a header.
pub fn ingest(path: &Path, kind: SeriesKind) -> Result<ReturnSeries> {
    let file = std::fs::File::open(path)?;
    let mut s = ingest_reader(file, kind)?;
    s.source = path.display().to_string();
    Ok(s)
}

/// [`ingest`] from any reader.
pub fn ingest_reader<R: std::io::Read>(r: R, kind: SeriesKind) -> Result<ReturnSeries> {
    let mut reader =
        csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(r);
    let mut raw = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(i + 1, |p| p.line() as usize);
        if rec.len() != 1 {
            return Err(GtsError::Parse {
                line,
                message: format!("expected one column, found {}", rec.len()),
            });
        }
        let field = &rec[0];
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => raw.push((line, v)),
            Ok(v) => {
                return Err(GtsError::Parse { line, message: format!("value {v} is not finite") })
            }
            Err(_) if i == 0 => continue,
            Err(e) => {
                return Err(GtsError::Parse { line, message: format!("`{field}`: {e}") })
            }
        }
    }
    let values = match kind {
        SeriesKind::Returns => raw.into_iter().map(|(_, v)| v).collect(),
        SeriesKind::Prices => {
            if let Some(&(line, value)) = raw.iter().find(|(_, v)| *v <= 0.0) {
                return Err(GtsError::NonPositivePrice { line, value });
            }
            raw.windows(2).map(|w| 100.0 * (w[1].1.ln() - w[0].1.ln())).collect()
        }
    };
    let values: Vec<f64> = values;
    if values.is_empty() {
        return Err(GtsError::Domain("input holds no returns".into()));
    }
    Ok(ReturnSeries { values, source: String::new() })
}

/// Writes `columns` under `header`; all columns must have equal length.
/// Numbers use the shortest representation that reads back exactly.
pub fn write_columns<W: std::io::Write>(w: W, header: &[&str], columns: &[&[f64]]) -> Result<()> {
    let n = columns.first().map_or(0, |c| c.len());
    if columns.len() != header.len() || columns.iter().any(|c| c.len() != n) {
        return Err(GtsError::Domain("columns must match the header and each other".into()));
    }
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    let mut row = Vec::with_capacity(columns.len());
    for i in 0..n {
        row.clear();
        row.extend(columns.iter().map(|c| c[i].to_string()));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Writes a returns file readable by [`ingest`] with [`SeriesKind::Returns`].
pub fn write_returns<W: std::io::Write>(w: W, values: &[f64]) -> Result<()> {
    write_columns(w, &["return"], &[values])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(text: &str, kind: SeriesKind) -> Result<ReturnSeries> {
        ingest_reader(text.as_bytes(), kind)
    }

    #[test]
    fn prices_to_log_returns() {
        assert_eq!(read("100\n100\n", SeriesKind::Prices).unwrap().values, vec![0.0]);
        let r = read("price\n100\n105\n", SeriesKind::Prices).unwrap();
        assert!((r.values[0] - 4.87902).abs() < 1e-5);
        assert!((r.values[0] - 100.0 * 1.05f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn returns_pass_through() {
        let r = read("0.5\n-1.25\n3\n", SeriesKind::Returns).unwrap();
        assert_eq!(r.values, vec![0.5, -1.25, 3.0]);
    }

    #[test]
    fn malformed_row_names_its_line() {
        match read("r\n0.5\nabc\n1.0\n", SeriesKind::Returns) {
            Err(GtsError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match read("0.5\n1,2\n", SeriesKind::Returns) {
            Err(GtsError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_positive_price() {
        match read("10\n0\n5\n", SeriesKind::Prices) {
            Err(GtsError::NonPositivePrice { line, value }) => {
                assert_eq!(line, 2);
                assert_eq!(value, 0.0);
            }
            other => panic!("{other:?}"),
        }
        assert!(read("header\n", SeriesKind::Returns).is_err());
        assert!(read("7\n", SeriesKind::Prices).is_err());
    }

    #[test]
    fn returns_round_trip() {
        let values = vec![0.1, -2.0 / 3.0, 1e-17, 123456.789012345, -0.0];
        let mut buf = Vec::new();
        write_returns(&mut buf, &values).unwrap();
        let back = ingest_reader(buf.as_slice(), SeriesKind::Returns).unwrap();
        assert_eq!(back.values, values);
    }
}
