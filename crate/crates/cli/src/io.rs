//! CSV ingestion and matrix/report writers.
//!
//! Input: comma-separated UTF-8, optional header row, decimal point.
//! Ragged rows and non-numeric fields are reported with their line number.
//! Float output uses Rust's shortest round-trip formatting so files are
//! byte-stable and re-reading reproduces the exact f64 values.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use pvdcov::moments::DataMatrix;
use pvdcov::SymMatrix;

#[derive(Debug)]
pub struct CsvData {
    pub data: DataMatrix,
    /// Column names from the header, when present.
    pub names: Option<Vec<String>>,
}

/// Reads an n×p numeric CSV; `has_header` consumes the first row as names.
pub fn read_data_csv(path: &Path, has_header: bool) -> Result<CsvData> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .from_path(path)
        .with_context(|| format!("cannot open {}", path.display()))?;

    let names = if has_header {
        Some(
            reader
                .headers()
                .context("cannot read header")?
                .iter()
                .map(|s| s.trim().to_string())
                .collect::<Vec<_>>(),
        )
    } else {
        None
    };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    for record in reader.records() {
        let record = record.context("cannot read CSV record")?;
        let line = record
            .position()
            .map(|p| p.line())
            .unwrap_or(rows.len() as u64 + 1);
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            bail!(
                "line {line}: row has {} fields, expected {expected}",
                record.len()
            );
        }
        let mut row = Vec::with_capacity(record.len());
        for (j, field) in record.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| {
                anyhow::anyhow!("line {line}, column {}: not a number: {field:?}", j + 1)
            })?;
            if !v.is_finite() {
                bail!("line {line}, column {}: non-finite value", j + 1);
            }
            row.push(v);
        }
        rows.push(row);
    }
    if rows.len() < 2 {
        bail!("need at least 2 data rows, got {}", rows.len());
    }
    if let (Some(names), Some(w)) = (&names, width) {
        if names.len() != w {
            bail!("header has {} fields, data rows have {w}", names.len());
        }
    }
    let data = DataMatrix::from_rows(&rows).map_err(|e| anyhow::anyhow!("{e}"))?;
    Ok(CsvData { data, names })
}

/// Writes a matrix as a plain numeric grid (no header), shortest
/// round-trip float formatting.
pub fn write_matrix_csv(path: &Path, m: &SymMatrix) -> Result<()> {
    let p = m.dim();
    let mut out = String::new();
    for i in 0..p {
        for j in 0..p {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format!("{}", m.get(i, j)));
        }
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// Writes the detected index set, 1-based, with names when available.
pub fn write_index_csv(path: &Path, j_hat: &[usize], names: Option<&[String]>) -> Result<()> {
    let mut out = String::from("index,name\n");
    for &i in j_hat {
        let name = names.map(|n| n[i].as_str()).unwrap_or("");
        out.push_str(&format!("{},{}\n", i + 1, name));
    }
    fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn temp_csv(contents: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir();
        let path = dir.join(format!(
            "pvdcov_io_test_{}_{}.csv",
            std::process::id(),
            contents.len()
        ));
        let mut f = fs::File::create(&path).unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        path
    }

    #[test]
    fn reads_plain_csv() {
        let p = temp_csv("1,2\n3,4\n5,6\n");
        let d = read_data_csv(&p, false).unwrap();
        assert_eq!(d.data.n(), 3);
        assert_eq!(d.data.p(), 2);
        assert!(d.names.is_none());
        fs::remove_file(p).ok();
    }

    #[test]
    fn reads_header_names() {
        let p = temp_csv("a,b\n1,2\n3,4\n");
        let d = read_data_csv(&p, true).unwrap();
        assert_eq!(d.names.as_deref().unwrap(), ["a", "b"]);
        fs::remove_file(p).ok();
    }

    #[test]
    fn rejects_ragged_rows_with_line_number() {
        let p = temp_csv("1,2\n3\n");
        let err = read_data_csv(&p, false).unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
        fs::remove_file(p).ok();
    }

    #[test]
    fn rejects_non_numeric_with_position() {
        let p = temp_csv("1,2\n3,x\n");
        let err = read_data_csv(&p, false).unwrap_err().to_string();
        assert!(err.contains("line 2") && err.contains("column 2"), "{err}");
        fs::remove_file(p).ok();
    }

    #[test]
    fn rejects_single_row() {
        let p = temp_csv("1,2\n");
        let err = read_data_csv(&p, false).unwrap_err().to_string();
        assert!(err.contains("at least 2"), "{err}");
        fs::remove_file(p).ok();
    }

    #[test]
    fn matrix_round_trip_is_bit_exact() {
        let m = SymMatrix::from_fn(3, |i, j| (i as f64 + 1.0) / (j as f64 + 3.0));
        let path = std::env::temp_dir().join(format!("pvdcov_io_mat_{}.csv", std::process::id()));
        write_matrix_csv(&path, &m).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        for (i, line) in text.lines().enumerate() {
            for (j, field) in line.split(',').enumerate() {
                let v: f64 = field.parse().unwrap();
                assert_eq!(v.to_bits(), m.get(i, j).to_bits());
            }
        }
        fs::remove_file(path).ok();
    }
}
