//! Number formatting and CSV plumbing shared by every emitted artifact.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Significant digits used for every numeric field written to disk or stdout.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Formats `x` with exactly [`SIGNIFICANT_DIGITS`] significant digits,
/// fixed-point for moderate magnitudes and scientific otherwise.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let prec = SIGNIFICANT_DIGITS - 1;
    let sci = format!("{:.*e}", prec, x);
    let exp: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    if (-5..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (prec as i32 - exp) as usize;
        format!("{:.*}", decimals, x)
    } else {
        sci
    }
}

/// Buffered writer for a CSV artifact: `#` metadata lines, a header, rows.
pub struct CsvSink {
    out: BufWriter<File>,
}

impl CsvSink {
    pub fn create(path: &Path, metadata: &[String], header: &[&str]) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        for line in metadata {
            writeln!(out, "# {line}")?;
        }
        writeln!(out, "{}", header.join(","))?;
        Ok(Self { out })
    }

    pub fn row(&mut self, values: &[f64]) -> Result<()> {
        let cells: Vec<String> = values.iter().map(|&v| fmt_sig(v)).collect();
        writeln!(self.out, "{}", cells.join(","))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

/// Reads a numeric CSV whose header must equal `expected`, skipping `#` lines.
pub fn read_numeric_csv(path: &Path, expected: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    if header != expected {
        return Err(Error::Format(format!(
            "{}: expected header `{}`, found `{}`",
            path.display(),
            expected.join(","),
            header.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let row = record
            .iter()
            .map(|cell| {
                cell.parse::<f64>()
                    .map_err(|_| Error::Format(format!("{}: row {}: bad number `{cell}`", path.display(), line + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_sig(0.0), "0.00000000000");
        assert_eq!(fmt_sig(179.0707812252), "179.070781225");
        assert_eq!(fmt_sig(-0.25), "-0.250000000000");
        assert_eq!(fmt_sig(1.5e-7), "1.50000000000e-7");
        assert_eq!(fmt_sig(3.0e14), "3.00000000000e14");
    }

    #[test]
    fn format_is_a_fixed_point_of_parse() {
        for &x in &[std::f64::consts::PI, 1e-5 / 3.0, 123456.789012345, -9.99999999999951, 0.1] {
            let s = fmt_sig(x);
            assert_eq!(fmt_sig(s.parse().unwrap()), s);
        }
    }

    #[test]
    fn csv_roundtrip_with_metadata() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        let mut sink = CsvSink::create(&path, &["B = 0.5".into()], &["a", "b"]).unwrap();
        sink.row(&[1.0, 2.5]).unwrap();
        sink.row(&[-3.0, 1e-9]).unwrap();
        sink.finish().unwrap();
        let rows = read_numeric_csv(&path, &["a", "b"]).unwrap();
        assert_eq!(rows, vec![vec![1.0, 2.5], vec![-3.0, 1e-9]]);
        assert!(matches!(read_numeric_csv(&path, &["a", "c"]), Err(Error::Format(_))));
    }
}
