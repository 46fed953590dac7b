use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::experiment::{ErrorRateRow, OutputFormat};
use crate::error::{Error, Result};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn format_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// Serializes an error-rate table: CSV with a header row, or a JSON array
/// of records.
pub fn write_results<W: Write>(
    rows: &[ErrorRateRow],
    writer: W,
    format: OutputFormat,
) -> Result<()> {
    let here = Path::new("<writer>");
    if rows.is_empty() {
        return Err(Error::invalid("refusing to emit an empty result table"));
    }
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(writer);
            for row in rows {
                w.serialize(row).map_err(|e| format_err(here, e))?;
            }
            w.flush().map_err(io_err(here))?;
        }
        OutputFormat::Json => {
            let mut writer = writer;
            serde_json::to_writer_pretty(&mut writer, rows).map_err(|e| format_err(here, e))?;
            writer.write_all(b"\n").map_err(io_err(here))?;
        }
    }
    Ok(())
}

pub fn emit_results(rows: &[ErrorRateRow], path: &Path, format: OutputFormat) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::invalid("refusing to emit an empty result table"));
    }
    let file = File::create(path).map_err(io_err(path))?;
    let mut buf = BufWriter::new(file);
    write_results(rows, &mut buf, format).map_err(|e| match e {
        Error::Io { source, .. } => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        Error::Format { message, .. } => Error::Format {
            path: path.to_path_buf(),
            message,
        },
        other => other,
    })?;
    buf.flush().map_err(io_err(path))
}

pub fn read_results(path: &Path, format: OutputFormat) -> Result<Vec<ErrorRateRow>> {
    let file = File::open(path).map_err(io_err(path))?;
    match format {
        OutputFormat::Csv => csv::Reader::from_reader(file)
            .deserialize()
            .collect::<std::result::Result<Vec<ErrorRateRow>, _>>()
            .map_err(|e| format_err(path, e)),
        OutputFormat::Json => serde_json::from_reader(file).map_err(|e| format_err(path, e)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::experiment::CSV_HEADER;

    fn row(p: usize) -> ErrorRateRow {
        ErrorRateRow {
            n: 50,
            q: 3,
            p,
            a: 0.1,
            b: 0.25,
            trials: 200,
            errors: 7,
            error_rate: 0.035,
            std_err: (0.035f64 * 0.965 / 200.0).sqrt(),
            bound_eq14: 1.0 / 3.0,
            seed: 12345678901234,
        }
    }

    #[test]
    fn empty_table_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let err = emit_results(&[], &dir.path().join("x.csv"), OutputFormat::Csv).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn csv_header_contract() {
        let mut buf = Vec::new();
        write_results(&[row(4)], &mut buf, OutputFormat::Csv).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
    }

    #[test]
    fn round_trip_both_formats() {
        let dir = tempfile::tempdir().unwrap();
        let rows = vec![row(4), row(8)];
        for (name, fmt) in [("t.csv", OutputFormat::Csv), ("t.json", OutputFormat::Json)] {
            let path = dir.path().join(name);
            emit_results(&rows, &path, fmt).unwrap();
            assert_eq!(read_results(&path, fmt).unwrap(), rows);
        }
    }

    #[test]
    fn unwritable_path_reports_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("missing").join("t.csv");
        let err = emit_results(&[row(1)], &path, OutputFormat::Csv).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("t.csv"));
    }
}
