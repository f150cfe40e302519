//! Deterministic CSV rendering for [`SweepTable`]s.
//!
//! Layout: `# key=value` metadata lines, the header row, then data rows.
//! Floats carry 9 significant digits.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::experiments::{Cell, SweepTable};
use crate::Error;

/// Renders `x` with 9 significant digits, `%g` style: plain notation for
/// decimal exponents in [-5, 9), scientific otherwise, trailing zeros cut.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> String {
    if !s.contains('.') {
        return s.to_string();
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

pub fn render_cell(cell: &Cell) -> String {
    match cell {
        Cell::Int(v) => v.to_string(),
        Cell::Float(v) => format_float(*v),
        Cell::Bool(v) => v.to_string(),
        Cell::Text(v) => v.clone(),
    }
}

/// The exact bytes [`write_csv`] puts on disk.
pub fn to_csv_bytes(table: &SweepTable) -> Result<Vec<u8>, Error> {
    table.check_rectangular()?;
    let mut out = Vec::new();
    for (key, value) in &table.metadata {
        writeln!(out, "# {key}={value}").expect("write to Vec");
    }
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let csv_err = |e: csv::Error| Error::InvalidSpec(format!("csv encoding: {e}"));
    writer.write_record(&table.header).map_err(csv_err)?;
    for row in &table.rows {
        writer
            .write_record(row.iter().map(render_cell))
            .map_err(csv_err)?;
    }
    writer
        .into_inner()
        .map_err(|e| Error::InvalidSpec(format!("csv flush: {e}")))
}

/// Writes `table` to `path` via a temporary file in the same directory,
/// so a failed run never leaves a partial file behind.
pub fn write_csv(table: &SweepTable, path: &Path) -> Result<(), Error> {
    let bytes = to_csv_bytes(table)?;
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(&bytes).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

/// A parsed CSV file: metadata, header, and raw string cells.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvFile {
    pub metadata: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub fn parse_csv(bytes: &[u8]) -> Result<CsvFile, Error> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| Error::InvalidSpec(format!("csv is not utf-8: {e}")))?;
    let mut metadata = Vec::new();
    let mut body_start = 0;
    for line in text.split_inclusive('\n') {
        let Some(rest) = line.strip_prefix("# ") else {
            break;
        };
        let rest = rest.trim_end_matches('\n');
        let (k, v) = rest.split_once('=').unwrap_or((rest, ""));
        metadata.push((k.to_string(), v.to_string()));
        body_start += line.len();
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(&bytes[body_start..]);
    let csv_err = |e: csv::Error| Error::InvalidSpec(format!("csv decoding: {e}"));
    let header = reader
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(str::to_string)
        .collect();
    let rows = reader
        .records()
        .map(|r| r.map(|rec| rec.iter().map(str::to_string).collect()))
        .collect::<Result<_, _>>()
        .map_err(csv_err)?;
    Ok(CsvFile {
        metadata,
        header,
        rows,
    })
}

pub fn read_csv(path: &Path) -> Result<CsvFile, Error> {
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn float_rendering() {
        assert_eq!(format_float(0.0), "0");
        assert_eq!(format_float(1.0), "1");
        assert_eq!(format_float(-24.871_667_542), "-24.8716675");
        assert_eq!(format_float(30.953_396_540_819_39), "30.9533965");
        assert_eq!(format_float(1e-2), "0.01");
        assert_eq!(format_float(123_456_789.0), "123456789");
        assert_eq!(format_float(1_234_567_890.0), "1.23456789e9");
        assert_eq!(format_float(6.456_263_819e-26), "6.45626382e-26");
        assert_eq!(format_float(9.999_999_999_6), "10");
        assert_eq!(format_float(f64::NEG_INFINITY), "-inf");
        assert_eq!(format_float(f64::INFINITY), "inf");
    }

    fn sample_table(rows: Vec<Vec<Cell>>) -> SweepTable {
        SweepTable {
            header: vec!["a".into(), "b".into()],
            rows,
            metadata: vec![("build".into(), "test".into())],
        }
    }

    #[test]
    fn empty_table_is_header_and_metadata() {
        let bytes = to_csv_bytes(&sample_table(vec![])).unwrap();
        assert_eq!(String::from_utf8(bytes).unwrap(), "# build=test\na,b\n");
    }

    #[test]
    fn ragged_table_rejected() {
        let t = sample_table(vec![vec![Cell::Int(1)]]);
        assert!(to_csv_bytes(&t).is_err());
    }

    #[test]
    fn write_then_read_back() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let t = sample_table(vec![
            vec![Cell::Text("x,y".into()), Cell::Float(0.1)],
            vec![Cell::Bool(true), Cell::Int(-3)],
        ]);
        write_csv(&t, &path).unwrap();
        let parsed = read_csv(&path).unwrap();
        assert_eq!(parsed.metadata, t.metadata);
        assert_eq!(parsed.header, t.header);
        assert_eq!(parsed.rows[0], vec!["x,y".to_string(), "0.1".into()]);
        assert_eq!(parsed.rows[1], vec!["true".to_string(), "-3".into()]);
        // only the final file remains
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn unwritable_path_reports_it() {
        let t = sample_table(vec![]);
        let err = write_csv(&t, Path::new("/nonexistent-dir/x.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/x.csv"));
    }

    proptest! {
        #[test]
        fn rendering_round_trips_at_nine_digits(x in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL) {
            let rendered = format_float(x);
            let back: f64 = rendered.parse().unwrap();
            let nine: f64 = format!("{x:.8e}").parse().unwrap();
            prop_assert_eq!(back, nine);
        }
    }
}
