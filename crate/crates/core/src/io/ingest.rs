use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::orbit::OrbitSeries;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub path: PathBuf,
    /// Lowercase hex SHA-256 of the file bytes.
    pub sha256: String,
}

/// Indexed values u(1..N) read from an (index, value[, delta1]) table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestedSeries {
    pub values: Vec<f64>,
    /// Third column when present; never used for analysis.
    pub printed_delta1: Vec<Option<f64>>,
    pub provenance: Provenance,
}

impl IngestedSeries {
    pub fn series(&self) -> OrbitSeries<f64> {
        OrbitSeries::from_values(&self.values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Read a two- or three-column table. Comma- or whitespace-separated;
/// `#` starts a comment line. Indices must run 1, 2, 3, … without gaps.
///
/// An optional header row may name the columns; when it contains `value`
/// (and optionally `delta1`) those columns are used and extra columns are
/// ignored, so the orbit tables written by `iterate` read back directly.
pub fn ingest_series(path: &Path) -> Result<IngestedSeries> {
    let bytes = std::fs::read(path).map_err(|source| Error::Io { path: path.into(), source })?;
    ingest_bytes(&bytes, path)
}

pub fn ingest_bytes(bytes: &[u8], path: &Path) -> Result<IngestedSeries> {
    let fail = |line: usize, message: String| Error::Ingest { path: path.into(), line, message };
    let text = std::str::from_utf8(bytes).map_err(|e| fail(0, format!("not UTF-8: {e}")))?;
    let comma = text.lines().any(|l| !l.trim_start().starts_with('#') && l.contains(','));
    let normalised;
    let source = if comma {
        text
    } else {
        normalised = text
            .lines()
            .map(|l| if l.trim_start().starts_with('#') { l.to_string() } else { l.split_whitespace().collect::<Vec<_>>().join(",") })
            .collect::<Vec<_>>()
            .join("\n");
        normalised.as_str()
    };

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source.as_bytes());

    let mut values = Vec::new();
    let mut printed = Vec::new();
    let mut seen_data = false;
    let mut named: Option<(usize, Option<usize>)> = None;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            fail(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let index_field = record.get(0).unwrap_or("");
        let index = match index_field.parse::<u64>() {
            Ok(i) => i,
            Err(_) if !seen_data => {
                let col = |name: &str| record.iter().position(|h| h.eq_ignore_ascii_case(name));
                named = col("value").map(|v| (v, col("delta1")));
                seen_data = true;
                continue;
            }
            Err(_) => return Err(fail(line, format!("malformed index `{index_field}`"))),
        };
        seen_data = true;
        let (value_col, delta_col) = match named {
            Some((v, d)) if record.len() > v => (v, d),
            Some(_) => return Err(fail(line, format!("row has {} columns, short of the header", record.len()))),
            None if (2..=3).contains(&record.len()) => (1, Some(2)),
            None => return Err(fail(line, format!("expected 2 or 3 columns, found {}", record.len()))),
        };
        let expected = values.len() as u64 + 1;
        if index != expected {
            return Err(fail(line, format!("index {index} where {expected} was expected")));
        }
        let value: f64 = record[value_col]
            .parse()
            .map_err(|_| fail(line, format!("malformed value `{}`", &record[value_col])))?;
        if !value.is_finite() {
            return Err(fail(line, format!("non-finite value `{}`", &record[value_col])));
        }
        let delta = match delta_col.and_then(|c| record.get(c)) {
            Some("") | None => None,
            Some(s) => Some(s.parse::<f64>().map_err(|_| fail(line, format!("malformed difference `{s}`")))?),
        };
        values.push(value);
        printed.push(delta);
    }
    if values.is_empty() {
        return Err(fail(0, "no data rows".into()));
    }
    Ok(IngestedSeries {
        values,
        printed_delta1: printed,
        provenance: Provenance { path: path.into(), sha256: sha256_hex(bytes) },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ingest(text: &str) -> Result<IngestedSeries> {
        ingest_bytes(text.as_bytes(), Path::new("mem.csv"))
    }

    #[test]
    fn tab_separated_appendix_layout() {
        let s = ingest("1\t0.5000000000000000\t1.6564337831407752\n2\t2.1564337831407752\t1.2196209400953308\n").unwrap();
        assert_eq!(s.values, vec![0.5, 2.156_433_783_140_775_2]);
        assert_eq!(s.series().delta1(), vec![1.656_433_783_140_775_2]);
        assert_eq!(s.printed_delta1[0], Some(1.656_433_783_140_775_2));
    }

    #[test]
    fn header_and_comments() {
        let s = ingest("# note\nindex,value\n1,0.25\n\n2,1.5\n").unwrap();
        assert_eq!(s.values, vec![0.25, 1.5]);
        assert_eq!(s.printed_delta1, vec![None, None]);
    }

    #[test]
    fn named_columns_select_value_and_difference() {
        let s = ingest("index,value,int_part,frac_part,delta1\n1,0.5,0,0.5,1.25\n2,1.75,1,0.75,\n").unwrap();
        assert_eq!(s.values, vec![0.5, 1.75]);
        assert_eq!(s.printed_delta1, vec![Some(1.25), None]);
        assert!(matches!(ingest("index,value,x,delta1\n1\n"), Err(Error::Ingest { line: 2, .. })));
    }

    #[test]
    fn duplicated_index_reports_line() {
        match ingest("index,value\n1,0.5\n2,1.5\n2,2.5\n") {
            Err(Error::Ingest { line, message, .. }) => {
                assert_eq!(line, 4);
                assert!(message.contains("index 2"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_rows() {
        assert!(matches!(ingest("1,abc\n"), Err(Error::Ingest { line: 1, .. })));
        assert!(matches!(ingest("1,0.5\nx,1\n"), Err(Error::Ingest { line: 2, .. })));
        assert!(matches!(ingest("1,0.5,1,2\n"), Err(Error::Ingest { .. })));
        assert!(matches!(ingest("2,0.5\n"), Err(Error::Ingest { .. })));
        assert!(matches!(ingest("# nothing\n"), Err(Error::Ingest { .. })));
    }

    #[test]
    fn checksum_is_hex_sha256() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
