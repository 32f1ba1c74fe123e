use std::path::Path;

use serde::Serialize;

use crate::detect::PseudoHelixSegment;
use crate::error::{Error, Result};
use crate::families::SchwarzianReport;
use crate::metrics::SteadyPointTrain;
use crate::orbit::OrbitSeries;
use crate::sweep::{SweepRecord, VierEstimate};

use super::config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidArgument(format!("format must be csv or json, got `{other}`"))),
        }
    }
}

/// A report that can be flattened to one CSV table.
pub trait CsvTable {
    fn header(&self) -> Vec<&'static str>;
    fn rows(&self) -> Vec<Vec<String>>;
}

/// JSON document written by every command: the effective configuration next
/// to the result, so a run can be repeated from its own output.
#[derive(Debug, Clone, Serialize)]
pub struct Envelope<'a, R: Serialize> {
    pub command: &'a str,
    pub config: &'a RunConfig,
    pub result: &'a R,
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn to_json<R: Serialize + ?Sized>(report: &R) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn to_csv<R: CsvTable + ?Sized>(report: &R) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::InvalidArgument(e.to_string());
    w.write_record(report.header()).map_err(io)?;
    for row in report.rows() {
        w.write_record(&row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Write `contents` to `path`, or to stdout when `path` is `None`.
pub fn write_output(contents: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, contents).map_err(|source| Error::Io { path: p.into(), source }),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(contents.as_bytes())
                .map_err(|source| Error::Io { path: "<stdout>".into(), source })
        }
    }
}

/// Render a report in `format` and write it.
pub fn emit<R: Serialize + CsvTable>(report: &R, format: Format, path: Option<&Path>) -> Result<String> {
    let text = match format {
        Format::Json => to_json(report)?,
        Format::Csv => to_csv(report)?,
    };
    write_output(&text, path)?;
    Ok(text)
}

impl CsvTable for OrbitSeries<f64> {
    fn header(&self) -> Vec<&'static str> {
        vec!["index", "value", "int_part", "frac_part", "delta1"]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let t = self.term(i);
                vec![
                    (i + 1).to_string(),
                    t.value().to_string(),
                    t.int_part.to_string(),
                    t.frac.to_string(),
                    if i + 1 < n { self.advance(i, i + 1).to_string() } else { String::new() },
                ]
            })
            .collect()
    }
}

impl CsvTable for [SweepRecord] {
    fn header(&self) -> Vec<&'static str> {
        vec!["param_value", "verdict", "period", "mu"]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.iter()
            .map(|r| vec![r.param_value.to_string(), r.verdict.clone(), opt(r.period), opt(r.mu)])
            .collect()
    }
}

impl CsvTable for Vec<SweepRecord> {
    fn header(&self) -> Vec<&'static str> {
        self.as_slice().header()
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.as_slice().rows()
    }
}

impl CsvTable for SteadyPointTrain {
    fn header(&self) -> Vec<&'static str> {
        vec!["k", "steady_order"]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.orders.iter().enumerate().map(|(k, o)| vec![(k + 1).to_string(), o.to_string()]).collect()
    }
}

impl CsvTable for Vec<PseudoHelixSegment> {
    fn header(&self) -> Vec<&'static str> {
        vec!["n0", "m", "period_p", "steady_point_k0", "steady_order", "modulo_step"]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.iter()
            .map(|s| {
                vec![
                    s.n0.to_string(),
                    s.m.to_string(),
                    s.period_p.to_string(),
                    s.steady_point_k0.to_string(),
                    s.steady_order().to_string(),
                    s.modulo_step.to_string(),
                ]
            })
            .collect()
    }
}

impl CsvTable for SchwarzianReport<f64> {
    fn header(&self) -> Vec<&'static str> {
        vec!["x", "schwarzian"]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.grid.iter().zip(&self.values).map(|(x, s)| vec![x.to_string(), opt(*s)]).collect()
    }
}

impl CsvTable for VierEstimate {
    fn header(&self) -> Vec<&'static str> {
        vec!["level", "target", "b", "mu", "residual", "ratio"]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        (0..self.b.len())
            .map(|n| {
                vec![
                    n.to_string(),
                    self.targets[n].to_string(),
                    self.b[n].to_string(),
                    self.mu[n].to_string(),
                    self.residuals[n].to_string(),
                    opt(self.ratios.get(n)),
                ]
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detect::HelixReport;

    #[test]
    fn orbit_csv_has_blank_last_delta() {
        let s = OrbitSeries::from_values(&[0.5, 1.9]);
        let text = to_csv(&s).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "index,value,int_part,frac_part,delta1");
        assert!(lines[1].starts_with("1,0.5,0,0.5,1.4"));
        assert!(lines[2].ends_with(','));
    }

    #[test]
    fn helix_json_names_period() {
        let h = HelixReport { period_j: 3, lambdas: vec![0.1, 0.4, 0.7], modulo_step: 5, residual: 1e-9 };
        let text = to_json(&h).unwrap();
        assert!(text.contains("\"period_j\": 3"));
    }

    #[test]
    fn floats_use_shortest_round_trip() {
        let s = OrbitSeries::from_values(&[0.1, 2.156_433_783_140_775_2]);
        let text = to_csv(&s).unwrap();
        let last = text.lines().nth(2).unwrap();
        assert_eq!(last, "2,2.156433783140775,2,0.15643378314077516,");
        assert_eq!("2.156433783140775".parse::<f64>().unwrap(), 2.156_433_783_140_775_2);
        assert!(to_json(&vec![0.1_f64]).unwrap().contains("0.1"));
    }
}
