use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::schema::Schema;
use crate::error::{Error, Result};

/// One channel at its native rate, in source units.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub t: Vec<f64>,
    pub v: Vec<f64>,
}

impl Series {
    pub fn push(&mut self, t: f64, v: f64) {
        self.t.push(t);
        self.v.push(v);
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// Multi-rate channel table as read from a recorder export.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RawTable {
    /// `# key: value` header lines such as flight_id, aircraft_type, tail_id.
    pub metadata: BTreeMap<String, String>,
    pub channels: BTreeMap<String, Series>,
    /// Optional schema channels not present in the file.
    pub absent: Vec<String>,
}

impl RawTable {
    pub fn channel(&self, code: &str) -> Result<&Series> {
        self.channels.get(code).ok_or_else(|| Error::Schema {
            channel: code.to_string(),
        })
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.get(key).map(String::as_str)
    }

    /// Check that every mandatory channel is present and record the absent optional ones.
    pub fn check_schema(&mut self, schema: &Schema) -> Result<()> {
        for code in self.channels.keys() {
            schema.require(code)?;
        }
        for spec in schema.mandatory() {
            if !self.channels.contains_key(&spec.qar_code) {
                return Err(Error::Schema {
                    channel: spec.qar_code.clone(),
                });
            }
        }
        self.absent = schema
            .channels
            .iter()
            .filter(|c| !self.channels.contains_key(&c.qar_code))
            .map(|c| c.qar_code.clone())
            .collect();
        Ok(())
    }

    /// Write as a sparse CSV: a row per distinct timestamp, empty cells where a channel was not sampled.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut times: Vec<f64> = self
            .channels
            .values()
            .flat_map(|s| s.t.iter().copied())
            .collect();
        times.sort_by(f64::total_cmp);
        times.dedup();

        let mut out = String::new();
        for (k, v) in &self.metadata {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out.push('t');
        for code in self.channels.keys() {
            out.push(',');
            out.push_str(code);
        }
        out.push('\n');

        let mut cursors = vec![0usize; self.channels.len()];
        for &t in &times {
            out.push_str(&t.to_string());
            for (i, s) in self.channels.values().enumerate() {
                out.push(',');
                if cursors[i] < s.len() && s.t[cursors[i]] == t {
                    out.push_str(&s.v[cursors[i]].to_string());
                    cursors[i] += 1;
                }
            }
            out.push('\n');
        }
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
    }
}

/// Split leading and interleaved `# key: value` lines from the CSV body.
pub(crate) fn split_metadata(text: &str) -> (BTreeMap<String, String>, String) {
    let mut meta = BTreeMap::new();
    let mut body = String::with_capacity(text.len());
    for line in text.lines() {
        if let Some(rest) = line.trim_start().strip_prefix('#') {
            if let Some((k, v)) = rest.split_once(':') {
                meta.insert(k.trim().to_string(), v.trim().to_string());
            }
        } else if !line.trim().is_empty() {
            body.push_str(line);
            body.push('\n');
        }
    }
    (meta, body)
}

fn parse_f64(s: &str, what: &str, row: usize) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::Format(format!("row {row}: cannot parse {what} value {s:?}")))
}

/// Load a recorder CSV (`t` plus QAR-code columns, empty cells for unsampled channels).
pub fn load_segment(path: &Path, schema: &Schema) -> Result<RawTable> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_raw_csv(&text, schema)
}

pub fn parse_raw_csv(text: &str, schema: &Schema) -> Result<RawTable> {
    let (metadata, body) = split_metadata(text);
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if headers.first().map(String::as_str) != Some("t") {
        return Err(Error::Format("first column must be `t`".into()));
    }
    let codes = &headers[1..];
    for (i, code) in codes.iter().enumerate() {
        schema.require(code)?;
        if codes[..i].contains(code) {
            return Err(Error::Format(format!("duplicate column {code}")));
        }
    }

    let mut series: Vec<Series> = vec![Series::default(); codes.len()];
    let mut last_t = f64::NEG_INFINITY;
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let t = parse_f64(rec.get(0).unwrap_or(""), "t", row + 1)?;
        if t <= last_t {
            return Err(Error::Format(format!(
                "timestamps not strictly increasing at row {} (t={t})",
                row + 1
            )));
        }
        last_t = t;
        for (i, cell) in rec.iter().skip(1).enumerate() {
            if i >= codes.len() {
                return Err(Error::Format(format!("row {} has extra cells", row + 1)));
            }
            if !cell.is_empty() {
                series[i].push(t, parse_f64(cell, &codes[i], row + 1)?);
            }
        }
    }

    let mut table = RawTable {
        metadata,
        channels: codes.iter().cloned().zip(series).collect(),
        absent: Vec::new(),
    };
    table.check_schema(schema)?;
    Ok(table)
}
