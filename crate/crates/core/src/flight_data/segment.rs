use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::raw::{split_metadata, RawTable, Series};
use super::schema::{code, SourceUnit};
use crate::error::{Error, Result};

/// Minimum number of grid samples in a segment.
pub const MIN_SEGMENT_LEN: usize = 50;

/// Largest plausible cruise angle of attack, rad.
pub const ALPHA_LIMIT: f64 = 0.35;

/// One grid point of a segment, all SI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasuredSample {
    pub t: f64,
    pub alpha: f64,
    pub q: f64,
    pub theta: f64,
    #[serde(rename = "V")]
    pub v: f64,
    pub gamma: f64,
    pub a_x: f64,
    pub a_z: f64,
    pub mass: f64,
    pub fuel_flow: f64,
    pub tat: f64,
    pub mach: f64,
    pub static_temp: f64,
}

impl MeasuredSample {
    pub fn alpha_deg(&self) -> f64 {
        self.alpha.to_degrees()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| {
            Err(Error::InvalidSegment(format!(
                "sample at t={} violates {what}",
                self.t
            )))
        };
        let fields = [
            self.t,
            self.alpha,
            self.q,
            self.theta,
            self.v,
            self.gamma,
            self.a_x,
            self.a_z,
            self.mass,
            self.fuel_flow,
            self.tat,
            self.mach,
            self.static_temp,
        ];
        if fields.iter().any(|x| !x.is_finite()) {
            return bad("finiteness");
        }
        if !(self.v > 0.0) {
            return bad("V > 0");
        }
        if !(self.mass > 0.0) {
            return bad("mass > 0");
        }
        if !(self.tat > 0.0) {
            return bad("tat > 0");
        }
        if !(self.mach > 0.0 && self.mach < 1.0) {
            return bad("0 < mach < 1");
        }
        if self.alpha.abs() >= ALPHA_LIMIT {
            return bad("|alpha| < 0.35 rad");
        }
        Ok(())
    }
}

/// A uniformly sampled, unit-converted cruise window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightSegment {
    pub samples: Vec<MeasuredSample>,
    pub grid_rate_hz: f64,
    pub flight_id: String,
    pub aircraft_type: String,
    pub tail_id: String,
}

const COLUMNS: [&str; 13] = [
    "t",
    "alpha",
    "q",
    "theta",
    "V",
    "gamma",
    "a_x",
    "a_z",
    "mass",
    "fuel_flow",
    "tat",
    "mach",
    "static_temp",
];

impl FlightSegment {
    pub fn new(
        samples: Vec<MeasuredSample>,
        grid_rate_hz: f64,
        flight_id: impl Into<String>,
        aircraft_type: impl Into<String>,
        tail_id: impl Into<String>,
    ) -> Result<Self> {
        let seg = FlightSegment {
            samples,
            grid_rate_hz,
            flight_id: flight_id.into(),
            aircraft_type: aircraft_type.into(),
            tail_id: tail_id.into(),
        };
        seg.validate()?;
        Ok(seg)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.grid_rate_hz
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.grid_rate_hz > 0.0) {
            return Err(Error::InvalidSegment("grid rate must be positive".into()));
        }
        if self.samples.len() < MIN_SEGMENT_LEN {
            return Err(Error::InvalidSegment(format!(
                "{} samples, need at least {MIN_SEGMENT_LEN}",
                self.samples.len()
            )));
        }
        let dt = self.dt();
        for w in self.samples.windows(2) {
            let step = w[1].t - w[0].t;
            if !(step > 0.0) || (step - dt).abs() > 1e-6 * dt {
                return Err(Error::InvalidSegment(format!(
                    "non-uniform spacing {step} s at t={}",
                    w[0].t
                )));
            }
        }
        self.samples.iter().try_for_each(MeasuredSample::validate)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# flight_id: {}\n", self.flight_id));
        out.push_str(&format!("# aircraft_type: {}\n", self.aircraft_type));
        out.push_str(&format!("# tail_id: {}\n", self.tail_id));
        out.push_str(&format!("# grid_rate_hz: {}\n", self.grid_rate_hz));
        out.push_str(&COLUMNS.join(","));
        out.push('\n');
        for s in &self.samples {
            let row = [
                s.t,
                s.alpha,
                s.q,
                s.theta,
                s.v,
                s.gamma,
                s.a_x,
                s.a_z,
                s.mass,
                s.fuel_flow,
                s.tat,
                s.mach,
                s.static_temp,
            ];
            let cells: Vec<String> = row.iter().map(f64::to_string).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(self.to_csv_string().as_bytes())
            .map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&text)
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let (meta, body) = split_metadata(text);
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(body.as_bytes());
        let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if headers != COLUMNS {
            return Err(Error::Format(format!(
                "segment columns must be {}",
                COLUMNS.join(",")
            )));
        }
        let mut samples = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let mut x = [0.0; 13];
            for (i, slot) in x.iter_mut().enumerate() {
                let cell = rec.get(i).unwrap_or("");
                *slot = cell.parse().map_err(|_| {
                    Error::Format(format!(
                        "row {}: bad {} value {cell:?}",
                        row + 1,
                        COLUMNS[i]
                    ))
                })?;
            }
            samples.push(MeasuredSample {
                t: x[0],
                alpha: x[1],
                q: x[2],
                theta: x[3],
                v: x[4],
                gamma: x[5],
                a_x: x[6],
                a_z: x[7],
                mass: x[8],
                fuel_flow: x[9],
                tat: x[10],
                mach: x[11],
                static_temp: x[12],
            });
        }
        let grid_rate_hz = match meta.get("grid_rate_hz") {
            Some(s) => s
                .parse()
                .map_err(|_| Error::Format(format!("bad grid_rate_hz {s:?}")))?,
            None if samples.len() >= 2 => 1.0 / (samples[1].t - samples[0].t),
            None => 1.0,
        };
        let get = |k: &str| meta.get(k).cloned().unwrap_or_default();
        Self::new(
            samples,
            grid_rate_hz,
            get("flight_id"),
            get("aircraft_type"),
            get("tail_id"),
        )
    }

    /// Express the segment as recorder channels sampled on its own grid.
    pub fn to_raw_table(&self) -> RawTable {
        let t: Vec<f64> = self.samples.iter().map(|s| s.t).collect();
        let ser = |unit: SourceUnit, f: &dyn Fn(&MeasuredSample) -> f64| Series {
            t: t.clone(),
            v: self.samples.iter().map(|s| unit.from_si(f(s))).collect(),
        };
        let mut channels = BTreeMap::new();
        channels.insert(code::TAS.into(), ser(SourceUnit::Knots, &|s| s.v));
        channels.insert(code::GW.into(), ser(SourceUnit::Lbs, &|s| s.mass));
        channels.insert(code::VRTG.into(), ser(SourceUnit::G, &|s| s.a_z));
        channels.insert(code::LONG.into(), ser(SourceUnit::G, &|s| s.a_x));
        channels.insert(code::PITCH.into(), ser(SourceUnit::Degree, &|s| s.theta));
        channels.insert(code::FLT_PATH.into(), ser(SourceUnit::Degree, &|s| s.gamma));
        channels.insert(
            code::PITCH_RATE.into(),
            ser(SourceUnit::DegreePerSecond, &|s| s.q),
        );
        channels.insert(code::TAT.into(), ser(SourceUnit::Celsius, &|s| s.tat));
        channels.insert(
            code::FF1.into(),
            ser(SourceUnit::LbsPerHour, &|s| 0.5 * s.fuel_flow),
        );
        channels.insert(
            code::FF2.into(),
            ser(SourceUnit::LbsPerHour, &|s| 0.5 * s.fuel_flow),
        );
        channels.insert(code::AOAL.into(), ser(SourceUnit::Degree, &|s| s.alpha));
        channels.insert(code::AOAR.into(), ser(SourceUnit::Degree, &|s| s.alpha));

        let mut metadata = BTreeMap::new();
        metadata.insert("flight_id".into(), self.flight_id.clone());
        metadata.insert("aircraft_type".into(), self.aircraft_type.clone());
        metadata.insert("tail_id".into(), self.tail_id.clone());
        RawTable {
            metadata,
            channels,
            absent: vec![
                code::DRIFT.into(),
                code::WIN_SPD.into(),
                code::WIN_DIR.into(),
                code::N11.into(),
                code::N12.into(),
            ],
        }
    }
}
