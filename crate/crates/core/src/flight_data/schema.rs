use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const KNOTS_TO_MPS: f64 = 0.514444;
pub const LBS_TO_KG: f64 = 0.453592;
pub const STANDARD_GRAVITY: f64 = 9.80665;
pub const CELSIUS_OFFSET: f64 = 273.15;

/// Unit a recorder channel is stored in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceUnit {
    Knots,
    Lbs,
    G,
    Degree,
    DegreePerSecond,
    Celsius,
    Percent,
    LbsPerHour,
}

impl SourceUnit {
    /// Convert a value in this unit to SI (m/s, kg, m/s², rad, rad/s, K, %, kg/s).
    pub fn to_si(self, x: f64) -> f64 {
        match self {
            SourceUnit::Knots => x * KNOTS_TO_MPS,
            SourceUnit::Lbs => x * LBS_TO_KG,
            SourceUnit::G => x * STANDARD_GRAVITY,
            SourceUnit::Degree | SourceUnit::DegreePerSecond => x.to_radians(),
            SourceUnit::Celsius => x + CELSIUS_OFFSET,
            SourceUnit::Percent => x,
            SourceUnit::LbsPerHour => x * LBS_TO_KG / 3600.0,
        }
    }

    pub fn from_si(self, x: f64) -> f64 {
        match self {
            SourceUnit::Knots => x / KNOTS_TO_MPS,
            SourceUnit::Lbs => x / LBS_TO_KG,
            SourceUnit::G => x / STANDARD_GRAVITY,
            SourceUnit::Degree | SourceUnit::DegreePerSecond => x.to_degrees(),
            SourceUnit::Celsius => x - CELSIUS_OFFSET,
            SourceUnit::Percent => x,
            SourceUnit::LbsPerHour => x * 3600.0 / LBS_TO_KG,
        }
    }

    /// Scale factor for differences (an offset unit converts deltas without the offset).
    pub fn delta_to_si(self, dx: f64) -> f64 {
        match self {
            SourceUnit::Celsius => dx,
            other => other.to_si(dx),
        }
    }
}

/// Sampling rate held as a ratio so slow channels such as 1/64 Hz stay exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rate {
    pub num: u32,
    pub den: u32,
}

impl Rate {
    pub const fn hz(num: u32) -> Self {
        Rate { num, den: 1 }
    }

    pub const fn per(den: u32) -> Self {
        Rate { num: 1, den }
    }

    pub fn as_hz(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn period(self) -> f64 {
        self.den as f64 / self.num as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub qar_code: String,
    pub physical_meaning: String,
    pub unit: SourceUnit,
    pub granularity: f64,
    pub sample_rate: Rate,
    pub mandatory: bool,
}

/// Channel codes used by the longitudinal model.
pub mod code {
    pub const TAS: &str = "TAS";
    pub const GW: &str = "GW";
    pub const VRTG: &str = "VRTG";
    pub const LONG: &str = "LONG";
    pub const PITCH: &str = "PITCH";
    pub const FLT_PATH: &str = "FLT_PATH";
    pub const PITCH_RATE: &str = "PITCH_RATE";
    pub const TAT: &str = "TAT";
    pub const DRIFT: &str = "DRIFT";
    pub const WIN_SPD: &str = "WIN_SPD";
    pub const WIN_DIR: &str = "WIN_DIR";
    pub const N11: &str = "N11";
    pub const N12: &str = "N12";
    pub const FF1: &str = "FF1";
    pub const FF2: &str = "FF2";
    pub const AOAL: &str = "AOAL";
    pub const AOAR: &str = "AOAR";
}

/// A set of channel definitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub channels: Vec<ChannelSpec>,
}

impl Schema {
    /// The 17 recorder channels with their native units, granularity and rates.
    pub fn qar() -> Self {
        use SourceUnit::*;
        let c = |code: &str, meaning: &str, unit, granularity, rate, mandatory| ChannelSpec {
            qar_code: code.to_string(),
            physical_meaning: meaning.to_string(),
            unit,
            granularity,
            sample_rate: rate,
            mandatory,
        };
        Schema {
            channels: vec![
                c(code::TAS, "true airspeed", Knots, 0.0001, Rate::hz(1), true),
                c(code::GW, "gross weight", Lbs, 0.0001, Rate::per(64), true),
                c(
                    code::VRTG,
                    "vertical acceleration",
                    G,
                    0.0039,
                    Rate::hz(16),
                    true,
                ),
                c(
                    code::LONG,
                    "longitudinal acceleration",
                    G,
                    0.0039,
                    Rate::hz(16),
                    true,
                ),
                c(
                    code::PITCH,
                    "pitch angle",
                    Degree,
                    0.0001,
                    Rate::hz(4),
                    true,
                ),
                c(
                    code::FLT_PATH,
                    "flight path angle",
                    Degree,
                    0.0001,
                    Rate::hz(1),
                    false,
                ),
                c(
                    code::PITCH_RATE,
                    "pitch rate",
                    DegreePerSecond,
                    0.0001,
                    Rate::hz(8),
                    true,
                ),
                c(
                    code::TAT,
                    "total air temperature",
                    Celsius,
                    0.25,
                    Rate::hz(1),
                    true,
                ),
                c(
                    code::DRIFT,
                    "drift angle",
                    Degree,
                    0.0039,
                    Rate::hz(4),
                    false,
                ),
                c(code::WIN_SPD, "wind speed", Knots, 1.0, Rate::hz(2), false),
                c(
                    code::WIN_DIR,
                    "wind direction",
                    Degree,
                    0.0039,
                    Rate::hz(2),
                    false,
                ),
                c(
                    code::N11,
                    "engine 1 fan speed",
                    Percent,
                    0.125,
                    Rate::per(4),
                    false,
                ),
                c(
                    code::N12,
                    "engine 2 fan speed",
                    Percent,
                    0.125,
                    Rate::per(4),
                    false,
                ),
                c(
                    code::FF1,
                    "engine 1 fuel flow",
                    LbsPerHour,
                    0.001,
                    Rate::hz(1),
                    true,
                ),
                c(
                    code::FF2,
                    "engine 2 fuel flow",
                    LbsPerHour,
                    0.001,
                    Rate::hz(1),
                    true,
                ),
                c(
                    code::AOAL,
                    "left angle of attack vane",
                    Degree,
                    0.3516,
                    Rate::hz(4),
                    true,
                ),
                c(
                    code::AOAR,
                    "right angle of attack vane",
                    Degree,
                    0.3516,
                    Rate::hz(4),
                    true,
                ),
            ],
        }
    }

    /// The recorder schema with every channel resampled to one common rate.
    pub fn uniform(rate: Rate) -> Self {
        let mut s = Self::qar();
        for c in &mut s.channels {
            c.sample_rate = rate;
        }
        s
    }

    pub fn get(&self, code: &str) -> Option<&ChannelSpec> {
        self.channels.iter().find(|c| c.qar_code == code)
    }

    pub fn require(&self, code: &str) -> Result<&ChannelSpec> {
        self.get(code).ok_or_else(|| Error::Schema {
            channel: code.to_string(),
        })
    }

    pub fn mandatory(&self) -> impl Iterator<Item = &ChannelSpec> {
        self.channels.iter().filter(|c| c.mandatory)
    }

    pub fn max_rate_hz(&self) -> f64 {
        self.channels
            .iter()
            .map(|c| c.sample_rate.as_hz())
            .fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        for c in &self.channels {
            if !(c.granularity > 0.0) || c.sample_rate.num == 0 || c.sample_rate.den == 0 {
                return Err(Error::Config(format!(
                    "channel {} needs positive granularity and rate",
                    c.qar_code
                )));
            }
        }
        Ok(())
    }
}

/// Convert an arbitrary grid rate in Hz to the nearest simple ratio.
pub fn rate_from_hz(hz: f64) -> Result<Rate> {
    if !(hz > 0.0) || !hz.is_finite() {
        return Err(Error::Config(format!(
            "grid rate must be positive, got {hz}"
        )));
    }
    if hz >= 1.0 {
        let n = hz.round();
        if (n - hz).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "grid rate {hz} Hz must be an integer or 1/n Hz"
            )));
        }
        Ok(Rate::hz(n as u32))
    } else {
        let d = (1.0 / hz).round();
        if (d - 1.0 / hz).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "grid rate {hz} Hz must be an integer or 1/n Hz"
            )));
        }
        Ok(Rate::per(d as u32))
    }
}
