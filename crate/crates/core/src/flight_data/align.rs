use super::mach::derive_mach;
use super::raw::{RawTable, Series};
use super::schema::{code, rate_from_hz, ChannelSpec, Schema};
use super::segment::{FlightSegment, MeasuredSample, MIN_SEGMENT_LEN};
use crate::error::{Error, Result};

/// Channels that feed the measured sample, in the order they are resampled.
const USED: [&str; 11] = [
    code::TAS,
    code::GW,
    code::VRTG,
    code::LONG,
    code::PITCH,
    code::PITCH_RATE,
    code::TAT,
    code::FF1,
    code::FF2,
    code::AOAL,
    code::AOAR,
];

/// A channel resampled onto the grid, still in source units.
struct Resampled {
    spec: ChannelSpec,
    values: Vec<f64>,
}

fn check_gaps(name: &str, s: &Series, period: f64) -> Result<()> {
    for w in s.t.windows(2) {
        if w[1] - w[0] > 2.0 * period * (1.0 + 1e-9) {
            return Err(Error::Gap {
                channel: name.to_string(),
                start: w[0],
                end: w[1],
            });
        }
    }
    Ok(())
}

/// Block-average channels sampled at least as fast as the grid; hold the last value otherwise.
fn resample(spec: &ChannelSpec, s: &Series, grid: &[f64], dt: f64, grid_hz: f64) -> Vec<f64> {
    let eps = 1e-9 * dt;
    let mut out = Vec::with_capacity(grid.len());
    let average = spec.sample_rate.as_hz() >= grid_hz * (1.0 - 1e-12);
    let mut i = 0usize;
    let mut last = s.v[0];
    for &tj in grid {
        if average {
            while i < s.len() && s.t[i] < tj - eps {
                last = s.v[i];
                i += 1;
            }
            let (mut sum, mut n) = (0.0, 0usize);
            while i < s.len() && s.t[i] < tj + dt - eps {
                sum += s.v[i];
                n += 1;
                i += 1;
            }
            if n > 0 {
                last = s.v[i - 1];
                out.push(sum / n as f64);
            } else {
                out.push(last);
            }
        } else {
            while i < s.len() && s.t[i] <= tj + eps {
                last = s.v[i];
                i += 1;
            }
            out.push(last);
        }
    }
    out
}

/// Resample every model channel onto a common grid, convert to SI and derive Mach.
pub fn align_and_convert(
    raw: &RawTable,
    schema: &Schema,
    grid_rate_hz: f64,
) -> Result<FlightSegment> {
    let samples = align_samples(raw, schema, grid_rate_hz)?;
    let meta = |k: &str| raw.meta(k).unwrap_or("").to_string();
    FlightSegment::new(
        samples,
        grid_rate_hz,
        meta("flight_id"),
        meta("aircraft_type"),
        meta("tail_id"),
    )
}

/// Grid samples without the per-sample cruise sanity checks.
pub(crate) fn align_samples(
    raw: &RawTable,
    schema: &Schema,
    grid_rate_hz: f64,
) -> Result<Vec<MeasuredSample>> {
    rate_from_hz(grid_rate_hz)?;
    if grid_rate_hz > schema.max_rate_hz() {
        return Err(Error::Config(format!(
            "grid rate {grid_rate_hz} Hz exceeds the fastest channel"
        )));
    }
    let dt = 1.0 / grid_rate_hz;

    let mut used: Vec<&str> = USED.to_vec();
    if raw.channels.contains_key(code::FLT_PATH) {
        used.push(code::FLT_PATH);
    }

    let mut start = f64::NEG_INFINITY;
    let mut end = f64::INFINITY;
    for name in &used {
        let spec = schema.require(name)?;
        let s = raw.channel(name)?;
        if s.is_empty() {
            return Err(Error::Schema {
                channel: name.to_string(),
            });
        }
        let period = spec.sample_rate.period();
        check_gaps(name, s, period)?;
        start = start.max(s.t[0]);
        end = end.min(s.t[s.len() - 1] + period);
    }

    let n = ((end - start) / dt + 1e-9).floor().max(0.0) as usize;
    if n < MIN_SEGMENT_LEN {
        return Err(Error::InvalidSegment(format!(
            "channels overlap for {:.3} s, need {} s at {grid_rate_hz} Hz",
            (end - start).max(0.0),
            MIN_SEGMENT_LEN as f64 * dt
        )));
    }
    let grid: Vec<f64> = (0..n).map(|j| start + j as f64 * dt).collect();

    let mut chans: Vec<Resampled> = Vec::with_capacity(used.len());
    for name in &used {
        let spec = schema.require(name)?.clone();
        let values = resample(&spec, raw.channel(name)?, &grid, dt, grid_rate_hz);
        chans.push(Resampled { spec, values });
    }
    let si = |idx: usize, j: usize| chans[idx].spec.unit.to_si(chans[idx].values[j]);

    let mut samples = Vec::with_capacity(n);
    for (j, &t) in grid.iter().enumerate() {
        let v = si(0, j);
        let tat = si(6, j);
        let alpha = 0.5 * (si(9, j) + si(10, j));
        let theta = si(4, j);
        let gamma = if chans.len() > 11 {
            si(11, j)
        } else {
            theta - alpha
        };
        let (mach, static_temp) = derive_mach(v, tat)?;
        samples.push(MeasuredSample {
            t,
            alpha,
            q: si(5, j),
            theta,
            v,
            gamma,
            a_x: si(3, j),
            a_z: si(2, j),
            mass: si(1, j),
            fuel_flow: si(7, j) + si(8, j),
            tat,
            mach,
            static_temp,
        });
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn constant_table(seconds: f64) -> RawTable {
        let schema = Schema::qar();
        let values: BTreeMap<&str, f64> = [
            ("TAS", 450.0),
            ("GW", 150000.0),
            ("VRTG", 1.0),
            ("LONG", 0.01),
            ("PITCH", 2.5),
            ("PITCH_RATE", 0.0),
            ("TAT", -29.0),
            ("FF1", 1900.0),
            ("FF2", 1800.0),
            ("AOAL", 2.4),
            ("AOAR", 2.6),
        ]
        .into_iter()
        .collect();
        let mut t = RawTable::default();
        for (code, v) in values {
            let period = schema.get(code).unwrap().sample_rate.period();
            let mut s = Series::default();
            let mut k = 0.0;
            while k * period < seconds {
                s.push(k * period, v);
                k += 1.0;
            }
            t.channels.insert(code.to_string(), s);
        }
        t
    }

    #[test]
    fn constants_survive_alignment() {
        let raw = constant_table(200.0);
        let seg = align_and_convert(&raw, &Schema::qar(), 1.0).unwrap();
        assert_eq!(seg.len(), 200);
        for s in &seg.samples {
            assert!((s.v - 231.4998).abs() < 1e-9);
            assert!((s.a_z - 9.80665).abs() < 1e-12);
            assert!((s.alpha - 2.5_f64.to_radians()).abs() < 1e-12);
            assert!((s.mass - 150000.0 * 0.453592).abs() < 1e-6);
            assert!((s.fuel_flow - 3700.0 * 0.453592 / 3600.0).abs() < 1e-12);
            assert!((s.tat - 244.15).abs() < 1e-12);
            assert!((s.gamma - (2.5_f64.to_radians() - s.alpha)).abs() < 1e-12);
        }
    }

    #[test]
    fn alternating_vrtg_averages_out() {
        let mut raw = constant_table(100.0);
        let s = raw.channels.get_mut("VRTG").unwrap();
        for (i, v) in s.v.iter_mut().enumerate() {
            *v = if i % 2 == 0 { 0.0039 } else { -0.0039 };
        }
        let seg = align_and_convert(&raw, &Schema::qar(), 1.0).unwrap();
        for s in &seg.samples {
            assert!(s.a_z.abs() < 1e-12);
        }
    }

    #[test]
    fn gap_is_reported() {
        let mut raw = constant_table(200.0);
        let s = raw.channels.get_mut("TAS").unwrap();
        let keep: Vec<usize> = (0..s.len()).filter(|&i| !(50..60).contains(&i)).collect();
        s.t = keep.iter().map(|&i| s.t[i]).collect();
        s.v = keep.iter().map(|&i| s.v[i]).collect();
        match align_and_convert(&raw, &Schema::qar(), 1.0) {
            Err(Error::Gap {
                channel,
                start,
                end,
            }) => {
                assert_eq!(channel, "TAS");
                assert_eq!((start, end), (49.0, 60.0));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn too_fast_grid_rejected() {
        let raw = constant_table(200.0);
        assert!(align_and_convert(&raw, &Schema::qar(), 32.0).is_err());
    }

    #[test]
    fn too_short_rejected() {
        let raw = constant_table(30.0);
        assert!(matches!(
            align_and_convert(&raw, &Schema::qar(), 1.0),
            Err(Error::InvalidSegment(_))
        ));
    }
}
