use serde::{Deserialize, Serialize};

use super::align::align_samples;
use super::raw::RawTable;
use super::schema::Schema;
use super::segment::{FlightSegment, MeasuredSample};
use crate::error::Result;

/// Thresholds for picking quasi-steady level cruise out of a whole flight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CruiseCriteria {
    pub gamma_max_deg: f64,
    pub q_max_deg_s: f64,
    pub v_std_max: f64,
    /// Width of the centred window used for the airspeed spread, s.
    pub v_std_window_s: f64,
    pub min_duration_s: f64,
    pub grid_rate_hz: f64,
}

impl Default for CruiseCriteria {
    fn default() -> Self {
        CruiseCriteria {
            gamma_max_deg: 0.3,
            q_max_deg_s: 0.2,
            v_std_max: 2.0,
            v_std_window_s: 30.0,
            min_duration_s: 200.0,
            grid_rate_hz: 1.0,
        }
    }
}

fn rolling_std(x: &[f64], half: usize) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(x.len());
            let w = &x[lo..hi];
            if w.len() < 2 {
                return 0.0;
            }
            let mean = w.iter().sum::<f64>() / w.len() as f64;
            let ss: f64 = w.iter().map(|v| (v - mean).powi(2)).sum();
            (ss / (w.len() - 1) as f64).sqrt()
        })
        .collect()
}

fn is_cruise(s: &MeasuredSample, v_std: f64, c: &CruiseCriteria) -> bool {
    s.validate().is_ok()
        && s.gamma.to_degrees().abs() < c.gamma_max_deg
        && s.q.to_degrees().abs() < c.q_max_deg_s
        && v_std < c.v_std_max
}

/// Maximal runs that satisfy every cruise condition for at least `min_duration_s`.
pub fn detect_cruise_segments(
    full_flight: &RawTable,
    schema: &Schema,
    criteria: &CruiseCriteria,
) -> Result<Vec<FlightSegment>> {
    let rate = criteria.grid_rate_hz;
    let samples = align_samples(full_flight, schema, rate)?;
    let v: Vec<f64> = samples.iter().map(|s| s.v).collect();
    let half = (0.5 * criteria.v_std_window_s * rate).round() as usize;
    let spread = rolling_std(&v, half);
    let min_len = (criteria.min_duration_s * rate - 1e-9).ceil() as usize;

    let mut runs = Vec::new();
    let mut start = None;
    for (i, s) in samples.iter().enumerate() {
        match (is_cruise(s, spread[i], criteria), start) {
            (true, None) => start = Some(i),
            (false, Some(a)) => {
                runs.push((a, i));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(a) = start {
        runs.push((a, samples.len()));
    }

    let meta = |k: &str| full_flight.meta(k).unwrap_or("").to_string();
    let mut out = Vec::new();
    for (a, b) in runs.into_iter().filter(|(a, b)| b - a >= min_len) {
        let t0 = samples[a].t;
        let seg_samples: Vec<MeasuredSample> = samples[a..b]
            .iter()
            .map(|s| MeasuredSample { t: s.t - t0, ..*s })
            .collect();
        out.push(FlightSegment::new(
            seg_samples,
            rate,
            format!("{}-seg{}", meta("flight_id"), out.len() + 1),
            meta("aircraft_type"),
            meta("tail_id"),
        )?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rolling_std_of_constant_is_zero() {
        assert!(rolling_std(&[3.0; 10], 2).iter().all(|&s| s == 0.0));
    }

    #[test]
    fn rolling_std_window() {
        let s = rolling_std(&[0.0, 0.0, 3.0, 0.0, 0.0], 1);
        assert_eq!(s[0], 0.0);
        assert!((s[2] - 3.0_f64.sqrt()).abs() < 1e-12);
    }
}
