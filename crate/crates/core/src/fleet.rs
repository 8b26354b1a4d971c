//! Fleet statistics over converged per-flight results.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::aero::{AeroParameters, DragModel};
use crate::convergence::ConvergenceReport;
use crate::error::{Error, Result};
use crate::estimator::{EstimatorKind, RunFailure};

/// Outcome of identifying one flight segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightResult {
    pub flight_id: String,
    pub tail_id: String,
    pub aircraft_type: String,
    pub estimator: EstimatorKind,
    pub drag_model: DragModel,
    pub report: Option<ConvergenceReport>,
    pub failure: Option<RunFailure>,
}

impl FlightResult {
    /// Representative coefficients if the flight converged under the parabolic polar.
    pub fn converged_parameters(&self) -> Option<AeroParameters> {
        match (&self.report, &self.failure, self.drag_model) {
            (Some(r), None, DragModel::Polar) if r.is_converged() => r.representative_aero(),
            _ => None,
        }
    }

    fn reasons(&self) -> Vec<String> {
        if let Some(f) = &self.failure {
            return vec![format!("run failed: {}", f.message)];
        }
        if self.drag_model != DragModel::Polar {
            return vec!["non-polar drag model".into()];
        }
        match &self.report {
            Some(r) => r.failing().into_iter().map(str::to_string).collect(),
            None => vec!["no convergence report".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamStats {
    pub name: String,
    pub mean: f64,
    pub std: f64,
    pub max: f64,
    pub min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeSummary {
    pub aircraft_type: String,
    pub count: usize,
    pub parameters: Vec<ParamStats>,
    /// Pearson r of (c_d0, c_dl); absent with fewer than three flights or zero spread.
    pub pearson_cd0_cdl: Option<f64>,
}

impl TypeSummary {
    pub fn param(&self, name: &str) -> Option<&ParamStats> {
        self.parameters.iter().find(|p| p.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlaggedFlight {
    pub flight_id: String,
    pub aircraft_type: String,
    pub failing: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub parameter: String,
    /// bin_count + 1 edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FleetSummary {
    pub types: Vec<TypeSummary>,
    /// Types with fewer than two converged flights.
    pub omitted: Vec<String>,
    pub flagged: Vec<FlaggedFlight>,
    pub histograms: Vec<Histogram>,
    pub pearson_cd0_cdl: Option<f64>,
    pub converged_flights: usize,
}

impl FleetSummary {
    pub fn get(&self, aircraft_type: &str) -> Option<&TypeSummary> {
        self.types.iter().find(|t| t.aircraft_type == aircraft_type)
    }
}

fn stats(name: &str, xs: &[f64]) -> ParamStats {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    ParamStats {
        name: name.to_string(),
        mean,
        std: if xs.len() > 1 {
            (ss / (n - 1.0)).sqrt()
        } else {
            0.0
        },
        max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        min: xs.iter().copied().fold(f64::INFINITY, f64::min),
    }
}

/// Pearson correlation; fails on fewer than three pairs or zero spread.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::Degenerate("need at least three pairs".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("zero variance in a coordinate".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

pub fn correlation_cd0_cdl(params: &[AeroParameters]) -> Result<f64> {
    let x: Vec<f64> = params.iter().map(|p| p.c_d0).collect();
    let y: Vec<f64> = params.iter().map(|p| p.c_dl).collect();
    pearson(&x, &y)
}

/// Sturges bin count for `n` values.
pub fn sturges_bins(n: usize) -> usize {
    if n <= 1 {
        1
    } else {
        (n as f64).log2().ceil() as usize + 1
    }
}

/// Equal-width bins over [min, max]; the last bin is closed on the right.
pub fn histogram(values: &[f64], bin_count: usize) -> Result<(Vec<f64>, Vec<usize>)> {
    if values.is_empty() || bin_count == 0 {
        return Err(Error::Degenerate(
            "histogram needs values and at least one bin".into(),
        ));
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return Ok((vec![min, max], vec![values.len()]));
    }
    let width = (max - min) / bin_count as f64;
    let edges = (0..=bin_count)
        .map(|i| {
            if i == bin_count {
                max
            } else {
                min + i as f64 * width
            }
        })
        .collect();
    let mut counts = vec![0usize; bin_count];
    for &v in values {
        let i = (((v - min) / width).floor() as usize).min(bin_count - 1);
        counts[i] += 1;
    }
    Ok((edges, counts))
}

/// Per-type statistics over converged flights; flagged flights are listed, never aggregated.
pub fn aggregate(results: &[FlightResult]) -> FleetSummary {
    let mut sorted: Vec<&FlightResult> = results.iter().collect();
    sorted.sort_by(|a, b| {
        (&a.flight_id, &a.aircraft_type, &a.tail_id).cmp(&(
            &b.flight_id,
            &b.aircraft_type,
            &b.tail_id,
        ))
    });

    let mut by_type: BTreeMap<&str, Vec<AeroParameters>> = BTreeMap::new();
    let mut flagged = Vec::new();
    let mut all = Vec::new();
    for r in &sorted {
        match r.converged_parameters() {
            Some(p) => {
                by_type.entry(&r.aircraft_type).or_default().push(p);
                all.push(p);
            }
            None => flagged.push(FlaggedFlight {
                flight_id: r.flight_id.clone(),
                aircraft_type: r.aircraft_type.clone(),
                failing: r.reasons(),
            }),
        }
    }

    let mut types = Vec::new();
    let mut omitted = Vec::new();
    for (ty, params) in &by_type {
        if params.len() < 2 {
            omitted.push(ty.to_string());
            continue;
        }
        let parameters = AeroParameters::NAMES
            .iter()
            .enumerate()
            .map(|(i, name)| {
                let xs: Vec<f64> = params.iter().map(|p| p.to_array()[i]).collect();
                stats(name, &xs)
            })
            .collect();
        types.push(TypeSummary {
            aircraft_type: ty.to_string(),
            count: params.len(),
            parameters,
            pearson_cd0_cdl: correlation_cd0_cdl(params).ok(),
        });
    }

    let histograms = if all.is_empty() {
        Vec::new()
    } else {
        AeroParameters::NAMES
            .iter()
            .enumerate()
            .filter_map(|(i, name)| {
                let xs: Vec<f64> = all.iter().map(|p| p.to_array()[i]).collect();
                histogram(&xs, sturges_bins(xs.len()))
                    .ok()
                    .map(|(edges, counts)| Histogram {
                        parameter: name.to_string(),
                        edges,
                        counts,
                    })
            })
            .collect()
    };

    FleetSummary {
        types,
        omitted,
        flagged,
        histograms,
        pearson_cd0_cdl: correlation_cd0_cdl(&all).ok(),
        converged_flights: all.len(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossTypeRow {
    pub aircraft_type: String,
    pub mean_cd0: f64,
    pub mean_cdl: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairOrdering {
    pub higher: String,
    pub lower: String,
    /// Equal mean c_d0.
    pub tie: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossTypeTable {
    /// Sorted by decreasing mean c_d0.
    pub rows: Vec<CrossTypeRow>,
    pub pairs: Vec<PairOrdering>,
}

impl CrossTypeTable {
    pub fn order(&self) -> Vec<&str> {
        self.rows.iter().map(|r| r.aircraft_type.as_str()).collect()
    }
}

/// Rank types by mean zero-lift drag.
pub fn cross_type_compare(summary: &FleetSummary) -> Result<CrossTypeTable> {
    let mut rows: Vec<CrossTypeRow> = summary
        .types
        .iter()
        .filter_map(|t| {
            Some(CrossTypeRow {
                aircraft_type: t.aircraft_type.clone(),
                mean_cd0: t.param("c_d0")?.mean,
                mean_cdl: t.param("c_dl")?.mean,
            })
        })
        .collect();
    if rows.len() < 2 {
        return Err(Error::Degenerate("need at least two aircraft types".into()));
    }
    rows.sort_by(|a, b| {
        b.mean_cd0
            .total_cmp(&a.mean_cd0)
            .then_with(|| a.aircraft_type.cmp(&b.aircraft_type))
    });
    let mut pairs = Vec::new();
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            pairs.push(PairOrdering {
                higher: rows[i].aircraft_type.clone(),
                lower: rows[j].aircraft_type.clone(),
                tie: rows[i].mean_cd0 == rows[j].mean_cd0,
            });
        }
    }
    Ok(CrossTypeTable { rows, pairs })
}

/// `aircraft_type,flights,mean_cd0,std_cd0,mean_cdl,std_cdl` at four decimals.
pub fn fleet_table_csv(summary: &FleetSummary) -> String {
    let mut out = String::from("aircraft_type,flights,mean_cd0,std_cd0,mean_cdl,std_cdl\n");
    for t in &summary.types {
        let (Some(d0), Some(dl)) = (t.param("c_d0"), t.param("c_dl")) else {
            continue;
        };
        out.push_str(&format!(
            "{},{},{:.4},{:.4},{:.4},{:.4}\n",
            t.aircraft_type, t.count, d0.mean, d0.std, dl.mean, dl.std
        ));
    }
    out
}

/// `parameter,mean,std,max,min` rows for one type, at four decimals.
pub fn type_table_csv(t: &TypeSummary) -> String {
    let mut out = String::from("parameter,mean,std,max,min\n");
    for p in &t.parameters {
        out.push_str(&format!(
            "{},{:.4},{:.4},{:.4},{:.4}\n",
            p.name, p.mean, p.std, p.max, p.min
        ));
    }
    out
}

pub fn histogram_csv(h: &Histogram) -> String {
    let mut out = String::from("bin_lower,bin_upper,count\n");
    for (i, c) in h.counts.iter().enumerate() {
        out.push_str(&format!("{},{},{}\n", h.edges[i], h.edges[i + 1], c));
    }
    out
}

pub fn flagged_csv(summary: &FleetSummary) -> String {
    let mut out = String::from("flight_id,aircraft_type,failing_parameters\n");
    for f in &summary.flagged {
        let reasons = f.failing.join(";").replace(['"', ','], " ");
        out.push_str(&format!(
            "{},{},{}\n",
            f.flight_id, f.aircraft_type, reasons
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_examples() {
        let (_, c) = histogram(&[0.0, 1.0, 2.0, 3.0], 2).unwrap();
        assert_eq!(c, vec![2, 2]);
        let (_, c) = histogram(&[5.0, 1.0, 2.0], 1).unwrap();
        assert_eq!(c, vec![3]);
        let (e, c) = histogram(&[2.0; 4], 3).unwrap();
        assert_eq!((e, c), (vec![2.0, 2.0], vec![4]));
        assert!(histogram(&[], 3).is_err());
        assert!(histogram(&[1.0], 0).is_err());
    }

    #[test]
    fn pearson_examples() {
        let x = [1.0, 2.0, 3.0, 4.5];
        let y2: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &y2).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson(&x, &neg).unwrap() + 1.0).abs() < 1e-15);
        assert!(pearson(&x, &[1.0; 4]).is_err());
        assert!(pearson(&x[..2], &y2[..2]).is_err());
    }

    #[test]
    fn sturges() {
        assert_eq!(sturges_bins(1), 1);
        assert_eq!(sturges_bins(8), 4);
        assert_eq!(sturges_bins(135), 9);
    }
}
