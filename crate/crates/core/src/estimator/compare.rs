use serde::{Deserialize, Serialize};

use super::config::{EstimatorConfig, EstimatorKind};
use super::run::run;
use super::trace::{EstimatorTrace, RunFailure};
use crate::aero::AircraftConfig;
use crate::convergence::{assess, window_variance, ConvergenceReport, Thresholds};
use crate::flight_data::FlightSegment;

/// Forgetting factor of the discounting baseline.
pub const DISCOUNTED_LAMBDA: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub label: String,
    pub estimator: EstimatorKind,
    pub trace: Option<EstimatorTrace>,
    pub report: Option<ConvergenceReport>,
    pub gain_ratio: Option<f64>,
    pub window_variance: Option<f64>,
    pub failure: Option<RunFailure>,
}

impl ComparisonRow {
    pub fn final_theta(&self) -> Option<&[f64]> {
        self.trace.as_ref().map(EstimatorTrace::final_theta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub flight_id: String,
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonReport {
    pub fn row(&self, label: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    /// Per-step gain norms side by side: `k,<label>...`; failed runs leave empty cells.
    pub fn gain_norms_csv(&self) -> String {
        let mut out = String::from("k");
        for r in &self.rows {
            out.push(',');
            out.push_str(&r.label);
        }
        out.push('\n');
        let n = self
            .rows
            .iter()
            .filter_map(|r| r.trace.as_ref().map(EstimatorTrace::len))
            .max()
            .unwrap_or(0);
        for k in 0..n {
            out.push_str(&k.to_string());
            for r in &self.rows {
                out.push(',');
                if let Some(s) = r.trace.as_ref().and_then(|t| t.steps.get(k)) {
                    out.push_str(&s.gain_norm.to_string());
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Run the constant-gain estimator and both RLS baselines on one segment.
pub fn compare_estimators(
    segment: &FlightSegment,
    cfg: &AircraftConfig,
    base: &EstimatorConfig,
    thresholds: &Thresholds,
) -> ComparisonReport {
    let kinds = [
        EstimatorKind::Cg,
        EstimatorKind::Rls { lambda: 1.0 },
        EstimatorKind::Rls {
            lambda: DISCOUNTED_LAMBDA,
        },
    ];
    let rows = kinds
        .into_iter()
        .map(|kind| {
            let ecfg = base.clone().with_kind(kind);
            let label = kind.label();
            match run(segment, cfg, &ecfg) {
                Ok(trace) => ComparisonRow {
                    label,
                    estimator: kind,
                    report: assess(&trace, thresholds).ok(),
                    gain_ratio: Some(trace.gain_ratio()),
                    window_variance: window_variance(&trace).ok(),
                    trace: Some(trace),
                    failure: None,
                },
                Err(e) => ComparisonRow {
                    label,
                    estimator: kind,
                    trace: None,
                    report: None,
                    gain_ratio: None,
                    window_variance: None,
                    failure: Some(RunFailure::from_error(&e)),
                },
            }
        })
        .collect();
    ComparisonReport {
        flight_id: segment.flight_id.clone(),
        rows,
    }
}
