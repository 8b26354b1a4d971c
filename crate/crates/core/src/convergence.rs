//! Window split, coefficient-of-variation tests and representative values for a trace.

use serde::{Deserialize, Serialize};

use crate::aero::AeroParameters;
use crate::error::{Error, Result};
use crate::estimator::EstimatorTrace;
use crate::flight_data::MIN_SEGMENT_LEN;

/// Smallest |mean| for which a coefficient of variation is reported.
pub const DEGENERATE_MEAN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParameterGroup {
    Lift,
    Drag,
    Thrust,
}

impl ParameterGroup {
    pub fn of(name: &str) -> Self {
        if name.starts_with("c_l") {
            ParameterGroup::Lift
        } else if name.starts_with("c_d") {
            ParameterGroup::Drag
        } else {
            ParameterGroup::Thrust
        }
    }
}

/// CV acceptance limit per parameter group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    pub lift: f64,
    pub drag: f64,
    pub thrust: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            lift: 0.01,
            drag: 0.10,
            thrust: 0.01,
        }
    }
}

impl Thresholds {
    pub fn for_group(&self, g: ParameterGroup) -> f64 {
        match g {
            ParameterGroup::Lift => self.lift,
            ParameterGroup::Drag => self.drag,
            ParameterGroup::Thrust => self.thrust,
        }
    }
}

/// Indices `[ceil(0.6 n), n)` of the steps used for acceptance.
pub fn convergence_window(trace_len: usize) -> Result<(usize, usize)> {
    if trace_len < MIN_SEGMENT_LEN {
        return Err(Error::InvalidSegment(format!(
            "trace of {trace_len} steps, need at least {MIN_SEGMENT_LEN}"
        )));
    }
    Ok(((6 * trace_len).div_ceil(10), trace_len))
}

/// Mean taken about the first value so that constant series return it exactly.
fn mean_std(series: &[f64]) -> (f64, f64) {
    let n = series.len() as f64;
    let x0 = series[0];
    let mean = x0 + series.iter().map(|x| x - x0).sum::<f64>() / n;
    let ss: f64 = series.iter().map(|x| (x - mean).powi(2)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Sample standard deviation over |mean|.
pub fn coefficient_of_variation(series: &[f64]) -> Result<f64> {
    if series.len() < 2 {
        return Err(Error::Degenerate("need at least two values".into()));
    }
    let (mean, std) = mean_std(series);
    if !(mean.abs() > DEGENERATE_MEAN) {
        return Err(Error::DegenerateMean {
            mean_abs: mean.abs(),
        });
    }
    Ok(std / mean.abs())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterVerdict {
    pub name: String,
    pub group: ParameterGroup,
    pub mean: f64,
    pub std: f64,
    /// Absent when the window mean is numerically zero.
    pub cv: Option<f64>,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Converged,
    Flagged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub window_start_index: usize,
    pub window_end_index: usize,
    pub parameters: Vec<ParameterVerdict>,
    pub verdict: Verdict,
    /// Window means, present only when every parameter passes.
    pub representative: Option<Vec<f64>>,
}

impl ConvergenceReport {
    pub fn is_converged(&self) -> bool {
        self.verdict == Verdict::Converged
    }

    pub fn failing(&self) -> Vec<&str> {
        self.parameters
            .iter()
            .filter(|p| !p.pass)
            .map(|p| p.name.as_str())
            .collect()
    }

    pub fn parameter(&self, name: &str) -> Option<&ParameterVerdict> {
        self.parameters.iter().find(|p| p.name == name)
    }

    pub fn window_means(&self) -> Vec<f64> {
        self.parameters.iter().map(|p| p.mean).collect()
    }

    /// Representative values as lift/drag-polar coefficients, when applicable.
    pub fn representative_aero(&self) -> Option<AeroParameters> {
        let names: Vec<&str> = self.parameters.iter().map(|p| p.name.as_str()).collect();
        if names != AeroParameters::NAMES {
            return None;
        }
        self.representative
            .as_deref()
            .map(AeroParameters::from_slice)
    }
}

/// Apply the tiered CV tests over the acceptance window of a trace.
pub fn assess(trace: &EstimatorTrace, thresholds: &Thresholds) -> Result<ConvergenceReport> {
    let (start, end) = convergence_window(trace.len())?;
    let parameters: Vec<ParameterVerdict> = trace
        .parameter_names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let window = &trace.series(i)[start..end];
            let (mean, std) = mean_std(window);
            let group = ParameterGroup::of(name);
            let threshold = thresholds.for_group(group);
            let cv = coefficient_of_variation(window).ok();
            ParameterVerdict {
                name: name.clone(),
                group,
                mean,
                std,
                cv,
                threshold,
                pass: cv.is_some_and(|c| c < threshold),
            }
        })
        .collect();
    let converged = parameters.iter().all(|p| p.pass);
    Ok(ConvergenceReport {
        window_start_index: start,
        window_end_index: end,
        representative: converged.then(|| parameters.iter().map(|p| p.mean).collect()),
        verdict: if converged {
            Verdict::Converged
        } else {
            Verdict::Flagged
        },
        parameters,
    })
}

/// Sum of per-parameter sample variances over the acceptance window.
pub fn window_variance(trace: &EstimatorTrace) -> Result<f64> {
    let (start, end) = convergence_window(trace.len())?;
    Ok((0..trace.n_params())
        .map(|i| {
            let (_, std) = mean_std(&trace.series(i)[start..end]);
            std * std
        })
        .sum())
}
