use serde::{Deserialize, Serialize};

use super::config::{ConfigEcho, EstimatorKind};
use crate::aero::DragModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub k: usize,
    /// Estimate after this step.
    pub theta: Vec<f64>,
    /// z − h(x, θ_{k−1}) over all six channels.
    pub residual: [f64; 6],
    /// Frobenius norm of the gain.
    pub gain_norm: f64,
    /// Condition number of the innovation covariance.
    pub s_condition: f64,
}

/// Per-step record of one estimator run over a segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorTrace {
    pub estimator: EstimatorKind,
    pub drag_model: DragModel,
    pub parameter_names: Vec<String>,
    pub steps: Vec<TraceStep>,
}

impl EstimatorTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn n_params(&self) -> usize {
        self.parameter_names.len()
    }

    pub fn final_theta(&self) -> &[f64] {
        &self.steps.last().expect("empty trace").theta
    }

    /// Estimates of parameter `i` over all steps.
    pub fn series(&self, i: usize) -> Vec<f64> {
        self.steps.iter().map(|s| s.theta[i]).collect()
    }

    pub fn gain_norms(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.gain_norm).collect()
    }

    /// Smallest over largest gain norm across the run.
    pub fn gain_ratio(&self) -> f64 {
        let g = self.gain_norms();
        let max = g.iter().copied().fold(0.0, f64::max);
        let min = g.iter().copied().fold(f64::INFINITY, f64::min);
        if max > 0.0 {
            min / max
        } else {
            0.0
        }
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("k");
        for i in 0..self.n_params() {
            out.push_str(&format!(",theta_{i}"));
        }
        out.push_str(",e_ax,e_az,gain_norm\n");
        for s in &self.steps {
            out.push_str(&s.k.to_string());
            for x in &s.theta {
                out.push(',');
                out.push_str(&x.to_string());
            }
            out.push_str(&format!(
                ",{},{},{}\n",
                s.residual[4], s.residual[5], s.gain_norm
            ));
        }
        out
    }
}

/// Where a run stopped, if it did.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    pub step: Option<usize>,
    pub message: String,
    pub numeric: bool,
}

impl RunFailure {
    pub fn from_error(e: &crate::Error) -> Self {
        let step = match e {
            crate::Error::Step { step, .. } => Some(*step),
            _ => None,
        };
        RunFailure {
            step,
            message: e.to_string(),
            numeric: e.is_numeric(),
        }
    }
}

/// Metadata written next to an exported trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub config: ConfigEcho,
    pub seed: Option<u64>,
    pub parameter_names: Vec<String>,
    pub steps: usize,
    pub failure: Option<RunFailure>,
}
