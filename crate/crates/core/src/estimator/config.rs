use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::aero::{DragModel, FD_STEP_REL};
use crate::error::{Error, Result};

pub const DEFAULT_P0_SCALE: f64 = 1e2;
pub const DEFAULT_R_SCALE: f64 = 1e-1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EstimatorKind {
    /// Gain computed from the fixed initial covariance at every step.
    Cg,
    /// Recursive least squares with exponential forgetting.
    Rls { lambda: f64 },
}

impl EstimatorKind {
    pub fn label(&self) -> String {
        match self {
            EstimatorKind::Cg => "cg".to_string(),
            EstimatorKind::Rls { lambda } => format!("rls({lambda})"),
        }
    }
}

/// Which measurement rows enter the update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channels {
    /// All six: the four state passthroughs plus a_x, a_z.
    #[default]
    Full,
    /// Only a_x, a_z.
    Reduced,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    /// Initial parameter covariance, n × n.
    pub p0: DMatrix<f64>,
    /// Measurement noise covariance over the six channels.
    pub r: DMatrix<f64>,
    pub theta0: DVector<f64>,
    pub kind: EstimatorKind,
    pub drag_model: DragModel,
    pub channels: Channels,
    pub fd_step_rel: f64,
}

impl EstimatorConfig {
    /// Constant-gain defaults: P0 = 100·I, R = 0.1·I, zero start.
    pub fn new(drag_model: DragModel) -> Self {
        let n = drag_model.n_params();
        EstimatorConfig {
            p0: DMatrix::identity(n, n) * DEFAULT_P0_SCALE,
            r: DMatrix::identity(6, 6) * DEFAULT_R_SCALE,
            theta0: DVector::zeros(n),
            kind: EstimatorKind::Cg,
            drag_model,
            channels: Channels::Full,
            fd_step_rel: FD_STEP_REL,
        }
    }

    pub fn with_p0_scale(mut self, s: f64) -> Self {
        let n = self.p0.nrows();
        self.p0 = DMatrix::identity(n, n) * s;
        self
    }

    pub fn with_r_scale(mut self, s: f64) -> Self {
        self.r = DMatrix::identity(6, 6) * s;
        self
    }

    pub fn with_kind(mut self, kind: EstimatorKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn with_channels(mut self, channels: Channels) -> Self {
        self.channels = channels;
        self
    }

    pub fn with_theta0(mut self, theta0: &[f64]) -> Self {
        self.theta0 = DVector::from_column_slice(theta0);
        self
    }

    pub fn n_params(&self) -> usize {
        self.drag_model.n_params()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_params();
        let bad = |m: String| Err(Error::Config(m));
        if self.p0.shape() != (n, n) || self.theta0.len() != n {
            return bad(format!("P0 and theta0 must have {n} parameters"));
        }
        if self.r.shape() != (6, 6) {
            return bad("R must be 6 × 6".into());
        }
        if (&self.p0 - self.p0.transpose()).amax() > 0.0 || self.p0.clone().cholesky().is_none() {
            return bad("P0 must be symmetric positive definite".into());
        }
        for i in 0..6 {
            for j in 0..6 {
                let x = self.r[(i, j)];
                if (i == j && !(x > 0.0)) || (i != j && x != 0.0) {
                    return bad("R must be diagonal with positive entries".into());
                }
            }
        }
        if let EstimatorKind::Rls { lambda } = self.kind {
            if !(lambda > 0.0 && lambda <= 1.0) {
                return bad(format!("forgetting factor {lambda} outside (0, 1]"));
            }
        }
        if !(self.fd_step_rel > 0.0) {
            return bad("finite-difference step must be positive".into());
        }
        if self.theta0.iter().any(|x| !x.is_finite()) {
            return bad("theta0 must be finite".into());
        }
        Ok(())
    }

    /// Noise covariance restricted to the rows in use.
    pub fn active_r(&self) -> DMatrix<f64> {
        match self.channels {
            Channels::Full => self.r.clone(),
            Channels::Reduced => self.r.view((4, 4), (2, 2)).into_owned(),
        }
    }

    pub fn echo(&self) -> ConfigEcho {
        let rows = |m: &DMatrix<f64>| {
            (0..m.nrows())
                .map(|i| m.row(i).iter().copied().collect())
                .collect()
        };
        ConfigEcho {
            estimator: self.kind,
            drag_model: self.drag_model,
            channels: self.channels,
            p0: rows(&self.p0),
            r_diag: self.r.diagonal().iter().copied().collect(),
            theta0: self.theta0.iter().copied().collect(),
            fd_step_rel: self.fd_step_rel,
        }
    }
}

/// Serializable copy of a configuration for run metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub estimator: EstimatorKind,
    pub drag_model: DragModel,
    pub channels: Channels,
    pub p0: Vec<Vec<f64>>,
    pub r_diag: Vec<f64>,
    pub theta0: Vec<f64>,
    pub fd_step_rel: f64,
}
