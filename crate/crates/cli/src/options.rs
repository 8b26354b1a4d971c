use clap::{Args, ValueEnum};
use serde::Serialize;

use cgeem_core::aero::DragModel;
use cgeem_core::estimator::{EstimatorConfig, EstimatorKind, DEFAULT_P0_SCALE, DEFAULT_R_SCALE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorChoice {
    Cg,
    Rls,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DragChoice {
    Polar,
    Linear,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EstimatorArgs {
    /// Estimator to run.
    #[arg(long, value_enum, default_value_t = EstimatorChoice::Cg)]
    pub estimator: EstimatorChoice,
    /// Forgetting factor for rls, in (0, 1].
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Drag law: parabolic polar or linear in airspeed and angle of attack.
    #[arg(long, value_enum, default_value_t = DragChoice::Polar)]
    pub drag_model: DragChoice,
    /// Initial covariance P0 = scale · I.
    #[arg(long, default_value_t = DEFAULT_P0_SCALE)]
    pub p0_scale: f64,
    /// Measurement noise R = scale · I.
    #[arg(long, default_value_t = DEFAULT_R_SCALE)]
    pub r_scale: f64,
    /// Initial estimate as a comma-separated list, one value per parameter; defaults to zeros.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub theta0: Option<Vec<f64>>,
    /// Seed recorded in the run metadata.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Grid rate in Hz used when an input is a raw recorder CSV.
    #[arg(long, default_value_t = 1.0)]
    pub grid_hz: f64,
}

impl EstimatorArgs {
    pub fn drag_model(&self) -> DragModel {
        match self.drag_model {
            DragChoice::Polar => DragModel::Polar,
            DragChoice::Linear => DragModel::Linear,
        }
    }

    pub fn config(&self) -> EstimatorConfig {
        let kind = match self.estimator {
            EstimatorChoice::Cg => EstimatorKind::Cg,
            EstimatorChoice::Rls => EstimatorKind::Rls {
                lambda: self.lambda,
            },
        };
        let cfg = EstimatorConfig::new(self.drag_model())
            .with_p0_scale(self.p0_scale)
            .with_r_scale(self.r_scale)
            .with_kind(kind);
        match &self.theta0 {
            Some(t) => cfg.with_theta0(t),
            None => cfg,
        }
    }
}
