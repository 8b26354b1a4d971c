use nalgebra::{DMatrix, DVector};

use super::config::{EstimatorConfig, EstimatorKind};
use super::kernel::{gain, innovation, rls_update};
use super::trace::{EstimatorTrace, TraceStep};
use crate::aero::{AircraftConfig, MeasurementModel};
use crate::error::{Error, Result};
use crate::flight_data::{FlightSegment, MeasuredSample, MIN_SEGMENT_LEN};

/// Result of a single update.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub theta: DVector<f64>,
    pub residual: [f64; 6],
    pub gain: DMatrix<f64>,
    pub s_condition: f64,
}

/// Constant-gain update: the gain is rebuilt from P0 at every step and P0 is never updated.
pub fn cg_step(
    theta_prev: &DVector<f64>,
    sample: &MeasuredSample,
    model: &MeasurementModel,
    cfg: &AircraftConfig,
    ecfg: &EstimatorConfig,
) -> Result<StepOutput> {
    let inn = innovation(theta_prev, sample, model, cfg, ecfg)?;
    let (k, s_condition) = gain(&ecfg.p0, &inn.h, &ecfg.active_r())?;
    Ok(StepOutput {
        theta: theta_prev + &k * &inn.e,
        residual: inn.residual,
        gain: k,
        s_condition,
    })
}

/// Recursive least-squares update; returns the step and the new covariance.
pub fn rls_step(
    theta_prev: &DVector<f64>,
    p_prev: &DMatrix<f64>,
    sample: &MeasuredSample,
    model: &MeasurementModel,
    cfg: &AircraftConfig,
    ecfg: &EstimatorConfig,
) -> Result<(StepOutput, DMatrix<f64>)> {
    let lambda = match ecfg.kind {
        EstimatorKind::Rls { lambda } => lambda,
        EstimatorKind::Cg => 1.0,
    };
    let inn = innovation(theta_prev, sample, model, cfg, ecfg)?;
    let (k, p_new, s_condition) = rls_update(p_prev, &inn.h, &ecfg.active_r(), lambda)?;
    Ok((
        StepOutput {
            theta: theta_prev + &k * &inn.e,
            residual: inn.residual,
            gain: k,
            s_condition,
        },
        p_new,
    ))
}

fn check_run(segment: &FlightSegment, ecfg: &EstimatorConfig) -> Result<MeasurementModel> {
    ecfg.validate()?;
    if segment.len() < MIN_SEGMENT_LEN {
        return Err(Error::InvalidSegment(format!(
            "{} samples, need at least {MIN_SEGMENT_LEN}",
            segment.len()
        )));
    }
    Ok(ecfg.drag_model.bind(segment.samples[0].v))
}

fn record(k: usize, out: &StepOutput) -> TraceStep {
    TraceStep {
        k,
        theta: out.theta.iter().copied().collect(),
        residual: out.residual,
        gain_norm: out.gain.norm(),
        s_condition: out.s_condition,
    }
}

fn empty_trace(ecfg: &EstimatorConfig, n: usize) -> EstimatorTrace {
    EstimatorTrace {
        estimator: ecfg.kind,
        drag_model: ecfg.drag_model,
        parameter_names: ecfg
            .drag_model
            .parameter_names()
            .iter()
            .map(|s| s.to_string())
            .collect(),
        steps: Vec::with_capacity(n),
    }
}

fn step_error(k: usize) -> impl FnOnce(Error) -> Error {
    move |e| Error::Step {
        step: k,
        source: Box::new(e),
    }
}

/// Run the constant-gain estimator over a segment from `ecfg.theta0`.
pub fn run_cg_eem(
    segment: &FlightSegment,
    cfg: &AircraftConfig,
    ecfg: &EstimatorConfig,
) -> Result<EstimatorTrace> {
    let model = check_run(segment, ecfg)?;
    let mut trace = empty_trace(ecfg, segment.len());
    let mut theta = ecfg.theta0.clone();
    for (k, sample) in segment.samples.iter().enumerate() {
        let out = cg_step(&theta, sample, &model, cfg, ecfg).map_err(step_error(k))?;
        trace.steps.push(record(k, &out));
        theta = out.theta;
    }
    Ok(trace)
}

/// Run recursive least squares over a segment; the covariance starts at `ecfg.p0`.
pub fn run_rls(
    segment: &FlightSegment,
    cfg: &AircraftConfig,
    ecfg: &EstimatorConfig,
) -> Result<EstimatorTrace> {
    let model = check_run(segment, ecfg)?;
    let mut trace = empty_trace(ecfg, segment.len());
    let mut theta = ecfg.theta0.clone();
    let mut p = ecfg.p0.clone();
    for (k, sample) in segment.samples.iter().enumerate() {
        let (out, p_new) =
            rls_step(&theta, &p, sample, &model, cfg, ecfg).map_err(step_error(k))?;
        trace.steps.push(record(k, &out));
        theta = out.theta;
        p = p_new;
    }
    Ok(trace)
}

/// Dispatch on `ecfg.kind`.
pub fn run(
    segment: &FlightSegment,
    cfg: &AircraftConfig,
    ecfg: &EstimatorConfig,
) -> Result<EstimatorTrace> {
    match ecfg.kind {
        EstimatorKind::Cg => run_cg_eem(segment, cfg, ecfg),
        EstimatorKind::Rls { .. } => run_rls(segment, cfg, ecfg),
    }
}
