use nalgebra::{DMatrix, DVector};

use super::config::{Channels, EstimatorConfig};
use crate::aero::{AircraftConfig, MeasurementModel};
use crate::error::{Error, Result};
use crate::flight_data::MeasuredSample;

/// Largest innovation-covariance condition number accepted before a step is failed.
pub const MAX_CONDITION: f64 = 1e14;

/// Spectral condition number of a symmetric matrix; infinite when it is not positive definite.
pub fn condition_spd(s: &DMatrix<f64>) -> f64 {
    let eig = s.clone().symmetric_eigenvalues();
    let max = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min > 0.0) {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Gain P Hᵀ (H P Hᵀ + R)⁻¹ and the condition number of the innovation covariance.
///
/// Rows of H that are identically zero and uncoupled through R contribute a separate
/// diagonal block of S and a zero gain column, so the solve runs on the remaining rows only.
pub fn gain(p: &DMatrix<f64>, h: &DMatrix<f64>, r: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    let m = h.nrows();
    let live = live_rows(h);
    let uncoupled = (0..m)
        .filter(|i| !live.contains(i))
        .all(|i| (0..m).all(|j| j == i || (r[(i, j)] == 0.0 && r[(j, i)] == 0.0)));
    let rows = if uncoupled { live } else { (0..m).collect() };

    let cond = condition_spd(&symmetrize(&(h * p * h.transpose() + r)));
    if !(cond <= MAX_CONDITION) {
        return Err(Error::Numeric(format!(
            "innovation covariance condition {cond:e} exceeds {MAX_CONDITION:e}"
        )));
    }

    let mut k = DMatrix::zeros(p.nrows(), m);
    if rows.is_empty() {
        return Ok((k, cond));
    }
    let h_act = h.select_rows(&rows);
    let r_act = r.select_rows(&rows).select_columns(&rows);
    let hp = &h_act * p;
    let s = symmetrize(&(&hp * h_act.transpose() + r_act));
    let chol = s
        .cholesky()
        .ok_or_else(|| Error::Numeric("innovation covariance is not positive definite".into()))?;
    // S and P are symmetric, so Kᵀ = S⁻¹ H P.
    let k_act = chol.solve(&hp).transpose();
    for (c, &i) in rows.iter().enumerate() {
        k.set_column(i, &k_act.column(c));
    }
    Ok((k, cond))
}

/// Rows of H with at least one nonzero sensitivity.
fn live_rows(h: &DMatrix<f64>) -> Vec<usize> {
    (0..h.nrows())
        .filter(|&i| h.row(i).iter().any(|&x| x != 0.0))
        .collect()
}

fn symmetrize(s: &DMatrix<f64>) -> DMatrix<f64> {
    (s + s.transpose()) * 0.5
}

/// One recursive least-squares covariance update: returns (K, P_new, cond(S)).
pub fn rls_update(
    p: &DMatrix<f64>,
    h: &DMatrix<f64>,
    r: &DMatrix<f64>,
    lambda: f64,
) -> Result<(DMatrix<f64>, DMatrix<f64>, f64)> {
    let (k, cond) = gain(p, h, &(r * lambda))?;
    let n = p.nrows();
    let live = live_rows(h);
    let kh = k.select_columns(&live) * h.select_rows(&live);
    let mut p_new = (DMatrix::identity(n, n) - kh) * p / lambda;
    p_new = symmetrize(&p_new);
    if p_new.iter().any(|x| !x.is_finite()) || p_new.clone().cholesky().is_none() {
        return Err(Error::Numeric(
            "parameter covariance lost positive definiteness".into(),
        ));
    }
    Ok((k, p_new, cond))
}

/// Residual and sensitivity of the rows in use at the current estimate.
pub(crate) struct Innovation {
    /// Residual on the active rows.
    pub e: DVector<f64>,
    /// Residual on all six rows.
    pub residual: [f64; 6],
    pub h: DMatrix<f64>,
}

pub(crate) fn innovation(
    theta: &DVector<f64>,
    sample: &MeasuredSample,
    model: &MeasurementModel,
    cfg: &AircraftConfig,
    ecfg: &EstimatorConfig,
) -> Result<Innovation> {
    let th = theta.as_slice();
    let z = [
        sample.alpha,
        sample.q,
        sample.theta,
        sample.v,
        sample.a_x,
        sample.a_z,
    ];
    match ecfg.channels {
        Channels::Full => {
            let zh = model.predict_measurement(th, sample, cfg)?;
            let mut residual = [0.0; 6];
            for i in 0..6 {
                residual[i] = z[i] - zh[i];
            }
            Ok(Innovation {
                e: DVector::from_column_slice(&residual),
                residual,
                h: model.jacobian(th, sample, cfg, ecfg.fd_step_rel)?,
            })
        }
        Channels::Reduced => {
            let [ax, az] = model.accelerations(th, sample, cfg)?;
            let (ex, ez) = (sample.a_x - ax, sample.a_z - az);
            Ok(Innovation {
                e: DVector::from_column_slice(&[ex, ez]),
                residual: [0.0, 0.0, 0.0, 0.0, ex, ez],
                h: model.acceleration_jacobian(th, sample, cfg, ecfg.fd_step_rel)?,
            })
        }
    }
}
