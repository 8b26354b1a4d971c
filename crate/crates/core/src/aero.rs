//! Lift, drag and thrust models, the acceleration measurement model and its parameter Jacobian.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flight_data::{MeasuredSample, R_AIR};

/// Default finite-difference relative step.
pub const FD_STEP_REL: f64 = 1e-6;
/// Floor on the finite-difference step for parameters at or near zero.
pub const FD_STEP_ABS: f64 = 1e-8;

/// lb/(lbf·h) expressed in kg/(N·s).
pub const LB_PER_LBF_HOUR: f64 = 0.453592 / (4.448222 * 3600.0);

/// Lift, drag-polar and fuel-consumption coefficients, in estimation order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AeroParameters {
    pub c_l0: f64,
    /// Per degree of angle of attack.
    pub c_l_alpha: f64,
    pub c_lm: f64,
    pub c_d0: f64,
    pub c_dl: f64,
    pub c_tv: f64,
}

impl AeroParameters {
    pub const NAMES: [&'static str; 6] = ["c_l0", "c_l_alpha", "c_lm", "c_d0", "c_dl", "c_tv"];

    /// Fleet-average A321 values used as simulation truth.
    pub const A321_FLEET_MEAN: AeroParameters = AeroParameters {
        c_l0: 0.205,
        c_l_alpha: 0.0256,
        c_lm: 0.157,
        c_d0: 0.0054,
        c_dl: 0.0019,
        c_tv: 0.0329,
    };

    pub fn zero() -> Self {
        Self::from_slice(&[0.0; 6])
    }

    pub fn to_array(self) -> [f64; 6] {
        [
            self.c_l0,
            self.c_l_alpha,
            self.c_lm,
            self.c_d0,
            self.c_dl,
            self.c_tv,
        ]
    }

    pub fn from_slice(x: &[f64]) -> Self {
        AeroParameters {
            c_l0: x[0],
            c_l_alpha: x[1],
            c_lm: x[2],
            c_d0: x[3],
            c_dl: x[4],
            c_tv: x[5],
        }
    }
}

/// Coefficients of the drag model that is linear in airspeed and angle of attack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AltDragParameters {
    pub c_d0: f64,
    pub c_dv: f64,
    /// Per degree.
    pub c_d_alpha: f64,
    /// Reference airspeed, m/s.
    pub v0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RhoMode {
    Fixed,
    Isa,
}

/// Physical constants of one aircraft type that are not estimated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AircraftConfig {
    pub aircraft_type: String,
    pub wing_area_m2: f64,
    /// Thrust line offset, rad.
    pub sigma_rad: f64,
    /// Baseline fuel consumption, in units of `tsfc_unit_si`.
    pub t0_tsfc: f64,
    /// Size of one TSFC unit in kg/(N·s); the default is lb/(lbf·h).
    pub tsfc_unit_si: f64,
    pub rho_mode: RhoMode,
    /// Density used in fixed mode, kg/m³.
    pub rho_fixed: f64,
    /// Pressure altitude used in ISA mode, m.
    pub pressure_altitude_m: f64,
}

impl Default for AircraftConfig {
    fn default() -> Self {
        Self::for_type("A321")
    }
}

impl AircraftConfig {
    /// Nominal constants for a known type; unknown types get the A321 geometry.
    pub fn for_type(aircraft_type: &str) -> Self {
        let (wing_area_m2, t0_tsfc) = match aircraft_type {
            "B737" => (124.6, 0.56),
            "B777" => (427.8, 0.53),
            "B787" => (360.5, 0.51),
            _ => (122.6, 0.55),
        };
        AircraftConfig {
            aircraft_type: aircraft_type.to_string(),
            wing_area_m2,
            sigma_rad: 0.0,
            t0_tsfc,
            tsfc_unit_si: LB_PER_LBF_HOUR,
            rho_mode: RhoMode::Fixed,
            rho_fixed: 0.38,
            pressure_altitude_m: 10668.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.wing_area_m2 > 0.0) {
            return bad("wing_area_m2 must be positive");
        }
        if !(self.t0_tsfc > 0.0) || !(self.tsfc_unit_si > 0.0) {
            return bad("t0_tsfc and tsfc_unit_si must be positive");
        }
        if !(self.sigma_rad.abs() < 0.1) {
            return bad("|sigma_rad| must be below 0.1");
        }
        match self.rho_mode {
            RhoMode::Fixed if !(self.rho_fixed > 0.0) => bad("rho_fixed must be positive"),
            RhoMode::Isa if !(self.pressure_altitude_m < 20000.0) => {
                bad("pressure_altitude_m must be below 20 km")
            }
            _ => Ok(()),
        }
    }

    /// Read from `.toml`, otherwise JSON.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: AircraftConfig = if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text)?
        } else {
            serde_json::from_str(&text)?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Air density at a sample, kg/m³.
    pub fn density(&self, sample: &MeasuredSample) -> f64 {
        match self.rho_mode {
            RhoMode::Fixed => self.rho_fixed,
            RhoMode::Isa => isa_pressure(self.pressure_altitude_m) / (R_AIR * sample.static_temp),
        }
    }
}

/// Standard-atmosphere static pressure, Pa, up to 20 km.
pub fn isa_pressure(h: f64) -> f64 {
    if h <= 11000.0 {
        101325.0 * (1.0 - 2.25577e-5 * h).powf(5.25588)
    } else {
        22632.06 * (-(h - 11000.0) / 6341.62).exp()
    }
}

pub fn lift_coefficient(p: &AeroParameters, alpha_deg: f64, mach: f64) -> f64 {
    p.c_l0 + p.c_l_alpha * alpha_deg + p.c_lm * mach
}

pub fn drag_coefficient_polar(p: &AeroParameters, c_l: f64) -> f64 {
    p.c_d0 + p.c_dl * c_l * c_l
}

pub fn drag_coefficient_linear(p: &AltDragParameters, v: f64, alpha_deg: f64) -> f64 {
    p.c_d0 + p.c_dv * v / p.v0 + p.c_d_alpha * alpha_deg
}

/// Net thrust, N, from fuel flow (kg/s) through a consumption rate affine in Mach.
pub fn thrust(c_tv: f64, fuel_flow: f64, mach: f64, cfg: &AircraftConfig) -> Result<f64> {
    let tsfc = cfg.t0_tsfc + c_tv * mach;
    if !(tsfc > 0.0) {
        return Err(Error::SingularModel(format!(
            "non-positive fuel consumption rate {tsfc} (c_tv={c_tv}, mach={mach})"
        )));
    }
    Ok(fuel_flow / (tsfc * cfg.tsfc_unit_si))
}

/// A sample plus its dynamic pressure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelInputs {
    pub sample: MeasuredSample,
    /// Pa.
    pub dynamic_pressure: f64,
}

impl ModelInputs {
    pub fn new(sample: &MeasuredSample, cfg: &AircraftConfig) -> Self {
        ModelInputs {
            sample: *sample,
            dynamic_pressure: 0.5 * cfg.density(sample) * sample.v * sample.v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Forces {
    pub lift: f64,
    pub drag: f64,
    pub thrust: f64,
}

pub fn forces(p: &AeroParameters, inputs: &ModelInputs, cfg: &AircraftConfig) -> Result<Forces> {
    let s = &inputs.sample;
    let c_l = lift_coefficient(p, s.alpha_deg(), s.mach);
    let c_d = drag_coefficient_polar(p, c_l);
    let qs = inputs.dynamic_pressure * cfg.wing_area_m2;
    Ok(Forces {
        lift: qs * c_l,
        drag: qs * c_d,
        thrust: thrust(p.c_tv, s.fuel_flow, s.mach, cfg)?,
    })
}

/// Body-axis specific forces (a_x, a_z), m/s².
pub fn predict_accelerations(f: &Forces, alpha_rad: f64, sigma: f64, mass: f64) -> (f64, f64) {
    let (sa, ca) = alpha_rad.sin_cos();
    let (ss, cs) = sigma.sin_cos();
    let a_x = (-f.drag * ca - f.lift * sa + f.thrust * cs) / mass;
    let a_z = (-f.drag * sa + f.lift * ca + f.thrust * ss) / mass;
    (a_x, a_z)
}

/// Measurement vector [alpha, q, theta, V, a_x, a_z] under the parabolic polar.
pub fn predict_measurement(
    p: &AeroParameters,
    sample: &MeasuredSample,
    cfg: &AircraftConfig,
) -> Result<[f64; 6]> {
    MeasurementModel::Polar.predict_measurement(&p.to_array(), sample, cfg)
}

/// Which drag law the estimated parameter vector describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DragModel {
    #[default]
    Polar,
    Linear,
}

impl DragModel {
    pub fn parameter_names(self) -> &'static [&'static str] {
        match self {
            DragModel::Polar => &AeroParameters::NAMES,
            DragModel::Linear => &[
                "c_l0",
                "c_l_alpha",
                "c_lm",
                "c_d0",
                "c_dv",
                "c_d_alpha",
                "c_tv",
            ],
        }
    }

    pub fn n_params(self) -> usize {
        self.parameter_names().len()
    }

    /// Bind the model to a segment (the linear law needs the segment's initial airspeed).
    pub fn bind(self, initial_airspeed: f64) -> MeasurementModel {
        match self {
            DragModel::Polar => MeasurementModel::Polar,
            DragModel::Linear => MeasurementModel::Linear {
                v0: initial_airspeed,
            },
        }
    }
}

/// Measurement model over a flat parameter vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasurementModel {
    /// [c_l0, c_l_alpha, c_lm, c_d0, c_dl, c_tv]
    Polar,
    /// [c_l0, c_l_alpha, c_lm, c_d0, c_dv, c_d_alpha, c_tv]
    Linear { v0: f64 },
}

impl MeasurementModel {
    pub fn drag_model(&self) -> DragModel {
        match self {
            MeasurementModel::Polar => DragModel::Polar,
            MeasurementModel::Linear { .. } => DragModel::Linear,
        }
    }

    pub fn n_params(&self) -> usize {
        self.drag_model().n_params()
    }

    /// Predicted (a_x, a_z) for a parameter vector.
    pub fn accelerations(
        &self,
        theta: &[f64],
        sample: &MeasuredSample,
        cfg: &AircraftConfig,
    ) -> Result<[f64; 2]> {
        debug_assert_eq!(theta.len(), self.n_params());
        let inputs = ModelInputs::new(sample, cfg);
        let f = match *self {
            MeasurementModel::Polar => forces(&AeroParameters::from_slice(theta), &inputs, cfg)?,
            MeasurementModel::Linear { v0 } => {
                let lift_part = AeroParameters {
                    c_l0: theta[0],
                    c_l_alpha: theta[1],
                    c_lm: theta[2],
                    ..AeroParameters::zero()
                };
                let drag_part = AltDragParameters {
                    c_d0: theta[3],
                    c_dv: theta[4],
                    c_d_alpha: theta[5],
                    v0,
                };
                let c_l = lift_coefficient(&lift_part, sample.alpha_deg(), sample.mach);
                let c_d = drag_coefficient_linear(&drag_part, sample.v, sample.alpha_deg());
                let qs = inputs.dynamic_pressure * cfg.wing_area_m2;
                Forces {
                    lift: qs * c_l,
                    drag: qs * c_d,
                    thrust: thrust(theta[6], sample.fuel_flow, sample.mach, cfg)?,
                }
            }
        };
        let (a_x, a_z) = predict_accelerations(&f, sample.alpha, cfg.sigma_rad, sample.mass);
        Ok([a_x, a_z])
    }

    /// Full measurement vector; the first four entries pass the measured states through.
    pub fn predict_measurement(
        &self,
        theta: &[f64],
        sample: &MeasuredSample,
        cfg: &AircraftConfig,
    ) -> Result<[f64; 6]> {
        let [a_x, a_z] = self.accelerations(theta, sample, cfg)?;
        Ok([sample.alpha, sample.q, sample.theta, sample.v, a_x, a_z])
    }

    /// Central-difference sensitivity of (a_x, a_z) to each parameter, 2 × n.
    pub fn acceleration_jacobian(
        &self,
        theta: &[f64],
        sample: &MeasuredSample,
        cfg: &AircraftConfig,
        h_rel: f64,
    ) -> Result<DMatrix<f64>> {
        let n = theta.len();
        let mut h = DMatrix::zeros(2, n);
        let mut probe = theta.to_vec();
        for i in 0..n {
            let d = (h_rel * theta[i].abs()).max(FD_STEP_ABS);
            probe[i] = theta[i] + d;
            let up = self.accelerations(&probe, sample, cfg)?;
            probe[i] = theta[i] - d;
            let down = self.accelerations(&probe, sample, cfg)?;
            probe[i] = theta[i];
            for r in 0..2 {
                h[(r, i)] = (up[r] - down[r]) / (2.0 * d);
            }
        }
        Ok(h)
    }

    /// Sensitivity of the full measurement vector, 6 × n; rows 0..4 are zero.
    pub fn jacobian(
        &self,
        theta: &[f64],
        sample: &MeasuredSample,
        cfg: &AircraftConfig,
        h_rel: f64,
    ) -> Result<DMatrix<f64>> {
        let rows = self.acceleration_jacobian(theta, sample, cfg, h_rel)?;
        let mut h = DMatrix::zeros(6, theta.len());
        h.rows_mut(4, 2).copy_from(&rows);
        Ok(h)
    }
}

/// Parabolic-polar Jacobian of the full measurement vector.
pub fn jacobian(
    p: &AeroParameters,
    sample: &MeasuredSample,
    cfg: &AircraftConfig,
    h_rel: f64,
) -> Result<DMatrix<f64>> {
    MeasurementModel::Polar.jacobian(&p.to_array(), sample, cfg, h_rel)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> MeasuredSample {
        MeasuredSample {
            t: 0.0,
            alpha: 2.0_f64.to_radians(),
            q: 0.001,
            theta: 2.0_f64.to_radians(),
            v: 231.5,
            gamma: 0.0,
            a_x: 0.0,
            a_z: 9.8,
            mass: 60000.0,
            fuel_flow: 0.9,
            tat: 244.05,
            mach: 0.78,
            static_temp: 219.0,
        }
    }

    const A321: AeroParameters = AeroParameters::A321_FLEET_MEAN;

    #[test]
    fn lift_examples() {
        assert_eq!(
            lift_coefficient(
                &AeroParameters {
                    c_l0: 0.3,
                    ..AeroParameters::zero()
                },
                0.0,
                0.0
            ),
            0.3
        );
        assert!((lift_coefficient(&A321, 2.0, 0.78) - 0.37866).abs() < 1e-12);
        assert_eq!(lift_coefficient(&AeroParameters::zero(), 3.0, 0.8), 0.0);
    }

    #[test]
    fn polar_examples() {
        assert_eq!(drag_coefficient_polar(&A321, 0.0), 0.0054);
        let cd = drag_coefficient_polar(&A321, 0.37866);
        assert!((cd - (0.0054 + 0.0019 * 0.37866 * 0.37866)).abs() < 1e-15);
        assert!((cd - 0.0056724).abs() < 1e-7);
        assert_eq!(
            drag_coefficient_polar(&A321, 0.4),
            drag_coefficient_polar(&A321, -0.4)
        );
    }

    #[test]
    fn linear_drag_examples() {
        let p = AltDragParameters {
            c_d0: 0.01,
            c_dv: 0.005,
            c_d_alpha: 0.001,
            v0: 230.0,
        };
        assert_eq!(drag_coefficient_linear(&p, 0.0, 0.0), 0.01);
        assert!((drag_coefficient_linear(&p, 230.0, 2.0) - 0.017).abs() < 1e-15);
        let d1 = drag_coefficient_linear(&p, 200.0, 1.5) - drag_coefficient_linear(&p, 200.0, 0.0);
        let d2 = drag_coefficient_linear(&p, 200.0, 3.0) - drag_coefficient_linear(&p, 200.0, 0.0);
        assert!((d2 - 2.0 * d1).abs() < 1e-15);
    }

    #[test]
    fn thrust_examples() {
        let unit = AircraftConfig {
            t0_tsfc: 1.0,
            tsfc_unit_si: 1.0,
            ..AircraftConfig::default()
        };
        assert_eq!(thrust(0.0329, 0.0, 0.78, &unit).unwrap(), 0.0);
        assert_eq!(thrust(0.0, 2.5, 0.78, &unit).unwrap(), 2.5);
        let t = thrust(0.0329, 1.0, 0.78, &unit).unwrap();
        assert!((t - 1.0 / 1.025662).abs() < 1e-12);
        assert!((t - 0.974981).abs() < 1e-6);
        assert!(matches!(
            thrust(-2.0, 1.0, 0.78, &unit),
            Err(Error::SingularModel(_))
        ));
    }

    #[test]
    fn acceleration_examples() {
        let zero = Forces {
            lift: 0.0,
            drag: 0.0,
            thrust: 0.0,
        };
        assert_eq!(predict_accelerations(&zero, 0.3, 0.0, 1.0), (0.0, 0.0));
        let f = Forces {
            lift: 1e5,
            drag: 5e3,
            thrust: 6e3,
        };
        let (ax, az) = predict_accelerations(&f, 0.0, 0.0, 7e4);
        assert!((ax - 1e3 / 7e4).abs() < 1e-15 && (az - 1e5 / 7e4).abs() < 1e-15);
        let (ax, az) = predict_accelerations(&f, 2.0_f64.to_radians(), 0.0, 7e4);
        // −5000·cos2° − 1e5·sin2° + 6000 = −4996.954 − 3489.950 + 6000
        assert!((ax - -0.035527).abs() < 1e-6);
        assert!((az - 1.425208).abs() < 1e-6);
    }

    #[test]
    fn force_scaling() {
        let cfg = AircraftConfig::default();
        let s = sample();
        let inputs = ModelInputs::new(&s, &cfg);
        let f = forces(&A321, &inputs, &cfg).unwrap();
        let doubled = ModelInputs {
            dynamic_pressure: 2.0 * inputs.dynamic_pressure,
            ..inputs
        };
        let g = forces(&A321, &doubled, &cfg).unwrap();
        assert_eq!(g.lift, 2.0 * f.lift);
        assert_eq!(g.drag, 2.0 * f.drag);
        assert_eq!(g.thrust, f.thrust);
        let c_l = lift_coefficient(&A321, s.alpha_deg(), s.mach);
        assert!((f.lift / f.drag - c_l / drag_coefficient_polar(&A321, c_l)).abs() < 1e-12);
        let z = forces(&AeroParameters::zero(), &inputs, &cfg).unwrap();
        assert_eq!((z.lift, z.drag), (0.0, 0.0));
        assert_eq!(z.thrust, s.fuel_flow / (cfg.t0_tsfc * cfg.tsfc_unit_si));
    }

    #[test]
    fn measurement_passthrough_and_zero_parameters() {
        let cfg = AircraftConfig::default();
        let s = sample();
        let z = predict_measurement(&A321, &s, &cfg).unwrap();
        assert_eq!(&z[..4], &[s.alpha, s.q, s.theta, s.v]);
        let z0 = predict_measurement(&AeroParameters::zero(), &s, &cfg).unwrap();
        let t = s.fuel_flow / (cfg.t0_tsfc * cfg.tsfc_unit_si);
        assert!((z0[4] - t / s.mass).abs() < 1e-15);
        assert_eq!(z0[5], 0.0);
    }

    #[test]
    fn jacobian_zero_block_and_lift_partial() {
        let cfg = AircraftConfig::default();
        let mut s = sample();
        s.alpha = 0.0;
        let h = jacobian(&A321, &s, &cfg, FD_STEP_REL).unwrap();
        assert_eq!(h.nrows(), 6);
        assert!(h.rows(0, 4).iter().all(|&x| x == 0.0));
        let qs_m = ModelInputs::new(&s, &cfg).dynamic_pressure * cfg.wing_area_m2 / s.mass;
        assert!((h[(5, 0)] - qs_m).abs() / qs_m < 1e-9);
    }

    #[test]
    fn lift_parameters_enter_affinely_without_induced_drag() {
        let cfg = AircraftConfig::default();
        let s = sample();
        let base = AeroParameters { c_dl: 0.0, ..A321 };
        let az = |p: AeroParameters| predict_measurement(&p, &s, &cfg).unwrap()[5];
        for d in [1e-3, 1e-2] {
            let up = az(AeroParameters {
                c_l0: base.c_l0 + d,
                c_lm: base.c_lm - d,
                ..base
            });
            let down = az(AeroParameters {
                c_l0: base.c_l0 - d,
                c_lm: base.c_lm + d,
                ..base
            });
            assert!((up - 2.0 * az(base) + down).abs() < 1e-9);
        }
    }

    #[test]
    fn isa_density_at_tropopause() {
        let cfg = AircraftConfig {
            rho_mode: RhoMode::Isa,
            pressure_altitude_m: 11000.0,
            ..AircraftConfig::default()
        };
        let mut s = sample();
        s.static_temp = 216.65;
        assert!((cfg.density(&s) - 0.3639).abs() < 1e-3);
    }

    #[test]
    fn config_validation() {
        assert!(AircraftConfig::default().validate().is_ok());
        assert!(AircraftConfig {
            wing_area_m2: 0.0,
            ..AircraftConfig::default()
        }
        .validate()
        .is_err());
        assert!(AircraftConfig {
            sigma_rad: 0.2,
            ..AircraftConfig::default()
        }
        .validate()
        .is_err());
    }
}
