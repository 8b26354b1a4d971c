//! Pseudo-recorder data with known parameters: trajectory, clean accelerations, sensor noise.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aero::{AeroParameters, AircraftConfig, DragModel};
use crate::convergence::{assess, Thresholds};
use crate::error::{Error, Result};
use crate::estimator::{run, EstimatorConfig};
use crate::flight_data::{code, derive_mach, FlightSegment, MeasuredSample, Schema, SourceUnit};

/// Shape of the synthetic quasi-steady cruise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CruiseProfile {
    pub mean_airspeed: f64,
    pub airspeed_amplitude: f64,
    pub airspeed_period_s: f64,
    pub airspeed_phase_rad: f64,
    pub mean_alpha_deg: f64,
    pub alpha_amplitude_deg: f64,
    pub alpha_period_s: f64,
    pub gamma_deg: f64,
    pub initial_mass: f64,
    /// Total fuel flow, kg/s.
    pub fuel_flow: f64,
    /// Total air temperature, K.
    pub tat: f64,
}

impl Default for CruiseProfile {
    fn default() -> Self {
        CruiseProfile {
            mean_airspeed: 231.5,
            airspeed_amplitude: 2.0,
            airspeed_period_s: 110.0,
            airspeed_phase_rad: 0.7,
            mean_alpha_deg: 2.5,
            alpha_amplitude_deg: 0.3,
            alpha_period_s: 70.0,
            gamma_deg: 0.0,
            initial_mass: 50000.0,
            fuel_flow: 0.47,
            tat: 244.05,
        }
    }
}

/// Central differences inside, one-sided at the ends.
pub fn gradient(x: &[f64], dt: f64) -> Vec<f64> {
    let n = x.len();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|i| match i {
            0 => (x[1] - x[0]) / dt,
            i if i == n - 1 => (x[n - 1] - x[n - 2]) / dt,
            i => (x[i + 1] - x[i - 1]) / (2.0 * dt),
        })
        .collect()
}

/// State history of a synthetic cruise; accelerations are left at zero.
pub fn synth_trajectory(
    duration_s: f64,
    rate_hz: f64,
    profile: &CruiseProfile,
) -> Result<Vec<MeasuredSample>> {
    let dt = 1.0 / rate_hz;
    let n = (duration_s * rate_hz + 1e-9).floor() as usize;
    let t: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
    let gamma = profile.gamma_deg.to_radians();
    let alpha: Vec<f64> = t
        .iter()
        .map(|&t| {
            (profile.mean_alpha_deg
                + profile.alpha_amplitude_deg * (TAU * t / profile.alpha_period_s).sin())
            .to_radians()
        })
        .collect();
    let theta: Vec<f64> = alpha.iter().map(|a| a + gamma).collect();
    let q = gradient(&theta, dt);
    t.iter()
        .enumerate()
        .map(|(k, &tk)| {
            let v = profile.mean_airspeed
                + profile.airspeed_amplitude
                    * (TAU * tk / profile.airspeed_period_s + profile.airspeed_phase_rad).sin();
            let (mach, static_temp) = derive_mach(v, profile.tat)?;
            Ok(MeasuredSample {
                t: tk,
                alpha: alpha[k],
                q: q[k],
                theta: theta[k],
                v,
                gamma,
                a_x: 0.0,
                a_z: 0.0,
                mass: profile.initial_mass - profile.fuel_flow * tk,
                fuel_flow: profile.fuel_flow,
                tat: profile.tat,
                mach,
                static_temp,
            })
        })
        .collect()
}

/// Noise-free (a_x, a_z) for each state under the parabolic polar.
pub fn synth_forces(
    truth: &AeroParameters,
    states: &[MeasuredSample],
    cfg: &AircraftConfig,
) -> Result<Vec<[f64; 2]>> {
    let model = DragModel::Polar.bind(states.first().map_or(1.0, |s| s.v));
    let theta = truth.to_array();
    states
        .iter()
        .map(|s| model.accelerations(&theta, s, cfg))
        .collect()
}

/// Gaussian spread and rounding step of one recorder channel, in its source unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelNoise {
    pub sigma: f64,
    /// Rounding step; zero disables quantization.
    pub quantum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub channels: BTreeMap<String, ChannelNoise>,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self::granularity()
    }
}

impl NoiseSpec {
    /// σ and rounding step equal to each channel's recorder granularity.
    pub fn granularity() -> Self {
        NoiseSpec {
            channels: Schema::qar()
                .channels
                .iter()
                .map(|c| {
                    (
                        c.qar_code.clone(),
                        ChannelNoise {
                            sigma: c.granularity,
                            quantum: c.granularity,
                        },
                    )
                })
                .collect(),
        }
    }

    pub fn none() -> Self {
        NoiseSpec {
            channels: BTreeMap::new(),
        }
    }

    /// Multiply every σ and rounding step by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        NoiseSpec {
            channels: self
                .channels
                .iter()
                .map(|(k, c)| {
                    (
                        k.clone(),
                        ChannelNoise {
                            sigma: c.sigma * s,
                            quantum: c.quantum * s,
                        },
                    )
                })
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let schema = Schema::qar();
        for (k, c) in &self.channels {
            schema.require(k)?;
            if !(c.sigma >= 0.0) || !(c.quantum >= 0.0) {
                return Err(Error::Config(format!("noise for {k} must be non-negative")));
            }
        }
        Ok(())
    }

    pub fn get(&self, code: &str) -> ChannelNoise {
        self.channels.get(code).copied().unwrap_or(ChannelNoise {
            sigma: 0.0,
            quantum: 0.0,
        })
    }
}

/// Round to the nearest multiple of `quantum`.
pub fn quantize(x: f64, quantum: f64) -> f64 {
    if quantum > 0.0 {
        (x / quantum).round() * quantum
    } else {
        x
    }
}

struct Corrupter<'a> {
    rng: ChaCha8Rng,
    noise: &'a NoiseSpec,
}

impl Corrupter<'_> {
    fn apply(&mut self, code: &str, unit: SourceUnit, clean_si: f64) -> f64 {
        let n: f64 = self.rng.sample(StandardNormal);
        let c = self.noise.get(code);
        if c.sigma == 0.0 && c.quantum == 0.0 {
            return clean_si;
        }
        let mut x = unit.from_si(clean_si);
        if c.sigma > 0.0 {
            x += c.sigma * n;
        }
        unit.to_si(quantize(x, c.quantum))
    }
}

/// Seeded generator for one noise realisation; `stream` separates parallel sweeps.
pub fn noise_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Corrupt each recorder channel with Gaussian noise then round it to its step.
pub fn add_noise(
    clean: &FlightSegment,
    noise: &NoiseSpec,
    seed: u64,
    stream: u64,
) -> Result<FlightSegment> {
    noise.validate()?;
    let mut c = Corrupter {
        rng: noise_rng(seed, stream),
        noise,
    };
    let mut samples = Vec::with_capacity(clean.len());
    for s in &clean.samples {
        let v = c.apply(code::TAS, SourceUnit::Knots, s.v);
        let mass = c.apply(code::GW, SourceUnit::Lbs, s.mass);
        let a_z = c.apply(code::VRTG, SourceUnit::G, s.a_z);
        let a_x = c.apply(code::LONG, SourceUnit::G, s.a_x);
        let theta = c.apply(code::PITCH, SourceUnit::Degree, s.theta);
        let gamma = c.apply(code::FLT_PATH, SourceUnit::Degree, s.gamma);
        let q = c.apply(code::PITCH_RATE, SourceUnit::DegreePerSecond, s.q);
        let tat = c.apply(code::TAT, SourceUnit::Celsius, s.tat);
        let ff1 = c.apply(code::FF1, SourceUnit::LbsPerHour, 0.5 * s.fuel_flow);
        let ff2 = c.apply(code::FF2, SourceUnit::LbsPerHour, 0.5 * s.fuel_flow);
        let aoal = c.apply(code::AOAL, SourceUnit::Degree, s.alpha);
        let aoar = c.apply(code::AOAR, SourceUnit::Degree, s.alpha);
        let (mach, static_temp) = derive_mach(v, tat)?;
        samples.push(MeasuredSample {
            t: s.t,
            alpha: 0.5 * (aoal + aoar),
            q,
            theta,
            v,
            gamma,
            a_x,
            a_z,
            mass,
            fuel_flow: ff1 + ff2,
            tat,
            mach,
            static_temp,
        });
    }
    FlightSegment::new(
        samples,
        clean.grid_rate_hz,
        clean.flight_id.clone(),
        clean.aircraft_type.clone(),
        clean.tail_id.clone(),
    )
}

/// Everything needed to regenerate one pseudo-recorder segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimScenario {
    pub truth: AeroParameters,
    pub aircraft: AircraftConfig,
    pub profile: CruiseProfile,
    pub noise: NoiseSpec,
    pub seed: u64,
    pub duration_s: f64,
    pub rate_hz: f64,
    pub flight_id: String,
    pub tail_id: String,
}

impl Default for SimScenario {
    fn default() -> Self {
        SimScenario {
            truth: AeroParameters::A321_FLEET_MEAN,
            aircraft: AircraftConfig::default(),
            profile: CruiseProfile::default(),
            noise: NoiseSpec::granularity(),
            seed: 42,
            duration_s: 200.0,
            rate_hz: 1.0,
            flight_id: "SIM-0001".to_string(),
            tail_id: "SIM".to_string(),
        }
    }
}

impl SimScenario {
    /// The reference scenario with noise switched off.
    pub fn noise_free() -> Self {
        SimScenario {
            noise: NoiseSpec::none(),
            ..Self::default()
        }
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let s: SimScenario = if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text)?
        } else {
            serde_json::from_str(&text)?
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.aircraft.validate()?;
        self.noise.validate()?;
        if !(self.rate_hz > 0.0) || !(self.duration_s * self.rate_hz >= 50.0) {
            return Err(Error::Config(
                "scenario needs rate_hz > 0 and at least 50 samples".into(),
            ));
        }
        Ok(())
    }

    /// Noise-free segment with accelerations from the truth parameters.
    pub fn clean_segment(&self) -> Result<FlightSegment> {
        self.validate()?;
        let mut states = synth_trajectory(self.duration_s, self.rate_hz, &self.profile)?;
        let acc = synth_forces(&self.truth, &states, &self.aircraft)?;
        for (s, [ax, az]) in states.iter_mut().zip(acc) {
            s.a_x = ax;
            s.a_z = az;
        }
        FlightSegment::new(
            states,
            self.rate_hz,
            self.flight_id.clone(),
            self.aircraft.aircraft_type.clone(),
            self.tail_id.clone(),
        )
    }

    /// The pseudo-recorder segment for this scenario's seed.
    pub fn generate(&self) -> Result<FlightSegment> {
        add_noise(&self.clean_segment()?, &self.noise, self.seed, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub scale: f64,
    /// |estimate − truth| / |truth| of the final estimate.
    pub relative_errors: Option<Vec<f64>>,
    pub cvs: Option<Vec<Option<f64>>>,
    pub failure: Option<String>,
}

fn sweep_one(
    scenario: &SimScenario,
    scale: f64,
    stream: u64,
    ecfg: &EstimatorConfig,
    thresholds: &Thresholds,
) -> Result<(Vec<f64>, Vec<Option<f64>>)> {
    let seg = add_noise(
        &scenario.clean_segment()?,
        &scenario.noise.scaled(scale),
        scenario.seed,
        stream,
    )?;
    let trace = run(&seg, &scenario.aircraft, ecfg)?;
    let report = assess(&trace, thresholds)?;
    let truth = scenario.truth.to_array();
    let errs = trace
        .final_theta()
        .iter()
        .zip(truth)
        .map(|(e, t)| (e - t).abs() / t.abs())
        .collect();
    Ok((errs, report.parameters.iter().map(|p| p.cv).collect()))
}

/// Rerun the pipeline with the scenario's noise scaled by each factor; failures are recorded.
pub fn noise_sweep(
    scenario: &SimScenario,
    scales: &[f64],
    ecfg: &EstimatorConfig,
    thresholds: &Thresholds,
) -> Result<Vec<SweepRecord>> {
    if scales.is_empty() || scales.iter().any(|s| !(*s >= 0.0)) {
        return Err(Error::Config(
            "scales must be non-empty and non-negative".into(),
        ));
    }
    if ecfg.drag_model != DragModel::Polar {
        return Err(Error::Config(
            "noise sweeps compare against polar truth".into(),
        ));
    }
    Ok(scales
        .par_iter()
        .enumerate()
        .map(
            |(i, &scale)| match sweep_one(scenario, scale, i as u64, ecfg, thresholds) {
                Ok((errs, cvs)) => SweepRecord {
                    scale,
                    relative_errors: Some(errs),
                    cvs: Some(cvs),
                    failure: None,
                },
                Err(e) => SweepRecord {
                    scale,
                    relative_errors: None,
                    cvs: None,
                    failure: Some(e.to_string()),
                },
            },
        )
        .collect())
}
