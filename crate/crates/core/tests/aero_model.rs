use cgeem_core::aero::{
    predict_measurement, AeroParameters, AircraftConfig, DragModel, ModelInputs, FD_STEP_REL,
};
use cgeem_core::flight_data::{derive_mach, MeasuredSample, STANDARD_GRAVITY};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Hand-derived partials of (a_x, a_z) with respect to the six polar coefficients.
fn analytic_jacobian(p: &AeroParameters, s: &MeasuredSample, cfg: &AircraftConfig) -> DMatrix<f64> {
    let qs = ModelInputs::new(s, cfg).dynamic_pressure * cfg.wing_area_m2;
    let a_deg = s.alpha_deg();
    let c_l = p.c_l0 + p.c_l_alpha * a_deg + p.c_lm * s.mach;
    let tsfc = cfg.t0_tsfc + p.c_tv * s.mach;
    let thrust = s.fuel_flow / (cfg.tsfc_unit_si * tsfc);
    let (sa, ca) = s.alpha.sin_cos();
    let (ss, cs) = cfg.sigma_rad.sin_cos();
    let m = s.mass;

    // dC_L/dθ and dC_D/dθ
    let dcl = [1.0, a_deg, s.mach, 0.0, 0.0, 0.0];
    let mut dcd = [0.0; 6];
    for i in 0..3 {
        dcd[i] = 2.0 * p.c_dl * c_l * dcl[i];
    }
    dcd[3] = 1.0;
    dcd[4] = c_l * c_l;
    let mut dt = [0.0; 6];
    dt[5] = -thrust * s.mach / tsfc;

    let mut h = DMatrix::zeros(2, 6);
    for i in 0..6 {
        let dl = qs * dcl[i];
        let dd = qs * dcd[i];
        h[(0, i)] = (-dd * ca - dl * sa + dt[i] * cs) / m;
        h[(1, i)] = (-dd * sa + dl * ca + dt[i] * ss) / m;
    }
    h
}

fn random_point(rng: &mut ChaCha8Rng) -> (AeroParameters, MeasuredSample, AircraftConfig) {
    let truth = AeroParameters::A321_FLEET_MEAN.to_array();
    let p: Vec<f64> = truth
        .iter()
        .map(|t| t * rng.random_range(0.5..1.5))
        .collect();
    let v = rng.random_range(200.0..250.0);
    let tat = rng.random_range(230.0..260.0);
    let (mach, static_temp) = derive_mach(v, tat).unwrap();
    let alpha = rng.random_range(0.5f64..4.5).to_radians();
    let s = MeasuredSample {
        t: 0.0,
        alpha,
        q: 0.0,
        theta: alpha,
        v,
        gamma: 0.0,
        a_x: 0.0,
        a_z: STANDARD_GRAVITY,
        mass: rng.random_range(40000.0..80000.0),
        fuel_flow: rng.random_range(0.3..1.2),
        tat,
        mach,
        static_temp,
    };
    let cfg = AircraftConfig {
        sigma_rad: rng.random_range(-0.05..0.05),
        ..AircraftConfig::default()
    };
    (AeroParameters::from_slice(&p), s, cfg)
}

#[test]
fn finite_difference_matches_analytic_partials() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (p, s, cfg) = random_point(&mut rng);
        let fd = DragModel::Polar
            .bind(s.v)
            .jacobian(&p.to_array(), &s, &cfg, FD_STEP_REL)
            .unwrap();
        assert!(fd.rows(0, 4).iter().all(|&x| x == 0.0));
        let an = analytic_jacobian(&p, &s, &cfg);
        for i in 0..6 {
            let err = (fd.view((4, i), (2, 1)) - an.column(i)).norm() / an.column(i).norm();
            worst = worst.max(err);
        }
    }
    assert!(worst < 1e-6, "worst relative error {worst:e}");
}

#[test]
fn trim_point_reproduces_construction() {
    let p = AeroParameters::A321_FLEET_MEAN;
    let cfg = AircraftConfig {
        sigma_rad: 0.03,
        ..AircraftConfig::default()
    };
    let v = 231.5;
    let (mach, static_temp) = derive_mach(v, 244.05).unwrap();
    let alpha = 2.3_f64.to_radians();
    let mut s = MeasuredSample {
        t: 0.0,
        alpha,
        q: 0.0,
        theta: alpha,
        v,
        gamma: 0.0,
        a_x: 0.0,
        a_z: 0.0,
        mass: 1.0,
        fuel_flow: 1.0,
        tat: 244.05,
        mach,
        static_temp,
    };
    let qs = 0.5 * cfg.rho_fixed * v * v * cfg.wing_area_m2;
    let c_l = p.c_l0 + p.c_l_alpha * alpha.to_degrees() + p.c_lm * mach;
    let (lift, drag) = (qs * c_l, qs * (p.c_d0 + p.c_dl * c_l * c_l));
    // thrust along the offset line cancels the axial aerodynamic force
    let thrust = (drag * alpha.cos() + lift * alpha.sin()) / cfg.sigma_rad.cos();
    s.fuel_flow = thrust * cfg.tsfc_unit_si * (cfg.t0_tsfc + p.c_tv * mach);
    s.mass = (-drag * alpha.sin() + lift * alpha.cos() + thrust * cfg.sigma_rad.sin())
        / STANDARD_GRAVITY;
    let z = predict_measurement(&p, &s, &cfg).unwrap();
    assert!(z[4].abs() < 1e-9, "a_x = {}", z[4]);
    assert!((z[5] - STANDARD_GRAVITY).abs() < 1e-9, "a_z = {}", z[5]);
}

#[test]
fn prediction_is_bit_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let (p, s, cfg) = random_point(&mut rng);
        let a = predict_measurement(&p, &s, &cfg).unwrap();
        let b = predict_measurement(&p, &s, &cfg).unwrap();
        assert_eq!(a.map(f64::to_bits), b.map(f64::to_bits));
    }
}

#[test]
fn linear_drag_model_has_seven_parameters() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (_, s, cfg) = random_point(&mut rng);
    let model = DragModel::Linear.bind(s.v);
    let theta = [0.2, 0.025, 0.15, 0.01, 0.005, 0.001, 0.03];
    let h = model.jacobian(&theta, &s, &cfg, FD_STEP_REL).unwrap();
    assert_eq!(h.shape(), (6, 7));
    // at V = V0 the c_dv column equals the c_d0 column
    for r in 4..6 {
        assert!((h[(r, 3)] - h[(r, 4)]).abs() < 1e-6 * h[(r, 3)].abs());
    }
}

#[test]
fn aircraft_config_reads_json_and_toml() {
    let dir = tempfile::tempdir().unwrap();
    let j = dir.path().join("a.json");
    std::fs::write(&j, r#"{"wing_area_m2": 124.6, "sigma_rad": 0.01, "t0_tsfc": 0.56, "rho_mode": "fixed", "rho_fixed": 0.4}"#).unwrap();
    let c = AircraftConfig::from_path(&j).unwrap();
    assert_eq!((c.wing_area_m2, c.rho_fixed), (124.6, 0.4));
    let t = dir.path().join("a.toml");
    std::fs::write(
        &t,
        "wing_area_m2 = 360.5\nrho_mode = \"isa\"\npressure_altitude_m = 11000.0\n",
    )
    .unwrap();
    let c = AircraftConfig::from_path(&t).unwrap();
    assert_eq!(c.wing_area_m2, 360.5);
    let bad = dir.path().join("b.json");
    std::fs::write(&bad, r#"{"wing_area_m2": -1}"#).unwrap();
    assert!(AircraftConfig::from_path(&bad).is_err());
}
