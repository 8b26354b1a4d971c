#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cgeem_core::flight_data::{RawTable, Schema, Series};

pub const EPOCH: &str = "1700000000";

pub fn cgeem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cgeem"))
        .args(args)
        .env("SOURCE_DATE_EPOCH", EPOCH)
        .output()
        .expect("binary runs")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Simulation scenario with constant airspeed and angle of attack and no noise.
pub fn flat_scenario(dir: &Path, flight_id: &str, aircraft_type: &str) -> PathBuf {
    let path = dir.join(format!("{flight_id}.json"));
    let text = format!(
        r#"{{"flight_id":"{flight_id}","tail_id":"T-{flight_id}",
            "aircraft":{{"aircraft_type":"{aircraft_type}"}},
            "profile":{{"airspeed_amplitude":0.0,"alpha_amplitude_deg":0.0}},
            "noise":{{"channels":{{}}}},"duration_s":300}}"#
    );
    std::fs::write(&path, text).unwrap();
    path
}

/// Whole flight at native recorder rates whose flight-path angle follows `gamma_deg(t)`.
pub fn raw_flight(path: &Path, seconds: f64, gamma_deg: impl Fn(f64) -> f64) {
    let schema = Schema::qar();
    let mut raw = RawTable::default();
    raw.metadata.insert("flight_id".into(), "RAW-1".into());
    raw.metadata.insert("aircraft_type".into(), "A321".into());
    raw.metadata.insert("tail_id".into(), "T-RAW".into());
    for spec in schema
        .channels
        .iter()
        .filter(|c| c.mandatory || c.qar_code == "FLT_PATH")
    {
        let period = spec.sample_rate.period();
        let mut s = Series::default();
        let mut k = 0.0;
        while k * period < seconds {
            let t = k * period;
            let v = match spec.qar_code.as_str() {
                "TAS" => 450.0,
                "GW" => 130000.0 - t,
                "VRTG" => 1.0,
                "PITCH" => 2.5 + gamma_deg(t),
                "FLT_PATH" => gamma_deg(t),
                "AOAL" | "AOAR" => 2.5,
                "TAT" => -29.0,
                "FF1" | "FF2" => 1800.0,
                _ => 0.0,
            };
            s.push(t, v);
            k += 1.0;
        }
        raw.channels.insert(spec.qar_code.clone(), s);
    }
    for spec in schema
        .channels
        .iter()
        .filter(|c| !raw.channels.contains_key(&c.qar_code))
    {
        raw.absent.push(spec.qar_code.clone());
    }
    raw.write_csv(path).unwrap();
}

/// Sorted (name, bytes) of every file in a directory.
pub fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}
