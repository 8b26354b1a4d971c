use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use cgeem_core::aero::AircraftConfig;
use cgeem_core::convergence::{assess, Thresholds};
use cgeem_core::estimator::{compare_estimators, run, EstimatorConfig, RunFailure, RunMetadata};
use cgeem_core::fleet::{
    aggregate, cross_type_compare, flagged_csv, fleet_table_csv, histogram_csv, type_table_csv,
    FlightResult,
};
use cgeem_core::flight_data::{
    align_and_convert, detect_cruise_segments, parse_raw_csv, rate_from_hz, CruiseCriteria,
    FlightSegment, Schema,
};
use cgeem_core::simgen::SimScenario;

use crate::manifest::{display, OutputDir, MANIFEST};
use crate::options::EstimatorArgs;

/// How a command finished; each maps to a process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Success,
    InputError,
    Flagged,
    NumericFailure,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Success => 0,
            Status::InputError => 2,
            Status::Flagged => 3,
            Status::NumericFailure => 4,
        }
    }
}

/// Numeric failures anywhere in the cause chain exit with 4; everything else is an input error.
pub fn classify(e: &anyhow::Error) -> Status {
    let numeric = e
        .chain()
        .filter_map(|c| c.downcast_ref::<cgeem_core::Error>())
        .any(cgeem_core::Error::is_numeric);
    if numeric {
        Status::NumericFailure
    } else {
        Status::InputError
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "segment".into())
}

/// Accept either an aligned segment CSV or a raw recorder CSV, which is aligned at `grid_hz`.
fn load_any_segment(path: &Path, grid_hz: f64) -> Result<FlightSegment> {
    let text = read_text(path)?;
    let header = text
        .lines()
        .find(|l| !l.trim_start().starts_with('#') && !l.trim().is_empty())
        .unwrap_or("");
    let mut seg = if header.replace(' ', "").starts_with("t,alpha,") {
        FlightSegment::parse_csv(&text)
    } else {
        rate_from_hz(grid_hz).and_then(|_| {
            let schema = Schema::qar();
            let raw = parse_raw_csv(&text, &schema)?;
            align_and_convert(&raw, &schema, grid_hz)
        })
    }
    .with_context(|| format!("invalid segment {}", path.display()))?;
    if seg.flight_id.is_empty() {
        seg.flight_id = file_stem(path);
    }
    Ok(seg)
}

fn aircraft_for(seg: &FlightSegment, explicit: Option<&AircraftConfig>) -> AircraftConfig {
    explicit
        .cloned()
        .unwrap_or_else(|| AircraftConfig::for_type(&seg.aircraft_type))
}

fn load_aircraft(path: Option<&Path>) -> Result<Option<AircraftConfig>> {
    path.map(|p| {
        AircraftConfig::from_path(p)
            .with_context(|| format!("invalid aircraft config {}", p.display()))
    })
    .transpose()
}

fn validated_config(args: &EstimatorArgs) -> Result<EstimatorConfig> {
    let cfg = args.config();
    cfg.validate().context("invalid estimator settings")?;
    Ok(cfg)
}

fn config_paths(paths: &[Option<&Path>]) -> Vec<String> {
    paths.iter().flatten().map(|p| display(p)).collect()
}

pub fn simulate(
    scenario_path: Option<&Path>,
    out: &Path,
    seed: Option<u64>,
    noise_scale: f64,
) -> Result<Status> {
    if !noise_scale.is_finite() || noise_scale < 0.0 {
        bail!("--noise-scale must be a finite non-negative number");
    }
    let mut scenario = match scenario_path {
        Some(p) => SimScenario::from_path(p)
            .with_context(|| format!("invalid scenario {}", p.display()))?,
        None => SimScenario::default(),
    };
    if let Some(s) = seed {
        scenario.seed = s;
    }
    scenario.noise = scenario.noise.scaled(noise_scale);
    let segment = scenario.generate()?;

    let mut dir = OutputDir::create(out)?;
    dir.write("segment.csv", &segment.to_csv_string())?;
    dir.write_json(
        "truth.json",
        &json!({
            "parameter_names": cgeem_core::aero::AeroParameters::NAMES,
            "truth": scenario.truth,
            "scenario": scenario,
        }),
    )?;
    dir.finish(
        "simulate",
        config_paths(&[scenario_path]),
        Some(scenario.seed),
        json!({ "noise_scale": noise_scale }),
        Vec::new(),
    )?;
    Ok(Status::Success)
}

/// Per-flight result file: the fleet record plus run metadata.
#[derive(Debug, Serialize)]
struct ResultFile {
    #[serde(flatten)]
    result: FlightResult,
    metadata: RunMetadata,
}

struct Identified {
    file: ResultFile,
    trace_csv: Option<String>,
}

fn identify_one(
    seg: &FlightSegment,
    aircraft: &AircraftConfig,
    ecfg: &EstimatorConfig,
    seed: Option<u64>,
) -> Identified {
    let outcome = run(seg, aircraft, ecfg).map(|trace| {
        let report = assess(&trace, &Thresholds::default());
        (trace, report)
    });
    let (report, failure, steps, trace_csv) = match outcome {
        Ok((trace, Ok(report))) => (Some(report), None, trace.len(), Some(trace.to_csv_string())),
        Ok((trace, Err(e))) => (
            None,
            Some(RunFailure::from_error(&e)),
            trace.len(),
            Some(trace.to_csv_string()),
        ),
        Err(e) => (None, Some(RunFailure::from_error(&e)), 0, None),
    };
    let echo = ecfg.echo();
    Identified {
        file: ResultFile {
            result: FlightResult {
                flight_id: seg.flight_id.clone(),
                tail_id: seg.tail_id.clone(),
                aircraft_type: seg.aircraft_type.clone(),
                estimator: ecfg.kind,
                drag_model: ecfg.drag_model,
                report,
                failure: failure.clone(),
            },
            metadata: RunMetadata {
                config: echo,
                seed,
                parameter_names: ecfg
                    .drag_model
                    .parameter_names()
                    .iter()
                    .map(|s| s.to_string())
                    .collect(),
                steps,
                failure,
            },
        },
        trace_csv,
    }
}

fn status_of(r: &FlightResult) -> Status {
    match (&r.failure, &r.report) {
        (Some(f), _) if f.numeric => Status::NumericFailure,
        (Some(_), _) => Status::InputError,
        (None, Some(rep)) if rep.is_converged() => Status::Success,
        _ => Status::Flagged,
    }
}

pub fn identify(
    segments: &[PathBuf],
    aircraft_path: Option<&Path>,
    out: &Path,
    args: &EstimatorArgs,
) -> Result<Status> {
    let ecfg = validated_config(args)?;
    let aircraft = load_aircraft(aircraft_path)?;
    let loaded: Vec<FlightSegment> = segments
        .iter()
        .map(|p| load_any_segment(p, args.grid_hz))
        .collect::<Result<_>>()?;
    let mut ids = BTreeSet::new();
    for s in &loaded {
        if !ids.insert(s.flight_id.as_str()) {
            bail!("duplicate flight_id {}", s.flight_id);
        }
    }
    let results: Vec<Identified> = loaded
        .par_iter()
        .map(|seg| identify_one(seg, &aircraft_for(seg, aircraft.as_ref()), &ecfg, args.seed))
        .collect();

    let mut dir = OutputDir::create(out)?;
    let mut status = Status::Success;
    for r in &results {
        let id = &r.file.result.flight_id;
        dir.write_json(&format!("result_{id}.json"), &r.file)?;
        if let Some(csv) = &r.trace_csv {
            dir.write(&format!("trace_{id}.csv"), csv)?;
        }
        if let Some(f) = &r.file.result.failure {
            eprintln!("{id}: failed: {}", f.message);
        } else if let Some(rep) = &r.file.result.report {
            if !rep.is_converged() {
                eprintln!("{id}: flagged: {}", rep.failing().join(", "));
            }
        }
        status = status.max(status_of(&r.file.result));
    }
    dir.finish(
        "identify",
        config_paths(&[aircraft_path]),
        args.seed,
        serde_json::to_value(args)?,
        segments.iter().map(|p| display(p)).collect(),
    )?;
    Ok(status)
}

pub fn compare(
    segment: &Path,
    aircraft_path: Option<&Path>,
    out: &Path,
    args: &EstimatorArgs,
) -> Result<Status> {
    let base = validated_config(args)?;
    let aircraft = load_aircraft(aircraft_path)?;
    let seg = load_any_segment(segment, args.grid_hz)?;
    let report = compare_estimators(
        &seg,
        &aircraft_for(&seg, aircraft.as_ref()),
        &base,
        &Thresholds::default(),
    );

    let mut dir = OutputDir::create(out)?;
    dir.write("comparison.csv", &report.gain_norms_csv())?;
    dir.write_json("comparison.json", &report)?;
    dir.finish(
        "compare",
        config_paths(&[aircraft_path]),
        args.seed,
        serde_json::to_value(args)?,
        vec![display(segment)],
    )?;
    let all_failed = report.rows.iter().all(|r| r.failure.is_some());
    let numeric = report
        .rows
        .iter()
        .any(|r| r.failure.as_ref().is_some_and(|f| f.numeric));
    Ok(if all_failed && numeric {
        Status::NumericFailure
    } else if all_failed {
        Status::InputError
    } else {
        Status::Success
    })
}

fn load_criteria(path: Option<&Path>) -> Result<CruiseCriteria> {
    let Some(p) = path else {
        return Ok(CruiseCriteria::default());
    };
    let text = read_text(p)?;
    let c: CruiseCriteria = if p.extension().is_some_and(|e| e == "toml") {
        toml::from_str(&text).with_context(|| format!("invalid criteria {}", p.display()))?
    } else {
        serde_json::from_str(&text).with_context(|| format!("invalid criteria {}", p.display()))?
    };
    Ok(c)
}

pub fn extract(
    flight: &Path,
    criteria_path: Option<&Path>,
    out: &Path,
    grid_hz: Option<f64>,
) -> Result<Status> {
    let mut criteria = load_criteria(criteria_path)?;
    if let Some(hz) = grid_hz {
        criteria.grid_rate_hz = hz;
    }
    rate_from_hz(criteria.grid_rate_hz).context("invalid grid rate")?;
    let schema = Schema::qar();
    let text = read_text(flight)?;
    let mut raw = parse_raw_csv(&text, &schema)
        .with_context(|| format!("invalid flight file {}", flight.display()))?;
    if raw.meta("flight_id").is_none_or(str::is_empty) {
        raw.metadata.insert("flight_id".into(), file_stem(flight));
    }
    let segments = detect_cruise_segments(&raw, &schema, &criteria)
        .with_context(|| format!("cannot extract cruise from {}", flight.display()))?;

    let mut dir = OutputDir::create(out)?;
    for (i, s) in segments.iter().enumerate() {
        dir.write(&format!("segment_{}.csv", i + 1), &s.to_csv_string())?;
    }
    eprintln!("{} cruise segment(s)", segments.len());
    dir.finish(
        "extract",
        config_paths(&[criteria_path]),
        None,
        serde_json::to_value(&criteria)?,
        vec![display(flight)],
    )?;
    Ok(Status::Success)
}

fn read_results(dir: &Path) -> Result<(Vec<FlightResult>, Vec<String>)> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("cannot read results directory {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    paths.retain(|p| {
        p.extension().is_some_and(|e| e == "json") && p.file_name().is_some_and(|n| n != MANIFEST)
    });
    paths.sort();
    let mut results = Vec::new();
    for p in &paths {
        let r: FlightResult = serde_json::from_str(&read_text(p)?)
            .with_context(|| format!("{} is not a flight result", p.display()))?;
        results.push(r);
    }
    Ok((results, paths.iter().map(|p| display(p)).collect()))
}

pub fn fleet(results_dir: &Path, out: &Path) -> Result<Status> {
    let (results, inputs) = read_results(results_dir)?;
    let summary = aggregate(&results);

    let mut dir = OutputDir::create(out)?;
    dir.write_json("fleet_summary.json", &summary)?;
    dir.write("fleet_table.csv", &fleet_table_csv(&summary))?;
    for t in &summary.types {
        dir.write(&format!("type_{}.csv", t.aircraft_type), &type_table_csv(t))?;
    }
    for h in &summary.histograms {
        dir.write(&format!("histogram_{}.csv", h.parameter), &histogram_csv(h))?;
    }
    dir.write("flagged.csv", &flagged_csv(&summary))?;
    if let Ok(table) = cross_type_compare(&summary) {
        dir.write_json("cross_type.json", &table)?;
    }
    dir.finish("fleet", Vec::new(), None, json!({}), inputs)?;
    Ok(Status::Success)
}
