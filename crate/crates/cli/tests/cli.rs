mod common;

use common::{cgeem, code, flat_scenario, p, raw_flight, snapshot};
use serde_json::Value;

fn json(path: &std::path::Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn simulate_writes_segment_truth_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sim");
    let o = cgeem(&["simulate", "--out", p(&out), "--seed", "7"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = json(&out.join("manifest.json"));
    assert_eq!(m["command"], "simulate");
    assert_eq!(m["seed"], 7);
    assert_eq!(m["timestamp_unix"], 1700000000u64);
    assert_eq!(
        m["outputs"],
        serde_json::json!(["segment.csv", "truth.json"])
    );
    assert!(json(&out.join("truth.json"))["truth"]["c_d0"].is_f64());
}

#[test]
fn missing_scenario_is_an_input_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cgeem(&[
        "simulate",
        "--scenario",
        "does-not-exist.json",
        "--out",
        p(tmp.path()),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn bad_flag_values_are_input_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let seg = tmp.path().join("sim");
    assert_eq!(code(&cgeem(&["simulate", "--out", p(&seg)])), 0);
    let seg = seg.join("segment.csv");
    let out = tmp.path().join("id");
    for extra in [
        &["--estimator", "rls", "--lambda", "1.5"][..],
        &["--p0-scale", "-1"],
        &["--theta0", "1,2"],
        &["--estimator", "kalman"],
    ] {
        let mut args = vec!["identify", p(&seg), "--out", p(&out)];
        args.extend_from_slice(extra);
        assert_eq!(code(&cgeem(&args)), 2, "{extra:?}");
    }
}

#[test]
fn short_segment_is_an_input_error() {
    let tmp = tempfile::tempdir().unwrap();
    let sim = tmp.path().join("sim");
    assert_eq!(code(&cgeem(&["simulate", "--out", p(&sim)])), 0);
    let text = std::fs::read_to_string(sim.join("segment.csv")).unwrap();
    // 4 metadata lines, the header and 10 samples
    let short: String = text.lines().take(15).map(|l| format!("{l}\n")).collect();
    let path = tmp.path().join("short.csv");
    std::fs::write(&path, short).unwrap();
    let o = cgeem(&["identify", p(&path), "--out", p(&tmp.path().join("id"))]);
    assert_eq!(code(&o), 2);
}

#[test]
fn converged_flagged_and_numeric_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let flat = flat_scenario(tmp.path(), "FLAT", "A321");
    let flat_out = tmp.path().join("flat");
    assert_eq!(
        code(&cgeem(&[
            "simulate",
            "--scenario",
            p(&flat),
            "--out",
            p(&flat_out)
        ])),
        0
    );
    let noisy_out = tmp.path().join("noisy");
    assert_eq!(code(&cgeem(&["simulate", "--out", p(&noisy_out)])), 0);
    let flat_seg = flat_out.join("segment.csv");
    let noisy_seg = noisy_out.join("segment.csv");

    let id = tmp.path().join("id");
    assert_eq!(
        code(&cgeem(&["identify", p(&flat_seg), "--out", p(&id)])),
        0
    );
    let r = json(&id.join("result_FLAT.json"));
    assert_eq!(r["report"]["verdict"], "converged");
    assert!(id.join("trace_FLAT.csv").exists());

    assert_eq!(
        code(&cgeem(&["identify", p(&noisy_seg), "--out", p(&id)])),
        3
    );
    assert_eq!(
        code(&cgeem(&[
            "identify",
            p(&flat_seg),
            p(&noisy_seg),
            "--out",
            p(&tmp.path().join("both"))
        ])),
        3
    );

    let o = cgeem(&[
        "identify",
        p(&noisy_seg),
        "--theta0=0,0,0,0,0,-100",
        "--out",
        p(&id),
    ]);
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&id.join("result_SIM-0001.json"));
    assert_eq!(r["failure"]["step"], 0);
    assert_eq!(r["failure"]["numeric"], true);
}

#[test]
fn compare_writes_three_gain_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let sim = tmp.path().join("sim");
    assert_eq!(code(&cgeem(&["simulate", "--out", p(&sim)])), 0);
    let out = tmp.path().join("cmp");
    assert_eq!(
        code(&cgeem(&[
            "compare",
            p(&sim.join("segment.csv")),
            "--out",
            p(&out)
        ])),
        0
    );
    let csv = std::fs::read_to_string(out.join("comparison.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "k,cg,rls(1),rls(0.95)");
    assert_eq!(csv.lines().count(), 201);
    assert_eq!(
        json(&out.join("comparison.json"))["rows"]
            .as_array()
            .unwrap()
            .len(),
        3
    );
}

#[test]
fn extract_finds_two_cruise_phases_and_identify_reads_them() {
    let tmp = tempfile::tempdir().unwrap();
    let flight = tmp.path().join("flight.csv");
    raw_flight(&flight, 900.0, |t| {
        if (300.0..400.0).contains(&t) {
            5.0
        } else {
            0.0
        }
    });
    let out = tmp.path().join("ext");
    let o = cgeem(&["extract", p(&flight), "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = json(&out.join("manifest.json"));
    assert_eq!(
        m["outputs"],
        serde_json::json!(["segment_1.csv", "segment_2.csv"])
    );
    let seg0 = std::fs::read_to_string(out.join("segment_1.csv")).unwrap();
    assert!(seg0.contains("# flight_id: RAW-1-seg1"));

    // raw recorder files are aligned on the fly
    let o = cgeem(&["identify", p(&flight), "--out", p(&tmp.path().join("id"))]);
    assert!(
        matches!(code(&o), 0 | 3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn all_climb_flight_extracts_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let flight = tmp.path().join("climb.csv");
    raw_flight(&flight, 600.0, |_| 3.0);
    let out = tmp.path().join("ext");
    assert_eq!(code(&cgeem(&["extract", p(&flight), "--out", p(&out)])), 0);
    assert_eq!(snapshot(&out).len(), 1);
}

#[test]
fn fleet_of_three_converged_and_one_flagged() {
    let tmp = tempfile::tempdir().unwrap();
    let results = tmp.path().join("results");
    let mut segs = Vec::new();
    for (id, ty) in [("F1", "A321"), ("F2", "A321"), ("F3", "B737")] {
        let sc = flat_scenario(tmp.path(), id, ty);
        let out = tmp.path().join(id);
        assert_eq!(
            code(&cgeem(&[
                "simulate",
                "--scenario",
                p(&sc),
                "--out",
                p(&out)
            ])),
            0
        );
        segs.push(out.join("segment.csv"));
    }
    let noisy = tmp.path().join("noisy");
    assert_eq!(code(&cgeem(&["simulate", "--out", p(&noisy)])), 0);
    segs.push(noisy.join("segment.csv"));

    let mut args = vec!["identify"];
    args.extend(segs.iter().map(|s| p(s)));
    args.extend(["--out", p(&results)]);
    assert_eq!(code(&cgeem(&args)), 3);

    let out = tmp.path().join("fleet");
    assert_eq!(code(&cgeem(&["fleet", p(&results), "--out", p(&out)])), 0);
    let s = json(&out.join("fleet_summary.json"));
    assert_eq!(s["converged_flights"], 3);
    assert_eq!(s["flagged"].as_array().unwrap().len(), 1);
    assert_eq!(s["flagged"][0]["flight_id"], "SIM-0001");
    assert_eq!(s["omitted"], serde_json::json!(["B737"]));
    let table = std::fs::read_to_string(out.join("fleet_table.csv")).unwrap();
    assert_eq!(table.lines().count(), 2);
    assert!(table.lines().nth(1).unwrap().starts_with("A321,2,"));
    assert!(out.join("histogram_c_d0.csv").exists());
    let flagged = std::fs::read_to_string(out.join("flagged.csv")).unwrap();
    assert_eq!(flagged.lines().count(), 2);
}

#[test]
fn empty_results_directory_is_not_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = tmp.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    let out = tmp.path().join("fleet");
    assert_eq!(code(&cgeem(&["fleet", p(&empty), "--out", p(&out)])), 0);
    let s = json(&out.join("fleet_summary.json"));
    assert_eq!(s["converged_flights"], 0);
}

#[test]
fn identify_is_byte_identical_across_runs_and_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let sim = tmp.path().join("sim");
    assert_eq!(code(&cgeem(&["simulate", "--out", p(&sim)])), 0);
    let flat = flat_scenario(tmp.path(), "FLAT", "A321");
    let flat_out = tmp.path().join("flat");
    assert_eq!(
        code(&cgeem(&[
            "simulate",
            "--scenario",
            p(&flat),
            "--out",
            p(&flat_out)
        ])),
        0
    );
    let segs = [sim.join("segment.csv"), flat_out.join("segment.csv")];
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let out = tmp.path().join(format!("id{threads}"));
        let o = std::process::Command::new(env!("CARGO_BIN_EXE_cgeem"))
            .args(["identify", p(&segs[0]), p(&segs[1]), "--out", p(&out)])
            .env("SOURCE_DATE_EPOCH", common::EPOCH)
            .env("CGEEM_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(code(&o), 3);
        outputs.push(snapshot(&out));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn help_documents_every_flag() {
    for cmd in ["simulate", "identify", "compare", "extract", "fleet"] {
        let o = cgeem(&[cmd, "--help"]);
        assert_eq!(code(&o), 0);
        let text = String::from_utf8(o.stdout).unwrap();
        for line in text.lines().filter(|l| l.trim_start().starts_with("--")) {
            let parts: Vec<&str> = line.split_whitespace().collect();
            assert!(parts.len() > 2, "{cmd}: undocumented flag {line}");
        }
    }
}
