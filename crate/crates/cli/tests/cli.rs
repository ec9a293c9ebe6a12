//! End-to-end checks of the installed binary: exit codes, report
//! reproducibility, CSV contracts, and trace emission.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mdiqkd"))
}

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("binary runs");
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn parse_rows(csv: &str) -> Vec<Vec<String>> {
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "distance_km,method,r_per_pulse,r_bps,y11_lower,e11_upper,status"
    );
    lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn equal_seeds_produce_byte_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let report = |name: &str, seed: &str| {
        let path = dir.path().join(name);
        run_ok(bin().args([
            "evaluate",
            "--config",
            config_path("mdi_120km.json").to_str().unwrap(),
            "--mode",
            "binomial",
            "--rng-seed",
            seed,
            "--out",
            path.to_str().unwrap(),
        ]));
        std::fs::read(path).unwrap()
    };
    let a = report("a.json", "7");
    let b = report("b.json", "7");
    let c = report("c.json", "8");
    assert_eq!(a, b, "same seed must reproduce the report byte for byte");
    assert_ne!(a, c, "different seeds must change the sampled counts");
}

#[test]
fn malformed_configs_exit_2_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let base = std::fs::read_to_string(config_path("mdi_120km.json")).unwrap();
    let cases = [
        (
            "unknown.json",
            base.replace("\"nu\"", "\"nu_typo\""),
            "nu_typo",
        ),
        ("type.json", base.replace("0.5866", "\"strong\""), "mu"),
        (
            "physics.json",
            base.replace("\"omega\": 0.0767", "\"omega\": 0.34"),
            "omega",
        ),
    ];
    for (name, text, needle) in cases {
        let path = dir.path().join(name);
        std::fs::write(&path, text).unwrap();
        let out = bin()
            .args(["evaluate", "--config", path.to_str().unwrap()])
            .output()
            .expect("binary runs");
        assert_eq!(out.status.code(), Some(2), "{name}");
        let stderr = String::from_utf8_lossy(&out.stderr);
        assert!(stderr.contains(needle), "{name}: {stderr}");
    }
    let missing = bin()
        .args([
            "evaluate",
            "--config",
            dir.path().join("absent.json").to_str().unwrap(),
        ])
        .output()
        .expect("binary runs");
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn sweep_keeps_keying_after_the_baseline_dies() {
    let out = run_ok(bin().args([
        "sweep",
        "--config",
        config_path("mdi_150km.json").to_str().unwrap(),
        "--d-start",
        "50",
        "--d-end",
        "170",
        "--d-step",
        "10",
    ]));
    let rows = parse_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows.len(), 13 * 2, "one row per (distance, method)");

    let mut baseline_key_distances = Vec::new();
    let mut scan_key_distances = Vec::new();
    for pair in rows.chunks(2) {
        let (scan, base) = (&pair[0], &pair[1]);
        assert_eq!(scan[1], "double-scan");
        assert_eq!(base[1], "baseline");
        assert_eq!(scan[0], base[0]);
        let d: f64 = scan[0].parse().unwrap();
        let scan_rate: f64 = scan[2].parse().unwrap();
        let base_rate: f64 = base[2].parse().unwrap();
        assert!(scan_rate >= base_rate, "scanning must dominate at {d} km");
        assert_eq!(scan[6] == "key", scan_rate > 0.0);
        assert_eq!(base[6] == "key", base_rate > 0.0);
        if base_rate > 0.0 {
            baseline_key_distances.push(d);
        }
        if scan_rate > 0.0 {
            scan_key_distances.push(d);
        }
    }
    let distances: Vec<f64> = rows
        .iter()
        .step_by(2)
        .map(|r| r[0].parse().unwrap())
        .collect();
    assert!(
        distances.windows(2).all(|w| w[0] < w[1]),
        "rows ascend in distance"
    );
    assert!(
        scan_key_distances.contains(&150.0),
        "scanning reaches 150 km"
    );
    let base_max = baseline_key_distances.last().copied().unwrap();
    let scan_max = scan_key_distances.last().copied().unwrap();
    assert!(
        base_max < scan_max,
        "baseline cutoff {base_max} must come before {scan_max}"
    );
}

#[test]
fn single_point_sweep_matches_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let json_path = dir.path().join("report.json");
    run_ok(bin().args([
        "evaluate",
        "--config",
        config_path("mdi_120km.json").to_str().unwrap(),
        "--out",
        json_path.to_str().unwrap(),
    ]));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(json_path).unwrap()).unwrap();

    let out = run_ok(bin().args([
        "sweep",
        "--config",
        config_path("mdi_120km.json").to_str().unwrap(),
        "--d-start",
        "120",
        "--d-end",
        "120",
        "--d-step",
        "10",
    ]));
    let rows = parse_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows.len(), 2);
    for row in &rows {
        let section = match row[1].as_str() {
            "double-scan" => &report["double_scan"],
            "baseline" => &report["baseline"],
            other => panic!("unexpected method {other}"),
        };
        for (col, field) in [
            (2, "r_per_pulse"),
            (3, "r_bps"),
            (4, "y11_lower"),
            (5, "e11_upper"),
        ] {
            let from_csv: f64 = row[col].parse().unwrap();
            let from_json = section[field].as_f64().unwrap();
            assert_eq!(from_csv.to_bits(), from_json.to_bits(), "{field}");
        }
        assert_eq!(row[6], section["status"].as_str().unwrap());
    }
}

#[test]
fn optimize_trace_lines_match_reported_evaluations() {
    let dir = tempfile::tempdir().unwrap();
    let trace_path = dir.path().join("trace.jsonl");
    let report_path = dir.path().join("report.json");
    run_ok(bin().args([
        "optimize",
        "--config",
        config_path("mdi_120km.json").to_str().unwrap(),
        "--restarts",
        "1",
        "--max-evals",
        "40",
        "--trace",
        trace_path.to_str().unwrap(),
        "--out",
        report_path.to_str().unwrap(),
    ]));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(report_path).unwrap()).unwrap();
    let evals = report["evals"].as_u64().unwrap();
    assert!(evals > 0 && evals <= 40);

    let trace = std::fs::read_to_string(trace_path).unwrap();
    let entries: Vec<serde_json::Value> = trace
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(entries.len() as u64, evals, "one trace line per evaluation");
    for (i, entry) in entries.iter().enumerate() {
        assert_eq!(entry["eval"].as_u64().unwrap(), i as u64 + 1);
        assert_eq!(entry["coords"].as_array().unwrap().len(), 6);
    }
    // The search never loses to its seed, and the report echoes the inputs.
    let seed_rate = entries[0]["r_per_pulse"].as_f64().unwrap();
    let best_rate = report["result"]["r_per_pulse"].as_f64().unwrap();
    assert!(best_rate >= seed_rate);
    assert_eq!(report["config"]["distance_km"].as_f64().unwrap(), 120.0);
}

#[test]
fn no_key_configuration_still_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let base = std::fs::read_to_string(config_path("mdi_150km.json")).unwrap();
    let path = dir.path().join("far.json");
    std::fs::write(
        &path,
        base.replace("\"distance_km\": 150.0", "\"distance_km\": 200.0"),
    )
    .unwrap();
    let out = run_ok(bin().args(["evaluate", "--config", path.to_str().unwrap()]));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("[no-key]"), "{stdout}");
    assert!(stdout.contains("r = 0 /pulse"), "{stdout}");
}

#[test]
fn csv_dumps_have_the_documented_shape() {
    let dir = tempfile::tempdir().unwrap();
    let obs_path = dir.path().join("observables.csv");
    let surf_path = dir.path().join("surface.csv");
    let report_path = dir.path().join("report.json");
    run_ok(bin().args([
        "evaluate",
        "--config",
        config_path("mdi_120km.json").to_str().unwrap(),
        "--dump-observables",
        obs_path.to_str().unwrap(),
        "--dump-surface",
        surf_path.to_str().unwrap(),
        "--out",
        report_path.to_str().unwrap(),
    ]));
    let obs = std::fs::read_to_string(obs_path).unwrap();
    let mut obs_lines = obs.lines();
    assert_eq!(obs_lines.next().unwrap(), "left,right,basis,q_gain,eq_err");
    assert_eq!(obs_lines.count(), 16, "one row per ordered intensity pair");

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(report_path).unwrap()).unwrap();
    let grid = report["double_scan"]["grid"].as_array().unwrap();
    let points = grid[0].as_u64().unwrap() * grid[1].as_u64().unwrap();
    let surf = std::fs::read_to_string(surf_path).unwrap();
    let mut surf_lines = surf.lines();
    assert_eq!(surf_lines.next().unwrap(), "h,m,r_per_pulse");
    assert_eq!(
        surf_lines.count() as u64,
        points,
        "one row per coarse grid point"
    );
}
