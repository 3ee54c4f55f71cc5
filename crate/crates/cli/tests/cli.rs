use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_purcellkit"))
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn purcellkit")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

#[test]
fn malformed_json_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", "{\"schema\": \"purcellkit/1\", ");
    let out = run(&["modes", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("malformed JSON"));
}

#[test]
fn missing_config_and_bad_flags_exit_2() {
    assert_eq!(run(&["purcell"]).status.code(), Some(2));
    assert_eq!(run(&["reproduce", "--xi", "1.5"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn empty_band_gives_header_only_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "m.json", r#"{"schema": "purcellkit/1", "band_nm": [637.0, 637.001]}"#);
    let out = run(&["modes", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(out.stdout, b"polarization,m,p,wavelength_nm,mode_volume\n");
}

#[test]
fn default_modes_include_te_46_fundamental() {
    let out = run(&["modes"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let row = text
        .lines()
        .find(|l| l.starts_with("TE,46,1,"))
        .expect("TE m=46 p=1 row");
    let lam: f64 = row.split(',').nth(3).unwrap().parse().unwrap();
    assert!((lam - 637.0).abs() / 637.0 <= 0.02, "{row}");
}

#[test]
fn golden_csv_outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&[&str], &str); 3] = [
        (&["simulate", "--seed", "5", "--config"], "histogram.json"),
        (&["simulate", "--config"], "scan.json"),
        (&["spectrum", "--config"], "spectrum.json"),
    ];
    let expected = ["histogram_seed5.csv", "scan.csv", "spectrum.csv"];
    for ((args, cfg), want) in cases.iter().zip(expected) {
        let out_path = dir.path().join(want);
        let cfg = golden(cfg);
        let mut full: Vec<&str> = args.to_vec();
        full.push(cfg.to_str().unwrap());
        full.extend(["--out", out_path.to_str().unwrap()]);
        let out = run(&full);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(fs::read(&out_path).unwrap(), fs::read(golden(want)).unwrap(), "{want}");
    }
}

#[test]
fn spectrum_golden_matches_closed_form() {
    // amplitude 2, FWHM 0.5 nm: 2 / (1 + (2Δ/0.5)²)
    let text = fs::read_to_string(golden("spectrum.csv")).unwrap();
    let rows: Vec<(f64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 5);
    for (x, y) in rows {
        let d: f64 = (x - 637.0) / 0.25;
        assert!((y - 2.0 / (1.0 + d * d)).abs() <= 1e-15, "{x} {y}");
    }
}

#[test]
fn simulate_then_fit_lifetime_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let sim = write_config(
        dir.path(),
        "sim.json",
        r#"{"schema": "purcellkit/1", "kind": "histogram", "true_lifetime_ns": 11.1,
            "n_photons": 100000, "bin_width_ns": 0.2, "repetition_rate_mhz": 4.75,
            "contamination": {"amplitude_fraction": 0.3, "tau_ns": 1.0}}"#,
    );
    let fit = write_config(dir.path(), "fit.json", r#"{"schema": "purcellkit/1", "repetition_rate_mhz": 4.75}"#);
    let hist = dir.path().join("h.csv");
    let curve = dir.path().join("curve.csv");
    for seed in 0..20 {
        let seed = seed.to_string();
        let out = run(&["simulate", "--config", sim.to_str().unwrap(), "--seed", &seed, "--out", hist.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        let out = run(&[
            "fit-lifetime",
            "--config",
            fit.to_str().unwrap(),
            "--input",
            hist.to_str().unwrap(),
            "--curve",
            curve.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        let tau = report["parameters"]["tau_ns"].as_f64().unwrap();
        assert!((tau - 11.1).abs() / 11.1 <= 0.03, "seed {seed}: {tau}");
    }
    assert!(fs::read_to_string(&curve).unwrap().starts_with("time_ns,counts,model\n"));
}

#[test]
fn noiseless_scan_fits_back_through_cli() {
    let dir = tempfile::tempdir().unwrap();
    let scan = dir.path().join("scan.csv");
    let cfg = golden("scan.json");
    let mut body: serde_json::Value = serde_json::from_str(&fs::read_to_string(&cfg).unwrap()).unwrap();
    body["detunings_nm"] = (0..25).map(|i| -0.8 + 0.05 * i as f64).collect();
    let sim = write_config(dir.path(), "sim.json", &body.to_string());
    assert_eq!(run(&["simulate", "--config", sim.to_str().unwrap(), "--out", scan.to_str().unwrap()]).status.code(), Some(0));
    let fit = write_config(
        dir.path(),
        "fit.json",
        r#"{"schema": "purcellkit/1", "q1": 4300.0, "q2": 3800.0, "mode_spacing_nm": 0.4,
            "emitter_wavelength_nm": 637.0, "zpl_branching_ratio": 0.03, "float_q": false}"#,
    );
    let out = run(&["fit-detuning", "--config", fit.to_str().unwrap(), "--input", scan.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let p = &report["parameters"];
    for (name, want) in [("tau0_ns", 11.1), ("peak_f1", 4.0), ("peak_f2", 11.24)] {
        let got = p[name].as_f64().unwrap();
        assert!((got - want).abs() / want < 1e-6, "{name}: {got}");
    }
}

#[test]
fn reproduce_is_deterministic_and_exit_tracks_failures() {
    let a = run(&["reproduce"]);
    let b = run(&["reproduce"]);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let any_fail = text.lines().any(|l| l.ends_with(" FAIL"));
    assert_eq!(a.status.code(), Some(if any_fail { 1 } else { 0 }));
    let json = run(&["reproduce", "--format", "json"]);
    let report: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(report["checks"].as_array().unwrap().len(), text.lines().count() - 3);
}

#[test]
fn reproduce_with_other_branching_ratio() {
    for (xi, want) in [("0.024", 15.05), ("0.05", 7.75)] {
        let out = run(&["reproduce", "--xi", xi, "--format", "json"]);
        let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        let row = report["checks"].as_array().unwrap().iter().find(|c| c["id"] == "2").unwrap();
        assert_eq!(row["status"], "info");
        assert!((row["computed"].as_f64().unwrap() - want).abs() < 0.01, "{xi}");
    }
}

#[test]
fn out_file_is_written_whole() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    fs::write(&path, "stale").unwrap();
    let out = run(&["spectrum", "--config", golden("spectrum.json").to_str().unwrap(), "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert_eq!(fs::read(&path).unwrap(), fs::read(golden("spectrum.csv")).unwrap());
}
