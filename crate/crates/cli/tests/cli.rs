use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn dtc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dtc")).args(args).output().expect("spawn dtc")
}

/// Writes `config` into `dir` and runs `command` there with `--quiet`.
/// Output goes to the relative `out`, so the resolved config does not
/// depend on where the temporary directory lives.
fn run(dir: &Path, command: &str, config: &Value, extra: &[&str]) -> (i32, PathBuf) {
    fs::write(dir.join("config.json"), config.to_string()).unwrap();
    let mut args = vec![command, "--config", "config.json", "--out", "out", "--quiet"];
    args.extend_from_slice(extra);
    let o = Command::new(env!("CARGO_BIN_EXE_dtc"))
        .args(&args)
        .current_dir(dir)
        .output()
        .expect("spawn dtc");
    (o.status.code().expect("exit code"), dir.join("out"))
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Data rows of a CSV written by dtc, parsed as numbers.
fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = dtc(&["spectrum", "--config", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));

    let unknown = serde_json::json!({"scenario_tag": "loss", "sites": 1, "colour": "red"});
    assert_eq!(run(dir.path(), "spectrum", &unknown, &[]).0, 2);

    let too_big = serde_json::json!({"scenario_tag": "loss", "sites": 4});
    assert_eq!(run(dir.path(), "spectrum", &too_big, &[]).0, 2);

    let starved = serde_json::json!({
        "scenario_tag": "loss_gain", "sites": 1,
        "grid": {"t0": 0.0, "t1": 10.0, "n_samples": 64},
        "integrator": {"max_steps": 1}
    });
    assert_eq!(run(dir.path(), "evolve", &starved, &[]).0, 3);

    let o = dtc(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn loss_gain_spectrum_frequencies() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = serde_json::json!({"scenario_tag": "loss_gain", "sites": 2, "model": {"field": 2.0}});
    let (code, out) = run(dir.path(), "spectrum", &cfg, &[]);
    assert_eq!(code, 0);
    let report = read_json(&out.join("spectrum_report.json"));
    let freqs: Vec<f64> = report["oscillatory_frequencies"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let expected = [-4.0, -2.0, 2.0, 4.0];
    assert_eq!(freqs.len(), expected.len(), "{freqs:?}");
    for (f, e) in freqs.iter().zip(expected) {
        assert!((f - e).abs() < 1e-8, "{freqs:?}");
    }
    assert_eq!(report["commensurability"]["commensurable"], true);
    let (header, rows) = {
        let text = fs::read_to_string(out.join("spectrum.csv")).unwrap();
        let body: Vec<String> = text.lines().filter(|l| !l.starts_with('#')).map(String::from).collect();
        (body[0].clone(), body.len() - 1)
    };
    assert_eq!(header, "index,re,im,class");
    assert_eq!(rows, 256);
}

#[test]
fn reruns_are_byte_identical_and_seed_override_is_recorded() {
    let cfg = serde_json::json!({
        "scenario_tag": "loss_gain", "sites": 1,
        "grid": {"t0": 0.0, "t1": 40.0, "n_samples": 512}
    });
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (ca, out_a) = run(a.path(), "evolve", &cfg, &[]);
    let (cb, out_b) = run(b.path(), "evolve", &cfg, &[]);
    assert_eq!((ca, cb), (0, 0));
    let mut names: Vec<_> = fs::read_dir(&out_a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 6);
    for name in &names {
        assert_eq!(fs::read(out_a.join(name)).unwrap(), fs::read(out_b.join(name)).unwrap(), "{name:?}");
    }

    let c = tempfile::tempdir().unwrap();
    let (cc, out_c) = run(c.path(), "evolve", &cfg, &["--seed-override", "5"]);
    assert_eq!(cc, 0);
    let meta_a = &read_json(&out_a.join("evolve.json"))["meta"];
    let meta_c = &read_json(&out_c.join("evolve.json"))["meta"];
    assert_eq!(meta_c["seeds"], serde_json::json!({"disorder": 5, "initial_state": 5, "trajectories": 5}));
    assert_ne!(meta_a["config_sha256"], meta_c["config_sha256"]);
    assert_ne!(fs::read(out_a.join("series.csv")).unwrap(), fs::read(out_c.join("series.csv")).unwrap());
}

#[test]
fn evolve_finds_the_field_frequency() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = serde_json::json!({
        "scenario_tag": "loss_gain", "sites": 1, "model": {"field": 2.0},
        "grid": {"t0": 0.0, "t1": 100.0, "n_samples": 2048}
    });
    let (code, out) = run(dir.path(), "evolve", &cfg, &[]);
    assert_eq!(code, 0);
    let (header, rows) = csv_rows(&out.join("series.csv"));
    assert_eq!(header, ["t", "sx", "echo"]);
    assert_eq!(rows.len(), 2048);
    assert!((rows[0][2] - 1.0).abs() < 1e-12, "echo starts at the purity of a pure state");

    let summary = read_json(&out.join("evolve.json"));
    let peaks = read_json(&out.join("peaks_spin.json"));
    let width = peaks["bin_width"].as_f64().unwrap();
    let omega = summary["dominant_spin_peak"]["omega"].as_f64().unwrap();
    assert!((omega - 2.0).abs() < width, "spin peak at {omega}");
    assert_eq!(peaks["window"], "blackman");
    assert_eq!(peaks["t_start"], 50.0);
    assert!(summary["spin_max_imag"].as_f64().unwrap() < 1e-12);
}

#[test]
fn trajectories_stay_distinct_at_four_sites() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = serde_json::json!({
        "scenario_tag": "loss_gain", "sites": 4,
        "grid": {"t0": 0.0, "t1": 20.0, "n_samples": 201},
        "trajectories": {"count": 3}
    });
    let (code, out) = run(dir.path(), "trajectories", &cfg, &[]);
    assert_eq!(code, 0);
    let (header, rows) = csv_rows(&out.join("trajectories.csv"));
    assert_eq!(header, ["t", "traj_0", "traj_1", "traj_2"]);
    let late = &rows[rows.len() / 2..];
    for (a, b) in [(1, 2), (1, 3), (2, 3)] {
        let gap = late.iter().map(|r| (r[a] - r[b]).abs()).fold(0.0, f64::max);
        assert!(gap > 1e-3, "trajectories {a} and {b} coincide");
    }
    let (header, rows) = csv_rows(&out.join("ensemble.csv"));
    assert_eq!(header, ["t", "mean", "stderr"]);
    assert_eq!(rows.len(), 201);
    let summary = read_json(&out.join("ensemble.json"));
    assert_eq!(summary["jump_counts"].as_array().unwrap().len(), 3);
}

#[test]
fn darkstates_and_symmetry() {
    let dir = tempfile::tempdir().unwrap();
    let lg = serde_json::json!({"scenario_tag": "loss_gain", "sites": 2});
    let (code, out) = run(dir.path(), "darkstates", &lg, &[]);
    assert_eq!(code, 0);
    let report = read_json(&out.join("darkstates.json"));
    assert_eq!(report["states"].as_array().unwrap().len(), 3);
    assert_eq!(report["invariant_dim"], 3);

    let (code, out) = run(dir.path(), "symmetry", &lg, &[]);
    assert_eq!(code, 0);
    let cert = &read_json(&out.join("symmetry.json"))["certificate"];
    assert_eq!(cert["pass"], true);
    assert!((cert["omega"].as_f64().unwrap() - 2.0).abs() < 1e-12);

    let thermo = serde_json::json!({"scenario_tag": "thermo_breaker", "sites": 2});
    let (code, out) = run(dir.path(), "symmetry", &thermo, &[]);
    assert_eq!(code, 0);
    assert_eq!(read_json(&out.join("symmetry.json"))["certificate"]["pass"], false);
}

fn keys(v: &Value) -> BTreeSet<String> {
    v.as_object().unwrap().keys().cloned().collect()
}

#[test]
fn schema_matches_resolved_config() {
    let schema = read_json(&Path::new(env!("CARGO_MANIFEST_DIR")).join("config.schema.json"));
    let dir = tempfile::tempdir().unwrap();
    let cfg = serde_json::json!({"scenario_tag": "loss", "sites": 1});
    let (code, out) = run(dir.path(), "symmetry", &cfg, &[]);
    assert_eq!(code, 0);
    let resolved = &read_json(&out.join("symmetry.json"))["meta"]["config"];
    let props = &schema["properties"];
    assert_eq!(keys(props), keys(resolved));
    for (k, v) in resolved.as_object().unwrap() {
        if v.is_object() {
            assert_eq!(keys(&props[k]["properties"]), keys(v), "{k}");
        }
    }
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut n = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let mut cfg = read_json(&path);
        // Darkstates is quick at every size; the point is that the file is accepted.
        cfg["output_dir"] = Value::from("ignored");
        let tmp = tempfile::tempdir().unwrap();
        let (code, _) = run(tmp.path(), "darkstates", &cfg, &[]);
        assert_eq!(code, 0, "{}", path.display());
        n += 1;
    }
    assert!(n >= 4);
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn evolve_peaks_lie_on_the_spectrum() {
    // inhom_field with a wider field window so its transients die inside the grid.
    let cases = [
        serde_json::json!({
            "scenario_tag": "loss_gain", "sites": 2,
            "grid": {"t0": 0.0, "t1": 100.0, "n_samples": 4096}
        }),
        serde_json::json!({
            "scenario_tag": "inhom_field", "sites": 2, "model": {"field_width": 0.5},
            "grid": {"t0": 0.0, "t1": 400.0, "n_samples": 8192}, "dft": {"t_start": 300.0}
        }),
    ];
    for cfg in cases {
        let dir = tempfile::tempdir().unwrap();
        let (code, out) = run(dir.path(), "spectrum", &cfg, &[]);
        assert_eq!(code, 0);
        let freqs = floats(&read_json(&out.join("spectrum_report.json"))["oscillatory_frequencies"]);
        let (code, out) = run(dir.path(), "evolve", &cfg, &[]);
        assert_eq!(code, 0);
        let inhom = cfg["scenario_tag"] == "inhom_field";
        // The surviving inhom_field coherence has no overlap with S^x, whose
        // late series is flat; only its echo carries the oscillation.
        let names: &[&str] = if inhom { &["peaks_echo.json"] } else { &["peaks_spin.json", "peaks_echo.json"] };
        for &name in names {
            let report = read_json(&out.join(name));
            let width = report["bin_width"].as_f64().unwrap();
            for peak in report["peaks"].as_array().unwrap() {
                let omega = peak["omega"].as_f64().unwrap();
                assert!(
                    freqs.iter().any(|f| (f - omega).abs() <= width),
                    "{} {name}: peak {omega} not in {freqs:?}",
                    cfg["scenario_tag"]
                );
            }
        }
        let echo = read_json(&out.join("peaks_echo.json"));
        assert!(!echo["peaks"].as_array().unwrap().is_empty());
        if inhom {
            assert_eq!(echo["peaks"].as_array().unwrap().len(), 1);
            let largest = |v: &Value| {
                v["peaks"].as_array().unwrap().iter().map(|p| p["magnitude"].as_f64().unwrap()).fold(0.0, f64::max)
            };
            let spin = read_json(&out.join("peaks_spin.json"));
            assert!(largest(&spin) < 1e-3 * largest(&echo), "spin {} echo {}", largest(&spin), largest(&echo));
        }
    }
}
