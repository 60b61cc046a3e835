use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use kitepath::config::{parse_config, RunConfig, ShapeName};
use kitepath::report::{read_splines_json, read_sweep_csv};
use serde_json::Value;

fn kitepath(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kitepath"))
        .args(args)
        .current_dir(dir)
        .env_remove("KITEPATH_OUT")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/sweep_ellipse.csv")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn config_survives_serialization() {
    let reference = RunConfig::reference();
    assert_eq!(parse_config(&reference.to_json()).unwrap(), reference);

    let text = r#"{"kite": {"mass": 1.5}, "shape": "eight", "grid_n": 720,
        "bounds": {"dphi_deg": [1.0, 40.0]}, "limits": {"f_tether_max": 800},
        "output": {"directory": "runs", "formats": ["csv", "json"]}}"#;
    let custom = parse_config(text).unwrap();
    assert_eq!(custom.shape, ShapeName::Eight);
    assert_eq!(parse_config(&custom.to_json()).unwrap(), custom);
}

#[test]
fn default_sweep_matches_the_golden_file() {
    let tmp = tempfile::tempdir().unwrap();
    let out = kitepath(tmp.path(), &["sweep", "--out", "out"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let produced = std::fs::read(tmp.path().join("out/ellipse/sweep.csv")).unwrap();

    // KITEPATH_BLESS=1 rewrites the fixture from this run
    if std::env::var_os("KITEPATH_BLESS").is_some() {
        std::fs::write(fixture(), &produced).unwrap();
    }
    let golden = std::fs::read(fixture()).expect("fixture present; run with KITEPATH_BLESS=1 to create it");
    assert!(produced == golden, "sweep.csv differs from {}", fixture().display());

    let records = read_sweep_csv(std::str::from_utf8(&produced).unwrap()).unwrap();
    assert_eq!(records.len(), 21);
    assert!(records.windows(2).all(|w| w[1].p_avg_w >= w[0].p_avg_w));
    for r in &records {
        assert!((r.loyd_ratio - r.p_avg_w / r.p_loyd_w).abs() <= 1e-8);
        assert!(r.converged);
        assert!(r.active_constraints.split(';').any(|c| c == "floor"));
    }
}

#[test]
fn repeated_sweeps_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    for dir in ["a", "b"] {
        assert_eq!(code(&kitepath(tmp.path(), &["sweep", "--out", dir, "--format", "json"])), 0);
    }
    for file in ["sweep.csv", "sweep.json", "splines.json"] {
        let a = std::fs::read(tmp.path().join("a/ellipse").join(file)).unwrap();
        let b = std::fs::read(tmp.path().join("b/ellipse").join(file)).unwrap();
        assert!(a == b, "{file} differs");
    }
}

#[test]
fn figure_eight_gets_its_own_output_set() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&kitepath(tmp.path(), &["sweep", "--out", "o"])), 0);
    assert_eq!(code(&kitepath(tmp.path(), &["sweep", "--out", "o", "--shape", "eight"])), 0);
    let read = |shape: &str| read_sweep_csv(&std::fs::read_to_string(tmp.path().join("o").join(shape).join("sweep.csv")).unwrap()).unwrap();
    let (e, f) = (read("ellipse"), read("eight"));
    assert_eq!(e.len(), f.len());
    for (a, b) in e.iter().zip(&f) {
        assert_eq!(a.r_m, b.r_m);
        assert!(b.loyd_ratio < a.loyd_ratio, "r = {}", a.r_m);
    }
}

#[test]
fn splines_json_carries_the_sweep_knots() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&kitepath(tmp.path(), &["sweep", "--out", "o", "--plots"])), 0);
    let dir = tmp.path().join("o/ellipse");
    let records = read_sweep_csv(&std::fs::read_to_string(dir.join("sweep.csv")).unwrap()).unwrap();
    let splines = read_splines_json(&std::fs::read_to_string(dir.join("splines.json")).unwrap()).unwrap();
    assert_eq!(splines.keys().collect::<Vec<_>>(), ["beta0", "dbeta", "dphi"]);
    for (name, s) in &splines {
        assert_eq!(s.knots_r.len(), 21);
        assert_eq!(s.values.len(), 21);
        assert_eq!(s.second_derivs.len(), 21);
        assert_eq!((s.second_derivs[0], s.second_derivs[20]), (0.0, 0.0));
        for (rec, (r, v)) in records.iter().zip(s.knots_r.iter().zip(&s.values)) {
            let column = match name.as_str() {
                "beta0" => rec.beta0_rad,
                "dbeta" => rec.dbeta_rad,
                _ => rec.dphi_rad,
            };
            assert_eq!((rec.r_m, column), (*r, *v));
        }
    }
    for plot in ["power_vs_r.svg", "params_vs_r.svg", "paths_plane.svg", "paths_3d.svg"] {
        let svg = std::fs::read_to_string(dir.join(plot)).unwrap();
        assert!(svg.starts_with("<?xml") && svg.contains(r#"version="1.1""#) && svg.trim_end().ends_with("</svg>"), "{plot}");
    }
}

#[test]
fn evaluate_csv_and_json_agree() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["evaluate", "--r", "200", "--beta0-deg", "17.5", "--dbeta-deg", "8", "--dphi-deg", "10", "--out", "o"];
    let csv_run = kitepath(tmp.path(), &[&args[..], &["--format", "csv"]].concat());
    let json_run = kitepath(tmp.path(), &[&args[..], &["--format", "json"]].concat());
    assert_eq!((code(&csv_run), code(&json_run)), (0, 0));

    let csv_text = std::fs::read_to_string(tmp.path().join("o/ellipse/evaluate.csv")).unwrap();
    let json: Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("o/ellipse/evaluate.json")).unwrap()).unwrap();
    let mut lines = csv_text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let keys: Vec<&String> = json.as_object().unwrap().keys().collect();
    assert_eq!(keys, header);
    for (k, v) in header.iter().zip(row) {
        assert_eq!(json[*k].as_f64().unwrap(), v.parse::<f64>().unwrap(), "{k}");
    }
    let ratio = json["loyd_ratio"].as_f64().unwrap();
    assert!(ratio > 0.0 && ratio < 1.02);
    assert_eq!(String::from_utf8(csv_run.stdout).unwrap(), csv_text);
}

#[test]
fn exit_codes_follow_the_failure_class() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();

    let help = kitepath(dir, &["--help"]);
    assert_eq!(code(&help), 0);
    assert_eq!(code(&kitepath(dir, &["launch"])), 1);
    assert_eq!(code(&kitepath(dir, &["optimize"])), 1);

    let bad = write_config(dir, r#"{"environment": {"wind_speed": -3}}"#);
    let out = kitepath(dir, &["optimize", "--r", "150", "--config", &bad]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("environment.wind_speed"));
    let unknown = write_config(dir, r#"{"kite": {"span": 2}}"#);
    assert_eq!(code(&kitepath(dir, &["sweep", "--config", &unknown])), 1);
    assert_eq!(code(&kitepath(dir, &["sweep", "--config", "missing.json"])), 1);

    let tiny = kitepath(dir, &["evaluate", "--r", "100", "--beta0-deg", "17.5", "--dbeta-deg", "0.5", "--dphi-deg", "0.5", "--out", "o"]);
    assert_eq!(code(&tiny), 2);
    assert!(stderr(&tiny).contains("at s = "), "{}", stderr(&tiny));
    assert_eq!(code(&kitepath(dir, &["optimize", "--r", "25", "--out", "o"])), 2);

    // a 0.5 to 1 degree path box cannot meet the curvature cap anywhere
    let cramped = write_config(dir, r#"{"bounds": {"dbeta_deg": [0.5, 1.0], "dphi_deg": [0.5, 1.0]}}"#);
    let out = kitepath(dir, &["sweep", "--config", &cramped, "--out", "o"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    let partial = std::fs::read_to_string(dir.join("o/ellipse/sweep.csv")).unwrap();
    assert!(partial.starts_with("r_m,beta0_rad,") && partial.lines().count() == 1);
}

#[test]
fn output_directory_comes_from_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_kitepath"))
        .args(["optimize", "--r", "150"])
        .current_dir(tmp.path())
        .env("KITEPATH_OUT", "from_env")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert!(tmp.path().join("from_env/ellipse/optimize.csv").exists());
}

#[test]
fn phase_average_lies_between_the_sweep_extremes() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&kitepath(tmp.path(), &["sweep", "--out", "o"])), 0);
    let out = kitepath(tmp.path(), &["phase-average", "--out", "o", "--format", "json"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let p = v["p_phase_w"].as_f64().unwrap();
    let records = read_sweep_csv(&std::fs::read_to_string(tmp.path().join("o/ellipse/sweep.csv")).unwrap()).unwrap();
    let lo = records.iter().map(|r| r.p_avg_w).fold(f64::INFINITY, f64::min);
    let hi = records.iter().map(|r| r.p_avg_w).fold(f64::NEG_INFINITY, f64::max);
    assert!(p > lo && p < hi, "{lo} < {p} < {hi}");
    let out = kitepath(tmp.path(), &["phase-average", "--r-lo", "90", "--out", "o"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn shipped_schema_covers_every_config_key() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/config.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let mut config: Value = serde_json::from_str(&RunConfig::reference().to_json()).unwrap();
    config["bounds"] = serde_json::json!({ "beta0_deg": [5.0, 60.0], "dbeta_deg": [1.0, 30.0], "dphi_deg": [1.0, 60.0] });
    let props = &schema["properties"];
    for (section, value) in config.as_object().unwrap() {
        let entry = &props[section];
        assert!(entry.is_object(), "schema lacks {section}");
        if let Some(fields) = value.as_object() {
            for (field, v) in fields {
                let field_schema = &entry["properties"][field];
                assert!(field_schema.is_object(), "schema lacks {section}.{field}");
                if let Some(default) = field_schema.get("default") {
                    if !v.is_array() || section == "output" {
                        assert_eq!(default, v, "{section}.{field}");
                    }
                }
            }
        } else if let Some(default) = entry.get("default") {
            assert_eq!(default, value, "{section}");
        }
    }
}
