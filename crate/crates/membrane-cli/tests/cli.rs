use std::path::Path;
use std::process::{Command, Output};

use membrane_cli::config::ExperimentConfig;
use membrane_cli::snapshot::SnapshotFile;
use serde_json::{json, Value};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_membrane-lab")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, value: &Value) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

fn run(cmd: &str, config: &str, out: &Path) -> Output {
    lab(&[cmd, "--config", config, "--out", out.to_str().unwrap()])
}

fn small(model: &str, preset: &str) -> Value {
    json!({
        "geometry": { "kind": "shell", "a": 0.5, "b": 1.0 },
        "truncation": { "l_max": 3, "n_r": 10 },
        "coefficients": { "rho0": 1.0, "B": 1.0, "mu": 1.0, "sigma": 1.0, "delta": 0.3, "kappa": 1.0 },
        "model": model,
        "initial": { "preset": preset },
        "time": { "t_end": 0.1, "dt": 0.001, "output_every": 1 },
        "seed": 3
    })
}

fn csv_column(path: &Path, name: &str) -> Vec<f64> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(k).unwrap().parse().unwrap()).collect()
}

#[test]
fn equilibrium_reports_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        &json!({ "coefficients": { "rho0": 1.0, "B": 1.0, "mu": 1.0, "sigma": 1.0, "delta": 0.0, "kappa": 1.0 } }),
    );
    let out = dir.path().join("eq");
    let o = run("equilibrium", &cfg, &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(out.join("equilibrium.json")).unwrap()).unwrap();
    assert!((doc["ell_special"].as_f64().unwrap() - 1.0).abs() <= 1e-12);
    assert!((doc["z_bullet_mean"].as_f64().unwrap() + 1.0).abs() <= 1e-8);
    assert!((doc["L_of_one"].as_f64().unwrap() - 4.0 * std::f64::consts::PI).abs() <= 1e-10);
    let z = doc["special"]["z"].as_array().unwrap();
    assert!(z[1..].iter().all(|c| c.as_f64().unwrap().abs() <= 1e-8));
}

#[test]
fn pure_equilibrium_energy_is_constant() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small("L", "pure-equilibrium");
    c["time"] = json!({ "t_end": 0.5, "dt": 0.001, "output_every": 10 });
    let cfg = write_config(dir.path(), "c.json", &c);
    let out = dir.path().join("sim");
    let o = run("simulate", &cfg, &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let e = csv_column(&out.join("trajectory.csv"), "energy");
    assert_eq!(e.len(), 51);
    assert!(e.iter().all(|x| (x - e[0]).abs() <= 1e-12 * e[0].max(1.0)));
}

#[test]
fn csv_schema_and_digits() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &small("Pc", "random"));
    let out = dir.path().join("sim");
    assert!(run("simulate", &cfg, &out).status.success());
    let text = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,energy,dissipation_cum,L_value,ell_value,constraint_residual,dist_to_equilibrium,weak_residual_last"
    );
    let row = lines.nth(3).unwrap();
    for field in row.split(',') {
        let mantissa = field.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
        assert_eq!(mantissa.len(), 17, "{field}");
    }
    let snap = SnapshotFile::read(&out.join("snapshots.json")).unwrap();
    assert_eq!(snap.layout.lm_table.len(), 16);
    assert_eq!(snap.layout.lm_table[5], (2, -1));
    assert_eq!(snap.states[0].fields["u"].len(), 16 * 10);
    assert_eq!(snap.model, "Pc");
}

#[test]
fn runs_are_deterministic_and_resolved_config_reproduces_them() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small("L0", "random");
    c["time"] = json!({ "t_end": 0.05, "output_every": 1 });
    let cfg = write_config(dir.path(), "c.json", &c);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run("simulate", &cfg, &a).status.success());
    assert!(run("simulate", &cfg, &b).status.success());
    let read = |p: &Path| std::fs::read(p.join("trajectory.csv")).unwrap();
    assert_eq!(read(&a), read(&b));

    let resolved = a.join("resolved-config.json");
    let parsed = ExperimentConfig::load(&resolved).unwrap();
    assert!(parsed.time.dt.is_some());
    let r = dir.path().join("r");
    assert!(run("simulate", resolved.to_str().unwrap(), &r).status.success());
    assert_eq!(read(&a), read(&r));

    let s = dir.path().join("s");
    let o = lab(&["simulate", "--config", &cfg, "--out", s.to_str().unwrap(), "--seed", "11"]);
    assert!(o.status.success());
    assert_ne!(read(&a), read(&s));
    assert_eq!(ExperimentConfig::load(&s.join("resolved-config.json")).unwrap().seed, 11);
}

#[test]
fn invalid_configurations_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    let mut c = small("L", "rest");
    c["colour"] = json!("blue");
    let o = run("simulate", &write_config(dir.path(), "a.json", &c), &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));

    let mut c = small("L", "rest");
    c["time"]["stride"] = json!(3);
    assert_eq!(run("simulate", &write_config(dir.path(), "b.json", &c), &out).status.code(), Some(2));

    let mut c = small("L", "rest");
    c["coefficients"]["sigma"] = json!(-1.0);
    let o = run("simulate", &write_config(dir.path(), "c.json", &c), &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("σ"), "{}", String::from_utf8_lossy(&o.stderr));

    let c = small("L7", "rest");
    assert_eq!(run("simulate", &write_config(dir.path(), "d.json", &c), &out).status.code(), Some(2));
    let c = small("L", "sideways");
    assert_eq!(run("simulate", &write_config(dir.path(), "e.json", &c), &out).status.code(), Some(2));
    let mut c = small("L", "rest");
    c["coefficients"]["kappa"] = json!([1.0, 0.0]);
    assert_eq!(run("simulate", &write_config(dir.path(), "f.json", &c), &out).status.code(), Some(2));
    assert!(!out.join("trajectory.csv").exists());
}

#[test]
fn membership_violations_fail() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &small("L0", "pure-equilibrium"));
    let o = run("simulate", &cfg, &dir.path().join("x"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("configuration space"));
}

#[test]
fn transfer_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let run_dir = dir.path().join("run");
    let cfg = write_config(dir.path(), "c.json", &small("L0", "random"));
    assert!(run("simulate", &cfg, &run_dir).status.success());
    let input = run_dir.join("snapshots.json");

    let mut t = small("L0", "random");
    t["transfer"] = json!({ "input": input, "target": "Ec" });
    let to_e = dir.path().join("e");
    let o = run("transfer", &write_config(dir.path(), "t.json", &t), &to_e);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let res = csv_column(&to_e.join("transfer_report.csv"), "constraint_residual");
    assert!(res.iter().all(|r| r.abs() <= 1e-9));

    t["transfer"] = json!({ "input": to_e.join("snapshots.json"), "target": "L0" });
    let back = dir.path().join("back");
    assert!(run("transfer", &write_config(dir.path(), "u.json", &t), &back).status.success());
    let a = SnapshotFile::read(&input).unwrap();
    let b = SnapshotFile::read(&back.join("snapshots.json")).unwrap();
    assert_eq!(a.states.len(), b.states.len());
    for (x, y) in a.states.iter().zip(&b.states) {
        for (k, v) in &x.fields {
            let w = &y.fields[k];
            let d = v.iter().zip(w).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            assert!(d <= 1e-8, "{k}: {d:e}");
        }
    }

    t["transfer"] = json!({ "input": input, "target": "Pc" });
    assert!(run("transfer", &write_config(dir.path(), "v.json", &t), &dir.path().join("p")).status.success());
    t["transfer"] = json!({ "input": to_e.join("snapshots.json"), "target": "P" });
    assert_eq!(run("transfer", &write_config(dir.path(), "w.json", &t), &dir.path().join("q")).status.code(), Some(2));
}

#[test]
fn project_verify_and_stability_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "p.json", &small("L", "structural-third"));
    let out = dir.path().join("p");
    assert!(run("project", &cfg, &out).status.success());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(out.join("projections.json")).unwrap()).unwrap();
    let models = |k: &str| doc["structural"][k]["models"].as_array().unwrap().clone();
    assert!(models("onto_L0").contains(&json!("L0")));
    assert!(!models("onto_E").contains(&json!("L0")));

    let mut c = small("L", "random");
    c["suite"] = json!({ "pairs": 5, "weak_tests": 4 });
    let v = dir.path().join("v");
    let o = run("verify", &write_config(dir.path(), "v.json", &c), &v);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let checks = std::fs::read_to_string(v.join("checks.csv")).unwrap();
    assert!(checks.lines().count() > 15 && !checks.contains(",false"));

    // Undamped: no decay, so the stability check fails and the exit code says so.
    let mut c = small("L", "stability");
    c["coefficients"]["delta"] = json!(0.0);
    c["time"] = json!({ "t_end": 0.5, "dt": 0.001, "output_every": 100 });
    let o = run("stability", &write_config(dir.path(), "s.json", &c), &dir.path().join("s"));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL decay"));
}

#[test]
fn default_config_round_trips_through_json() {
    let c = ExperimentConfig::default();
    let text = serde_json::to_string(&c).unwrap();
    let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(c, back);
    let minimal: ExperimentConfig = serde_json::from_str("{}").unwrap();
    assert_eq!(minimal, c);
    assert!(serde_json::from_str::<ExperimentConfig>(r#"{"geometry": {"kind": "ball", "b": 1, "a": 0.5}}"#).is_err());
    assert!(serde_json::from_str::<ExperimentConfig>(r#"{"initial": {"preset": "rest", "extra": 1}}"#).is_err());
}
